#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ammi {

// Fixed-length binary code packed into 64-bit words. Bit i (0-based) lives
// in word i/64 at bit position i%64; unused tail bits of the last word are
// kept zero so packed words compare and hash directly.
class BitVector {
public:
    BitVector() = default;
    explicit BitVector(int m) : m_(m), words_((m + 63) / 64, 0) {}

    static BitVector from_bits(const std::vector<uint8_t>& bits) {
        BitVector b(static_cast<int>(bits.size()));
        for (int i = 0; i < b.m_; ++i)
            if (bits[i]) b.set_bit(i, 1);
        return b;
    }

    int size() const { return m_; }

    int bit(int i) const { return static_cast<int>((words_[i >> 6] >> (i & 63)) & 1u); }

    void set_bit(int i, int v) {
        uint64_t mask = uint64_t{1} << (i & 63);
        if (v)
            words_[i >> 6] |= mask;
        else
            words_[i >> 6] &= ~mask;
    }

    std::vector<uint8_t> to_bits() const {
        std::vector<uint8_t> out(m_);
        for (int i = 0; i < m_; ++i) out[i] = static_cast<uint8_t>(bit(i));
        return out;
    }

    const std::vector<uint64_t>& words() const { return words_; }

    // Lowercase hex, one byte per two chars, byte j holds bits 8j..8j+7,
    // most significant nibble of each byte first.
    std::string to_hex() const;
    static BitVector from_hex(std::string_view hex, int m);

    friend bool operator==(const BitVector& a, const BitVector& b) {
        return a.m_ == b.m_ && a.words_ == b.words_;
    }

private:
    int m_ = 0;
    std::vector<uint64_t> words_;
};

// Hamming distance over packed words via popcount. Lengths must match.
int hamming(const BitVector& a, const BitVector& b);

}  // namespace ammi

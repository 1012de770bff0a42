#include "ammi/bitvector.hpp"

#include <stdexcept>

namespace ammi {

namespace {
constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument("BitVector::from_hex: bad hex digit");
}
}  // namespace

std::string BitVector::to_hex() const {
    int nbytes = (m_ + 7) / 8;
    std::string out;
    out.reserve(2 * nbytes);
    for (int j = 0; j < nbytes; ++j) {
        auto byte = static_cast<unsigned>((words_[j >> 3] >> ((j & 7) * 8)) & 0xFFu);
        out.push_back(kHexDigits[byte >> 4]);
        out.push_back(kHexDigits[byte & 0xF]);
    }
    return out;
}

BitVector BitVector::from_hex(std::string_view hex, int m) {
    int nbytes = (m + 7) / 8;
    if (static_cast<int>(hex.size()) != 2 * nbytes)
        throw std::invalid_argument("BitVector::from_hex: length mismatch");
    BitVector b(m);
    for (int j = 0; j < nbytes; ++j) {
        unsigned byte = static_cast<unsigned>(hex_value(hex[2 * j]) << 4) |
                        static_cast<unsigned>(hex_value(hex[2 * j + 1]));
        b.words_[j >> 3] |= uint64_t{byte} << ((j & 7) * 8);
    }
    // Reject payload bits beyond m.
    for (int i = m; i < nbytes * 8; ++i)
        if (b.bit(i)) throw std::invalid_argument("BitVector::from_hex: bits past length");
    return b;
}

int hamming(const BitVector& a, const BitVector& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("hamming: length mismatch");
    int d = 0;
    const auto& wa = a.words();
    const auto& wb = b.words();
    for (size_t i = 0; i < wa.size(); ++i)
        d += std::popcount(wa[i] ^ wb[i]);
    return d;
}

}  // namespace ammi

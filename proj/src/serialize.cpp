#include "ammi/serialize.hpp"

#include <cstring>
#include <stdexcept>

namespace ammi::io {

namespace {
void put(std::ostream& os, const void* p, size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}
void get(std::istream& is, void* p, size_t n) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!is) throw std::runtime_error("checkpoint: truncated file");
}
}  // namespace

void write_u32(std::ostream& os, uint32_t v) { put(os, &v, 4); }
void write_u64(std::ostream& os, uint64_t v) { put(os, &v, 8); }

void write_f64(std::ostream& os, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_u64(os, bits);
}

void write_string(std::ostream& os, const std::string& s) {
    write_u32(os, static_cast<uint32_t>(s.size()));
    put(os, s.data(), s.size());
}

void write_tensor(std::ostream& os, const nn::Tensor& t) {
    write_u32(os, static_cast<uint32_t>(t.rows));
    write_u32(os, static_cast<uint32_t>(t.cols));
    for (double x : t.v) write_f64(os, x);
}

uint32_t read_u32(std::istream& is) {
    uint32_t v;
    get(is, &v, 4);
    return v;
}

uint64_t read_u64(std::istream& is) {
    uint64_t v;
    get(is, &v, 8);
    return v;
}

double read_f64(std::istream& is) {
    uint64_t bits = read_u64(is);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

std::string read_string(std::istream& is) {
    uint32_t n = read_u32(is);
    if (n > (1u << 24)) throw std::runtime_error("checkpoint: implausible string length");
    std::string s(n, '\0');
    get(is, s.data(), n);
    return s;
}

nn::Tensor read_tensor(std::istream& is) {
    int rows = static_cast<int>(read_u32(is));
    int cols = static_cast<int>(read_u32(is));
    if (rows < 0 || cols < 0 || static_cast<uint64_t>(rows) * cols > (1ull << 28))
        throw std::runtime_error("checkpoint: implausible tensor shape");
    nn::Tensor t(rows, cols);
    for (double& x : t.v) x = read_f64(is);
    return t;
}

}  // namespace ammi::io

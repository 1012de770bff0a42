#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "ammi/tensor.hpp"

namespace ammi::io {

// Little-endian binary primitives for checkpoint files. Doubles round-trip
// bit-exactly through their IEEE-754 representation.

void write_u32(std::ostream& os, uint32_t v);
void write_u64(std::ostream& os, uint64_t v);
void write_f64(std::ostream& os, double v);
void write_string(std::ostream& os, const std::string& s);
void write_tensor(std::ostream& os, const nn::Tensor& t);

uint32_t read_u32(std::istream& is);
uint64_t read_u64(std::istream& is);
double read_f64(std::istream& is);
std::string read_string(std::istream& is);
nn::Tensor read_tensor(std::istream& is);

}  // namespace ammi::io

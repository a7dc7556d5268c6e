#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace tse::io {

// Little-endian fixed-width primitives shared by the binary model formats.

void write_u8(std::ostream& out, std::uint8_t v);
void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_f64(std::ostream& out, double v);
void write_string(std::ostream& out, std::string_view s);
void write_magic(std::ostream& out, std::string_view magic);

std::uint8_t read_u8(std::istream& in);
std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
double read_f64(std::istream& in);
std::string read_string(std::istream& in);
std::string read_magic(std::istream& in, std::size_t size);

}  // namespace tse::io

#pragma once

// Little-endian primitives shared by the binary file formats. Everything
// goes through explicit byte shuffling so the files are identical across
// hosts.

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "hmax/errors.hpp"

namespace hmax::wire {

inline void put_u8(std::ostream& out, uint8_t v) {
  out.put(static_cast<char>(v));
}

inline void put_u16(std::ostream& out, uint16_t v) {
  char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  out.write(b, 2);
}

inline void put_u32(std::ostream& out, uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

inline void put_u64(std::ostream& out, uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

inline void put_f64(std::ostream& out, double v) {
  put_u64(out, std::bit_cast<uint64_t>(v));
}

inline void put_f32(std::ostream& out, float v) {
  put_u32(out, std::bit_cast<uint32_t>(v));
}

inline uint8_t get_u8(std::istream& in, const char* what) {
  const int c = in.get();
  if (c == std::istream::traits_type::eof()) {
    throw IoError(std::string("unexpected end of file reading ") + what);
  }
  return static_cast<uint8_t>(c);
}

inline uint16_t get_u16(std::istream& in, const char* what) {
  const uint16_t lo = get_u8(in, what);
  const uint16_t hi = get_u8(in, what);
  return static_cast<uint16_t>(lo | (hi << 8));
}

inline uint32_t get_u32(std::istream& in, const char* what) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(get_u8(in, what)) << (8 * i);
  return v;
}

inline uint64_t get_u64(std::istream& in, const char* what) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(get_u8(in, what)) << (8 * i);
  return v;
}

inline double get_f64(std::istream& in, const char* what) {
  return std::bit_cast<double>(get_u64(in, what));
}

inline float get_f32(std::istream& in, const char* what) {
  return std::bit_cast<float>(get_u32(in, what));
}

inline void put_magic(std::ostream& out, const char magic[4]) {
  out.write(magic, 4);
}

inline void check_magic(std::istream& in, const char magic[4], const char* format_name) {
  char b[4];
  in.read(b, 4);
  if (in.gcount() != 4 || b[0] != magic[0] || b[1] != magic[1] || b[2] != magic[2] ||
      b[3] != magic[3]) {
    throw FormatError(std::string("not a ") + format_name + " file (bad magic)");
  }
}

inline void check_version(std::istream& in, uint32_t expected, const char* format_name) {
  const uint32_t v = get_u32(in, "version");
  if (v != expected) {
    throw FormatError(std::string(format_name) + ": unsupported version " + std::to_string(v));
  }
}

}  // namespace hmax::wire

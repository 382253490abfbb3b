#ifndef NEUROGRAPH_BINIO_HPP
#define NEUROGRAPH_BINIO_HPP

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "neurograph/error.hpp"

// Little-endian primitives for the NGRF / NGEP containers.
namespace ng::binio {

inline void put_u8(std::ostream& os, std::uint8_t v) {
  os.put(static_cast<char>(v));
}
inline void put_u16(std::ostream& os, std::uint16_t v) {
  char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  os.write(b, 2);
}
inline void put_u32(std::ostream& os, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 4);
}
inline void put_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}
inline void put_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(os, bits);
}
inline void put_f64_array(std::ostream& os, const double* v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) put_f64(os, v[i]);
}

[[noreturn]] inline void truncated(const std::string& what) {
  fail_io("truncated file while reading " + what);
}

inline std::uint8_t get_u8(std::istream& is, const char* what) {
  int c = is.get();
  if (c == EOF) truncated(what);
  return static_cast<std::uint8_t>(c);
}
inline std::uint16_t get_u16(std::istream& is, const char* what) {
  unsigned char b[2];
  if (!is.read(reinterpret_cast<char*>(b), 2)) truncated(what);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}
inline std::uint32_t get_u32(std::istream& is, const char* what) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) truncated(what);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}
inline std::uint64_t get_u64(std::istream& is, const char* what) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) truncated(what);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}
inline double get_f64(std::istream& is, const char* what) {
  std::uint64_t bits = get_u64(is, what);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}
inline void get_f64_array(std::istream& is, double* v, std::size_t n,
                          const char* what) {
  for (std::size_t i = 0; i < n; ++i) v[i] = get_f64(is, what);
}

inline void expect_magic(std::istream& is, const char magic[4],
                         const std::string& path) {
  char got[4];
  if (!is.read(got, 4) || std::memcmp(got, magic, 4) != 0)
    fail_io(path + ": bad magic, expected " + std::string(magic, 4));
}

}  // namespace ng::binio

#endif

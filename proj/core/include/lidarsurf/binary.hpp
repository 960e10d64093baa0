#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "lidarsurf/error.hpp"

// Little-endian scalar helpers shared by the binary file formats.
namespace lidarsurf::binary {

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::is_arithmetic_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(std::istream& in, const char* what) {
  static_assert(std::is_arithmetic_v<T>);
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T)))
    throw FormatError(std::string("truncated file while reading ") + what);
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

inline void put_magic(std::ostream& out, const char (&magic)[4]) { out.write(magic, 4); }

inline void expect_magic(std::istream& in, const char (&magic)[4], const char* what) {
  char got[4];
  if (!in.read(got, 4) || std::memcmp(got, magic, 4) != 0)
    throw FormatError(std::string("bad magic: not a ") + what + " file");
}

}  // namespace lidarsurf::binary

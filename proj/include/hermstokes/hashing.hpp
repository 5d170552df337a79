#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <string>
#include <type_traits>

namespace hermstokes {

/** @brief FNV-1a 64-bit over a byte range; used for content checksums and ids. */
inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t h = 0xCBF29CE484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

/** @brief Checksum helper for mixed scalar payloads (hash of the raw bytes). */
template <class T>
std::uint64_t fnv1a64_of(const T& v, std::uint64_t h = 0xCBF29CE484222325ULL) {
  static_assert(std::is_trivially_copyable_v<T>);
  return fnv1a64(&v, sizeof(T), h);
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

}  // namespace hermstokes

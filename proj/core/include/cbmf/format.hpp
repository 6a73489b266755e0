#ifndef CBMF_FORMAT_HPP
#define CBMF_FORMAT_HPP

#include <charconv>
#include <cstdint>
#include <string>
#include <system_error>

namespace cbmf {

/// Shortest decimal form that round-trips the exact double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_int(std::int64_t v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace cbmf

#endif  // CBMF_FORMAT_HPP

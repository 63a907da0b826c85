#ifndef PAPRL_NUMFMT_HPP
#define PAPRL_NUMFMT_HPP

#include <charconv>
#include <string>
#include <system_error>

namespace paprl {

// Shortest decimal string that round-trips the double exactly.
inline std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& text) {
  double value = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{}) return 0.0;
  return value;
}

}  // namespace paprl

#endif  // PAPRL_NUMFMT_HPP

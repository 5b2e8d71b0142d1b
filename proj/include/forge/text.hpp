#pragma once

#include <charconv>
#include <string>

namespace forge {

// Shortest form that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, p) : std::string("nan");
}

}  // namespace forge

#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace spinerect {

// Round to `digits` significant digits so serialized output is stable.
inline double round_sig(double v, int digits = 6) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return std::strtod(buf, nullptr);
}

inline std::string format_sig(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace spinerect

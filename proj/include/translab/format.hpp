#ifndef TRANSLAB_FORMAT_HPP
#define TRANSLAB_FORMAT_HPP

#include <cmath>
#include <cstdio>
#include <string>

namespace translab {

/// Shortest "%g" rendering, for labels and messages.
inline std::string format_short(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

/// Round-trip rendering (17 significant digits), for data files.
inline std::string format_exact(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace translab

#endif  // TRANSLAB_FORMAT_HPP

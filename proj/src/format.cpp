#include "scpnum/format.hpp"

#include <cmath>
#include <cstdio>

namespace scpnum {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace scpnum

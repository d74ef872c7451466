#include "pgamarket/cli/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace pgamarket::cli {

ojson num(double x) {
  if (!std::isfinite(x)) return nullptr;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return std::strtod(buf, nullptr);
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

std::string monotonicity(const std::vector<double>& xs) {
  bool up = true;
  bool down = true;
  bool strict_up = true;
  bool strict_down = true;
  bool any = false;
  double prev = 0.0;
  for (double x : xs) {
    if (!std::isfinite(x)) continue;
    if (any) {
      if (x < prev) up = strict_up = false;
      if (x > prev) down = strict_down = false;
      if (x == prev) strict_up = strict_down = false;
    }
    prev = x;
    any = true;
  }
  if (up && down) return "constant";
  if (strict_up) return "strictly_increasing";
  if (strict_down) return "strictly_decreasing";
  if (up) return "nondecreasing";
  if (down) return "nonincreasing";
  return "mixed";
}

}  // namespace pgamarket::cli

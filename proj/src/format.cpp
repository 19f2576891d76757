#include "vardrop/format.hpp"

#include <cstdio>
#include <cstdlib>

namespace vardrop {

std::string format_real(double x) {
  if (x == 0.0) return "0";  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

double round_sig12(double x) { return std::strtod(format_real(x).c_str(), nullptr); }

}  // namespace vardrop

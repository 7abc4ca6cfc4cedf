#include "precis/format.hpp"

#include <cstdio>
#include <cstdlib>

namespace precis {

std::string fmt_compact(double v) {
  char buf[40];
  for (int prec : {15, 17}) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace precis

#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace scalereg {

inline std::string csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void csv_header(std::ostream& os, const std::vector<std::string>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) os << ',';
    os << cols[i];
  }
  os << '\n';
}

}  // namespace scalereg

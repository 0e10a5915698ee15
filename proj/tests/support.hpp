#pragma once

#include <algorithm>
#include <cmath>

namespace testing {

inline double rel_err(double a, double b, double floor = 1e-300) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace testing

#pragma once
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace deloc {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
};

// Wilson score interval at 95% coverage.
inline Interval wilson95(std::size_t successes, std::size_t trials) {
  if (trials == 0) throw std::invalid_argument("wilson95: zero trials");
  if (successes > trials) throw std::invalid_argument("wilson95: successes > trials");
  const double z = 1.959963984540054;  // Phi^{-1}(0.975)
  const double n = static_cast<double>(trials);
  const double ph = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (ph + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / n + z2 / (4.0 * n * n)) / denom;
  Interval iv{std::max(0.0, centre - half), std::min(1.0, centre + half)};
  // the interval always contains ph; pin the algebraically exact endpoints
  if (successes == 0) iv.lo = 0.0;
  if (successes == trials) iv.hi = 1.0;
  return iv;
}

}  // namespace deloc

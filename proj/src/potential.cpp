#include "deloc/potential.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace deloc {

SingleSitePotential::SingleSitePotential(double u_minus, double delta_minus,
                                         double delta_plus, BumpProfile profile)
    : u_minus_(u_minus),
      delta_minus_(delta_minus),
      delta_plus_(delta_plus),
      profile_(profile) {
  if (!(u_minus > 0.0) || !(u_minus <= 1.0)) {
    throw std::invalid_argument("SingleSitePotential: u_minus must be in (0,1]");
  }
  if (!(delta_minus > 0.0) || !(delta_minus < delta_plus)) {
    throw std::invalid_argument("SingleSitePotential: need 0 < delta_minus < delta_plus");
  }
  if (profile == BumpProfile::tent && 1.0 - delta_minus / delta_plus < u_minus - 1e-12) {
    throw std::invalid_argument(
        "SingleSitePotential: tent dips below u_minus on the inner cube");
  }
  // envelope check on a dense radial grid
  const int n = 4001;
  for (int i = 0; i < n; ++i) {
    double rho = 0.6 * delta_plus * static_cast<double>(i) / (n - 1);
    double v = radial(rho);
    if (v < -1e-15 || v > 1.0 + 1e-15) {
      throw std::logic_error("SingleSitePotential: value escapes [0,1]");
    }
    if (rho < delta_minus / 2.0 && v < u_minus - 1e-12) {
      throw std::logic_error("SingleSitePotential: floor violated on inner cube");
    }
    if (rho >= delta_plus / 2.0 && v != 0.0) {
      throw std::logic_error("SingleSitePotential: support escapes outer cube");
    }
  }
}

double SingleSitePotential::radial(double rho) const {
  if (rho >= delta_plus_ / 2.0) return 0.0;
  switch (profile_) {
    case BumpProfile::flat: {
      if (rho <= delta_minus_ / 2.0) return u_minus_;
      double v = u_minus_ * (delta_plus_ - 2.0 * rho) / (delta_plus_ - delta_minus_);
      return std::min(v, 1.0);
    }
    case BumpProfile::tent:
      return 1.0 - 2.0 * rho / delta_plus_;
  }
  return 0.0;
}

double SingleSitePotential::eval(const Vec& dx, int dim) const {
  double rho = 0.0;
  for (int i = 0; i < dim; ++i) rho = std::max(rho, std::abs(dx[i]));
  return radial(rho);
}

}  // namespace deloc

#pragma once
#include <vector>

#include "deloc/geometry.hpp"

namespace deloc {

enum class BumpProfile { flat, tent };

// Single-site bump u supported in the closed cube of side delta_plus, with
// u_minus <= u <= 1 on the inner cube of side delta_minus and 0 <= u <= 1
// everywhere.  Radial in the sup norm.
//
//   flat: u_minus on the inner cube, linear taper to 0 at the support edge
//   tent: peak 1 at the centre, linear in the sup radius; requires
//         1 - delta_minus/delta_plus >= u_minus so the floor still holds
class SingleSitePotential {
 public:
  SingleSitePotential(double u_minus, double delta_minus, double delta_plus,
                      BumpProfile profile);

  double u_minus() const { return u_minus_; }
  double delta_minus() const { return delta_minus_; }
  double delta_plus() const { return delta_plus_; }
  BumpProfile profile() const { return profile_; }

  // value at sup-norm radius rho >= 0
  double radial(double rho) const;

  double eval(const Vec& dx, int dim) const;

 private:
  double u_minus_;
  double delta_minus_;
  double delta_plus_;
  BumpProfile profile_;
};

}  // namespace deloc

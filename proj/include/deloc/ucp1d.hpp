#pragma once
#include <Eigen/Dense>
#include <map>
#include <optional>
#include <vector>

#include "deloc/hamiltonian.hpp"
#include "deloc/spectral.hpp"
#include "deloc/stats.hpp"

namespace deloc {
namespace ucp {

// doubling constant 2*sqrt(2*18^2/s^2 + 2 s^2 dev^2), dev = |V - E|_inf
double c_sve(double s, double v_dev);

// squared mass of phi restricted to the open interval of side `s` around c,
// trapezoidal in the grid nodes (window snapped to nodes, error <= spacing)
double restricted_mass(const Eigen::VectorXd& phi, const GridSpec& grid,
                       double center, double s);

struct TranslateBound {
  double lhs = 0.0;   // mass on the translated window
  double rhs = 0.0;   // e^{C |y|} * mass on the original window
  double constant = 0.0;
  bool vacuous = false;  // original window carries no mass
  bool holds = false;    // lhs <= rhs * slack (1.1)
};

// mass on Λ_s(k+y) against e^{C_{s,V,E}|y|} times the mass on Λ_s(k)
TranslateBound translate_bound_check(const Eigen::VectorXd& phi, const GridSpec& grid,
                                     const Eigen::VectorXd& V, double lambda,
                                     double s, double k, double y);

// J1 = centres k in MZ with Λ_M(k) inside Λ_L(x); J2 = the two boundary
// centres x ± (L-M)/2.  J2 may coincide with elements of J1.
struct IndexSets {
  long j_min = 0, j_max = -1;  // J1 = {j*M : j_min <= j <= j_max}
  double left_boundary = 0.0;   // x - L/2 + M/2
  double right_boundary = 0.0;  // x + L/2 - M/2
  double M = 0.0;
  std::vector<double> all;      // J1 ∪ J2, deduplicated, ascending
};

IndexSets index_sets(double x, double L, double M);

// centres gamma_k of the small windows, indexed by j (site k = j*M)
using CentreMap = std::map<long, double>;

// Reassigns each kappa in J to a lattice centre: identity on J1; a boundary
// centre goes to the outward neighbour k_l = min J1 - M (resp. k_r = max J1
// + M) when Λ_s(γ) of that neighbour still fits inside Λ_L(x), else to
// min J1 (resp. max J1).  Any other kappa is an error.
double tau_map(double kappa, double x, double L, double M, double s,
               const CentreMap& centres);

struct UcpSetup {
  double s = 0.0;
  double M = 0.0;
  CentreMap centres;           // j -> gamma_{jM}, with Λ_s(γ) inside Λ_M(jM)
  Interval energy_window;      // admissible eigenvalue interval I
  Eigen::VectorXd potential;   // node samples of V on the grid

  void validate() const;
};

struct MassCheck {
  double mass_sum = 0.0;       // sum of window masses over eligible centres
  double total = 0.0;          // mass on the whole box
  double log_constant = 0.0;   // log of (s/4M) e^{-2 C M}
  double constant = 0.0;       // may underflow to 0
  double log10_ratio = 0.0;    // log10(mass_sum / (constant * total))
  bool holds = false;          // mass_sum >= constant * total / slack (1.1)
};

// Lower bound for the mass of an eigenfunction near the centres: the sum of
// window masses over {k : gamma_k in Λ_{L-s}(x)} dominates
// (s/4M) e^{-2 C_{s,V,lambda} M} times the total mass.
MassCheck ucp_mass_check(const Eigen::VectorXd& phi, const GridSpec& grid,
                         double lambda, const UcpSetup& setup, double x, double L);

struct LiftingRow {
  double t = 0.0;
  double lambda_t = 0.0;
  double bound = 0.0;   // lambda(0) + t * c_minus * C_uc
  double margin = 0.0;  // lambda_t - bound
};

struct LiftingReport {
  double lambda0 = 0.0;          // ground energy at t = 0
  double c_uc = 0.0;             // (s/4M) e^{-2 C_{s,V,I} M}, may underflow
  double log_c_uc = 0.0;
  double c_svi = 0.0;            // sup over t and E in I of the doubling constant
  Interval energy_window;        // I used for the sup
  std::vector<LiftingRow> rows;
  double slope_estimate = 0.0;       // (lambda(t1) - lambda(0)) / t1
  double slope_perturbative = 0.0;   // <phi0, W phi0> in the weighted norm
  bool monotone = true;
  bool all_hold = true;
};

// Ground-energy lifting under H(t) = -Δ + V0 + t W for t in t_grid, against
// lambda(0) + t c_minus C_uc(M).  W must dominate c_minus on the union of the
// windows Λ_s(γ_k); the energy interval I is [min_t λ(t) - 1, max_t λ(t) + 1].
LiftingReport lifting_1d(const Eigen::VectorXd& V0, const Eigen::VectorXd& W,
                         const GridSpec& grid, double s, double M,
                         const CentreMap& centres, double c_minus,
                         const std::vector<double>& t_grid);

}  // namespace ucp
}  // namespace deloc

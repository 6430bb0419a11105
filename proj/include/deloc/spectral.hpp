#pragma once
#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "deloc/hamiltonian.hpp"

namespace deloc {

// E sits on the spectrum to machine precision; resolvent quantities undefined
struct SpectrumHitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EigenResult {
  std::vector<double> eigenvalues;  // ascending
  Eigen::MatrixXd vectors;          // columns, unit l2 norm
  std::vector<double> residuals;    // |H v - lambda v|_2 per pair
  bool exact_hit = false;           // an eigenvalue equals the target shift
};

enum class EigMethod { automatic, dense, lanczos };

inline constexpr double kResidualTol = 1e-8;  // residual <= tol*(1+|lambda|)

// k eigenpairs closest to E (ties toward the smaller eigenvalue), by
// shift-invert Lanczos with full reorthogonalisation; dense fallback when the
// factorisation fails or the problem is tiny.
EigenResult eigs_near(const SpMat& H, double E, int k,
                      EigMethod method = EigMethod::automatic);

// smallest eigenpair; dense solve when the dimension is <= 2000
EigenResult ground_state(const SpMat& H, EigMethod method = EigMethod::automatic);

// 1/dist(E, spectrum); SpectrumHitError when E is an eigenvalue
double resolvent_norm(const SpMat& H, double E);

struct BlockNormResult {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Spectral norm of P_y (H-E)^{-1} P_z where P_* restrict to grid nodes in the
// open cube of side `width` around y resp. z.  Power iteration on the Gram
// operator, all-ones start on the z block, relative tolerance 1e-6, at most
// 200 iterations.
BlockNormResult local_resolvent_block(const DiscretizedHamiltonian& H, double E,
                                      const Vec& y, const Vec& z, double width);

// (4/(3 eta)) * exp((sqrt(eta)/2) * (sqrt(d) - dist)); requires eta > 0
double combes_thomas_bound(double eta, int dim, double dist);

struct CombesThomasRow {
  Vec y, z;
  double distance = 0.0;
  double measured = 0.0;
  double bound = 0.0;
  bool holds = false;  // measured <= bound * slack
};

struct CombesThomasReport {
  double lambda0 = 0.0;
  double eta = 0.0;
  double slack = 1.1;  // discretisation allowance on the continuum bound
  std::vector<CombesThomasRow> rows;
  bool all_hold = true;
};

// Checks the resolvent block bound for E strictly below the spectrum on the
// given centre pairs, blocks of side `width`.
CombesThomasReport combes_thomas_check(const DiscretizedHamiltonian& H, double E,
                                       const std::vector<std::pair<Vec, Vec>>& pairs,
                                       double width);

struct ModeProfile {
  double eigenvalue = 0.0;
  double residual = 0.0;
  double ipr = 0.0;         // participation in the h^d-weighted norm
  double decay_rate = 0.0;  // slope of log shell maxima of |phi|
};

// k lowest modes with inverse participation ratio and an exponential decay
// fit from the maximising node outward.
std::vector<ModeProfile> localization_profile(const DiscretizedHamiltonian& H, int k);

// Gershgorin lower bound minus 1: a shift strictly below the whole spectrum.
double below_spectrum_shift(const SpMat& H);

}  // namespace deloc

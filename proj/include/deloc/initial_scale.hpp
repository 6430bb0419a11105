#pragma once
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "deloc/good_boxes.hpp"
#include "deloc/hamiltonian.hpp"
#include "deloc/stats.hpp"

namespace deloc {
namespace iscale {

struct Params {
  int dim = 1;
  double epsilon = 0.1;     // dim >= 2 only; needs (4/3)(epsilon + 1/d) < 1
  double p = 0.35;          // probability exponent
  double beta = 0.5;        // P(coupling = 0), in (0,1)
  double R0 = 3.0;          // denseness radius of the selected skeleton
  double delta_plus = 0.2;  // bump support side
  double delta_minus = 0.1; // bump core side
  double u_minus = 1.0;     // bump floor
  double C_d = 1.0;         // dimensional constant in the continuation exponent
  double zeta = 0.5;

  void validate() const;
};

struct ScaleChoice {
  double M = 0.0;
  long ell = 0;  // L / M, odd
};

// Largest M in (R0 + 2 delta_plus, 4 R0 (log L)^{epsilon + 1/d}] with L/M an
// odd natural number.  Errors when the admissible window holds no such M.
ScaleChoice choose_M(double L, const Params& p);

// 1D variant with upper end 4 R0 (1+p) log L / |log beta|.
ScaleChoice choose_M_1d(double L, const Params& p);

// (delta_minus / (C_d M))^(C_d + 3 C_d M^{4/3}); requires the base < 1.
// Underflows to 0 for large M; log10_c_uc carries the magnitude.
double c_uc(double M, const Params& p);
double log10_c_uc(double M, const Params& p);

// M^2 (4 + M^{-2} d pi^2 / 9), an upper bound for the kinetic-plus-potential
// scale entering the continuation constant; < 5 M^2 once M >= pi sqrt(d)/3
double k_v_bound(double M, int dim);

// threshold u_minus * c_uc(4 R0 (log L)^{epsilon + 1/d}), dim >= 2 branch
double energy_threshold(double L, const Params& p);
double log10_energy_threshold(double L, const Params& p);

// background data entering the 1D constant chain
struct BackgroundBounds {
  double v_sup = 0.0;      // |V|_inf over the box, all couplings at 1
  Interval energy_window;  // admissible eigenvalue interval I
};

// u_minus * (delta_minus / 4M) * exp(-C M) at M = choose_M_1d(L).M, where
// C = 2 * c_sve(delta_minus, sup_{E in I} |V - E|_inf).
double energy_threshold_1d(double L, const Params& p, const BackgroundBounds& bg);
double log10_energy_threshold_1d(double L, const Params& p, const BackgroundBounds& bg);

// Scale-law exponent of the 1D threshold: substituting the window upper end
// 4 R0 (1+p) log L / |log beta| for M in exp(-C M) rewrites the threshold as
// prefactor * L^(-2 c~ / |log beta|) with c~ = 2 C R0 (1+p).  The induced
// ceiling exp(-c~) on the zero-coupling probability usually underflows, so
// the log10 variant carries the magnitude.
double c_tilde_1d(const Params& p, const BackgroundBounds& bg);
double log10_beta_ceiling_1d(const Params& p, const BackgroundBounds& bg);
double beta_ceiling_1d(const Params& p, const BackgroundBounds& bg);

// Growth exponent of the continuation constant along the scale sequence and
// the open interval of probability exponents it leaves admissible.  Surfaced
// as report metadata only; no induction here consumes it.
struct GrowthMetadata {
  double gamma = 0.0;
  Interval p_window;
};
GrowthMetadata growth_metadata(int dim);

// 1 - ell^d beta^{floor((M - 2 delta_plus)/R0)^d}; requires floor >= 1
double event_A_probability_bound(long ell, double M, const Params& p);

// key: sub-box label k (lexicographic index pair), value: selected point
using ChosenMap = std::map<std::array<long, 2>, Vec>;

struct EventASample {
  bool occurred = false;
  ChosenMap chosen;  // one active point per sub-box when occurred
};

// Draws couplings on the skeleton patch and tests whether every shrunk
// sub-box Λ_{M-2δ+}(x + M k) holds an active point; the selected point per
// box is the active one closest to the box centre (Euclidean, lexicographic
// tie-break).
EventASample simulate_event_A(const PointSet& d0, double beta, const Vec& x,
                              double L, double M, const Params& p, Rng& rng);

// Monte Carlo frequency of the coverage event against the closed-form bound.
struct EventAStats {
  int n_trials = 0;
  int n_occurred = 0;
  double frequency = 0.0;
  Interval ci;
  double bound = 0.0;  // event_A_probability_bound
};
EventAStats event_A_statistics(const PointSet& d0, double beta, const Vec& x,
                               double L, double M, const Params& p, int n_trials,
                               std::uint64_t seed);

// potential with one bump per selected point
Eigen::VectorXd thinned_potential(const ChosenMap& chosen, const SingleSitePotential& u,
                                  const GridSpec& grid);

struct LiftCheck {
  double base_energy = 0.0;     // ground energy without the thinned bumps
  double lifted_energy = 0.0;
  double lift = 0.0;
  double bound = 0.0;           // u_minus * c_uc(M) (or the 1D variant)
  double log10_bound = 0.0;
  bool holds = false;
};

// Ground-energy lift of background + thinned potential against the
// continuation lower bound at scale M.
LiftCheck lifting_check(const PointSet& base, const SingleSitePotential& u,
                        const ChosenMap& chosen, const Vec& x, double L, double M,
                        const GridSpec& grid, const Params& p);

struct ExperimentModel {
  PointSet base;        // background set D
  PointSet d0;          // selected skeleton of D'
  SingleSitePotential u;
  double spacing = 0.0; // 0 = delta_minus/4

  GridSpec grid_for(const Vec& x, double L) const;
};

struct ExperimentReport {
  double L = 0.0;
  double M = 0.0;
  long ell = 0;
  double threshold_energy = 0.0;  // E_L (0 when underflowed)
  double log10_threshold_energy = 0.0;
  double mass = 0.0;              // m_L = sqrt(E_L / 64)
  double p_exponent = 0.0;
  double target_probability = 0.0;  // 1 - L^{-pd}
  double base_energy = 0.0;         // ground energy of the background box
  int n_trials = 0;
  int n_pass = 0;
  double p_hat = 0.0;
  Interval ci;
  double lift_min = 0.0, lift_median = 0.0, lift_max = 0.0;
  GrowthMetadata growth;
  std::optional<double> log10_beta_ceiling;  // 1D constant chain only
  Params params;
  std::uint64_t seed = 0;
};

// Per trial: draw couplings on the skeleton (remaining sites held at 0, the
// monotone worst case), and test ground(H_omega) >= ground(H_base) + E_L.
ExperimentReport ilse_experiment(const ExperimentModel& model, const Vec& x, double L,
                                 const Params& p, int n_trials, std::uint64_t seed,
                                 int threads = 1);

// m = sqrt(E/64)
double mass_from_energy(double E);

struct CtWindowRow {
  double energy = 0.0;
  double resolvent_measured = 0.0;
  double resolvent_bound = 0.0;  // 2 / E_cal
  std::vector<GoodBoxPair> blocks;
  bool holds = true;
};

struct CtWindowReport {
  double lambda0 = 0.0;
  double threshold_energy = 0.0;
  bool resolvent_ceiling_ok = false;  // 2/E_cal <= exp(L^{1-zeta})
  std::vector<CtWindowRow> rows;
  bool all_hold = true;
};

// For E in {E0, E0 + Ecal/4, E0 + Ecal/2} below the lifted spectrum checks
// |R(E)| <= 2/Ecal and the block decay (8/(3 Ecal)) e^{-sqrt(Ecal/32) dist}
// on the given centre pairs (slack 1.1 on the blocks).
CtWindowReport ct_window_check(const DiscretizedHamiltonian& H, double E0,
                               double Ecal, double zeta,
                               const std::vector<std::pair<Vec, Vec>>& pairs,
                               double width);

}  // namespace iscale
}  // namespace deloc

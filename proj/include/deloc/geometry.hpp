#pragma once
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "deloc/rng.hpp"

namespace deloc {

// Coordinates live in the first `dim` slots; dim is 1 or 2 throughout.
using Vec = std::array<double, 2>;

inline constexpr double kPointTol = 1e-12;    // dedup / coordinate identity
inline constexpr double kPatternTol = 1e-9;   // pattern-translate matching

double sup_dist(const Vec& a, const Vec& b, int dim);
double euclid_dist(const Vec& a, const Vec& b, int dim);

// Open axis-aligned cube of side `side` centred at `center`.
struct Box {
  int dim = 1;
  Vec center{0.0, 0.0};
  double side = 0.0;

  bool contains(const Vec& p) const;          // strict (open box)
  bool contains_closure(const Vec& p, double tol = kPointTol) const;
  bool contains_box(const Box& inner) const;  // closure of inner fits in closure
  Box shrunk(double per_side) const;          // side - 2*per_side
  Box dilated(double per_side) const;         // side + 2*per_side
};

struct DeloneParams {
  double r = 0.0;  // every open cube of side r holds at most one point
  double R = 0.0;  // every open cube of side R holds at least one point
};

// A finite patch of a point set, complete inside `window`.
struct PointSet {
  int dim = 1;
  std::vector<Vec> points;
  Box window;
  std::optional<DeloneParams> params;
};

// Validates: dim consistency, points within the window closure, no duplicate
// points (tolerance kPointTol).  When params are present and the window is
// large enough to run the verifier (side > 2R), the patch must pass it.
PointSet make_point_set(int dim, std::vector<Vec> points, Box window,
                        std::optional<DeloneParams> params = std::nullopt);

struct DeloneReport {
  bool uniform_discrete = false;
  bool relatively_dense = false;
  bool ok() const { return uniform_discrete && relatively_dense; }
  // centre of a cube witnessing the violation, when one was found
  std::optional<Vec> discreteness_witness;
  std::optional<Vec> denseness_witness;
  Box test_region;  // where relative denseness was checked
  double deepest_hole = 0.0;  // max over test region of sup-distance to the set
};

// Uniform discreteness is equivalent to min pairwise sup-distance >= r and is
// checked exactly.  Relative denseness is checked for cube centres in the
// window shrunk by R/2 per side, by a certified search for the deepest hole
// (the distance-to-set function is 1-Lipschitz in the sup norm).
DeloneReport verify_delone(const PointSet& ps, double r, double R);

// a Z^d intersected with the open window; params (a, 2a).
PointSet generate_lattice(int dim, double a, const Box& window);

// One point gamma + xi per lattice site gamma in the window, xi uniform in the
// open cube of side 1-rho.  The returned window is dilated by (1-rho)/2 so
// displaced points stay inside its closure; params (rho, 2-rho).
PointSet generate_perturbed_lattice(int dim, double rho, const Box& window, Rng& rng);

// Keeps each point independently with probability q.  Relative denseness is
// lost, so params are dropped.
PointSet thin_by_percolation(const PointSet& ps, double q, Rng& rng);

struct DelonePair {
  PointSet base;    // D
  PointSet extra;   // D', one companion point per point of D
  std::optional<DeloneParams> union_params;  // for D ∪ D'
};

// For each gamma in D samples a companion uniformly in the cube shell
// Lambda_{r/2}(gamma) \ Lambda_{r/4}(gamma) (sup-distance in [r/8, r/4)).
// The union D ∪ D' then has min distance >= r/8, i.e. params (r/8, R).
DelonePair make_delone_pair(const PointSet& base, Rng& rng);

struct FreeSiteSplit {
  PointSet d0;  // selected skeleton, params (R', 3R')
  PointSet s;   // remainder
};

// Partition of D' induced by the coarse grid (2R'Z)^d: per grid site z pick
// the point of D' in Lambda_{R'}(z) closest to z (Euclidean, lexicographic
// tie-break).  An empty cell fully inside the window is an error; cells
// sticking out of the window are skipped since the patch is silent there.
FreeSiteSplit free_sites_split(const PointSet& extra, double R_prime);

// Hausdorff distance in the Euclidean metric; error on empty input.
double hausdorff_distance(const std::vector<Vec>& a, const std::vector<Vec>& b, int dim);

struct PatchConvergenceReport {
  std::optional<double> L_found;
  std::vector<double> distances;  // per sequence element, at the reported L
};

// Searches cube sizes l < L <= (largest cube around 0 inside every window)
// for one where the patch distances d_H(D_n ∩ Λ_L, D ∩ Λ_L) end below tol.
PatchConvergenceReport patch_convergence_check(const std::vector<PointSet>& seq,
                                               const PointSet& limit, double l,
                                               double tol);

struct PatternCount {
  std::size_t count = 0;
  std::vector<Vec> witnesses;
};

// Counts translates y (drawn from difference vectors of the patch, plus 0)
// with y + (D∩K) = D ∩ (y+K), matched per point to tolerance kPatternTol.
// Only y with y+K inside the window are checked, since membership of points
// outside the window is unknown.
PatternCount count_pattern_translates(const PointSet& ps, const Box& K,
                                      const Box& search_window);

// Tiles the motif D ∩ Λ_ell(0) over ell Z^d, clipped to out_window
// (defaults to the window of ps).  Error when the motif is empty.
PointSet periodize(const PointSet& ps, double ell,
                   std::optional<Box> out_window = std::nullopt);

PointSet translate(const PointSet& ps, const Vec& shift);

struct BoxDecomposition {
  long ell = 0;                  // L/M, odd
  std::vector<Vec> centers;      // x + M k, k in Λ_ell(0) ∩ Z^d, lexicographic
};

// Requires L/M to be an odd natural number within 1e-9 relative tolerance.
BoxDecomposition box_decomposition(double L, double M, const Vec& x, int dim);

}  // namespace deloc

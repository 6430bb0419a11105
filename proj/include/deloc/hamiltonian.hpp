#pragma once
#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <optional>
#include <vector>

#include "deloc/geometry.hpp"
#include "deloc/potential.hpp"
#include "deloc/rng.hpp"

namespace deloc {

using SpMat = Eigen::SparseMatrix<double>;

// Uniform grid of interior nodes of the open cube of side `side` around
// `center`; Dirichlet conditions are imposed by dropping boundary nodes.
// side/spacing must be an integer (1e-9 relative); n = side/spacing - 1 nodes
// per axis.  2D nodes are indexed row-major: idx = ix*n + iy.
struct GridSpec {
  int dim = 1;
  Vec center{0.0, 0.0};
  double side = 0.0;
  double spacing = 0.0;
  long nodes_per_axis = 0;

  static GridSpec make(int dim, const Vec& center, double side, double spacing);

  long total_nodes() const;
  Vec node(long idx) const;
  Box box() const { return {dim, center, side}; }
  double cell_volume() const;  // spacing^dim
};

// Bernoulli couplings attached to an ordered site list.
struct BernoulliConfig {
  std::vector<Vec> sites;
  std::vector<double> values;  // each in [0,1]
  double beta = 0.0;           // P(value = 0)
};

// value 1 with probability 1-beta, one draw per site in list order
BernoulliConfig sample_config(const std::vector<Vec>& sites, double beta, Rng& rng);

// sum over common sites of 2^{-|site|_2} |a - b|; site lists must agree
double config_metric(const BernoulliConfig& a, const BernoulliConfig& b, int dim);

struct DiscretizedHamiltonian {
  GridSpec grid;
  SpMat matrix;                // -Laplacian/h^2 + diag(potential), symmetric
  Eigen::VectorXd potential;   // node samples
};

// Sum of bumps over all patch points.  Requires the patch window to cover the
// grid box dilated by delta_plus per side (so no contributing bump centre is
// missing) and spacing <= delta_minus/4 (the narrow core spans >= 4 cells).
Eigen::VectorXd assemble_potential(const PointSet& ps, const SingleSitePotential& u,
                                   const GridSpec& grid);

// Bumps at `sites` scaled by per-site couplings, but only for sites strictly
// inside the grid box: couplings act on sites of the box, tails of outside
// bumps belong to the background.
Eigen::VectorXd assemble_coupled_potential(const std::vector<Vec>& sites,
                                           const std::vector<double>& couplings,
                                           const SingleSitePotential& u,
                                           const GridSpec& grid);

DiscretizedHamiltonian assemble_from_samples(const GridSpec& grid,
                                             Eigen::VectorXd potential);

// background operator of the base set alone
DiscretizedHamiltonian assemble_background(const PointSet& base,
                                           const SingleSitePotential& u,
                                           const GridSpec& grid);

// Full randomised operator.  Without t_s, omega must list exactly the points
// of pair.extra; with t_s, omega lists a skeleton subset and t_s the rest,
// and together they must partition pair.extra.  Mismatches are errors.
DiscretizedHamiltonian assemble_hamiltonian(const DelonePair& pair,
                                            const SingleSitePotential& u,
                                            const BernoulliConfig& omega,
                                            const std::optional<BernoulliConfig>& t_s,
                                            const GridSpec& grid);

}  // namespace deloc

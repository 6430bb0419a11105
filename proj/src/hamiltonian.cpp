#include "deloc/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace deloc {

GridSpec GridSpec::make(int dim, const Vec& center, double side, double spacing) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("GridSpec: dim must be 1 or 2");
  if (!(side > 0.0) || !(spacing > 0.0)) {
    throw std::invalid_argument("GridSpec: side and spacing must be positive");
  }
  const double q = side / spacing;
  const double rq = std::round(q);
  if (std::abs(q - rq) > 1e-9 * std::max(1.0, q)) {
    throw std::invalid_argument("GridSpec: side/spacing is not an integer");
  }
  long n = static_cast<long>(rq) - 1;
  if (n < 1) throw std::invalid_argument("GridSpec: no interior nodes");
  return GridSpec{dim, center, side, spacing, n};
}

long GridSpec::total_nodes() const {
  return dim == 1 ? nodes_per_axis : nodes_per_axis * nodes_per_axis;
}

Vec GridSpec::node(long idx) const {
  const double lo0 = center[0] - side / 2.0;
  if (dim == 1) {
    return {lo0 + spacing * static_cast<double>(idx + 1), 0.0};
  }
  const double lo1 = center[1] - side / 2.0;
  long ix = idx / nodes_per_axis;
  long iy = idx % nodes_per_axis;
  return {lo0 + spacing * static_cast<double>(ix + 1),
          lo1 + spacing * static_cast<double>(iy + 1)};
}

double GridSpec::cell_volume() const {
  return dim == 1 ? spacing : spacing * spacing;
}

BernoulliConfig sample_config(const std::vector<Vec>& sites, double beta, Rng& rng) {
  if (!(beta >= 0.0) || !(beta <= 1.0)) {
    throw std::invalid_argument("sample_config: beta must be in [0,1]");
  }
  BernoulliConfig cfg;
  cfg.sites = sites;
  cfg.beta = beta;
  cfg.values.reserve(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    cfg.values.push_back(rng.uniform() < beta ? 0.0 : 1.0);
  }
  return cfg;
}

double config_metric(const BernoulliConfig& a, const BernoulliConfig& b, int dim) {
  if (a.sites.size() != b.sites.size()) {
    throw std::invalid_argument("config_metric: site lists differ in size");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.sites.size(); ++i) {
    if (sup_dist(a.sites[i], b.sites[i], dim) > kPointTol) {
      throw std::invalid_argument("config_metric: site lists differ");
    }
    double norm = euclid_dist(a.sites[i], Vec{0.0, 0.0}, dim);
    sum += std::exp2(-norm) * std::abs(a.values[i] - b.values[i]);
  }
  return sum;
}

namespace {

void check_spacing(const SingleSitePotential& u, const GridSpec& grid) {
  if (grid.spacing > u.delta_minus() / 4.0 + 1e-15) {
    throw std::invalid_argument("grid spacing must be <= delta_minus/4");
  }
}

// adds coupling * u(. - site) to V
void add_bump(Eigen::VectorXd& V, const Vec& site, double coupling,
              const SingleSitePotential& u, const GridSpec& grid) {
  if (coupling == 0.0) return;
  const double h = grid.spacing;
  const double half = u.delta_plus() / 2.0;
  const long n = grid.nodes_per_axis;
  const double lo0 = grid.center[0] - grid.side / 2.0;
  auto axis_range = [&](double lo, double c) {
    long a = static_cast<long>(std::ceil((c - half - lo) / h)) - 1;
    long b = static_cast<long>(std::floor((c + half - lo) / h)) - 1;
    return std::pair<long, long>{std::max(a, 0L), std::min(b, n - 1)};
  };
  auto [i0, i1] = axis_range(lo0, site[0]);
  if (grid.dim == 1) {
    for (long i = i0; i <= i1; ++i) {
      Vec p = grid.node(i);
      V[i] += coupling * u.eval({p[0] - site[0], 0.0}, 1);
    }
    return;
  }
  const double lo1 = grid.center[1] - grid.side / 2.0;
  auto [j0, j1] = axis_range(lo1, site[1]);
  for (long i = i0; i <= i1; ++i) {
    for (long j = j0; j <= j1; ++j) {
      long idx = i * n + j;
      Vec p = grid.node(idx);
      V[idx] += coupling * u.eval({p[0] - site[0], p[1] - site[1]}, 2);
    }
  }
}

// order-insensitive partition check of `parts` against `whole`, tol kPointTol
void check_partition(const std::vector<Vec>& whole,
                     const std::vector<const std::vector<Vec>*>& parts, int dim) {
  std::size_t total = 0;
  for (const auto* p : parts) total += p->size();
  if (total != whole.size()) {
    throw std::invalid_argument("config sites do not partition the extra set");
  }
  std::vector<bool> used(whole.size(), false);
  for (const auto* part : parts) {
    for (const auto& q : *part) {
      bool found = false;
      for (std::size_t i = 0; i < whole.size(); ++i) {
        if (!used[i] && sup_dist(whole[i], q, dim) <= kPointTol) {
          used[i] = true;
          found = true;
          break;
        }
      }
      if (!found) throw std::invalid_argument("config site not in the extra set");
    }
  }
}

}  // namespace

Eigen::VectorXd assemble_potential(const PointSet& ps, const SingleSitePotential& u,
                                   const GridSpec& grid) {
  check_spacing(u, grid);
  if (!ps.window.contains_box(grid.box().dilated(u.delta_plus()))) {
    throw std::invalid_argument(
        "assemble_potential: window must cover the grid box dilated by delta_plus");
  }
  Eigen::VectorXd V = Eigen::VectorXd::Zero(grid.total_nodes());
  for (const auto& g : ps.points) add_bump(V, g, 1.0, u, grid);
  return V;
}

Eigen::VectorXd assemble_coupled_potential(const std::vector<Vec>& sites,
                                           const std::vector<double>& couplings,
                                           const SingleSitePotential& u,
                                           const GridSpec& grid) {
  if (sites.size() != couplings.size()) {
    throw std::invalid_argument("assemble_coupled_potential: size mismatch");
  }
  for (double c : couplings) {
    if (!(c >= 0.0) || !(c <= 1.0)) {
      throw std::invalid_argument("assemble_coupled_potential: couplings must be in [0,1]");
    }
  }
  check_spacing(u, grid);
  Eigen::VectorXd V = Eigen::VectorXd::Zero(grid.total_nodes());
  Box box = grid.box();
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (!box.contains(sites[i])) continue;  // couplings act inside the box only
    add_bump(V, sites[i], couplings[i], u, grid);
  }
  return V;
}

DiscretizedHamiltonian assemble_from_samples(const GridSpec& grid,
                                             Eigen::VectorXd potential) {
  const long N = grid.total_nodes();
  if (potential.size() != N) {
    throw std::invalid_argument("assemble_from_samples: potential size mismatch");
  }
  const double w = 1.0 / (grid.spacing * grid.spacing);
  const long n = grid.nodes_per_axis;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(N) * (2 * grid.dim + 1));
  for (long idx = 0; idx < N; ++idx) {
    trip.emplace_back(idx, idx, 2.0 * grid.dim * w + potential[idx]);
    if (grid.dim == 1) {
      if (idx + 1 < n) {
        trip.emplace_back(idx, idx + 1, -w);
        trip.emplace_back(idx + 1, idx, -w);
      }
    } else {
      long ix = idx / n, iy = idx % n;
      if (iy + 1 < n) {
        trip.emplace_back(idx, idx + 1, -w);
        trip.emplace_back(idx + 1, idx, -w);
      }
      if (ix + 1 < n) {
        trip.emplace_back(idx, idx + n, -w);
        trip.emplace_back(idx + n, idx, -w);
      }
    }
  }
  SpMat H(N, N);
  H.setFromTriplets(trip.begin(), trip.end());
  H.makeCompressed();
  return DiscretizedHamiltonian{grid, std::move(H), std::move(potential)};
}

DiscretizedHamiltonian assemble_background(const PointSet& base,
                                           const SingleSitePotential& u,
                                           const GridSpec& grid) {
  return assemble_from_samples(grid, assemble_potential(base, u, grid));
}

DiscretizedHamiltonian assemble_hamiltonian(const DelonePair& pair,
                                            const SingleSitePotential& u,
                                            const BernoulliConfig& omega,
                                            const std::optional<BernoulliConfig>& t_s,
                                            const GridSpec& grid) {
  const int d = pair.base.dim;
  if (t_s) {
    check_partition(pair.extra.points, {&omega.sites, &t_s->sites}, d);
  } else {
    check_partition(pair.extra.points, {&omega.sites}, d);
  }
  for (double v : omega.values) {
    if (v < 0.0 || v > 1.0) throw std::invalid_argument("omega coupling outside [0,1]");
  }
  Eigen::VectorXd V = assemble_potential(pair.base, u, grid);
  V += assemble_coupled_potential(omega.sites, omega.values, u, grid);
  if (t_s) {
    for (double v : t_s->values) {
      if (v < 0.0 || v > 1.0) throw std::invalid_argument("t_s coupling outside [0,1]");
    }
    V += assemble_coupled_potential(t_s->sites, t_s->values, u, grid);
  }
  return assemble_from_samples(grid, std::move(V));
}

}  // namespace deloc

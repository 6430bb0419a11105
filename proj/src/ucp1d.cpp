#include "deloc/ucp1d.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace deloc {
namespace ucp {

namespace {
constexpr double kSlack = 1.1;  // discretisation allowance
constexpr double kTol = 1e-9;   // lattice membership tolerance (relative to M)
}  // namespace

double c_sve(double s, double v_dev) {
  if (!(s > 0.0)) throw std::invalid_argument("c_sve: s must be positive");
  if (v_dev < 0.0) throw std::invalid_argument("c_sve: deviation must be >= 0");
  return 2.0 * std::sqrt(2.0 * 18.0 * 18.0 / (s * s) + 2.0 * s * s * v_dev * v_dev);
}

double restricted_mass(const Eigen::VectorXd& phi, const GridSpec& grid,
                       double center, double s) {
  if (grid.dim != 1) throw std::invalid_argument("restricted_mass: 1D only");
  const double h = grid.spacing;
  const double lo = grid.center[0] - grid.side / 2.0;
  // nodes strictly inside (center - s/2, center + s/2); node i sits at
  // lo + (i+1) h
  long i0 = static_cast<long>(std::ceil((center - s / 2.0 - lo) / h - 1.0 + 1e-12));
  long i1 = static_cast<long>(std::floor((center + s / 2.0 - lo) / h - 1.0 - 1e-12));
  i0 = std::max(i0, 0L);
  i1 = std::min(i1, grid.nodes_per_axis - 1);
  if (i0 > i1) return 0.0;
  double sum = 0.0;
  for (long i = i0; i <= i1; ++i) {
    double w = (i == i0 || i == i1) ? 0.5 : 1.0;
    sum += w * phi[i] * phi[i];
  }
  return sum * h;
}

TranslateBound translate_bound_check(const Eigen::VectorXd& phi, const GridSpec& grid,
                                     const Eigen::VectorXd& V, double lambda,
                                     double s, double k, double y) {
  if (V.size() != phi.size()) throw std::invalid_argument("translate_bound_check: size mismatch");
  double dev = 0.0;
  for (long i = 0; i < V.size(); ++i) dev = std::max(dev, std::abs(V[i] - lambda));
  TranslateBound out;
  out.constant = c_sve(s, dev);
  out.lhs = restricted_mass(phi, grid, k + y, s);
  double base = restricted_mass(phi, grid, k, s);
  if (base <= 0.0) {
    out.vacuous = true;
    out.rhs = 0.0;
    out.holds = out.lhs == 0.0;
    return out;
  }
  out.rhs = std::exp(out.constant * std::abs(y)) * base;
  out.holds = out.lhs <= out.rhs * kSlack;
  return out;
}

IndexSets index_sets(double x, double L, double M) {
  if (!(M > 0.0) || !(L > M)) throw std::invalid_argument("index_sets: need 0 < M < L");
  IndexSets js;
  js.M = M;
  const double half = (L - M) / 2.0;
  const double tol = kTol * M;
  js.j_min = static_cast<long>(std::ceil((x - half - tol) / M));
  js.j_max = static_cast<long>(std::floor((x + half + tol) / M));
  js.left_boundary = x - L / 2.0 + M / 2.0;
  js.right_boundary = x + L / 2.0 - M / 2.0;
  js.all.clear();
  for (long j = js.j_min; j <= js.j_max; ++j) js.all.push_back(M * static_cast<double>(j));
  for (double b : {js.left_boundary, js.right_boundary}) {
    bool dup = false;
    for (double v : js.all) {
      if (std::abs(v - b) <= tol) { dup = true; break; }
    }
    if (!dup) js.all.push_back(b);
  }
  std::sort(js.all.begin(), js.all.end());
  return js;
}

double tau_map(double kappa, double x, double L, double M, double s,
               const CentreMap& centres) {
  IndexSets js = index_sets(x, L, M);
  const double tol = kTol * M;
  if (js.j_min > js.j_max) throw std::invalid_argument("tau_map: J1 is empty");
  // lattice element of J1: identity
  double jr = std::round(kappa / M);
  if (std::abs(kappa - jr * M) <= tol) {
    long j = static_cast<long>(jr);
    if (j >= js.j_min && j <= js.j_max) return kappa;
  }
  auto centre_fits = [&](long j) {
    auto it = centres.find(j);
    if (it == centres.end()) {
      throw std::invalid_argument("tau_map: centre missing for an outward neighbour");
    }
    double g = it->second;
    return g - s / 2.0 >= x - L / 2.0 - tol && g + s / 2.0 <= x + L / 2.0 + tol;
  };
  if (std::abs(kappa - js.left_boundary) <= tol) {
    long kl = js.j_min - 1;
    return centre_fits(kl) ? M * static_cast<double>(kl)
                           : M * static_cast<double>(js.j_min);
  }
  if (std::abs(kappa - js.right_boundary) <= tol) {
    long kr = js.j_max + 1;
    return centre_fits(kr) ? M * static_cast<double>(kr)
                           : M * static_cast<double>(js.j_max);
  }
  throw std::invalid_argument("tau_map: kappa is not an index-set element");
}

void UcpSetup::validate() const {
  if (!(s > 0.0) || !(s < M)) throw std::invalid_argument("UcpSetup: need 0 < s < M");
  for (const auto& [j, g] : centres) {
    if (std::abs(g - M * static_cast<double>(j)) > (M - s) / 2.0 + kTol * M) {
      throw std::invalid_argument("UcpSetup: a centre window escapes its cell");
    }
  }
  if (!(energy_window.hi > energy_window.lo)) {
    throw std::invalid_argument("UcpSetup: degenerate energy window");
  }
}

MassCheck ucp_mass_check(const Eigen::VectorXd& phi, const GridSpec& grid,
                         double lambda, const UcpSetup& setup, double x, double L) {
  setup.validate();
  if (lambda < setup.energy_window.lo || lambda > setup.energy_window.hi) {
    throw std::invalid_argument("ucp_mass_check: lambda outside the energy window");
  }
  if (setup.potential.size() != phi.size()) {
    throw std::invalid_argument("ucp_mass_check: potential size mismatch");
  }
  double dev = 0.0;
  for (long i = 0; i < phi.size(); ++i) {
    dev = std::max(dev, std::abs(setup.potential[i] - lambda));
  }
  const double C = c_sve(setup.s, dev);
  MassCheck out;
  out.log_constant = std::log(setup.s / (4.0 * setup.M)) - 2.0 * C * setup.M;
  out.constant = std::exp(out.log_constant);
  for (const auto& [j, g] : setup.centres) {
    (void)j;
    if (std::abs(g - x) < (L - setup.s) / 2.0) {
      out.mass_sum += restricted_mass(phi, grid, g, setup.s);
    }
  }
  out.total = restricted_mass(phi, grid, x, L);
  if (out.mass_sum <= 0.0 || out.total <= 0.0) {
    out.holds = false;
    out.log10_ratio = -std::numeric_limits<double>::infinity();
    return out;
  }
  double log_ratio = std::log(out.mass_sum) - out.log_constant - std::log(out.total);
  out.log10_ratio = log_ratio / std::log(10.0);
  out.holds = log_ratio >= std::log(1.0 / kSlack);
  return out;
}

LiftingReport lifting_1d(const Eigen::VectorXd& V0, const Eigen::VectorXd& W,
                         const GridSpec& grid, double s, double M,
                         const CentreMap& centres, double c_minus,
                         const std::vector<double>& t_grid) {
  if (grid.dim != 1) throw std::invalid_argument("lifting_1d: 1D only");
  if (V0.size() != grid.total_nodes() || W.size() != grid.total_nodes()) {
    throw std::invalid_argument("lifting_1d: sample size mismatch");
  }
  if (!(c_minus > 0.0)) throw std::invalid_argument("lifting_1d: c_minus must be positive");
  if (t_grid.empty()) throw std::invalid_argument("lifting_1d: empty t grid");
  for (double t : t_grid) {
    if (!(t > 0.0) || !(t <= 1.0)) {
      throw std::invalid_argument("lifting_1d: t values must lie in (0,1]");
    }
  }
  // W >= c_minus on the union of the small windows (snapped to nodes)
  const double h = grid.spacing;
  const double lo = grid.center[0] - grid.side / 2.0;
  for (const auto& [j, g] : centres) {
    (void)j;
    long i0 = static_cast<long>(std::ceil((g - s / 2.0 - lo) / h - 1.0 + 1e-12));
    long i1 = static_cast<long>(std::floor((g + s / 2.0 - lo) / h - 1.0 - 1e-12));
    for (long i = std::max(i0, 0L); i <= std::min(i1, grid.nodes_per_axis - 1); ++i) {
      if (W[i] < c_minus - 1e-12) {
        throw std::invalid_argument("lifting_1d: W dips below c_minus on a window");
      }
    }
  }

  LiftingReport rep;
  auto solve = [&](double t) {
    DiscretizedHamiltonian H = assemble_from_samples(grid, V0 + t * W);
    return ground_state(H.matrix);
  };
  EigenResult g0 = solve(0.0);
  rep.lambda0 = g0.eigenvalues[0];

  std::vector<double> lambdas;
  for (double t : t_grid) lambdas.push_back(solve(t).eigenvalues[0]);

  double lam_min = rep.lambda0, lam_max = rep.lambda0;
  for (double lam : lambdas) {
    lam_min = std::min(lam_min, lam);
    lam_max = std::max(lam_max, lam);
  }
  rep.energy_window = {lam_min - 1.0, lam_max + 1.0};

  // sup over the t grid and E in I of the doubling constant; the sup over E
  // of |V - E|_inf is attained at an endpoint of I
  double worst_dev = 0.0;
  for (double t : t_grid) {
    for (double Eend : {rep.energy_window.lo, rep.energy_window.hi}) {
      double dev = 0.0;
      for (long i = 0; i < V0.size(); ++i) {
        dev = std::max(dev, std::abs(V0[i] + t * W[i] - Eend));
      }
      worst_dev = std::max(worst_dev, dev);
    }
  }
  rep.c_svi = c_sve(s, worst_dev);
  rep.log_c_uc = std::log(s / (4.0 * M)) - 2.0 * rep.c_svi * M;
  rep.c_uc = std::exp(rep.log_c_uc);

  double prev = rep.lambda0;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    LiftingRow row;
    row.t = t_grid[i];
    row.lambda_t = lambdas[i];
    row.bound = rep.lambda0 + row.t * c_minus * rep.c_uc;
    row.margin = row.lambda_t - row.bound;
    if (row.lambda_t < prev - 1e-12) rep.monotone = false;
    if (row.margin < 0.0) rep.all_hold = false;
    prev = row.lambda_t;
    rep.rows.push_back(row);
  }

  rep.slope_estimate = (lambdas.front() - rep.lambda0) / t_grid.front();
  // first-order perturbation of the ground energy; phi0 is l2-normalised so
  // the h-weights cancel
  Eigen::VectorXd phi0 = g0.vectors.col(0);
  double quad = 0.0;
  for (long i = 0; i < phi0.size(); ++i) quad += W[i] * phi0[i] * phi0[i];
  rep.slope_perturbative = quad;
  return rep;
}

}  // namespace ucp
}  // namespace deloc

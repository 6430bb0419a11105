#include "deloc/initial_scale.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "deloc/spectral.hpp"
#include "deloc/ucp1d.hpp"

namespace deloc {
namespace iscale {

void Params::validate() const {
  if (dim != 1 && dim != 2) throw std::invalid_argument("Params: dim must be 1 or 2");
  if (dim >= 2) {
    double d = static_cast<double>(dim);
    if (!(epsilon > 0.0) || !((4.0 / 3.0) * (epsilon + 1.0 / d) < 1.0)) {
      throw std::invalid_argument("Params: epsilon must satisfy (4/3)(epsilon+1/d) < 1");
    }
  }
  if (!(p > 0.0)) throw std::invalid_argument("Params: p must be positive");
  if (!(beta > 0.0) || !(beta < 1.0)) throw std::invalid_argument("Params: beta in (0,1)");
  if (!(R0 > 0.0)) throw std::invalid_argument("Params: R0 must be positive");
  if (!(delta_minus > 0.0) || !(delta_minus < delta_plus)) {
    throw std::invalid_argument("Params: need 0 < delta_minus < delta_plus");
  }
  if (!(u_minus > 0.0) || !(u_minus <= 1.0)) {
    throw std::invalid_argument("Params: u_minus must be in (0,1]");
  }
  if (!(C_d > 0.0)) throw std::invalid_argument("Params: C_d must be positive");
  if (!(zeta > 0.0) || !(zeta < 1.0)) throw std::invalid_argument("Params: zeta in (0,1)");
}

namespace {

// Largest M = L/n with n odd and M in (lo, hi].
ScaleChoice pick_scale(double L, double lo, double hi, const char* who) {
  if (!(L > 0.0)) throw std::invalid_argument(std::string(who) + ": L must be positive");
  if (!(hi > lo)) {
    throw std::invalid_argument(std::string(who) + ": admissible scale window is empty");
  }
  long n = static_cast<long>(std::ceil(L / hi - 1e-12));
  if (n < 1) n = 1;
  if (n % 2 == 0) ++n;
  while (L / static_cast<double>(n) > hi) n += 2;
  const double M = L / static_cast<double>(n);
  if (!(M > lo)) {
    throw std::invalid_argument(std::string(who) + ": no odd quotient in the scale window");
  }
  return ScaleChoice{M, n};
}

}  // namespace

ScaleChoice choose_M(double L, const Params& p) {
  p.validate();
  if (p.dim < 2) throw std::invalid_argument("choose_M: needs dim >= 2");
  if (!(L > 1.0)) throw std::invalid_argument("choose_M: L must exceed 1");
  const double d = static_cast<double>(p.dim);
  const double hi = 4.0 * p.R0 * std::pow(std::log(L), p.epsilon + 1.0 / d);
  return pick_scale(L, p.R0 + 2.0 * p.delta_plus, hi, "choose_M");
}

ScaleChoice choose_M_1d(double L, const Params& p) {
  p.validate();
  if (p.dim != 1) throw std::invalid_argument("choose_M_1d: needs dim == 1");
  if (!(L > 1.0)) throw std::invalid_argument("choose_M_1d: L must exceed 1");
  const double hi = 4.0 * p.R0 * (1.0 + p.p) * std::log(L) / std::abs(std::log(p.beta));
  return pick_scale(L, p.R0 + 2.0 * p.delta_plus, hi, "choose_M_1d");
}

double log10_c_uc(double M, const Params& p) {
  if (!(M > 0.0)) throw std::invalid_argument("c_uc: M must be positive");
  const double base = p.delta_minus / (p.C_d * M);
  if (!(base < 1.0)) {
    throw std::invalid_argument("c_uc: requires delta_minus < C_d * M");
  }
  const double expo = p.C_d + 3.0 * p.C_d * std::pow(M, 4.0 / 3.0);
  return expo * std::log10(base);
}

double c_uc(double M, const Params& p) {
  return std::pow(10.0, log10_c_uc(M, p));
}

double k_v_bound(double M, int dim) {
  if (!(M > 0.0)) throw std::invalid_argument("k_v_bound: M must be positive");
  if (dim < 1) throw std::invalid_argument("k_v_bound: bad dim");
  const double d = static_cast<double>(dim);
  return M * M * (4.0 + d * M_PI * M_PI / (9.0 * M * M));
}

double energy_threshold(double L, const Params& p) {
  return std::pow(10.0, log10_energy_threshold(L, p));
}

double log10_energy_threshold(double L, const Params& p) {
  p.validate();
  if (p.dim < 2) throw std::invalid_argument("energy_threshold: needs dim >= 2");
  const double d = static_cast<double>(p.dim);
  const double M = 4.0 * p.R0 * std::pow(std::log(L), p.epsilon + 1.0 / d);
  return std::log10(p.u_minus) + log10_c_uc(M, p);
}

namespace {
double dev_sup(const BackgroundBounds& bg) {
  // sup over V in [0, v_sup] and E in I of |V - E|, attained at the corners
  double worst = 0.0;
  for (double E : {bg.energy_window.lo, bg.energy_window.hi}) {
    worst = std::max(worst, std::max(std::abs(E), std::abs(bg.v_sup - E)));
  }
  return worst;
}
}  // namespace

double log10_energy_threshold_1d(double L, const Params& p, const BackgroundBounds& bg) {
  const double M = choose_M_1d(L, p).M;
  const double C = 2.0 * ucp::c_sve(p.delta_minus, dev_sup(bg));
  return std::log10(p.u_minus) + std::log10(p.delta_minus / (4.0 * M)) -
         C * M / std::log(10.0);
}

double energy_threshold_1d(double L, const Params& p, const BackgroundBounds& bg) {
  return std::pow(10.0, log10_energy_threshold_1d(L, p, bg));
}

double c_tilde_1d(const Params& p, const BackgroundBounds& bg) {
  p.validate();
  const double C = 2.0 * ucp::c_sve(p.delta_minus, dev_sup(bg));
  return 2.0 * C * p.R0 * (1.0 + p.p);
}

double log10_beta_ceiling_1d(const Params& p, const BackgroundBounds& bg) {
  return -c_tilde_1d(p, bg) / std::log(10.0);
}

double beta_ceiling_1d(const Params& p, const BackgroundBounds& bg) {
  return std::exp(-c_tilde_1d(p, bg));
}

GrowthMetadata growth_metadata(int dim) {
  if (dim == 1) return {1.0, {0.0, 0.5}};
  if (dim >= 2) return {4.0 / 3.0, {1.0 / 3.0, 0.375}};
  throw std::invalid_argument("growth_metadata: dim must be >= 1");
}

double event_A_probability_bound(long ell, double M, const Params& p) {
  p.validate();
  if (ell < 1 || ell % 2 == 0) {
    throw std::invalid_argument("event_A_probability_bound: ell must be odd and >= 1");
  }
  const double cells = std::floor((M - 2.0 * p.delta_plus) / p.R0);
  if (cells < 1.0) {
    throw std::invalid_argument(
        "event_A_probability_bound: needs M > R0 + 2 delta_plus");
  }
  const double d = static_cast<double>(p.dim);
  return 1.0 - std::pow(static_cast<double>(ell), d) *
                   std::pow(p.beta, std::pow(cells, d));
}

EventASample simulate_event_A(const PointSet& d0, double beta, const Vec& x,
                              double L, double M, const Params& p, Rng& rng) {
  p.validate();
  BoxDecomposition dec = box_decomposition(L, M, x, d0.dim);
  BernoulliConfig omega = sample_config(d0.points, beta, rng);
  EventASample out;
  out.occurred = true;
  const long half = (dec.ell - 1) / 2;
  std::size_t ci = 0;
  for (long i = -half; i <= half; ++i) {
    for (long j = (d0.dim == 1 ? 0 : -half); j <= (d0.dim == 1 ? 0 : half); ++j) {
      const Vec centre = dec.centers[ci++];
      Box shrunk{d0.dim, centre, M - 2.0 * p.delta_plus};
      long best = -1;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t q = 0; q < d0.points.size(); ++q) {
        if (omega.values[q] != 1.0) continue;
        if (!shrunk.contains(d0.points[q])) continue;
        double dist = euclid_dist(d0.points[q], centre, d0.dim);
        bool better = dist < best_d - kPointTol;
        if (!better && best >= 0 && dist < best_d + kPointTol) {
          const Vec& a = d0.points[q];
          const Vec& b = d0.points[static_cast<std::size_t>(best)];
          better = a[0] < b[0] - kPointTol ||
                   (std::abs(a[0] - b[0]) <= kPointTol && a[1] < b[1]);
        }
        if (better) {
          best = static_cast<long>(q);
          best_d = dist;
        }
      }
      if (best < 0) {
        out.occurred = false;
        out.chosen.clear();
        return out;
      }
      out.chosen[{i, j}] = d0.points[static_cast<std::size_t>(best)];
    }
  }
  return out;
}

EventAStats event_A_statistics(const PointSet& d0, double beta, const Vec& x,
                               double L, double M, const Params& p, int n_trials,
                               std::uint64_t seed) {
  if (n_trials < 1) throw std::invalid_argument("event_A_statistics: need trials");
  EventAStats st;
  st.n_trials = n_trials;
  for (int t = 0; t < n_trials; ++t) {
    Rng rng(trial_seed(seed, static_cast<std::uint64_t>(t)));
    if (simulate_event_A(d0, beta, x, L, M, p, rng).occurred) ++st.n_occurred;
  }
  st.frequency = static_cast<double>(st.n_occurred) / n_trials;
  st.ci = wilson95(static_cast<std::size_t>(st.n_occurred),
                   static_cast<std::size_t>(n_trials));
  BoxDecomposition dec = box_decomposition(L, M, x, d0.dim);
  st.bound = event_A_probability_bound(dec.ell, M, p);
  return st;
}

Eigen::VectorXd thinned_potential(const ChosenMap& chosen, const SingleSitePotential& u,
                                  const GridSpec& grid) {
  std::vector<Vec> sites;
  std::vector<double> couplings;
  for (const auto& [k, pt] : chosen) {
    (void)k;
    sites.push_back(pt);
    couplings.push_back(1.0);
  }
  return assemble_coupled_potential(sites, couplings, u, grid);
}

LiftCheck lifting_check(const PointSet& base, const SingleSitePotential& u,
                        const ChosenMap& chosen, const Vec& x, double L, double M,
                        const GridSpec& grid, const Params& p) {
  p.validate();
  if (chosen.empty()) throw std::invalid_argument("lifting_check: empty selection");
  if (sup_dist(grid.center, x, grid.dim) > kPointTol ||
      std::abs(grid.side - L) > 1e-9 * L) {
    throw std::invalid_argument("lifting_check: grid does not match the box");
  }
  box_decomposition(L, M, x, grid.dim);  // validates the L/M quotient
  Eigen::VectorXd V0 = assemble_potential(base, u, grid);
  Eigen::VectorXd W = thinned_potential(chosen, u, grid);
  DiscretizedHamiltonian H0 = assemble_from_samples(grid, V0);
  DiscretizedHamiltonian H1 = assemble_from_samples(grid, V0 + W);
  LiftCheck out;
  out.base_energy = ground_state(H0.matrix).eigenvalues[0];
  out.lifted_energy = ground_state(H1.matrix).eigenvalues[0];
  out.lift = out.lifted_energy - out.base_energy;
  if (p.dim >= 2) {
    out.log10_bound = std::log10(p.u_minus) + log10_c_uc(M, p);
  } else {
    // 1D continuation constant from the realised box data
    double v_sup = (V0 + W).maxCoeff();
    Interval I{std::min(out.base_energy, out.lifted_energy) - 1.0,
               std::max(out.base_energy, out.lifted_energy) + 1.0};
    double C = 2.0 * ucp::c_sve(p.delta_minus, dev_sup(BackgroundBounds{v_sup, I}));
    out.log10_bound = std::log10(p.u_minus) +
                      std::log10(p.delta_minus / (4.0 * M)) - C * M / std::log(10.0);
  }
  out.bound = std::pow(10.0, out.log10_bound);
  out.holds = out.lift >= out.bound;
  return out;
}

GridSpec ExperimentModel::grid_for(const Vec& x, double L) const {
  double h = spacing > 0.0 ? spacing : u.delta_minus() / 4.0;
  double cells = std::ceil(L / h - 1e-9);
  return GridSpec::make(base.dim, x, L, L / cells);
}

ExperimentReport ilse_experiment(const ExperimentModel& model, const Vec& x, double L,
                                 const Params& p, int n_trials, std::uint64_t seed,
                                 int threads) {
  p.validate();
  if (n_trials < 1) throw std::invalid_argument("ilse_experiment: need trials");
  ExperimentReport rep;
  rep.params = p;
  rep.seed = seed;
  rep.L = L;
  ScaleChoice sc = p.dim >= 2 ? choose_M(L, p) : choose_M_1d(L, p);
  rep.M = sc.M;
  rep.ell = sc.ell;

  GridSpec grid = model.grid_for(x, L);
  Eigen::VectorXd V0 = assemble_potential(model.base, model.u, grid);
  DiscretizedHamiltonian H0 = assemble_from_samples(grid, V0);
  rep.base_energy = eigs_near(H0.matrix, below_spectrum_shift(H0.matrix), 1)
                        .eigenvalues[0];

  if (p.dim >= 2) {
    rep.log10_threshold_energy = log10_energy_threshold(L, p);
    rep.threshold_energy = energy_threshold(L, p);
  } else {
    std::vector<double> all_on(model.d0.points.size(), 1.0);
    Eigen::VectorXd Vmax =
        V0 + assemble_coupled_potential(model.d0.points, all_on, model.u, grid);
    BackgroundBounds bg{Vmax.maxCoeff(),
                        {rep.base_energy - 1.0, rep.base_energy + 2.0}};
    rep.log10_threshold_energy = log10_energy_threshold_1d(L, p, bg);
    rep.threshold_energy = energy_threshold_1d(L, p, bg);
    rep.log10_beta_ceiling = log10_beta_ceiling_1d(p, bg);
  }
  rep.growth = growth_metadata(p.dim);
  rep.mass = mass_from_energy(std::max(rep.threshold_energy, 0.0));
  rep.p_exponent = p.p;
  rep.target_probability = 1.0 - std::pow(L, -p.p * p.dim);
  rep.n_trials = n_trials;

  std::vector<char> pass(static_cast<std::size_t>(n_trials), 0);
  std::vector<double> lifts(static_cast<std::size_t>(n_trials), 0.0);
  auto run_range = [&](int lo, int hi) {
    for (int t = lo; t < hi; ++t) {
      Rng rng(trial_seed(seed, static_cast<std::uint64_t>(t)));
      BernoulliConfig omega = sample_config(model.d0.points, p.beta, rng);
      Eigen::VectorXd V =
          V0 + assemble_coupled_potential(omega.sites, omega.values, model.u, grid);
      DiscretizedHamiltonian H = assemble_from_samples(grid, std::move(V));
      double lam = eigs_near(H.matrix, below_spectrum_shift(H.matrix), 1)
                       .eigenvalues[0];
      lifts[static_cast<std::size_t>(t)] = lam - rep.base_energy;
      pass[static_cast<std::size_t>(t)] =
          lam >= rep.base_energy + rep.threshold_energy ? 1 : 0;
    }
  };
  if (threads <= 1) {
    run_range(0, n_trials);
  } else {
    std::vector<std::thread> pool;
    int chunk = (n_trials + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
      int lo = w * chunk, hi = std::min(n_trials, (w + 1) * chunk);
      if (lo < hi) pool.emplace_back(run_range, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  rep.n_pass = static_cast<int>(std::count(pass.begin(), pass.end(), 1));
  rep.p_hat = static_cast<double>(rep.n_pass) / n_trials;
  rep.ci = wilson95(static_cast<std::size_t>(rep.n_pass),
                    static_cast<std::size_t>(n_trials));
  std::vector<double> sorted = lifts;
  std::sort(sorted.begin(), sorted.end());
  rep.lift_min = sorted.front();
  rep.lift_max = sorted.back();
  std::size_t mid = sorted.size() / 2;
  rep.lift_median = sorted.size() % 2 == 1
                        ? sorted[mid]
                        : 0.5 * (sorted[mid - 1] + sorted[mid]);
  return rep;
}

double mass_from_energy(double E) {
  if (E < 0.0) throw std::invalid_argument("mass_from_energy: negative energy");
  return std::sqrt(E / 64.0);
}

CtWindowReport ct_window_check(const DiscretizedHamiltonian& H, double E0,
                               double Ecal, double zeta,
                               const std::vector<std::pair<Vec, Vec>>& pairs,
                               double width) {
  if (!(Ecal > 0.0)) throw std::invalid_argument("ct_window_check: threshold must be positive");
  CtWindowReport rep;
  rep.lambda0 = ground_state(H.matrix).eigenvalues[0];
  rep.threshold_energy = Ecal;
  if (rep.lambda0 < E0 + Ecal) {
    throw std::invalid_argument("ct_window_check: spectrum not lifted past E0 + Ecal");
  }
  const double L = H.grid.side;
  rep.resolvent_ceiling_ok = 2.0 / Ecal <= std::exp(std::pow(L, 1.0 - zeta));
  const double slack = 1.1;
  for (double E : {E0, E0 + Ecal / 4.0, E0 + Ecal / 2.0}) {
    CtWindowRow row;
    row.energy = E;
    row.resolvent_measured = resolvent_norm(H.matrix, E);
    row.resolvent_bound = 2.0 / Ecal;
    row.holds = row.resolvent_measured <= row.resolvent_bound;
    for (const auto& [y, z] : pairs) {
      GoodBoxPair pr;
      pr.y = y;
      pr.z = z;
      pr.distance = euclid_dist(y, z, H.grid.dim);
      pr.measured = local_resolvent_block(H, E, y, z, width).value;
      pr.bound = (8.0 / (3.0 * Ecal)) * std::exp(-std::sqrt(Ecal / 32.0) * pr.distance);
      pr.holds = pr.measured <= pr.bound * slack;
      row.holds = row.holds && pr.holds;
      row.blocks.push_back(pr);
    }
    rep.all_hold = rep.all_hold && row.holds;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace iscale
}  // namespace deloc

#include "deloc/good_boxes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace deloc {

GoodBoxReport is_good_box(const DiscretizedHamiltonian& H, const GoodBoxParams& p) {
  if (!(p.decay_rate > 0.0)) throw std::invalid_argument("is_good_box: m must be positive");
  if (!(p.zeta > 0.0) || !(p.zeta < 1.0)) {
    throw std::invalid_argument("is_good_box: zeta must be in (0,1)");
  }
  const double L = H.grid.side;
  const int d = H.grid.dim;
  GoodBoxReport rep;
  rep.resolvent_bound = std::exp(std::pow(L, 1.0 - p.zeta));

  try {
    rep.resolvent_measured = resolvent_norm(H.matrix, p.energy);
  } catch (const SpectrumHitError&) {
    rep.good = false;
    rep.reason = "spectrum hit";
    return rep;
  }
  if (rep.resolvent_measured > rep.resolvent_bound) {
    rep.good = false;
    rep.reason = "resolvent";
    return rep;
  }

  // block centres: x + (subgrid_step*L) k, blocks fully inside the box
  const double step = p.subgrid_step * L;
  const double w = p.block_width * L;
  long kmax = static_cast<long>(std::floor((L / 2.0 - w / 2.0) / step));
  std::vector<Vec> centres;
  for (long i = -kmax; i <= kmax; ++i) {
    if (d == 1) {
      centres.push_back({H.grid.center[0] + step * static_cast<double>(i), 0.0});
    } else {
      for (long j = -kmax; j <= kmax; ++j) {
        centres.push_back({H.grid.center[0] + step * static_cast<double>(i),
                           H.grid.center[1] + step * static_cast<double>(j)});
      }
    }
  }
  struct Cand { std::size_t a, b; double dist; };
  std::vector<Cand> cands;
  for (std::size_t a = 0; a < centres.size(); ++a) {
    for (std::size_t b = a + 1; b < centres.size(); ++b) {
      double dist = euclid_dist(centres[a], centres[b], d);
      if (dist >= p.min_pair_dist * L) cands.push_back({a, b, dist});
    }
  }
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Cand& u, const Cand& v) { return u.dist > v.dist; });
  if (static_cast<int>(cands.size()) > p.pair_budget) {
    cands.resize(static_cast<std::size_t>(p.pair_budget));
  }

  rep.good = true;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& c : cands) {
    GoodBoxPair pr;
    pr.y = centres[c.a];
    pr.z = centres[c.b];
    pr.distance = c.dist;
    try {
      pr.measured = local_resolvent_block(H, p.energy, pr.y, pr.z, w).value;
    } catch (const SpectrumHitError&) {
      rep.good = false;
      rep.reason = "spectrum hit";
      return rep;
    }
    pr.bound = std::exp(-p.decay_rate * c.dist);
    pr.holds = pr.measured <= pr.bound;
    double margin = std::log(pr.bound) - std::log(std::max(pr.measured, 1e-300));
    if (margin < worst_margin) {
      worst_margin = margin;
      rep.worst_pair = static_cast<int>(rep.pairs.size());
    }
    if (!pr.holds) {
      rep.good = false;
      rep.reason = "decay";
    }
    rep.pairs.push_back(pr);
  }
  return rep;
}

GridSpec DisorderModel::grid_for(const Vec& x, double L) const {
  double h = spacing > 0.0 ? spacing : u.delta_minus() / 4.0;
  // snap so side/spacing is an integer without coarsening past the request
  double cells = std::ceil(L / h - 1e-9);
  return GridSpec::make(base.dim, x, L, L / cells);
}

DiscretizedHamiltonian DisorderModel::realise(const Vec& x, double L, Rng& rng) const {
  GridSpec grid = grid_for(x, L);
  BernoulliConfig omega = sample_config(extra.points, beta, rng);
  DelonePair pair{base, extra, std::nullopt};
  return assemble_hamiltonian(pair, u, omega, std::nullopt, grid);
}

GoodScaleReport good_scale_probability(const DisorderModel& model, const Vec& x,
                                       double L, const GoodBoxParams& params,
                                       double p, int n_trials, std::uint64_t seed,
                                       int threads) {
  if (n_trials < 1) throw std::invalid_argument("good_scale_probability: need trials");
  if (threads < 1) threads = 1;
  std::vector<char> good(static_cast<std::size_t>(n_trials), 0);
  auto run_range = [&](int lo, int hi) {
    for (int t = lo; t < hi; ++t) {
      Rng rng(trial_seed(seed, static_cast<std::uint64_t>(t)));
      DiscretizedHamiltonian H = model.realise(x, L, rng);
      good[static_cast<std::size_t>(t)] = is_good_box(H, params).good ? 1 : 0;
    }
  };
  if (threads == 1) {
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
  GoodScaleReport rep;
  rep.L = L;
  rep.x = x;
  rep.params = params;
  rep.p_exponent = p;
  rep.n_trials = n_trials;
  rep.n_good = static_cast<int>(std::count(good.begin(), good.end(), 1));
  rep.p_hat = static_cast<double>(rep.n_good) / n_trials;
  rep.ci = wilson95(static_cast<std::size_t>(rep.n_good),
                    static_cast<std::size_t>(n_trials));
  rep.threshold = 1.0 - std::pow(L, -p * model.base.dim);
  rep.seed = seed;
  if (rep.ci.lo >= rep.threshold) {
    rep.verdict = "meets";
  } else if (rep.ci.hi < rep.threshold) {
    rep.verdict = "fails";
  } else {
    rep.verdict = "inconclusive";
  }
  return rep;
}

std::vector<double> scale_sequence(double L0, int n) {
  if (!(L0 > 0.0) || n < 0) throw std::invalid_argument("scale_sequence: bad arguments");
  std::vector<double> out;
  double L = L0;
  for (int k = 0; k <= n; ++k) {
    out.push_back(L);
    L *= 2.0;
  }
  return out;
}

}  // namespace deloc

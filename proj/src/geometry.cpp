#include "deloc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace deloc {

namespace {

void check_dim(int dim, const char* where) {
  if (dim != 1 && dim != 2) {
    throw std::invalid_argument(std::string(where) + ": dim must be 1 or 2");
  }
}

bool lex_less(const Vec& a, const Vec& b, int dim) {
  for (int i = 0; i < dim; ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

// Integer j range with lo < a*j < hi (strict).
std::pair<long, long> strict_index_range(double a, double lo, double hi) {
  long jmin = static_cast<long>(std::ceil(lo / a));
  while (a * static_cast<double>(jmin) <= lo) ++jmin;
  while (a * static_cast<double>(jmin - 1) > lo) --jmin;
  long jmax = static_cast<long>(std::floor(hi / a));
  while (a * static_cast<double>(jmax) >= hi) --jmax;
  while (a * static_cast<double>(jmax + 1) < hi) ++jmax;
  return {jmin, jmax};
}

}  // namespace

double sup_dist(const Vec& a, const Vec& b, int dim) {
  double m = 0.0;
  for (int i = 0; i < dim; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double euclid_dist(const Vec& a, const Vec& b, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

bool Box::contains(const Vec& p) const {
  return sup_dist(p, center, dim) < side / 2.0;
}

bool Box::contains_closure(const Vec& p, double tol) const {
  return sup_dist(p, center, dim) <= side / 2.0 + tol;
}

bool Box::contains_box(const Box& inner) const {
  if (inner.dim != dim) return false;
  for (int i = 0; i < dim; ++i) {
    if (std::abs(inner.center[i] - center[i]) + inner.side / 2.0 >
        side / 2.0 + kPointTol) {
      return false;
    }
  }
  return true;
}

Box Box::shrunk(double per_side) const { return {dim, center, side - 2.0 * per_side}; }
Box Box::dilated(double per_side) const { return {dim, center, side + 2.0 * per_side}; }

PointSet make_point_set(int dim, std::vector<Vec> points, Box window,
                        std::optional<DeloneParams> params) {
  check_dim(dim, "make_point_set");
  if (window.dim != dim) throw std::invalid_argument("make_point_set: window dim mismatch");
  if (!(window.side > 0.0)) throw std::invalid_argument("make_point_set: window side must be positive");
  for (const auto& p : points) {
    if (!window.contains_closure(p)) {
      throw std::invalid_argument("make_point_set: point outside window closure");
    }
  }
  std::vector<Vec> sorted = points;
  std::sort(sorted.begin(), sorted.end(),
            [dim](const Vec& a, const Vec& b) { return lex_less(a, b, dim); });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sup_dist(sorted[i - 1], sorted[i], dim) <= kPointTol) {
      throw std::invalid_argument("make_point_set: duplicate point");
    }
  }
  PointSet ps{dim, std::move(points), window, params};
  if (params) {
    if (!(params->r > 0.0) || params->R < params->r) {
      throw std::invalid_argument("make_point_set: need 0 < r <= R");
    }
    // The verifier needs a non-degenerate test region; tiny patches carry
    // their params unverified.
    if (window.side > 2.0 * params->R) {
      DeloneReport rep = verify_delone(ps, params->r, params->R);
      if (!rep.ok()) throw std::invalid_argument("make_point_set: params fail verification");
    }
  }
  return ps;
}

DeloneReport verify_delone(const PointSet& ps, double r, double R) {
  check_dim(ps.dim, "verify_delone");
  if (!(r > 0.0) || !(R >= r)) throw std::invalid_argument("verify_delone: need 0 < r <= R");
  if (ps.points.empty()) throw std::invalid_argument("verify_delone: empty point set");
  if (!(ps.window.side > 2.0 * R)) {
    throw std::invalid_argument("verify_delone: window side must exceed 2R");
  }
  const int d = ps.dim;
  DeloneReport rep;
  rep.test_region = ps.window.shrunk(R / 2.0);

  // min pairwise sup-distance < r  <=>  some open cube of side r holds 2 points
  // (up to the coordinate tolerance, so exact lattice spacings survive rounding)
  rep.uniform_discrete = true;
  for (std::size_t i = 0; i < ps.points.size() && rep.uniform_discrete; ++i) {
    for (std::size_t j = i + 1; j < ps.points.size(); ++j) {
      if (sup_dist(ps.points[i], ps.points[j], d) < r - kPointTol) {
        rep.uniform_discrete = false;
        Vec mid{0.0, 0.0};
        for (int c = 0; c < d; ++c) mid[c] = 0.5 * (ps.points[i][c] + ps.points[j][c]);
        rep.discreteness_witness = mid;
        break;
      }
    }
  }

  // Deepest hole f(x) = min_p sup_dist(x,p) over the closed test region.
  // f is 1-Lipschitz, so a grid scan at spacing delta certifies
  //   max f <= (scan max) + delta/2.
  // Candidates that could still reach R/2 are refined locally.
  auto f = [&](const Vec& x) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : ps.points) best = std::min(best, sup_dist(x, p, d));
    return best;
  };
  const Box& reg = rep.test_region;
  double delta = R / 4.0;
  std::vector<Vec> cand;
  {
    std::array<std::pair<long, long>, 2> ranges;
    for (int c = 0; c < d; ++c) {
      long n = static_cast<long>(std::floor(reg.side / 2.0 / delta));
      ranges[c] = {-n, n};
    }
    for (long i = ranges[0].first; i <= ranges[0].second; ++i) {
      if (d == 1) {
        cand.push_back({reg.center[0] + delta * static_cast<double>(i), 0.0});
      } else {
        for (long j = ranges[1].first; j <= ranges[1].second; ++j) {
          cand.push_back({reg.center[0] + delta * static_cast<double>(i),
                          reg.center[1] + delta * static_cast<double>(j)});
        }
      }
    }
    // Corners of the closed region can carry the maximum.
    const double h = reg.side / 2.0;
    if (d == 1) {
      cand.push_back({reg.center[0] - h, 0.0});
      cand.push_back({reg.center[0] + h, 0.0});
    } else {
      for (int sx : {-1, 1})
        for (int sy : {-1, 1})
          cand.push_back({reg.center[0] + sx * h, reg.center[1] + sy * h});
    }
  }
  double best_f = 0.0;
  Vec best_x = reg.center;
  bool decided = false;
  for (int iter = 0; iter < 40 && !decided; ++iter) {
    for (const auto& x : cand) {
      double v = f(x);
      if (v > best_f) {
        best_f = v;
        best_x = x;
      }
    }
    if (best_f >= R / 2.0) break;                     // definite violation
    if (best_f + delta / 2.0 < R / 2.0) { decided = true; break; }  // certified
    std::vector<Vec> next;
    for (const auto& x : cand) {
      if (f(x) + delta / 2.0 < R / 2.0) continue;  // cannot violate nearby
      const double step = delta / 2.0;
      for (int i = -1; i <= 1; ++i) {
        if (d == 1) {
          Vec y{x[0] + i * step, 0.0};
          if (std::abs(y[0] - reg.center[0]) <= reg.side / 2.0) next.push_back(y);
        } else {
          for (int j = -1; j <= 1; ++j) {
            Vec y{x[0] + i * step, x[1] + j * step};
            if (std::abs(y[0] - reg.center[0]) <= reg.side / 2.0 &&
                std::abs(y[1] - reg.center[1]) <= reg.side / 2.0) {
              next.push_back(y);
            }
          }
        }
      }
    }
    cand = std::move(next);
    delta /= 2.0;
    if (cand.empty()) { decided = true; break; }
  }
  rep.deepest_hole = best_f;
  rep.relatively_dense = best_f < R / 2.0;
  if (!rep.relatively_dense) rep.denseness_witness = best_x;
  return rep;
}

PointSet generate_lattice(int dim, double a, const Box& window) {
  check_dim(dim, "generate_lattice");
  if (!(a > 0.0)) throw std::invalid_argument("generate_lattice: spacing must be positive");
  std::array<std::pair<long, long>, 2> rng;
  for (int c = 0; c < dim; ++c) {
    rng[c] = strict_index_range(a, window.center[c] - window.side / 2.0,
                                window.center[c] + window.side / 2.0);
  }
  std::vector<Vec> pts;
  for (long i = rng[0].first; i <= rng[0].second; ++i) {
    if (dim == 1) {
      pts.push_back({a * static_cast<double>(i), 0.0});
    } else {
      for (long j = rng[1].first; j <= rng[1].second; ++j) {
        pts.push_back({a * static_cast<double>(i), a * static_cast<double>(j)});
      }
    }
  }
  return make_point_set(dim, std::move(pts), window, DeloneParams{a, 2.0 * a});
}

PointSet generate_perturbed_lattice(int dim, double rho, const Box& window, Rng& rng) {
  check_dim(dim, "generate_perturbed_lattice");
  if (!(rho > 0.0) || !(rho < 1.0)) {
    throw std::invalid_argument("generate_perturbed_lattice: rho must be in (0,1)");
  }
  PointSet lattice = generate_lattice(dim, 1.0, window);
  std::vector<Vec> pts;
  pts.reserve(lattice.points.size());
  const double w = 1.0 - rho;  // displacement cube side
  for (const auto& g : lattice.points) {
    Vec p = g;
    for (int c = 0; c < dim; ++c) p[c] += w * (rng.uniform() - 0.5);
    pts.push_back(p);
  }
  Box out = window.dilated(w / 2.0);
  return make_point_set(dim, std::move(pts), out, DeloneParams{rho, 2.0 - rho});
}

PointSet thin_by_percolation(const PointSet& ps, double q, Rng& rng) {
  if (!(q >= 0.0) || !(q <= 1.0)) {
    throw std::invalid_argument("thin_by_percolation: q must be in [0,1]");
  }
  std::vector<Vec> pts;
  for (const auto& p : ps.points) {
    if (rng.uniform() < q) pts.push_back(p);
  }
  return make_point_set(ps.dim, std::move(pts), ps.window, std::nullopt);
}

DelonePair make_delone_pair(const PointSet& base, Rng& rng) {
  if (!base.params) throw std::invalid_argument("make_delone_pair: base needs Delone params");
  const double r = base.params->r;
  const double R = base.params->R;
  const int d = base.dim;
  std::vector<Vec> extra;
  extra.reserve(base.points.size());
  for (const auto& g : base.points) {
    // rejection sample from the cube shell: sup-distance in [r/8, r/4)
    for (;;) {
      Vec off{0.0, 0.0};
      for (int c = 0; c < d; ++c) off[c] = (r / 2.0) * (rng.uniform() - 0.5);
      double s = 0.0;
      for (int c = 0; c < d; ++c) s = std::max(s, std::abs(off[c]));
      if (s >= r / 8.0) {
        Vec p = g;
        for (int c = 0; c < d; ++c) p[c] += off[c];
        extra.push_back(p);
        break;
      }
    }
  }
  Box ewin = base.window.dilated(r / 4.0);
  // D' inherits (r/2, R + r/2); attach only if the patch actually verifies,
  // boundary alignment can spoil it on small windows.
  PointSet eset;
  try {
    eset = make_point_set(d, extra, ewin, DeloneParams{r / 2.0, R + r / 2.0});
  } catch (const std::invalid_argument&) {
    eset = make_point_set(d, extra, ewin, std::nullopt);
  }
  return DelonePair{base, std::move(eset), DeloneParams{r / 8.0, R}};
}

FreeSiteSplit free_sites_split(const PointSet& extra, double R_prime) {
  check_dim(extra.dim, "free_sites_split");
  if (!(R_prime > 0.0)) throw std::invalid_argument("free_sites_split: R' must be positive");
  const int d = extra.dim;
  const double step = 2.0 * R_prime;
  std::array<std::pair<long, long>, 2> rng;
  for (int c = 0; c < d; ++c) {
    rng[c] = strict_index_range(step, extra.window.center[c] - extra.window.side / 2.0,
                                extra.window.center[c] + extra.window.side / 2.0);
  }
  std::vector<bool> chosen(extra.points.size(), false);
  auto handle_cell = [&](const Vec& z) {
    Box cell{d, z, R_prime};
    long best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < extra.points.size(); ++i) {
      if (!cell.contains(extra.points[i])) continue;
      double dist = euclid_dist(extra.points[i], z, d);
      if (dist < best_d - kPointTol ||
          (dist < best_d + kPointTol && best >= 0 &&
           lex_less(extra.points[i], extra.points[best], d))) {
        best = static_cast<long>(i);
        best_d = dist;
      }
    }
    if (best < 0) {
      if (extra.window.contains_box(cell)) {
        throw std::invalid_argument("free_sites_split: not relatively dense at claimed R'");
      }
      return;  // cell sticks out of the window; the patch is silent there
    }
    chosen[static_cast<std::size_t>(best)] = true;
  };
  for (long i = rng[0].first; i <= rng[0].second; ++i) {
    if (d == 1) {
      handle_cell({step * static_cast<double>(i), 0.0});
    } else {
      for (long j = rng[1].first; j <= rng[1].second; ++j) {
        handle_cell({step * static_cast<double>(i), step * static_cast<double>(j)});
      }
    }
  }
  std::vector<Vec> d0, s;
  for (std::size_t i = 0; i < extra.points.size(); ++i) {
    (chosen[i] ? d0 : s).push_back(extra.points[i]);
  }
  FreeSiteSplit split;
  std::optional<DeloneParams> d0_params = DeloneParams{R_prime, 3.0 * R_prime};
  try {
    split.d0 = make_point_set(d, d0, extra.window, d0_params);
  } catch (const std::invalid_argument&) {
    split.d0 = make_point_set(d, d0, extra.window, std::nullopt);
  }
  split.s = make_point_set(d, s, extra.window, std::nullopt);
  return split;
}

double hausdorff_distance(const std::vector<Vec>& a, const std::vector<Vec>& b, int dim) {
  check_dim(dim, "hausdorff_distance");
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("hausdorff_distance: empty set");
  }
  auto directed = [dim](const std::vector<Vec>& from, const std::vector<Vec>& to) {
    double worst = 0.0;
    for (const auto& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to) best = std::min(best, euclid_dist(p, q, dim));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

PatchConvergenceReport patch_convergence_check(const std::vector<PointSet>& seq,
                                               const PointSet& limit, double l,
                                               double tol) {
  if (seq.empty()) throw std::invalid_argument("patch_convergence_check: empty sequence");
  const int d = limit.dim;
  // largest cube centred at 0 inside a window
  auto cube_max = [d](const Box& w) {
    double m = std::numeric_limits<double>::infinity();
    for (int c = 0; c < d; ++c) m = std::min(m, w.side - 2.0 * std::abs(w.center[c]));
    return m;
  };
  double Lmax = cube_max(limit.window);
  for (const auto& ps : seq) {
    if (ps.dim != d) throw std::invalid_argument("patch_convergence_check: dim mismatch");
    Lmax = std::min(Lmax, cube_max(ps.window));
  }
  if (!(Lmax > l)) {
    throw std::invalid_argument("patch_convergence_check: windows too small for l");
  }
  auto clip = [d](const PointSet& ps, double L) {
    Box cube{d, {0.0, 0.0}, L};
    std::vector<Vec> out;
    for (const auto& p : ps.points)
      if (cube.contains(p)) out.push_back(p);
    return out;
  };
  PatchConvergenceReport rep;
  const int n_cand = 16;
  for (int j = 1; j <= n_cand; ++j) {
    double L = l + (Lmax - l) * static_cast<double>(j) / n_cand;
    std::vector<Vec> lim = clip(limit, L);
    std::vector<double> dists;
    for (const auto& ps : seq) {
      std::vector<Vec> cur = clip(ps, L);
      if (cur.empty() && lim.empty()) {
        dists.push_back(0.0);
      } else if (cur.empty() || lim.empty()) {
        dists.push_back(std::numeric_limits<double>::infinity());
      } else {
        dists.push_back(hausdorff_distance(cur, lim, d));
      }
    }
    if (dists.back() <= tol) {
      rep.L_found = L;
      rep.distances = std::move(dists);
      return rep;
    }
    rep.distances = std::move(dists);  // keep the last trace for diagnostics
  }
  return rep;
}

PatternCount count_pattern_translates(const PointSet& ps, const Box& K,
                                      const Box& search_window) {
  const int d = ps.dim;
  if (!ps.window.contains_box(K)) {
    throw std::invalid_argument("count_pattern_translates: K not inside the window");
  }
  std::vector<Vec> pattern;
  for (const auto& p : ps.points)
    if (K.contains(p)) pattern.push_back(p);

  // candidate shifts: all pairwise differences (0 included via p - p)
  std::vector<Vec> cands;
  for (const auto& p : ps.points) {
    for (const auto& q : ps.points) {
      Vec y{0.0, 0.0};
      for (int c = 0; c < d; ++c) y[c] = p[c] - q[c];
      cands.push_back(y);
    }
  }
  std::sort(cands.begin(), cands.end(),
            [d](const Vec& a, const Vec& b) { return lex_less(a, b, d); });
  cands.erase(std::unique(cands.begin(), cands.end(),
                          [d](const Vec& a, const Vec& b) {
                            return sup_dist(a, b, d) <= kPatternTol;
                          }),
              cands.end());

  PatternCount out;
  for (const auto& y : cands) {
    if (!search_window.contains(y)) continue;
    Box shifted{d, {K.center[0] + y[0], K.center[1] + y[1]}, K.side};
    if (!ps.window.contains_box(shifted)) continue;  // not verifiable
    std::vector<Vec> there;
    for (const auto& p : ps.points)
      if (shifted.contains(p)) there.push_back(p);
    if (there.size() != pattern.size()) continue;
    bool match = true;
    for (const auto& p : pattern) {
      Vec yp{p[0] + y[0], p[1] + y[1]};
      bool found = false;
      for (const auto& q : there) {
        if (sup_dist(yp, q, d) <= kPatternTol) { found = true; break; }
      }
      if (!found) { match = false; break; }
    }
    if (match) {
      ++out.count;
      out.witnesses.push_back(y);
    }
  }
  return out;
}

PointSet periodize(const PointSet& ps, double ell, std::optional<Box> out_window) {
  if (!(ell > 0.0)) throw std::invalid_argument("periodize: ell must be positive");
  const int d = ps.dim;
  Box motif_box{d, {0.0, 0.0}, ell};
  std::vector<Vec> motif;
  for (const auto& p : ps.points)
    if (motif_box.contains(p)) motif.push_back(p);
  if (motif.empty()) throw std::invalid_argument("periodize: empty motif");
  Box win = out_window.value_or(ps.window);
  std::vector<Vec> pts;
  std::array<std::pair<long, long>, 2> rng;
  for (int c = 0; c < d; ++c) {
    double lo = win.center[c] - win.side / 2.0 - ell;
    double hi = win.center[c] + win.side / 2.0 + ell;
    rng[c] = {static_cast<long>(std::floor(lo / ell)), static_cast<long>(std::ceil(hi / ell))};
  }
  auto emit = [&](long i, long j) {
    for (const auto& m : motif) {
      Vec p{m[0] + ell * static_cast<double>(i), m[1] + ell * static_cast<double>(j)};
      if (win.contains(p)) pts.push_back(p);
    }
  };
  for (long i = rng[0].first; i <= rng[0].second; ++i) {
    if (d == 1) {
      emit(i, 0);
    } else {
      for (long j = rng[1].first; j <= rng[1].second; ++j) emit(i, j);
    }
  }
  return make_point_set(d, std::move(pts), win, std::nullopt);
}

PointSet translate(const PointSet& ps, const Vec& shift) {
  std::vector<Vec> pts = ps.points;
  for (auto& p : pts)
    for (int c = 0; c < ps.dim; ++c) p[c] += shift[c];
  Box win = ps.window;
  for (int c = 0; c < ps.dim; ++c) win.center[c] += shift[c];
  return make_point_set(ps.dim, std::move(pts), win, ps.params);
}

BoxDecomposition box_decomposition(double L, double M, const Vec& x, int dim) {
  check_dim(dim, "box_decomposition");
  if (!(M > 0.0) || !(L > 0.0)) throw std::invalid_argument("box_decomposition: L, M must be positive");
  const double q = L / M;
  const double rq = std::round(q);
  if (std::abs(q - rq) > 1e-9 * std::max(1.0, q) || rq < 1.0) {
    throw std::invalid_argument("box_decomposition: L/M is not a natural number");
  }
  long ell = static_cast<long>(rq);
  if (ell % 2 == 0) throw std::invalid_argument("box_decomposition: L/M must be odd");
  BoxDecomposition out;
  out.ell = ell;
  const long half = (ell - 1) / 2;
  for (long i = -half; i <= half; ++i) {
    if (dim == 1) {
      out.centers.push_back({x[0] + M * static_cast<double>(i), 0.0});
    } else {
      for (long j = -half; j <= half; ++j) {
        out.centers.push_back({x[0] + M * static_cast<double>(i),
                               x[1] + M * static_cast<double>(j)});
      }
    }
  }
  return out;
}

}  // namespace deloc

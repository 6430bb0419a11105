#include "deloc/spectral.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace deloc {

namespace {

struct Candidate {
  double lambda;
  Eigen::VectorXd vec;
  double residual;
};

// pick k candidates closest to E, equidistant ties toward the smaller value
std::vector<Candidate> select_near(std::vector<Candidate> all, double E, int k) {
  std::stable_sort(all.begin(), all.end(), [E](const Candidate& a, const Candidate& b) {
    double da = std::abs(a.lambda - E), db = std::abs(b.lambda - E);
    if (da != db) return da < db;
    return a.lambda < b.lambda;
  });
  if (static_cast<int>(all.size()) > k) all.resize(k);
  std::sort(all.begin(), all.end(),
            [](const Candidate& a, const Candidate& b) { return a.lambda < b.lambda; });
  return all;
}

EigenResult pack(std::vector<Candidate> sel, double E, long n) {
  EigenResult out;
  out.vectors.resize(n, static_cast<long>(sel.size()));
  for (std::size_t i = 0; i < sel.size(); ++i) {
    out.eigenvalues.push_back(sel[i].lambda);
    out.residuals.push_back(sel[i].residual);
    out.vectors.col(static_cast<long>(i)) = sel[i].vec;
  }
  for (double lam : out.eigenvalues) {
    if (std::abs(lam - E) <= 1e-12 * std::max(1.0, std::abs(E))) out.exact_hit = true;
  }
  return out;
}

EigenResult dense_eigs_near(const SpMat& H, double E, int k) {
  Eigen::MatrixXd D(H);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D);
  if (es.info() != Eigen::Success) throw std::runtime_error("dense eigensolver failed");
  std::vector<Candidate> all;
  for (long i = 0; i < D.rows(); ++i) {
    Eigen::VectorXd v = es.eigenvectors().col(i);
    double lam = es.eigenvalues()[i];
    all.push_back({lam, v, (H * v - lam * v).norm()});
  }
  return pack(select_near(std::move(all), E, k), E, D.rows());
}

// Lanczos with full reorthogonalisation on the shift-inverted operator.
// Returns nullopt if the factorisation is unusable or convergence fails.
std::optional<EigenResult> shift_invert_lanczos(const SpMat& H, double E, int k) {
  const long n = H.rows();
  SpMat A = H;
  for (long i = 0; i < n; ++i) A.coeffRef(i, i) -= E;
  A.makeCompressed();
  Eigen::SparseLU<SpMat> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success) return std::nullopt;

  const long m_max = std::min<long>(n, std::max<long>(3L * k + 40L, 80L));
  Eigen::MatrixXd V(n, m_max);
  std::vector<double> alpha, beta;  // tridiagonal entries
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  v.normalize();
  V.col(0) = v;
  Eigen::VectorXd w;
  long m = 0;
  auto extract = [&](long steps) -> std::optional<EigenResult> {
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(steps, steps);
    for (long i = 0; i < steps; ++i) {
      T(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < steps) {
        T(i, i + 1) = beta[static_cast<std::size_t>(i)];
        T(i + 1, i) = beta[static_cast<std::size_t>(i)];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    std::vector<long> order(static_cast<std::size_t>(steps));
    std::iota(order.begin(), order.end(), 0L);
    // largest |theta| of the inverse <=> closest to E
    std::sort(order.begin(), order.end(), [&](long a, long b) {
      return std::abs(es.eigenvalues()[a]) > std::abs(es.eigenvalues()[b]);
    });
    std::vector<Candidate> cands;
    for (int i = 0; i < k && i < steps; ++i) {
      long id = order[static_cast<std::size_t>(i)];
      double theta = es.eigenvalues()[id];
      if (theta == 0.0) return std::nullopt;
      Eigen::VectorXd x = V.leftCols(steps) * es.eigenvectors().col(id);
      x.normalize();
      double lam = x.dot(H * x);  // Rayleigh refinement
      double res = (H * x - lam * x).norm();
      cands.push_back({lam, std::move(x), res});
    }
    if (static_cast<int>(cands.size()) < std::min<long>(k, n)) return std::nullopt;
    for (const auto& c : cands) {
      if (c.residual > kResidualTol * (1.0 + std::abs(c.lambda))) return std::nullopt;
    }
    return pack(select_near(std::move(cands), E, k), E, n);
  };

  for (long j = 0; j < m_max; ++j) {
    w = lu.solve(V.col(j));
    if (!w.allFinite()) return std::nullopt;
    double a = V.col(j).dot(w);
    alpha.push_back(a);
    w -= a * V.col(j);
    if (j > 0) w -= beta[static_cast<std::size_t>(j - 1)] * V.col(j - 1);
    // full reorthogonalisation, twice for safety
    for (int pass = 0; pass < 2; ++pass) {
      w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
    }
    double b = w.norm();
    m = j + 1;
    if (b < 1e-14 || j + 1 == m_max) {
      beta.push_back(0.0);
      break;
    }
    beta.push_back(b);
    V.col(j + 1) = w / b;
    if (m >= std::max(2L * k, 12L) && m % 6 == 0) {
      auto r = extract(m);
      if (r) return r;
    }
  }
  return extract(m);
}

}  // namespace

EigenResult eigs_near(const SpMat& H, double E, int k, EigMethod method) {
  if (H.rows() != H.cols()) throw std::invalid_argument("eigs_near: matrix not square");
  const long n = H.rows();
  if (k < 1 || k > n) throw std::invalid_argument("eigs_near: bad k");
  if (method == EigMethod::dense) return dense_eigs_near(H, E, k);
  if (method == EigMethod::automatic && (n <= 64 || 4L * k >= n)) {
    return dense_eigs_near(H, E, k);
  }
  auto r = shift_invert_lanczos(H, E, k);
  if (r) return *r;
  // singular shift or stalled Krylov space: nudge once, then go dense
  const double nudge = 1e-9 * (1.0 + std::abs(E));
  r = shift_invert_lanczos(H, E + nudge, k);
  if (r) {
    r->exact_hit = false;
    for (double lam : r->eigenvalues) {
      if (std::abs(lam - E) <= 1e-12 * std::max(1.0, std::abs(E))) r->exact_hit = true;
    }
    return *r;
  }
  if (method == EigMethod::lanczos) {
    throw std::runtime_error("eigs_near: Lanczos failed to converge");
  }
  if (n <= 6000) return dense_eigs_near(H, E, k);
  throw std::runtime_error("eigs_near: no converged eigensolver route");
}

EigenResult ground_state(const SpMat& H, EigMethod method) {
  const long n = H.rows();
  if (method == EigMethod::dense || (method == EigMethod::automatic && n <= 2000)) {
    return dense_eigs_near(H, below_spectrum_shift(H), 1);
  }
  return eigs_near(H, below_spectrum_shift(H), 1,
                   method == EigMethod::lanczos ? EigMethod::lanczos
                                                : EigMethod::automatic);
}

double below_spectrum_shift(const SpMat& H) {
  double lo = std::numeric_limits<double>::infinity();
  for (int kk = 0; kk < H.outerSize(); ++kk) {
    double diag = 0.0, off = 0.0;
    for (SpMat::InnerIterator it(H, kk); it; ++it) {
      if (it.row() == it.col()) {
        diag = it.value();
      } else {
        off += std::abs(it.value());
      }
    }
    lo = std::min(lo, diag - off);
  }
  return lo - 1.0;
}

double resolvent_norm(const SpMat& H, double E) {
  EigenResult r = eigs_near(H, E, 1);
  if (r.exact_hit) throw SpectrumHitError("resolvent_norm: E lies in the spectrum");
  return 1.0 / std::abs(r.eigenvalues[0] - E);
}

BlockNormResult local_resolvent_block(const DiscretizedHamiltonian& H, double E,
                                      const Vec& y, const Vec& z, double width) {
  const GridSpec& g = H.grid;
  Box box = g.box();
  Box by{g.dim, y, width}, bz{g.dim, z, width};
  if (!box.contains_box(by) || !box.contains_box(bz)) {
    throw std::invalid_argument("local_resolvent_block: block escapes the box");
  }
  std::vector<long> iy, iz;
  for (long i = 0; i < g.total_nodes(); ++i) {
    Vec p = g.node(i);
    if (by.contains(p)) iy.push_back(i);
    if (bz.contains(p)) iz.push_back(i);
  }
  if (iy.empty() || iz.empty()) {
    throw std::invalid_argument("local_resolvent_block: block holds no grid nodes");
  }
  SpMat A = H.matrix;
  for (long i = 0; i < A.rows(); ++i) A.coeffRef(i, i) -= E;
  A.makeCompressed();
  Eigen::SparseLU<SpMat> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) {
    throw SpectrumHitError("local_resolvent_block: singular shift");
  }
  auto restrict_to = [&](const Eigen::VectorXd& v, const std::vector<long>& keep) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
    for (long i : keep) out[i] = v[i];
    return out;
  };
  // power iteration on  P_z R P_y R P_z  (the Gram operator of P_y R P_z)
  Eigen::VectorXd u = Eigen::VectorXd::Zero(g.total_nodes());
  for (long i : iz) u[i] = 1.0;
  u.normalize();
  BlockNormResult result;
  double prev = 0.0;
  for (int it = 1; it <= 200; ++it) {
    Eigen::VectorXd a = restrict_to(lu.solve(u), iy);
    Eigen::VectorXd b = restrict_to(lu.solve(a), iz);
    if (!b.allFinite()) throw SpectrumHitError("local_resolvent_block: singular shift");
    double rayleigh = u.dot(b);
    double sigma = std::sqrt(std::max(rayleigh, 0.0));
    result.value = sigma;
    result.iterations = it;
    double nb = b.norm();
    if (nb == 0.0) { result.converged = true; return result; }
    u = b / nb;
    if (it > 1 && std::abs(sigma - prev) <= 1e-6 * std::max(sigma, 1e-300)) {
      result.converged = true;
      return result;
    }
    prev = sigma;
  }
  return result;
}

double combes_thomas_bound(double eta, int dim, double dist) {
  if (!(eta > 0.0)) throw std::invalid_argument("combes_thomas_bound: eta must be positive");
  return (4.0 / (3.0 * eta)) *
         std::exp(0.5 * std::sqrt(eta) * (std::sqrt(static_cast<double>(dim)) - dist));
}

CombesThomasReport combes_thomas_check(const DiscretizedHamiltonian& H, double E,
                                       const std::vector<std::pair<Vec, Vec>>& pairs,
                                       double width) {
  CombesThomasReport rep;
  rep.lambda0 = ground_state(H.matrix).eigenvalues[0];
  if (!(E < rep.lambda0)) {
    throw std::invalid_argument("combes_thomas_check: E must lie below the spectrum");
  }
  rep.eta = rep.lambda0 - E;
  for (const auto& [y, z] : pairs) {
    CombesThomasRow row;
    row.y = y;
    row.z = z;
    row.distance = euclid_dist(y, z, H.grid.dim);
    row.measured = local_resolvent_block(H, E, y, z, width).value;
    row.bound = combes_thomas_bound(rep.eta, H.grid.dim, row.distance);
    row.holds = row.measured <= row.bound * rep.slack;
    rep.all_hold = rep.all_hold && row.holds;
    rep.rows.push_back(row);
  }
  return rep;
}

std::vector<ModeProfile> localization_profile(const DiscretizedHamiltonian& H, int k) {
  EigenResult r = eigs_near(H.matrix, below_spectrum_shift(H.matrix), k);
  const GridSpec& g = H.grid;
  const double hd = g.cell_volume();
  std::vector<ModeProfile> out;
  for (std::size_t m = 0; m < r.eigenvalues.size(); ++m) {
    Eigen::VectorXd phi = r.vectors.col(static_cast<long>(m));
    ModeProfile prof;
    prof.eigenvalue = r.eigenvalues[m];
    prof.residual = r.residuals[m];
    // phi is l2-normalised; in the h^d-weighted norm IPR = sum phi^4 / h^d
    double s4 = 0.0;
    for (long i = 0; i < phi.size(); ++i) s4 += std::pow(phi[i], 4);
    prof.ipr = s4 / hd;
    // shell maxima of |phi| around the peak node, shells of width h
    long peak = 0;
    phi.cwiseAbs().maxCoeff(&peak);
    Vec px = g.node(peak);
    std::vector<double> shell;
    for (long i = 0; i < phi.size(); ++i) {
      double dist = sup_dist(g.node(i), px, g.dim);
      auto idx = static_cast<std::size_t>(std::llround(dist / g.spacing));
      if (shell.size() <= idx) shell.resize(idx + 1, 0.0);
      shell[idx] = std::max(shell[idx], std::abs(phi[i]));
    }
    double peak_val = shell.empty() ? 0.0 : shell[0];
    std::vector<std::pair<double, double>> pts;  // (radius, log amplitude)
    for (std::size_t i = 1; i < shell.size(); ++i) {
      if (shell[i] > 1e-14 * peak_val && shell[i] > 0.0) {
        pts.emplace_back(static_cast<double>(i) * g.spacing, std::log(shell[i]));
      }
    }
    if (pts.size() >= 2) {
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (auto& [xx, yy] : pts) { sx += xx; sy += yy; sxx += xx * xx; sxy += xx * yy; }
      double nn = static_cast<double>(pts.size());
      double slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
      prof.decay_rate = -slope;
    }
    out.push_back(prof);
  }
  return out;
}

}  // namespace deloc

// Command-line front end for the deloc library.
//
// Every subcommand reads a JSON config, runs deterministically as a pure
// function of (config, seed), and writes report.json plus kind-specific
// artifacts into the output directory.
//
// Exit codes:
//   0  run completed and every checked mathematical bound held
//   2  run completed but a checked bound failed beyond its slack
//   1  any error: malformed config, unknown fields, invalid parameters,
//      missing files, or a library contract violation
//
// Flags override environment variables (DELOC_CONFIG, DELOC_SEED,
// DELOC_TRIALS, DELOC_OUT, DELOC_THREADS), which override config values.

#include <CLI11.hpp>
#include <json.hpp>

#include <deloc/geometry.hpp>
#include <deloc/good_boxes.hpp>
#include <deloc/hamiltonian.hpp>
#include <deloc/initial_scale.hpp>
#include <deloc/io.hpp>
#include <deloc/potential.hpp>
#include <deloc/rng.hpp>
#include <deloc/spectral.hpp>
#include <deloc/ucp1d.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace nl = nlohmann;
namespace fs = std::filesystem;
using namespace deloc;

namespace {

// fixed sub-stream labels so derived randomness is independent of call order
constexpr std::uint64_t kGeometryStream = 0x67656F6DULL;
constexpr std::uint64_t kPairStream = 0x70616972ULL;
constexpr std::uint64_t kCouplingStream = 0x636F7570ULL;

// ---------------------------------------------------------------- schema --

void reject_unknown(const nl::json& obj, const std::string& where,
                    std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object())
    throw std::invalid_argument(where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (auto a : allowed)
      if (it.key() == a) {
        known = true;
        break;
      }
    if (!known)
      throw std::invalid_argument(where + ": unknown field '" + it.key() + "'");
  }
}

const nl::json& need_field(const nl::json& obj, const std::string& where,
                           const char* key) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw std::invalid_argument(where + ": missing field '" + std::string(key) + "'");
  return *it;
}

double need_num(const nl::json& obj, const std::string& where, const char* key) {
  const nl::json& v = need_field(obj, where, key);
  if (!v.is_number())
    throw std::invalid_argument(where + "." + key + ": expected a number");
  return v.get<double>();
}

double opt_num(const nl::json& obj, const std::string& where, const char* key,
               double dflt) {
  if (!obj.contains(key)) return dflt;
  return need_num(obj, where, key);
}

long need_int(const nl::json& obj, const std::string& where, const char* key) {
  const nl::json& v = need_field(obj, where, key);
  if (!v.is_number_integer() && !v.is_number_unsigned())
    throw std::invalid_argument(where + "." + key + ": expected an integer");
  return v.get<long>();
}

long opt_int(const nl::json& obj, const std::string& where, const char* key,
             long dflt) {
  if (!obj.contains(key)) return dflt;
  return need_int(obj, where, key);
}

std::string need_str(const nl::json& obj, const std::string& where, const char* key) {
  const nl::json& v = need_field(obj, where, key);
  if (!v.is_string())
    throw std::invalid_argument(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

std::string opt_str(const nl::json& obj, const std::string& where, const char* key,
                    const std::string& dflt) {
  if (!obj.contains(key)) return dflt;
  return need_str(obj, where, key);
}

bool opt_bool(const nl::json& obj, const std::string& where, const char* key,
              bool dflt) {
  if (!obj.contains(key)) return dflt;
  const nl::json& v = obj.at(key);
  if (!v.is_boolean())
    throw std::invalid_argument(where + "." + key + ": expected a boolean");
  return v.get<bool>();
}

Vec parse_point(const nl::json& v, int dim, const std::string& where) {
  if (!v.is_array() || v.size() != static_cast<std::size_t>(dim))
    throw std::invalid_argument(where + ": expected an array of " +
                                std::to_string(dim) + " coordinate(s)");
  Vec p{0.0, 0.0};
  for (int c = 0; c < dim; ++c) {
    if (!v[static_cast<std::size_t>(c)].is_number())
      throw std::invalid_argument(where + ": coordinates must be numbers");
    p[static_cast<std::size_t>(c)] = v[static_cast<std::size_t>(c)].get<double>();
  }
  return p;
}

std::uint64_t parse_seed(const nl::json& cfg) {
  if (!cfg.contains("seed")) return 1;
  const nl::json& v = cfg.at("seed");
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    long s = v.get<long>();
    if (s < 0) throw std::invalid_argument("seed: must be nonnegative");
    return static_cast<std::uint64_t>(s);
  }
  if (v.is_string()) {
    const std::string& s = v.get<std::string>();
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
      throw std::invalid_argument("seed: string form must be a decimal integer");
    return std::stoull(s);
  }
  throw std::invalid_argument("seed: expected an integer or a decimal string");
}

// ----------------------------------------------------------- model pieces --

PointSet build_geometry(const nl::json& g, int dim, std::uint64_t seed) {
  const std::string where = "model.geometry";
  std::string kind = need_str(g, where, "kind");
  if (kind == "lattice") {
    reject_unknown(g, where, {"kind", "a", "center", "side"});
    double a = need_num(g, where, "a");
    Box w{dim, parse_point(need_field(g, where, "center"), dim, where + ".center"),
          need_num(g, where, "side")};
    return generate_lattice(dim, a, w);
  }
  if (kind == "perturbed") {
    reject_unknown(g, where, {"kind", "rho", "center", "side"});
    double rho = need_num(g, where, "rho");
    Box w{dim, parse_point(need_field(g, where, "center"), dim, where + ".center"),
          need_num(g, where, "side")};
    Rng rng(trial_seed(seed, kGeometryStream));
    return generate_perturbed_lattice(dim, rho, w, rng);
  }
  if (kind == "empty") {
    reject_unknown(g, where, {"kind", "center", "side"});
    Box w{dim, parse_point(need_field(g, where, "center"), dim, where + ".center"),
          need_num(g, where, "side")};
    return make_point_set(dim, {}, w);
  }
  if (kind == "file") {
    reject_unknown(g, where, {"kind", "path"});
    PointSet ps = io::load_point_set(need_str(g, where, "path"));
    if (ps.dim != dim)
      throw std::invalid_argument(where + ": file dimension " +
                                  std::to_string(ps.dim) + " != model.dim " +
                                  std::to_string(dim));
    return ps;
  }
  throw std::invalid_argument(where + ".kind: unknown geometry '" + kind + "'");
}

SingleSitePotential build_bump(const nl::json& u) {
  const std::string where = "model.u";
  reject_unknown(u, where, {"u_minus", "delta_minus", "delta_plus", "profile"});
  std::string prof = opt_str(u, where, "profile", "flat");
  BumpProfile profile;
  if (prof == "flat")
    profile = BumpProfile::flat;
  else if (prof == "tent")
    profile = BumpProfile::tent;
  else
    throw std::invalid_argument(where + ".profile: must be 'flat' or 'tent'");
  return SingleSitePotential(need_num(u, where, "u_minus"),
                             need_num(u, where, "delta_minus"),
                             need_num(u, where, "delta_plus"), profile);
}

struct ModelSpec {
  int dim = 1;
  PointSet base;
  std::optional<SingleSitePotential> u;
  std::optional<double> beta;
};

ModelSpec build_model(const nl::json& cfg, std::uint64_t seed) {
  const nl::json& m = need_field(cfg, "config", "model");
  reject_unknown(m, "model", {"dim", "geometry", "u", "beta"});
  ModelSpec spec;
  long dim = need_int(m, "model", "dim");
  if (dim != 1 && dim != 2)
    throw std::invalid_argument("model.dim: must be 1 or 2");
  spec.dim = static_cast<int>(dim);
  spec.base = build_geometry(need_field(m, "model", "geometry"), spec.dim, seed);
  if (m.contains("u")) spec.u = build_bump(m.at("u"));
  if (m.contains("beta")) {
    double beta = need_num(m, "model", "beta");
    if (!(beta > 0.0) || !(beta < 1.0))
      throw std::invalid_argument("model.beta: must lie in (0,1)");
    spec.beta = beta;
  }
  return spec;
}

const SingleSitePotential& need_bump(const ModelSpec& m, const char* kind) {
  if (!m.u)
    throw std::invalid_argument(std::string(kind) + ": config needs model.u");
  return *m.u;
}

double need_beta(const ModelSpec& m, const char* kind) {
  if (!m.beta)
    throw std::invalid_argument(std::string(kind) + ": config needs model.beta");
  return *m.beta;
}

double grid_spacing(const nl::json& cfg) {
  if (!cfg.contains("grid")) return 0.0;
  const nl::json& g = cfg.at("grid");
  reject_unknown(g, "grid", {"spacing"});
  double h = opt_num(g, "grid", "spacing", 0.0);
  if (h < 0.0) throw std::invalid_argument("grid.spacing: must be >= 0");
  return h;
}

void check_zeta(double zeta, const std::string& where) {
  if (!(zeta > 0.0) || !(zeta < 1.0))
    throw std::invalid_argument(where + ": zeta must lie in (0,1)");
}

// --------------------------------------------------------------- context --

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<std::string> out;
  std::optional<int> threads;
};

struct RunContext {
  nl::json cfg;
  std::string kind;
  std::string fingerprint;  // decimal FNV-1a of the config text
  std::uint64_t seed = 1;
  int trials = 0;  // 0 = kind default
  int threads = 1;
  fs::path out;
  using Stats = std::vector<std::pair<std::string, std::string>>;
};

RunContext make_context(nl::json cfg, std::uint64_t fingerprint,
                        const Overrides& ov, const std::string& fallback_out) {
  RunContext ctx;
  ctx.kind = need_str(cfg, "config", "kind");
  ctx.seed = ov.seed ? *ov.seed : parse_seed(cfg);
  ctx.trials = ov.trials ? *ov.trials
                         : static_cast<int>(opt_int(cfg, "config", "n_trials", 0));
  ctx.threads = ov.threads ? *ov.threads
                           : static_cast<int>(opt_int(cfg, "config", "threads", 1));
  if (ctx.threads < 1) throw std::invalid_argument("threads: must be >= 1");
  ctx.out = ov.out ? fs::path(*ov.out)
                   : fs::path(opt_str(cfg, "config", "out", fallback_out));
  ctx.fingerprint = std::to_string(fingerprint);
  ctx.cfg = std::move(cfg);
  return ctx;
}

void check_top_level(const RunContext& ctx) {
  reject_unknown(ctx.cfg, "config",
                 {"kind", "seed", "n_trials", "threads", "out", "model", "grid",
                  "params"});
}

io::Json envelope(const RunContext& ctx) {
  io::Json rep = io::Json::object();
  rep["kind"] = ctx.kind;
  rep["config_fingerprint"] = ctx.fingerprint;
  rep["seed"] = std::to_string(ctx.seed);
  return rep;
}

io::Json json_vec(const Vec& v, int dim) {
  io::Json a = io::Json::array();
  for (int c = 0; c < dim; ++c) a.push_back(v[static_cast<std::size_t>(c)]);
  return a;
}

io::Json json_interval(const Interval& iv) {
  io::Json j = io::Json::object();
  j["lo"] = iv.lo;
  j["hi"] = iv.hi;
  return j;
}

void write_report(const RunContext& ctx, const io::Json& rep) {
  fs::create_directories(ctx.out);
  fs::path p = ctx.out / "report.json";
  io::write_text_file(p.string(), rep.dump(2));
  std::cout << "wrote " << p.string() << "\n";
}

void write_artifact(const RunContext& ctx, const char* name,
                    const std::string& content) {
  fs::create_directories(ctx.out);
  fs::path p = ctx.out / name;
  io::write_text_file(p.string(), content);
  std::cout << "wrote " << p.string() << "\n";
}

const nl::json& params_block(const RunContext& ctx) {
  static const nl::json empty = nl::json::object();
  if (!ctx.cfg.contains("params")) return empty;
  if (!ctx.cfg.at("params").is_object())
    throw std::invalid_argument("params: expected an object");
  return ctx.cfg.at("params");
}

std::string fmt_stat(double v) { return io::fmt(v); }

// ---------------------------------------------------------------- runners --

int run_gen(const RunContext& ctx, RunContext::Stats& stats) {
  check_top_level(ctx);
  const nl::json& pr = params_block(ctx);
  reject_unknown(pr, "params", {"pair"});
  bool want_pair = opt_bool(pr, "params", "pair", false);

  ModelSpec model = build_model(ctx.cfg, ctx.seed);
  write_artifact(ctx, "points.txt", io::write_point_set(model.base));

  io::Json rep = envelope(ctx);
  rep["dim"] = model.dim;
  rep["n_points"] = static_cast<long>(model.base.points.size());
  rep["window_center"] = json_vec(model.base.window.center, model.dim);
  rep["window_side"] = model.base.window.side;
  if (model.base.params) {
    rep["r"] = model.base.params->r;
    rep["R"] = model.base.params->R;
  }
  if (want_pair) {
    Rng rng(trial_seed(ctx.seed, kPairStream));
    DelonePair pair = make_delone_pair(model.base, rng);
    write_artifact(ctx, "extra.txt", io::write_point_set(pair.extra));
    rep["n_extra"] = static_cast<long>(pair.extra.points.size());
    if (pair.union_params) {
      rep["union_r"] = pair.union_params->r;
      rep["union_R"] = pair.union_params->R;
    }
  }
  write_report(ctx, rep);
  stats.emplace_back("n_points", std::to_string(model.base.points.size()));
  std::cout << "gen: " << model.base.points.size() << " point(s)\n";
  return 0;
}

int run_verify_delone(const RunContext& ctx, RunContext::Stats& stats) {
  check_top_level(ctx);
  const nl::json& pr = params_block(ctx);
  reject_unknown(pr, "params", {"r", "R"});
  double r = need_num(pr, "params", "r");
  double R = need_num(pr, "params", "R");

  ModelSpec model = build_model(ctx.cfg, ctx.seed);
  DeloneReport drep = verify_delone(model.base, r, R);

  io::Json rep = envelope(ctx);
  rep["r"] = r;
  rep["R"] = R;
  rep["n_points"] = static_cast<long>(model.base.points.size());
  rep["uniform_discrete"] = drep.uniform_discrete;
  rep["relatively_dense"] = drep.relatively_dense;
  rep["ok"] = drep.ok();
  rep["deepest_hole"] = drep.deepest_hole;
  if (drep.discreteness_witness)
    rep["discreteness_witness"] = json_vec(*drep.discreteness_witness, model.dim);
  if (drep.denseness_witness)
    rep["denseness_witness"] = json_vec(*drep.denseness_witness, model.dim);
  write_report(ctx, rep);

  stats.emplace_back("ok", drep.ok() ? "1" : "0");
  stats.emplace_back("deepest_hole", fmt_stat(drep.deepest_hole));
  std::cout << "verify-delone: " << (drep.ok() ? "ok" : "violated")
            << " deepest_hole=" << io::fmt(drep.deepest_hole) << "\n";
  return drep.ok() ? 0 : 2;
}

int run_spectrum(const RunContext& ctx, RunContext::Stats& stats) {
  check_top_level(ctx);
  const nl::json& pr = params_block(ctx);
  reject_unknown(pr, "params", {"x", "L", "k", "couplings", "dump_matrix"});
  ModelSpec model = build_model(ctx.cfg, ctx.seed);
  Vec x = parse_point(need_field(pr, "params", "x"), model.dim, "params.x");
  double L = need_num(pr, "params", "L");
  int k = static_cast<int>(opt_int(pr, "params", "k", 5));
  std::string couplings = opt_str(pr, "params", "couplings", "none");
  const SingleSitePotential& u = need_bump(model, "spectrum");

  DisorderModel dm{model.base, make_point_set(model.dim, {}, model.base.window),
                   u, 0.5, grid_spacing(ctx.cfg)};
  GridSpec grid = dm.grid_for(x, L);

  DiscretizedHamiltonian H;
  if (couplings == "none") {
    H = assemble_background(model.base, u, grid);
  } else if (couplings == "random") {
    Rng pair_rng(trial_seed(ctx.seed, kPairStream));
    DelonePair pair = make_delone_pair(model.base, pair_rng);
    dm.extra = pair.extra;
    dm.beta = need_beta(model, "spectrum");
    Rng coup_rng(trial_seed(ctx.seed, kCouplingStream));
    H = dm.realise(x, L, coup_rng);
  } else {
    throw std::invalid_argument("params.couplings: must be 'none' or 'random'");
  }

  auto profiles = localization_profile(H, k);
  write_artifact(ctx, "eigen.csv", io::eigen_csv(profiles));
  if (opt_bool(pr, "params", "dump_matrix", false))
    write_artifact(ctx, "hamiltonian.txt", io::write_sparse(H.matrix));

  io::Json rep = envelope(ctx);
  rep["x"] = json_vec(x, model.dim);
  rep["L"] = L;
  rep["spacing"] = H.grid.spacing;
  rep["nodes"] = H.grid.total_nodes();
  rep["couplings"] = couplings;
  io::Json modes = io::Json::array();
  for (const auto& m : profiles) {
    io::Json row = io::Json::object();
    row["eigenvalue"] = m.eigenvalue;
    row["residual"] = m.residual;
    row["ipr"] = m.ipr;
    row["decay_rate"] = m.decay_rate;
    modes.push_back(row);
  }
  rep["modes"] = modes;
  write_report(ctx, rep);

  stats.emplace_back("lambda0", fmt_stat(profiles.front().eigenvalue));
  stats.emplace_back("ipr0", fmt_stat(profiles.front().ipr));
  std::cout << "spectrum: lambda0=" << io::fmt(profiles.front().eigenvalue)
            << " over " << H.grid.total_nodes() << " node(s)\n";
  return 0;
}

int run_good_scale(const RunContext& ctx, RunContext::Stats& stats) {
  check_top_level(ctx);
  const nl::json& pr = params_block(ctx);
  reject_unknown(pr, "params",
                 {"x", "L", "E", "m", "zeta", "p", "pair_budget", "subgrid_step",
                  "block_width", "min_pair_dist"});
  ModelSpec model = build_model(ctx.cfg, ctx.seed);
  const SingleSitePotential& u = need_bump(model, "good-scale");
  double beta = need_beta(model, "good-scale");

  Vec x = parse_point(need_field(pr, "params", "x"), model.dim, "params.x");
  double L = need_num(pr, "params", "L");
  GoodBoxParams gp;
  gp.energy = need_num(pr, "params", "E");
  gp.decay_rate = need_num(pr, "params", "m");
  gp.zeta = opt_num(pr, "params", "zeta", 0.5);
  check_zeta(gp.zeta, "params.zeta");
  gp.pair_budget = static_cast<int>(opt_int(pr, "params", "pair_budget", 12));
  gp.subgrid_step = opt_num(pr, "params", "subgrid_step", 0.1);
  gp.block_width = opt_num(pr, "params", "block_width", 0.1);
  gp.min_pair_dist = opt_num(pr, "params", "min_pair_dist", 0.01);
  double p = opt_num(pr, "params", "p", 0.35);
  if (!(p > 0.0)) throw std::invalid_argument("params.p: must be > 0");
  int trials = ctx.trials > 0 ? ctx.trials : 100;

  Rng pair_rng(trial_seed(ctx.seed, kPairStream));
  DelonePair pair = make_delone_pair(model.base, pair_rng);
  DisorderModel dm{pair.base, pair.extra, u, beta, grid_spacing(ctx.cfg)};

  GoodScaleReport rep =
      good_scale_probability(dm, x, L, gp, p, trials, ctx.seed, ctx.threads);

  write_artifact(ctx, "good_scale.csv",
                 io::good_scale_csv_header() + io::good_scale_csv_row(rep));

  io::Json j = envelope(ctx);
  j["L"] = rep.L;
  j["x"] = json_vec(rep.x, model.dim);
  j["E"] = rep.params.energy;
  j["m"] = rep.params.decay_rate;
  j["zeta"] = rep.params.zeta;
  j["p"] = rep.p_exponent;
  j["beta"] = beta;
  j["n_trials"] = rep.n_trials;
  j["n_good"] = rep.n_good;
  j["p_hat"] = rep.p_hat;
  j["ci"] = json_interval(rep.ci);
  j["threshold"] = rep.threshold;
  j["verdict"] = rep.verdict;
  write_report(ctx, j);

  stats.emplace_back("p_hat", fmt_stat(rep.p_hat));
  stats.emplace_back("ci_lo", fmt_stat(rep.ci.lo));
  stats.emplace_back("ci_hi", fmt_stat(rep.ci.hi));
  stats.emplace_back("threshold", fmt_stat(rep.threshold));
  stats.emplace_back("verdict", rep.verdict);
  std::cout << "good-scale: L=" << io::fmt(L) << " p_hat=" << io::fmt(rep.p_hat)
            << " ci=[" << io::fmt(rep.ci.lo) << "," << io::fmt(rep.ci.hi)
            << "] threshold=" << io::fmt(rep.threshold) << " verdict="
            << rep.verdict << "\n";
  return rep.verdict == "fails" ? 2 : 0;
}

int run_ilse(const RunContext& ctx, RunContext::Stats& stats) {
  check_top_level(ctx);
  const nl::json& pr = params_block(ctx);
  reject_unknown(pr, "params", {"x", "L", "epsilon", "p", "R0", "C_d", "zeta"});
  ModelSpec model = build_model(ctx.cfg, ctx.seed);
  const SingleSitePotential& u = need_bump(model, "ilse");

  iscale::Params P;
  P.dim = model.dim;
  P.epsilon = opt_num(pr, "params", "epsilon", 0.1);
  P.p = opt_num(pr, "params", "p", 0.35);
  P.beta = need_beta(model, "ilse");
  P.R0 = need_num(pr, "params", "R0");
  P.delta_plus = u.delta_plus();
  P.delta_minus = u.delta_minus();
  P.u_minus = u.u_minus();
  P.C_d = opt_num(pr, "params", "C_d", 1.0);
  P.zeta = opt_num(pr, "params", "zeta", 0.5);
  check_zeta(P.zeta, "params.zeta");
  P.validate();

  Vec x = parse_point(need_field(pr, "params", "x"), model.dim, "params.x");
  double L = need_num(pr, "params", "L");
  int trials = ctx.trials > 0 ? ctx.trials : 50;

  Rng pair_rng(trial_seed(ctx.seed, kPairStream));
  DelonePair pair = make_delone_pair(model.base, pair_rng);
  FreeSiteSplit split = free_sites_split(pair.extra, P.R0);
  iscale::ExperimentModel em{pair.base, split.d0, u, grid_spacing(ctx.cfg)};

  iscale::ExperimentReport rep =
      iscale::ilse_experiment(em, x, L, P, trials, ctx.seed, ctx.threads);

  io::Json j = envelope(ctx);
  j["L"] = rep.L;
  j["M"] = rep.M;
  j["ell"] = rep.ell;
  j["threshold_energy"] = rep.threshold_energy;
  j["log10_threshold_energy"] = rep.log10_threshold_energy;
  j["mass"] = rep.mass;
  j["p"] = rep.p_exponent;
  j["target_probability"] = rep.target_probability;
  j["base_energy"] = rep.base_energy;
  j["n_trials"] = rep.n_trials;
  j["n_pass"] = rep.n_pass;
  j["p_hat"] = rep.p_hat;
  j["ci"] = json_interval(rep.ci);
  j["lift_min"] = rep.lift_min;
  j["lift_median"] = rep.lift_median;
  j["lift_max"] = rep.lift_max;
  j["growth_exponent"] = rep.growth.gamma;
  j["admissible_p_window"] = json_interval(rep.growth.p_window);
  if (rep.log10_beta_ceiling)
    j["log10_beta_ceiling"] = *rep.log10_beta_ceiling;
  write_report(ctx, j);

  stats.emplace_back("p_hat", fmt_stat(rep.p_hat));
  stats.emplace_back("target_probability", fmt_stat(rep.target_probability));
  stats.emplace_back("lift_median", fmt_stat(rep.lift_median));
  std::cout << "ilse: L=" << io::fmt(L) << " p_hat=" << io::fmt(rep.p_hat)
            << " target=" << io::fmt(rep.target_probability) << " lift_median="
            << io::fmt(rep.lift_median) << "\n";
  return rep.ci.hi < rep.target_probability ? 2 : 0;
}

int run_ucp1d(const RunContext& ctx, RunContext::Stats& stats) {
  check_top_level(ctx);
  const nl::json& pr = params_block(ctx);
  reject_unknown(pr, "params", {"x", "L", "M", "s", "k", "centres"});
  ModelSpec model = build_model(ctx.cfg, ctx.seed);
  if (model.dim != 1)
    throw std::invalid_argument("ucp1d: model.dim must be 1");
  const SingleSitePotential& u = need_bump(model, "ucp1d");

  Vec x = parse_point(need_field(pr, "params", "x"), 1, "params.x");
  double L = need_num(pr, "params", "L");
  double M = need_num(pr, "params", "M");
  double s = need_num(pr, "params", "s");
  int k = static_cast<int>(opt_int(pr, "params", "k", 5));
  std::string centre_rule = opt_str(pr, "params", "centres", "cells");
  if (centre_rule != "cells" && centre_rule != "base")
    throw std::invalid_argument("params.centres: must be 'cells' or 'base'");

  DisorderModel dm{model.base, make_point_set(1, {}, model.base.window), u, 0.5,
                   grid_spacing(ctx.cfg)};
  GridSpec grid = dm.grid_for(x, L);
  DiscretizedHamiltonian H = assemble_background(model.base, u, grid);
  EigenResult eig = eigs_near(H.matrix, below_spectrum_shift(H.matrix), k);

  ucp::IndexSets is = ucp::index_sets(x[0], L, M);
  ucp::CentreMap centres;
  for (long j = is.j_min; j <= is.j_max; ++j) {
    double cell = M * static_cast<double>(j);
    double gamma = cell;
    if (centre_rule == "base") {
      // nearest background point, kept only when its window still fits the cell
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : model.base.points) {
        if (std::abs(q[0] - cell) < std::abs(best - cell)) best = q[0];
      }
      if (std::isfinite(best) &&
          std::abs(best - cell) <= (M - s) / 2.0 - 2.0 * grid.spacing)
        gamma = best;
    }
    centres[j] = gamma;
  }

  ucp::UcpSetup setup;
  setup.s = s;
  setup.M = M;
  setup.centres = centres;
  setup.energy_window = {eig.eigenvalues.front() - 1.0, eig.eigenvalues.back() + 1.0};
  setup.potential = H.potential;

  io::Json j = envelope(ctx);
  j["x"] = json_vec(x, 1);
  j["L"] = L;
  j["M"] = M;
  j["s"] = s;
  j["centre_rule"] = centre_rule;
  io::Json rows = io::Json::array();
  bool all_hold = true;
  double min_log10_ratio = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i) {
    ucp::MassCheck mc = ucp::ucp_mass_check(eig.vectors.col(i), grid,
                                            eig.eigenvalues[static_cast<std::size_t>(i)],
                                            setup, x[0], L);
    io::Json row = io::Json::object();
    row["lambda"] = eig.eigenvalues[static_cast<std::size_t>(i)];
    row["mass_sum"] = mc.mass_sum;
    row["total"] = mc.total;
    row["log_constant"] = mc.log_constant;
    row["log10_ratio"] = mc.log10_ratio;
    row["holds"] = mc.holds;
    rows.push_back(row);
    all_hold = all_hold && mc.holds;
    min_log10_ratio = std::min(min_log10_ratio, mc.log10_ratio);
  }
  j["modes"] = rows;
  j["all_hold"] = all_hold;
  write_report(ctx, j);

  stats.emplace_back("min_log10_ratio", fmt_stat(min_log10_ratio));
  stats.emplace_back("all_hold", all_hold ? "1" : "0");
  std::cout << "ucp1d: " << k << " mode(s), min_log10_ratio="
            << io::fmt(min_log10_ratio) << (all_hold ? " all hold" : " VIOLATED")
            << "\n";
  return all_hold ? 0 : 2;
}

int run_lift(const RunContext& ctx, RunContext::Stats& stats) {
  check_top_level(ctx);
  const nl::json& pr = params_block(ctx);
  reject_unknown(pr, "params", {"x", "L", "M", "s", "c_minus", "t_steps", "t_grid"});
  ModelSpec model = build_model(ctx.cfg, ctx.seed);
  if (model.dim != 1)
    throw std::invalid_argument("lift: model.dim must be 1");
  const SingleSitePotential& u = need_bump(model, "lift");

  Vec x = parse_point(need_field(pr, "params", "x"), 1, "params.x");
  double L = need_num(pr, "params", "L");
  double M = need_num(pr, "params", "M");
  double s = need_num(pr, "params", "s");
  double c_minus = need_num(pr, "params", "c_minus");

  std::vector<double> ts;
  if (pr.contains("t_grid")) {
    const nl::json& tg = pr.at("t_grid");
    if (!tg.is_array() || tg.empty())
      throw std::invalid_argument("params.t_grid: expected a nonempty array");
    for (const auto& t : tg) {
      if (!t.is_number())
        throw std::invalid_argument("params.t_grid: entries must be numbers");
      ts.push_back(t.get<double>());
    }
  } else {
    long n = opt_int(pr, "params", "t_steps", 10);
    if (n < 1) throw std::invalid_argument("params.t_steps: must be >= 1");
    for (long i = 1; i <= n; ++i)
      ts.push_back(static_cast<double>(i) / static_cast<double>(n));
  }

  DisorderModel dm{model.base, make_point_set(1, {}, model.base.window), u, 0.5,
                   grid_spacing(ctx.cfg)};
  GridSpec grid = dm.grid_for(x, L);
  Eigen::VectorXd V0 = model.base.points.empty()
                           ? Eigen::VectorXd::Zero(grid.total_nodes()).eval()
                           : assemble_background(model.base, u, grid).potential;

  ucp::IndexSets is = ucp::index_sets(x[0], L, M);
  ucp::CentreMap centres;
  std::vector<Vec> sites;
  for (long j = is.j_min; j <= is.j_max; ++j) {
    centres[j] = M * static_cast<double>(j);
    sites.push_back(Vec{centres[j], 0.0});
  }
  Eigen::VectorXd W = assemble_coupled_potential(
      sites, std::vector<double>(sites.size(), 1.0), u, grid);

  ucp::LiftingReport rep = ucp::lifting_1d(V0, W, grid, s, M, centres, c_minus, ts);

  std::string csv = "t,lambda_t,bound,margin\n";
  for (const auto& row : rep.rows)
    csv += io::fmt(row.t) + "," + io::fmt(row.lambda_t) + "," +
           io::fmt(row.bound) + "," + io::fmt(row.margin) + "\n";
  write_artifact(ctx, "lift.csv", csv);

  io::Json j = envelope(ctx);
  j["L"] = L;
  j["M"] = M;
  j["s"] = s;
  j["c_minus"] = c_minus;
  j["lambda0"] = rep.lambda0;
  j["c_uc"] = rep.c_uc;
  j["log_c_uc"] = rep.log_c_uc;
  j["c_svi"] = rep.c_svi;
  j["energy_window"] = json_interval(rep.energy_window);
  j["slope_estimate"] = rep.slope_estimate;
  j["slope_perturbative"] = rep.slope_perturbative;
  j["monotone"] = rep.monotone;
  j["all_hold"] = rep.all_hold;
  io::Json rows = io::Json::array();
  for (const auto& row : rep.rows) {
    io::Json rj = io::Json::object();
    rj["t"] = row.t;
    rj["lambda_t"] = row.lambda_t;
    rj["bound"] = row.bound;
    rj["margin"] = row.margin;
    rows.push_back(rj);
  }
  j["rows"] = rows;
  write_report(ctx, j);

  stats.emplace_back("lambda0", fmt_stat(rep.lambda0));
  stats.emplace_back("slope_estimate", fmt_stat(rep.slope_estimate));
  stats.emplace_back("slope_perturbative", fmt_stat(rep.slope_perturbative));
  stats.emplace_back("monotone", rep.monotone ? "1" : "0");
  stats.emplace_back("all_hold", rep.all_hold ? "1" : "0");
  std::cout << "lift: lambda0=" << io::fmt(rep.lambda0) << " slope="
            << io::fmt(rep.slope_estimate) << (rep.monotone ? " monotone" : " NOT monotone")
            << (rep.all_hold ? ", bounds hold" : ", BOUND VIOLATED") << "\n";
  return rep.monotone && rep.all_hold ? 0 : 2;
}

int run_patterns(const RunContext& ctx, RunContext::Stats& stats) {
  check_top_level(ctx);
  const nl::json& pr = params_block(ctx);
  reject_unknown(pr, "params",
                 {"K_center", "K_side", "search_center", "search_side"});
  ModelSpec model = build_model(ctx.cfg, ctx.seed);

  Box K{model.dim,
        parse_point(need_field(pr, "params", "K_center"), model.dim, "params.K_center"),
        need_num(pr, "params", "K_side")};
  Box search = model.base.window;
  if (pr.contains("search_center") || pr.contains("search_side")) {
    search = Box{model.dim,
                 parse_point(need_field(pr, "params", "search_center"), model.dim,
                             "params.search_center"),
                 need_num(pr, "params", "search_side")};
  }

  PatternCount pc = count_pattern_translates(model.base, K, search);

  io::Json j = envelope(ctx);
  j["K_center"] = json_vec(K.center, model.dim);
  j["K_side"] = K.side;
  j["count"] = static_cast<long>(pc.count);
  io::Json wit = io::Json::array();
  std::size_t shown = std::min<std::size_t>(pc.witnesses.size(), 16);
  for (std::size_t i = 0; i < shown; ++i)
    wit.push_back(json_vec(pc.witnesses[i], model.dim));
  j["witnesses"] = wit;
  write_report(ctx, j);

  stats.emplace_back("count", std::to_string(pc.count));
  std::cout << "patterns: " << pc.count << " translate(s)\n";
  return 0;
}

int dispatch(const RunContext& ctx, RunContext::Stats& stats);

int run_sweep(const RunContext& ctx) {
  reject_unknown(ctx.cfg, "config",
                 {"kind", "seed", "n_trials", "threads", "out", "base", "axis",
                  "values"});
  std::string axis = need_str(ctx.cfg, "config", "axis");
  if (axis != "L" && axis != "beta" && axis != "E" && axis != "h")
    throw std::invalid_argument("axis: must be one of L, beta, E, h");
  const nl::json& values = need_field(ctx.cfg, "config", "values");
  if (!values.is_array() || values.empty())
    throw std::invalid_argument("values: expected a nonempty array of numbers");
  const nl::json& base = need_field(ctx.cfg, "config", "base");
  if (!base.is_object() || !base.contains("kind"))
    throw std::invalid_argument("base: expected a config object with a kind");
  if (base.at("kind") == "sweep")
    throw std::invalid_argument("base: nested sweeps are not supported");

  struct Row {
    double value = 0.0;
    int exit_code = 0;
    RunContext::Stats stats;
    std::string error;
  };
  std::vector<Row> rows;
  int worst = 0;
  auto bump = [&worst](int code) {
    if (code == 1 || worst == 1)
      worst = 1;
    else
      worst = std::max(worst, code);
  };

  for (const auto& v : values) {
    if (!v.is_number())
      throw std::invalid_argument("values: entries must be numbers");
    Row row;
    row.value = v.get<double>();
    nl::json sub = base;
    if (axis == "L")
      sub["params"]["L"] = row.value;
    else if (axis == "beta")
      sub["model"]["beta"] = row.value;
    else if (axis == "E")
      sub["params"]["E"] = row.value;
    else
      sub["grid"]["spacing"] = row.value;

    Overrides ov;
    ov.seed = ctx.seed;
    if (ctx.trials > 0) ov.trials = ctx.trials;
    ov.threads = ctx.threads;
    ov.out = (ctx.out / (axis + "_" + io::fmt(row.value))).string();
    try {
      RunContext sc = make_context(sub, io::fingerprint(sub.dump()), ov, ".");
      row.exit_code = dispatch(sc, row.stats);
    } catch (const std::exception& e) {
      row.exit_code = 1;
      row.error = e.what();
      std::cout << "sweep " << axis << "=" << io::fmt(row.value)
                << " error: " << e.what() << "\n";
    }
    bump(row.exit_code);
    rows.push_back(std::move(row));
  }

  // column layout comes from the first run that produced stats
  std::vector<std::string> names;
  for (const auto& row : rows)
    if (!row.stats.empty()) {
      for (const auto& [n, _] : row.stats) names.push_back(n);
      break;
    }
  std::string csv = "axis,value,exit";
  for (const auto& n : names) csv += "," + n;
  csv += "\n";
  for (const auto& row : rows) {
    csv += axis + "," + io::fmt(row.value) + "," + std::to_string(row.exit_code);
    for (std::size_t i = 0; i < names.size(); ++i) {
      csv += ",";
      if (i < row.stats.size() && row.stats[i].first == names[i])
        csv += row.stats[i].second;
    }
    csv += "\n";
  }
  write_artifact(ctx, "combined.csv", csv);

  io::Json j = envelope(ctx);
  j["axis"] = axis;
  j["base_kind"] = base.at("kind").get<std::string>();
  io::Json jr = io::Json::array();
  for (const auto& row : rows) {
    io::Json r = io::Json::object();
    r["value"] = row.value;
    r["exit"] = row.exit_code;
    if (!row.error.empty()) r["error"] = row.error;
    jr.push_back(r);
  }
  j["runs"] = jr;
  j["exit"] = worst;
  write_report(ctx, j);
  std::cout << "sweep: " << rows.size() << " run(s), worst exit " << worst << "\n";
  return worst;
}

int dispatch(const RunContext& ctx, RunContext::Stats& stats) {
  if (ctx.kind == "gen") return run_gen(ctx, stats);
  if (ctx.kind == "verify-delone") return run_verify_delone(ctx, stats);
  if (ctx.kind == "spectrum") return run_spectrum(ctx, stats);
  if (ctx.kind == "good-scale") return run_good_scale(ctx, stats);
  if (ctx.kind == "ilse") return run_ilse(ctx, stats);
  if (ctx.kind == "ucp1d") return run_ucp1d(ctx, stats);
  if (ctx.kind == "lift") return run_lift(ctx, stats);
  if (ctx.kind == "patterns") return run_patterns(ctx, stats);
  if (ctx.kind == "sweep") return run_sweep(ctx);
  throw std::invalid_argument("kind: unknown experiment '" + ctx.kind + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deloc: spectral experiments on randomised Delone operators"};
  app.require_subcommand(1);

  struct SubFlags {
    CLI::App* sub = nullptr;
    std::string config;
    std::uint64_t seed = 0;
    int trials = 0;
    std::string out;
    int threads = 0;
    CLI::Option* o_seed = nullptr;
    CLI::Option* o_trials = nullptr;
    CLI::Option* o_out = nullptr;
    CLI::Option* o_threads = nullptr;
  };

  const std::vector<std::pair<std::string, std::string>> kinds = {
      {"gen", "generate a point set (and optionally its companion set)"},
      {"verify-delone", "check uniform discreteness and relative denseness"},
      {"spectrum", "low modes of a finite box with localization profiles"},
      {"good-scale", "Monte Carlo probability that a box is good"},
      {"ilse", "ground-state lifting statistics at the initial scale"},
      {"ucp1d", "eigenfunction mass lower bounds on small windows (1D)"},
      {"lift", "ground-energy lifting curve against its lower bound (1D)"},
      {"patterns", "count translates that reproduce a local pattern"},
      {"sweep", "repeat a base config along an axis (L, beta, E, h)"},
  };

  std::vector<SubFlags> subs(kinds.size());
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    SubFlags& sf = subs[i];
    sf.sub = app.add_subcommand(kinds[i].first, kinds[i].second);
    sf.sub->add_option("--config", sf.config, "path to the JSON config")
        ->envname("DELOC_CONFIG")
        ->required();
    sf.o_seed = sf.sub->add_option("--seed", sf.seed, "master seed (overrides config)")
                    ->envname("DELOC_SEED");
    sf.o_trials =
        sf.sub->add_option("--trials", sf.trials, "trial count (overrides config)")
            ->envname("DELOC_TRIALS");
    sf.o_out = sf.sub->add_option("--out", sf.out, "output directory (overrides config)")
                   ->envname("DELOC_OUT");
    sf.o_threads =
        sf.sub->add_option("--threads", sf.threads, "worker threads (overrides config)")
            ->envname("DELOC_THREADS");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  const SubFlags* chosen = nullptr;
  std::string kind;
  for (std::size_t i = 0; i < subs.size(); ++i)
    if (subs[i].sub->parsed()) {
      chosen = &subs[i];
      kind = kinds[i].first;
      break;
    }
  if (chosen == nullptr) {
    std::cerr << "error: no subcommand\n";
    return 1;
  }

  try {
    std::string text = io::read_text_file(chosen->config);
    nl::json cfg = nl::json::parse(text);

    Overrides ov;
    if (chosen->o_seed->count() > 0) ov.seed = chosen->seed;
    if (chosen->o_trials->count() > 0) {
      if (chosen->trials < 1)
        throw std::invalid_argument("--trials: must be >= 1");
      ov.trials = chosen->trials;
    }
    if (chosen->o_out->count() > 0) ov.out = chosen->out;
    if (chosen->o_threads->count() > 0) {
      if (chosen->threads < 1)
        throw std::invalid_argument("--threads: must be >= 1");
      ov.threads = chosen->threads;
    }

    RunContext ctx = make_context(std::move(cfg), io::fingerprint(text), ov, ".");
    if (ctx.kind != kind)
      throw std::invalid_argument("config kind '" + ctx.kind +
                                  "' does not match subcommand '" + kind + "'");
    RunContext::Stats stats;
    return dispatch(ctx, stats);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

// Command-line front end: experiment configuration, execution, and
// persistence of reports. Every run writes its outputs plus a
// manifest under the output directory; re-running a manifest with any
// worker count reproduces the same bytes.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "shrinklab/clt_lab.hpp"
#include "shrinklab/errors.hpp"
#include "shrinklab/identity_suite.hpp"
#include "shrinklab/marginals.hpp"
#include "shrinklab/mixing.hpp"
#include "shrinklab/processes.hpp"
#include "shrinklab/special.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace shrinklab;

namespace {

// ---------------------------------------------------------------------------
// config helpers

const json& need_field(const json& j, const std::string& key,
                       const std::string& ctx) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError("config field '" + ctx + key + "' is required");
  }
  return j.at(key);
}

double need_number(const json& j, const std::string& key,
                   const std::string& ctx = "") {
  const json& v = need_field(j, key, ctx);
  if (!v.is_number()) {
    throw ConfigError("config field '" + ctx + key + "' must be a number");
  }
  return v.get<double>();
}

double get_number(const json& j, const std::string& key, double def,
                  const std::string& ctx = "") {
  if (!j.is_object() || !j.contains(key)) return def;
  return need_number(j, key, ctx);
}

std::int64_t need_int(const json& j, const std::string& key,
                      const std::string& ctx = "") {
  const json& v = need_field(j, key, ctx);
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    throw ConfigError("config field '" + ctx + key + "' must be an integer");
  }
  return v.get<std::int64_t>();
}

std::int64_t get_int(const json& j, const std::string& key, std::int64_t def,
                     const std::string& ctx = "") {
  if (!j.is_object() || !j.contains(key)) return def;
  return need_int(j, key, ctx);
}

std::string need_string(const json& j, const std::string& key,
                        const std::string& ctx = "") {
  const json& v = need_field(j, key, ctx);
  if (!v.is_string()) {
    throw ConfigError("config field '" + ctx + key + "' must be a string");
  }
  return v.get<std::string>();
}

std::vector<double> need_number_array(const json& j, const std::string& key,
                                      const std::string& ctx = "") {
  const json& v = need_field(j, key, ctx);
  if (!v.is_array() || v.empty()) {
    throw ConfigError("config field '" + ctx + key +
                      "' must be a non-empty array of numbers");
  }
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) {
      throw ConfigError("config field '" + ctx + key +
                        "' must contain only numbers");
    }
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<double> get_number_array(const json& j, const std::string& key,
                                     std::vector<double> def,
                                     const std::string& ctx = "") {
  if (!j.is_object() || !j.contains(key)) return def;
  return need_number_array(j, key, ctx);
}

std::vector<std::int64_t> get_int_array(const json& j, const std::string& key,
                                        std::vector<std::int64_t> def,
                                        const std::string& ctx = "") {
  if (!j.is_object() || !j.contains(key)) return def;
  const json& v = j.at(key);
  if (!v.is_array() || v.empty()) {
    throw ConfigError("config field '" + ctx + key +
                      "' must be a non-empty array of integers");
  }
  std::vector<std::int64_t> out;
  for (const auto& e : v) {
    if (!e.is_number_integer() && !e.is_number_unsigned()) {
      throw ConfigError("config field '" + ctx + key +
                        "' must contain only integers");
    }
    out.push_back(e.get<std::int64_t>());
  }
  return out;
}

// JSON cannot carry infinities; report them as tagged strings.
json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "infinity" : "-infinity";
  return v;
}

// ---------------------------------------------------------------------------
// marginal / process schemas

Marginal parse_marginal(const json& j, const std::string& ctx) {
  const std::string d = need_string(j, "dist", ctx);
  if (d == "normal") {
    return normal(get_number(j, "mean", 0.0, ctx),
                  get_number(j, "sd", 1.0, ctx));
  }
  if (d == "laplace") return laplace(get_number(j, "rate", 1.0, ctx));
  if (d == "student_t") return student_t(need_number(j, "nu", ctx));
  if (d == "zero_inflated_normal") {
    return zero_inflated_normal(need_number(j, "p", ctx));
  }
  if (d == "point_mass") return point_mass_zero();
  throw ConfigError("config field '" + ctx +
                    "dist': unknown distribution '" + d + "'");
}

json marginal_to_json(const Marginal& m) {
  json j;
  switch (m.family) {
    case MarginalFamily::kNormal:
      j["dist"] = "normal";
      j["mean"] = m.params[0];
      j["sd"] = m.params[1];
      break;
    case MarginalFamily::kLaplace:
      j["dist"] = "laplace";
      j["rate"] = m.params[0];
      break;
    case MarginalFamily::kStudentT:
      j["dist"] = "student_t";
      j["nu"] = m.params[0];
      break;
    case MarginalFamily::kZeroInflatedNormal:
      j["dist"] = "zero_inflated_normal";
      j["p"] = m.params[0];
      break;
    case MarginalFamily::kPointMassZero:
      j["dist"] = "point_mass";
      break;
  }
  return j;
}

ProcessSpec parse_process(const json& j, const std::string& ctx) {
  const std::string k = need_string(j, "kind", ctx);
  ProcessSpec spec;
  if (k == "iid") {
    spec.kind = IidSpec{parse_marginal(need_field(j, "marginal", ctx),
                                       ctx + "marginal.")};
  } else if (k == "gaussian_ar1") {
    spec.kind = GaussianAr1Spec{need_number(j, "phi", ctx)};
  } else if (k == "moving_average") {
    MovingAverageSpec ma;
    ma.weights = need_number_array(j, "weights", ctx);
    ma.innovation = parse_marginal(need_field(j, "innovation", ctx),
                                   ctx + "innovation.");
    spec.kind = std::move(ma);
  } else if (k == "cancellation_chain") {
    spec.kind = CancellationChainSpec{need_number(j, "lambda", ctx)};
  } else {
    throw ConfigError("config field '" + ctx + "kind': unknown process '" +
                      k + "'");
  }
  if (j.contains("mixing")) {
    const json& mj = j.at("mixing");
    if (!mj.is_object()) {
      throw ConfigError("config field '" + ctx + "mixing' must be an object");
    }
    MixingMetadata meta;
    if (mj.contains("rho1")) meta.rho1 = need_number(mj, "rho1", ctx);
    if (mj.contains("rho_geometric_rate")) {
      meta.rho_geometric_rate = need_number(mj, "rho_geometric_rate", ctx);
    }
    if (mj.contains("rho_star1")) {
      meta.rho_star1 = need_number(mj, "rho_star1", ctx);
    }
    if (mj.contains("alpha_vanishes")) {
      if (!mj.at("alpha_vanishes").is_boolean()) {
        throw ConfigError("config field '" + ctx +
                          "mixing.alpha_vanishes' must be a boolean");
      }
      meta.alpha_vanishes = mj.at("alpha_vanishes").get<bool>();
    }
    if (mj.contains("note")) meta.provenance = need_string(mj, "note", ctx);
    spec.declared_mixing = meta;
  }
  validate(spec);
  return spec;
}

json process_to_json(const ProcessSpec& spec) {
  json j;
  if (const auto* iid = std::get_if<IidSpec>(&spec.kind)) {
    j["kind"] = "iid";
    j["marginal"] = marginal_to_json(iid->marginal);
  } else if (const auto* ar = std::get_if<GaussianAr1Spec>(&spec.kind)) {
    j["kind"] = "gaussian_ar1";
    j["phi"] = ar->phi;
  } else if (const auto* ma = std::get_if<MovingAverageSpec>(&spec.kind)) {
    j["kind"] = "moving_average";
    j["weights"] = ma->weights;
    j["innovation"] = marginal_to_json(ma->innovation);
  } else {
    const auto& cc = std::get<CancellationChainSpec>(spec.kind);
    j["kind"] = "cancellation_chain";
    j["lambda"] = cc.lambda;
  }
  if (spec.declared_mixing) {
    json mj;
    if (spec.declared_mixing->rho1) mj["rho1"] = *spec.declared_mixing->rho1;
    if (spec.declared_mixing->rho_geometric_rate) {
      mj["rho_geometric_rate"] = *spec.declared_mixing->rho_geometric_rate;
    }
    if (spec.declared_mixing->rho_star1) {
      mj["rho_star1"] = *spec.declared_mixing->rho_star1;
    }
    mj["alpha_vanishes"] = spec.declared_mixing->alpha_vanishes;
    if (!spec.declared_mixing->provenance.empty()) {
      mj["note"] = spec.declared_mixing->provenance;
    }
    j["mixing"] = mj;
  }
  return j;
}

// ---------------------------------------------------------------------------
// output plumbing

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class Emitter {
 public:
  Emitter(fs::path dir, std::string command, json resolved_config)
      : dir_(std::move(dir)),
        command_(std::move(command)),
        config_(std::move(resolved_config)) {
    fs::create_directories(dir_);
  }

  const json& config() const { return config_; }

  void text_file(const std::string& name, const std::string& content,
                 const std::string& provenance) {
    write(name, content);
    record(name, provenance);
  }

  void json_file(const std::string& name, json body,
                 const std::string& provenance) {
    body["command"] = command_;
    body["config"] = config_;
    body["provenance"] = provenance;
    write(name, body.dump(2) + "\n");
    record(name, provenance);
  }

  void finish() {
    json manifest;
    manifest["command"] = command_;
    manifest["config"] = config_;
    manifest["outputs"] = outputs_;
    manifest["schema_version"] = 1;
    write("manifest.json", manifest.dump(2) + "\n");
    std::cout << "wrote " << (outputs_.size() + 1) << " file(s) under "
              << dir_.string() << "\n";
  }

 private:
  void write(const std::string& name, const std::string& content) {
    const fs::path path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw NumericError("cannot write output file " + path.string());
    out << content;
  }
  void record(const std::string& name, const std::string& provenance) {
    json entry;
    entry["file"] = name;
    entry["provenance"] = provenance;
    outputs_.push_back(entry);
  }

  fs::path dir_;
  std::string command_;
  json config_;
  json outputs_ = json::array();
};

struct GlobalArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 1;
  std::int64_t reps = 0;
  int workers = 0;
  CLI::App* parsed = nullptr;

  bool given(const std::string& flag) const {
    return parsed != nullptr && parsed->count(flag) > 0;
  }
};

json load_config(const GlobalArgs& g, const std::string& command) {
  json cfg = json::object();
  if (!g.config_path.empty()) {
    std::ifstream in(g.config_path);
    if (!in) throw ConfigError("cannot open config file " + g.config_path);
    try {
      cfg = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config file is not valid JSON: " +
                        std::string(e.what()));
    }
    if (cfg.is_object() && cfg.contains("command")) {
      // manifest round-trip: unwrap the embedded resolved config
      if (cfg.at("command").get<std::string>() != command) {
        throw ConfigError("manifest was produced by '" +
                          cfg.at("command").get<std::string>() +
                          "', not '" + command + "'");
      }
      cfg = need_field(cfg, "config", "");
    }
  }
  if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
  if (g.given("--seed")) cfg["seed"] = g.seed;
  if (g.given("--reps")) cfg["reps"] = g.reps;
  return cfg;
}

fs::path resolve_out_dir(const GlobalArgs& g, const std::string& command) {
  if (!g.out_dir.empty()) return g.out_dir;
  if (const char* env = std::getenv("SHRINKLAB_OUT")) {
    return fs::path(env) / command;
  }
  return fs::path("out") / command;
}

// ---------------------------------------------------------------------------
// subcommand runners

void run_shrink_eval(const GlobalArgs& g) {
  json cfg = load_config(g, "shrink-eval");
  const std::vector<double> xs = get_number_array(
      cfg, "x_values", {-5.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 5.0});
  const std::vector<double> radii =
      get_number_array(cfg, "radii", {0.0, 0.5, 1.0, 2.0});
  cfg["x_values"] = xs;
  cfg["radii"] = radii;
  cfg.erase("seed");
  cfg.erase("reps");

  std::string csv = "x,r,shrink,magnitude\n";
  for (double x : xs) {
    for (double r : radii) {
      const ShrinkRadius radius(r);
      csv += fmt(x) + "," + fmt(r) + "," + fmt(shrink(x, radius)) + "," +
             fmt(shrink_magnitude(x, radius)) + "\n";
    }
  }
  Emitter em(resolve_out_dir(g, "shrink-eval"), "shrink-eval", cfg);
  em.text_file("shrink_table.csv", csv,
               "table of the shrinking map sign(x) max(|x| - r, 0)");
  em.finish();
}

void run_gfun(const GlobalArgs& g) {
  json cfg = load_config(g, "gfun");
  const Marginal dist = parse_marginal(need_field(cfg, "dist", ""), "dist.");
  std::vector<double> grid(21);
  for (int i = 0; i <= 20; ++i) grid[static_cast<std::size_t>(i)] = 0.5 * i;
  const std::vector<double> r_grid = get_number_array(cfg, "r_grid", grid);
  cfg["dist"] = marginal_to_json(dist);
  cfg["r_grid"] = r_grid;
  cfg.erase("seed");
  cfg.erase("reps");

  const std::string provenance =
      "tail functional G(r) = integral over t >= 0 of t P(|X| > t + r); "
      "2 G(r) is the second moment of the shrunken observation";
  std::string csv = "r,g,shrunken_second_moment\n";
  json points = json::array();
  for (double r : r_grid) {
    const double gv = g_function(dist, ShrinkRadius(r));
    csv += fmt(r) + "," + fmt(gv) + "," + fmt(2.0 * gv) + "\n";
    json p;
    p["r"] = r;
    p["g"] = num(gv);
    points.push_back(p);
  }
  Emitter em(resolve_out_dir(g, "gfun"), "gfun", cfg);
  em.text_file("gfun.csv", csv, provenance);
  json body;
  body["points"] = points;
  em.json_file("gfun.json", body, provenance);
  em.finish();
}

void run_check_tails(const GlobalArgs& g) {
  json cfg = load_config(g, "check-tails");
  const Marginal dist = parse_marginal(need_field(cfg, "dist", ""), "dist.");
  const std::vector<double> r_grid = get_number_array(
      cfg, "r_grid", {0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0});
  const std::vector<double> eps_grid =
      get_number_array(cfg, "eps_grid", {0.25, 0.5, 1.0});
  const double threshold = get_number(cfg, "pass_threshold", 0.05);
  cfg["dist"] = marginal_to_json(dist);
  cfg["r_grid"] = r_grid;
  cfg["eps_grid"] = eps_grid;
  cfg["pass_threshold"] = threshold;
  cfg.erase("seed");
  cfg.erase("reps");

  const TailConditionReport rep =
      check_tail_conditions(dist, r_grid, eps_grid, threshold);

  const std::string provenance =
      "positivity of the tail functional G and the finite-grid surrogate of "
      "the vanishing shifted-ratio limit G(r + eps) / G(r) -> 0";
  json body;
  body["holds_positivity"] = rep.holds_positivity;
  body["holds_ratio_vanishes"] = rep.holds_ratio_vanishes;
  json gv = json::array();
  for (double v : rep.g_values) gv.push_back(num(v));
  body["g_values"] = gv;
  json curve = json::array();
  std::string csv = "r,eps,ratio\n";
  for (const auto& pt : rep.ratio_curve) {
    json p;
    p["r"] = pt.r;
    p["eps"] = pt.eps;
    p["ratio"] = num(pt.ratio);
    curve.push_back(p);
    csv += fmt(pt.r) + "," + fmt(pt.eps) + "," + fmt(pt.ratio) + "\n";
  }
  body["ratio_curve"] = curve;
  body["diagnostics"] = rep.diagnostics;

  Emitter em(resolve_out_dir(g, "check-tails"), "check-tails", cfg);
  em.json_file("tail_report.json", body, provenance);
  em.text_file("tail_ratios.csv", csv, provenance);
  std::cout << "positivity: " << (rep.holds_positivity ? "holds" : "fails")
            << ", vanishing ratio: "
            << (rep.holds_ratio_vanishes ? "holds" : "fails") << "\n";
  em.finish();
}

void run_mixing_exact(const GlobalArgs& g) {
  json cfg = load_config(g, "mixing-exact");
  cfg.erase("seed");
  cfg.erase("reps");

  const std::string provenance =
      "alpha = sup |P(A and B) - P(A) P(B)| by subset enumeration; rho = "
      "maximal correlation, the top singular value of the centered "
      "standardized joint matrix";

  if (cfg.contains("chain")) {
    const json& cj = cfg.at("chain");
    double theta;
    if (cj.contains("theta")) {
      theta = need_number(cj, "theta", "chain.");
    } else {
      theta = need_number(cj, "lambda", "chain.") / 4.0;
    }
    const std::int64_t max_lag = get_int(cj, "max_lag", 12, "chain.");
    if (max_lag < 1) {
      throw ConfigError("config field 'chain.max_lag' must be >= 1");
    }
    cfg["chain"] = {{"theta", theta}, {"max_lag", max_lag}};
    Emitter em(resolve_out_dir(g, "mixing-exact"), "mixing-exact", cfg);

    const JointDistribution lag1 = chain_lagged_joint(theta, 1);
    const RhoDecayReport decay =
        chain_rho_decay(theta, static_cast<std::uint64_t>(max_lag));
    json body;
    body["theta"] = theta;
    body["lag1"] = {{"alpha", alpha_coefficient(lag1)},
                    {"rho", rho_coefficient(lag1)},
                    {"alpha_bound_2theta", 2.0 * theta}};
    json pts = json::array();
    std::string csv = "lag,rho\n";
    for (const auto& pt : decay.points) {
      pts.push_back({{"lag", pt.lag}, {"rho", pt.rho}});
      csv += std::to_string(pt.lag) + "," + fmt(pt.rho) + "\n";
    }
    body["rho_decay"] = pts;
    body["fitted_rate"] = decay.fitted_rate;
    body["log_r_squared"] = decay.log_r_squared;
    body["fit_window"] = {{"from", decay.fit_from}, {"to", decay.fit_to}};
    body["excursion_boundary_correlation"] =
        excursion_boundary_correlation(4.0 * theta);
    em.json_file("mixing.json", body, provenance);
    em.text_file("rho_decay.csv", csv, provenance);
    em.finish();
    return;
  }

  JointDistribution joint = [&]() {
    if (cfg.contains("joint_csv")) {
      const std::string path = need_string(cfg, "joint_csv", "");
      std::ifstream in(path);
      if (!in) throw ConfigError("cannot open joint CSV " + path);
      return JointDistribution::from_csv(in);
    }
    const json& rows = need_field(cfg, "joint", "");
    if (!rows.is_array() || rows.empty()) {
      throw ConfigError("config field 'joint' must be a matrix");
    }
    std::vector<std::vector<double>> m;
    for (const auto& row : rows) {
      if (!row.is_array()) {
        throw ConfigError("config field 'joint' must be a matrix");
      }
      std::vector<double> r;
      for (const auto& cell : row) {
        if (!cell.is_number()) {
          throw ConfigError("config field 'joint' must contain numbers");
        }
        r.push_back(cell.get<double>());
      }
      m.push_back(std::move(r));
    }
    return JointDistribution::from_rows(m);
  }();
  Emitter em(resolve_out_dir(g, "mixing-exact"), "mixing-exact", cfg);
  json body;
  body["rows"] = joint.rows();
  body["cols"] = joint.cols();
  body["alpha"] = alpha_coefficient(joint);
  body["rho"] = rho_coefficient(joint);
  em.json_file("mixing.json", body, provenance);
  em.text_file("joint.csv", joint.to_csv(),
               "the analyzed joint law as a CSV matrix");
  em.finish();
}

void run_solve_rn(const GlobalArgs& g) {
  json cfg = load_config(g, "solve-rn");
  const ProcessSpec spec =
      parse_process(need_field(cfg, "process", ""), "process.");
  const std::int64_t n = need_int(cfg, "n");
  const double tol = get_number(cfg, "tol", 0.02);
  const std::int64_t reps = get_int(cfg, "reps", 5000);
  const std::uint64_t seed =
      static_cast<std::uint64_t>(get_int(cfg, "seed", 1));
  cfg["process"] = process_to_json(spec);
  cfg["n"] = n;
  cfg["tol"] = tol;
  cfg["reps"] = reps;
  cfg["seed"] = seed;

  const RnSolveResult res = solve_rn(spec, n, tol, reps, seed, g.workers);

  json body;
  body["n"] = res.n;
  body["r_n"] = res.r_n;
  body["sigma_hat"] = res.sigma_hat;
  body["sigma_se"] = res.sigma_se;
  body["sigma_at_zero"] = res.sigma_at_zero;
  body["reps"] = res.reps;
  body["tol"] = res.tol;
  body["converged"] = res.converged;
  body["m_r"] = {{"value", res.m_r.value},
                 {"std_error", res.m_r.std_error},
                 {"analytic", res.m_r.analytic}};
  json hist = json::array();
  for (const auto& st : res.bracket_history) {
    hist.push_back({{"lo", st.lo},
                    {"hi", st.hi},
                    {"mid", st.mid},
                    {"sigma_mid", st.sigma_mid}});
  }
  body["bracket_history"] = hist;

  Emitter em(resolve_out_dir(g, "solve-rn"), "solve-rn", cfg);
  em.json_file("rn_solve.json", body,
               "normalization radius: bisection under common random numbers "
               "for the unit L2 norm of the centered shrunken partial sum");
  std::cout << "r(" << n << ") = " << res.r_n << " (sigma_hat = "
            << res.sigma_hat << ")\n";
  em.finish();
}

void run_clt_run(const GlobalArgs& g) {
  json cfg = load_config(g, "clt-run");
  const ProcessSpec spec =
      parse_process(need_field(cfg, "process", ""), "process.");
  const std::vector<std::int64_t> n_grid =
      get_int_array(cfg, "n_grid", {200, 2000});
  const std::int64_t reps = get_int(cfg, "reps", 5000);
  const std::uint64_t seed =
      static_cast<std::uint64_t>(get_int(cfg, "seed", 1));
  CltOptions options;
  options.eps_grid = get_number_array(cfg, "eps_grid", options.eps_grid);
  options.solver_tol = get_number(cfg, "solver_tol", options.solver_tol);
  options.solver_reps = get_int(cfg, "solver_reps", options.solver_reps);
  cfg["process"] = process_to_json(spec);
  cfg["n_grid"] = n_grid;
  cfg["reps"] = reps;
  cfg["seed"] = seed;
  cfg["eps_grid"] = options.eps_grid;
  cfg["solver_tol"] = options.solver_tol;
  cfg["solver_reps"] = options.solver_reps;

  const CltReport rep =
      clt_experiment(spec, n_grid, reps, seed, g.workers, options);

  const std::string provenance =
      "standardized shrunken partial sums against the standard normal law: "
      "KS distance, sample moments, Lindeberg functional along the solved "
      "normalization radii";
  json body;
  body["process"] = rep.process;
  body["tail_gate"] = {{"holds_positivity", rep.tail_gate.holds_positivity},
                       {"holds_ratio_vanishes",
                        rep.tail_gate.holds_ratio_vanishes}};
  json stages = json::array();
  std::string lcsv = "n,r_n,eps,value,envelope\n";
  Emitter em(resolve_out_dir(g, "clt-run"), "clt-run", cfg);
  for (const auto& st : rep.stages) {
    json sj;
    sj["n"] = st.n;
    sj["r_n"] = st.solve.r_n;
    sj["sigma_hat"] = st.solve.sigma_hat;
    sj["ks_distance"] = st.ks_distance;
    sj["mean"] = st.moments.mean;
    sj["variance"] = st.moments.variance;
    sj["skewness"] = st.moments.skewness;
    sj["kurtosis"] = st.moments.kurtosis;
    sj["sum_variance_ratio"] = st.sum_variance_ratio;
    json lind = json::array();
    for (const auto& row : st.lindeberg) {
      lind.push_back({{"eps", row.eps},
                      {"value", row.value},
                      {"envelope", num(row.envelope)}});
      lcsv += std::to_string(row.n) + "," + fmt(row.r_n) + "," +
              fmt(row.eps) + "," + fmt(row.value) + "," + fmt(row.envelope) +
              "\n";
    }
    sj["lindeberg"] = lind;
    stages.push_back(sj);

    // standardized-sum sample for external plotting; the pool is
    // deterministic, so this reproduces the sample analyzed above
    const auto sums = standardized_sums(spec, st.n, ShrinkRadius(st.solve.r_n),
                                        reps, seed, g.workers);
    std::string scsv = "sum\n";
    for (double s : sums) scsv += fmt(s) + "\n";
    em.text_file("sums_n" + std::to_string(st.n) + ".csv", scsv,
                 "independent realizations of the centered shrunken partial "
                 "sum at the solved radius");
    std::cout << "n = " << st.n << ": r_n = " << st.solve.r_n
              << ", KS = " << st.ks_distance
              << ", variance = " << st.moments.variance << "\n";
  }
  body["stages"] = stages;
  em.json_file("clt_report.json", body, provenance);
  em.text_file("lindeberg.csv", lcsv,
               "Lindeberg functional n E[Y^2 1(|Y| >= eps)] with its "
               "analytic envelope 8 n G(r + eps/2)");
  em.finish();
}

void run_cancellation_demo(const GlobalArgs& g) {
  json cfg = load_config(g, "cancellation-demo");
  const double lambda = get_number(cfg, "lambda", 0.4);
  const std::int64_t n = get_int(cfg, "n", 100);
  const double r = get_number(cfg, "r", 1.0);
  const std::int64_t reps = get_int(cfg, "reps", 10000);
  const std::uint64_t seed =
      static_cast<std::uint64_t>(get_int(cfg, "seed", 1));
  cfg["lambda"] = lambda;
  cfg["n"] = n;
  cfg["r"] = r;
  cfg["reps"] = reps;
  cfg["seed"] = seed;

  const CancellationReport rep =
      cancellation_demo(lambda, n, ShrinkRadius(r), reps, seed, g.workers);

  json body;
  body["lambda"] = rep.lambda;
  body["theta"] = rep.theta;
  body["n"] = rep.n;
  body["r"] = rep.r;
  body["reps"] = rep.reps;
  body["empirical_zero_freq"] = rep.empirical_zero_freq;
  body["freq_se"] = rep.freq_se;
  body["exact_rest_prob"] = rep.exact_rest_prob;
  body["lower_bound"] = rep.lower_bound;

  Emitter em(resolve_out_dir(g, "cancellation-demo"), "cancellation-demo",
             cfg);
  em.json_file("cancellation.json", body,
               "frequency of exactly-zero shrunken partial sums of the "
               "hidden-chain process; exact probability of resting at both "
               "window ends via transition powers; lower bound 1 - lambda");
  std::cout << "zero frequency = " << rep.empirical_zero_freq
            << " (exact rest prob = " << rep.exact_rest_prob
            << ", bound = " << rep.lower_bound << ")\n";
  em.finish();
}

void run_identity_suite(const GlobalArgs& g) {
  json cfg = load_config(g, "identity-suite");
  const std::int64_t count = get_int(cfg, "count", 100000);
  const double tol = get_number(cfg, "tol", 1e-12);
  const std::uint64_t seed =
      static_cast<std::uint64_t>(get_int(cfg, "seed", 1));
  cfg["count"] = count;
  cfg["tol"] = tol;
  cfg["seed"] = seed;
  cfg.erase("reps");

  const IdentitySuiteResult res = shrinklab::run_identity_suite(count, seed, tol);
  json checks = json::array();
  for (const auto& c : res.checks) {
    std::cout << (c.failures == 0 ? "PASS " : "FAIL ") << c.name
              << " (max deviation " << c.max_deviation << ")\n";
    checks.push_back({{"name", c.name},
                      {"max_deviation", c.max_deviation},
                      {"failures", c.failures}});
  }
  std::cout << (res.all_pass ? "all identities hold" : "identity failures")
            << " over " << res.trials << " trials at tolerance "
            << res.tolerance << "\n";
  json body;
  body["trials"] = res.trials;
  body["tolerance"] = res.tolerance;
  body["all_pass"] = res.all_pass;
  body["checks"] = checks;
  Emitter em(resolve_out_dir(g, "identity-suite"), "identity-suite", cfg);
  em.json_file("identity_suite.json", body,
               "randomized battery of the algebraic identities of the "
               "shrinking map");
  em.finish();
  if (!res.all_pass) throw NumericError("identity suite failed");
}

void run_sample_path(const GlobalArgs& g) {
  json cfg = load_config(g, "sample-path");
  const ProcessSpec spec =
      parse_process(need_field(cfg, "process", ""), "process.");
  const std::int64_t n = get_int(cfg, "n", 100);
  const std::uint64_t seed =
      static_cast<std::uint64_t>(get_int(cfg, "seed", 1));
  cfg["process"] = process_to_json(spec);
  cfg["n"] = n;
  cfg["seed"] = seed;
  cfg.erase("reps");

  const SamplePath path = sample_path(spec, n, seed);
  Emitter em(resolve_out_dir(g, "sample-path"), "sample-path", cfg);
  em.text_file("path.csv", path_to_csv(path),
               "seeded strictly stationary realization (columns k, x and the "
               "hidden state v when present)");
  em.finish();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "shrinklab: a numerical laboratory for shrunken weakly dependent "
      "stationary sequences"};
  app.require_subcommand(1);

  GlobalArgs g;
  const auto add_common = [&](CLI::App* sc) {
    sc->add_option("--config", g.config_path,
                   "JSON config file (a previously written manifest works "
                   "too)");
    sc->add_option("--out", g.out_dir, "output directory");
    sc->add_option("--seed", g.seed, "base seed (overrides the config)");
    sc->add_option("--reps", g.reps,
                   "replicate count (overrides the config)");
    sc->add_option("--workers", g.workers,
                   "worker threads (0 = hardware); never changes results");
    return sc;
  };

  add_common(app.add_subcommand("shrink-eval",
                                "tabulate the shrinking map over x and r"));
  add_common(app.add_subcommand("gfun", "tail functional G(r) curves"));
  add_common(app.add_subcommand("check-tails",
                                "tail-condition diagnostics of a marginal"));
  add_common(app.add_subcommand(
      "mixing-exact", "exact dependence coefficients of a finite joint law "
                      "or of the hidden cancellation chain"));
  add_common(app.add_subcommand("solve-rn", "normalization-radius solver"));
  add_common(app.add_subcommand("clt-run",
                                "full normal-limit experiment pipeline"));
  add_common(app.add_subcommand("cancellation-demo",
                                "zero-sum frequency of the cancellation "
                                "chain"));
  add_common(app.add_subcommand("identity-suite",
                                "shrinking-map identity battery"));
  add_common(app.add_subcommand("sample-path",
                                "export one seeded realization as CSV"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* sc = app.get_subcommands().front();
  g.parsed = sc;
  const std::string name = sc->get_name();
  try {
    if (name == "shrink-eval") run_shrink_eval(g);
    else if (name == "gfun") run_gfun(g);
    else if (name == "check-tails") run_check_tails(g);
    else if (name == "mixing-exact") run_mixing_exact(g);
    else if (name == "solve-rn") run_solve_rn(g);
    else if (name == "clt-run") run_clt_run(g);
    else if (name == "cancellation-demo") run_cancellation_demo(g);
    else if (name == "identity-suite") run_identity_suite(g);
    else if (name == "sample-path") run_sample_path(g);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition error: " << e.what() << "\n";
    return 4;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

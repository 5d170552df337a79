// Command-line driver: basis tables, estimate suite, dissipativity thresholds
// and ensembles, and time integration, all from flat config files.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hermstokes/basis.hpp"
#include "hermstokes/config.hpp"
#include "hermstokes/container.hpp"
#include "hermstokes/dissipativity.hpp"
#include "hermstokes/errors.hpp"
#include "hermstokes/estimates.hpp"
#include "hermstokes/evolution.hpp"
#include "hermstokes/manifest.hpp"
#include "hermstokes/operators.hpp"
#include "hermstokes/version.hpp"

namespace fs = std::filesystem;
namespace hs = hermstokes;
using nlohmann::json;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::string out_dir = ".";
  bool quiet = false;
  bool seed_given = false;
  std::uint64_t seed = 0;
};

void say(const GlobalOpts& g, const std::string& line) {
  if (!g.quiet) std::cout << line << "\n";
}

fs::path ensure_out_dir(const GlobalOpts& g) {
  fs::path dir(g.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw hs::io_error("cannot create output directory '" + g.out_dir + "'");
  return dir;
}

hs::Config required_config(const GlobalOpts& g) {
  if (g.config_path.empty())
    throw hs::validation_error("this command requires --config <file>");
  return hs::Config::load(g.config_path);
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw hs::io_error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw hs::io_error("write failure on '" + path.string() + "'");
}

void write_json_file(const fs::path& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

std::string num17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---------- converters ----------

json report_json(const hs::EstimateReport& r) {
  json j;
  j["estimate_id"] = r.estimate_id;
  j["n_samples"] = r.n_samples;
  j["n_modes"] = r.n_modes;
  j["seed"] = r.seed;
  j["empirical_constant"] = r.empirical_constant;
  j["violations"] = r.violations;
  j["parameters"] = r.parameters;
  return j;
}

std::string reports_csv(const std::vector<hs::EstimateReport>& reps) {
  std::string text = "estimate_id,n_samples,n_modes,seed,empirical_constant,violations\n";
  for (const hs::EstimateReport& r : reps) {
    text += r.estimate_id + ',' + std::to_string(r.n_samples) + ',' +
            std::to_string(r.n_modes) + ',' + std::to_string(r.seed) + ',' +
            num17(r.empirical_constant) + ',' + std::to_string(r.violations) + '\n';
  }
  return text;
}

const char* notion_name(hs::DissNotion n) {
  switch (n) {
    case hs::DissNotion::zero_diss: return "zero_diss";
    case hs::DissNotion::diss: return "diss";
    case hs::DissNotion::strong: return "strong";
    case hs::DissNotion::uniform: return "uniform";
  }
  return "?";
}

const char* force_kind_name(hs::ForceKind k) {
  switch (k) {
    case hs::ForceKind::zero: return "zero";
    case hs::ForceKind::constant: return "constant";
    case hs::ForceKind::hoelder: return "hoelder";
  }
  return "?";
}

json force_json(const hs::ForceModel& f) {
  json j;
  j["kind"] = force_kind_name(f.kind);
  j["amplitude"] = f.amplitude;
  j["theta"] = f.theta;
  j["d_lip"] = f.d_lip;
  j["seed"] = f.seed;
  return j;
}

// ---------- config-driven pieces ----------

hs::ForceModel parse_force(const hs::Config& cfg) {
  hs::ForceModel f;
  const std::string kind = cfg.get_string("force.kind", "zero");
  if (kind == "zero")
    f.kind = hs::ForceKind::zero;
  else if (kind == "constant")
    f.kind = hs::ForceKind::constant;
  else if (kind == "hoelder")
    f.kind = hs::ForceKind::hoelder;
  else
    throw hs::validation_error("config: force.kind must be zero, constant, or hoelder");
  f.amplitude = cfg.get_double("force.amplitude", 0.0);
  f.theta = cfg.get_double("force.theta", 0.5);
  f.d_lip = cfg.get_double("force.d_lip", 1.0);
  f.seed = cfg.get_uint64("force.seed", 1);
  hs::validate_force(f);
  return f;
}

/** Threshold scalars plus the provenance of c and λ₁ (measured vs override). */
struct ThresholdBuild {
  hs::ThresholdParams params;
  double lambda1_measured = 0.0;
  bool lambda1_overridden = false;
  std::string c_source;  // "config" | "empirical"
  int c_samples = 0;
  std::uint64_t c_seed = 0;
};

ThresholdBuild build_thresholds(const hs::Config& cfg, const hs::OperatorCache& cache,
                                double nu, double epsilon, const hs::ForceModel& force,
                                hs::PhaseClock& clock) {
  if (!(epsilon > 0.0 && epsilon < 0.5))
    throw hs::validation_error("thresholds: epsilon must lie in (0, 1/2)");
  ThresholdBuild tb;
  const int n_sel = static_cast<int>(cfg.get_int("threshold.n_sel", 1));
  const double omega = cfg.get_double("threshold.omega", 1.0);
  double c = 0.0;
  if (cfg.has("threshold.c")) {
    c = cfg.get_double("threshold.c");
    tb.c_source = "config";
  } else {
    tb.c_samples = static_cast<int>(cfg.get_int("threshold.c_samples", 40));
    tb.c_seed = cfg.get_uint64("threshold.c_seed", 1);
    if (tb.c_samples < 1)
      throw hs::validation_error("thresholds: threshold.c_samples must be >= 1");
    clock.start("constant_c");
    c = hs::verify_thm3(epsilon, tb.c_samples, tb.c_seed, cache).empirical_constant;
    tb.c_source = "empirical";
  }
  clock.start("thresholds");
  const double delta = 0.25 + 0.5 * epsilon;
  const double a = hs::constant_a(cache, delta);
  tb.lambda1_measured = cache.lambda1_B;
  double lambda1 = cache.lambda1_B;
  if (cfg.has("threshold.lambda1_override")) {
    lambda1 = cfg.get_double("threshold.lambda1_override");
    tb.lambda1_overridden = true;
  }
  double lambda0 = 0.0;
  if (cfg.has("threshold.lambda0_override"))
    lambda0 = cfg.get_double("threshold.lambda0_override");
  else
    lambda0 = hs::select_lambda0(cache.eig_B.values, n_sel, omega);
  tb.params = hs::compute_thresholds(nu, hs::force_sup(force), c, a, lambda1, lambda0,
                                     epsilon, n_sel, omega);
  return tb;
}

json threshold_json(const ThresholdBuild& tb) {
  const hs::ThresholdParams& p = tb.params;
  json j;
  j["nu"] = p.nu;
  j["f_sup"] = p.f_sup;
  j["c"] = p.c;
  j["a"] = p.a;
  j["lambda1"] = p.lambda1;
  j["lambda0"] = p.lambda0;
  j["omega"] = p.omega;
  j["n_sel"] = p.n_sel;
  j["epsilon"] = p.epsilon;
  j["delta"] = p.delta;
  j["gamma"] = p.gamma;
  j["u_minus"] = p.u_minus;
  j["u_plus"] = p.u_plus;
  j["alpha_strong"] = p.alpha_strong;
  j["rejected"] = p.rejected;
  j["degenerate"] = p.degenerate;
  j["lambda1_measured"] = tb.lambda1_measured;
  j["lambda1_override_active"] = tb.lambda1_overridden;
  j["c_source"] = tb.c_source;
  if (tb.c_source == "empirical") {
    j["c_samples"] = tb.c_samples;
    j["c_seed"] = tb.c_seed;
  }
  return j;
}

json diss_json(const hs::DissipativityReport& r, bool asserted) {
  json j;
  j["notion"] = notion_name(r.notion);
  j["samples"] = r.samples;
  j["worst_value"] = r.worst_value;
  j["alpha_measured"] = r.alpha_measured;
  j["pass"] = r.pass;
  j["tolerance"] = r.tolerance;
  j["slack"] = r.slack;
  j["asserted"] = asserted;
  return j;
}

// ---------- subcommands ----------

int run_basis(const GlobalOpts& g, int n_modes, int n_quad) {
  if (n_modes < 1) throw hs::validation_error("basis: n_modes must be >= 1");
  if (n_quad < 0) throw hs::validation_error("basis: n_quad must be >= 0");
  if (n_quad == 0) n_quad = hs::default_n_quad(n_modes);
  hs::PhaseClock clock;
  clock.start("build");
  auto basis = hs::build_basis(n_modes, n_quad);
  clock.start("write");
  const fs::path dir = ensure_out_dir(g);
  const fs::path csv = dir / "basis.csv";
  std::string text = "kind,index,value\n";
  for (int q = 0; q < basis->n_quad; ++q)
    text += "node," + std::to_string(q) + ',' + num17(basis->nodes(q)) + '\n';
  for (int q = 0; q < basis->n_quad; ++q)
    text += "weight," + std::to_string(q) + ',' + num17(basis->weights(q)) + '\n';
  for (int q = 0; q < basis->n_quad; ++q)
    text += "dweight," + std::to_string(q) + ',' + num17(basis->dweights(q)) + '\n';
  for (int n = 0; n < basis->n_modes; ++n)
    text += "eigenvalue," + std::to_string(n) + ',' + num17(basis->eigs_1d(n)) + '\n';
  write_text_file(csv, text);

  hs::RunManifest m;
  m.command = "basis";
  m.config_path = g.config_path;
  m.out_dir = dir.string();
  hs::record_artifact(m, csv.string());
  m.timings = clock.timings();
  hs::write_manifest((dir / "manifest.json").string(), m);
  say(g, "basis: wrote " + csv.string());
  return 0;
}

int run_verify(const GlobalOpts& g) {
  hs::Config cfg = required_config(g);
  if (g.seed_given) cfg.set("verify.seed", std::to_string(g.seed));
  const int n_modes = static_cast<int>(cfg.get_int("verify.n_modes", 6));
  int n_quad = static_cast<int>(cfg.get_int("verify.n_quad", 0));
  const int samples = static_cast<int>(cfg.get_int("verify.samples", 40));
  const std::uint64_t seed = cfg.get_uint64("verify.seed", 1);
  const double epsilon = cfg.get_double("verify.epsilon", 0.25);
  if (n_modes < 1) throw hs::validation_error("verify: n_modes must be >= 1");
  if (samples < 1) throw hs::validation_error("verify: samples must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 0.5))
    throw hs::validation_error("verify: epsilon must lie in (0, 1/2)");
  if (n_quad == 0) n_quad = hs::default_n_quad(n_modes);

  hs::PhaseClock clock;
  clock.start("build_cache");
  const hs::OperatorCache cache = hs::build_cache(hs::build_basis(n_modes, n_quad));

  clock.start("estimates");
  std::vector<hs::EstimateReport> reports = hs::verify_all(samples, seed, cache, epsilon);

  clock.start("lipschitz");
  hs::ForceModel lf;
  lf.kind = hs::ForceKind::hoelder;
  lf.amplitude = cfg.get_double("lipschitz.amplitude", 0.05);
  lf.theta = cfg.get_double("lipschitz.theta", 0.5);
  lf.d_lip = cfg.get_double("lipschitz.d_lip", 1.0);
  lf.seed = cfg.get_uint64("lipschitz.seed", 4242);
  hs::validate_force(lf);
  hs::ThresholdParams lp;
  lp.nu = cfg.get_double("lipschitz.nu", 1.0);
  if (!(lp.nu > 0.0)) throw hs::validation_error("verify: lipschitz.nu must be positive");
  lp.epsilon = epsilon;
  lp.delta = 0.25 + 0.5 * epsilon;
  lp.a = hs::constant_a(cache, lp.delta);
  const int pairs = static_cast<int>(cfg.get_int("lipschitz.pairs", 200));
  if (pairs < 1) throw hs::validation_error("verify: lipschitz.pairs must be >= 1");
  reports.push_back(hs::test_J_time_lipschitz(lf, lp, cache, pairs, lf.seed));

  int violations = 0;
  for (const hs::EstimateReport& r : reports) violations += r.violations;

  clock.start("write");
  const fs::path dir = ensure_out_dir(g);
  json jr = json::array();
  for (const hs::EstimateReport& r : reports) jr.push_back(report_json(r));
  const fs::path jpath = dir / "verify_reports.json";
  const fs::path cpath = dir / "verify_reports.csv";
  write_json_file(jpath, jr);
  write_text_file(cpath, reports_csv(reports));

  hs::RunManifest m;
  m.command = "verify";
  m.config_path = g.config_path;
  m.config = cfg.entries();
  m.seeds = {{"verify.seed", seed}, {"lipschitz.seed", lf.seed}};
  m.inputs = {g.config_path};
  m.out_dir = dir.string();
  hs::record_artifact(m, jpath.string());
  hs::record_artifact(m, cpath.string());
  m.timings = clock.timings();
  hs::write_manifest((dir / "manifest.json").string(), m);

  say(g, "verify: " + std::to_string(reports.size()) + " reports, " +
             std::to_string(violations) + " violations");
  return violations == 0 ? 0 : 1;
}

int run_threshold(const GlobalOpts& g) {
  hs::Config cfg = required_config(g);
  if (g.seed_given) cfg.set("threshold.c_seed", std::to_string(g.seed));
  const int n_modes = static_cast<int>(cfg.get_int("threshold.n_modes", 6));
  int n_quad = static_cast<int>(cfg.get_int("threshold.n_quad", 0));
  const double nu = cfg.get_double("threshold.nu", 1.0);
  const double epsilon = cfg.get_double("threshold.epsilon", 0.25);
  if (n_modes < 1) throw hs::validation_error("threshold: n_modes must be >= 1");
  if (n_quad == 0) n_quad = hs::default_n_quad(n_modes);
  const hs::ForceModel force = parse_force(cfg);

  hs::PhaseClock clock;
  clock.start("build_cache");
  const hs::OperatorCache cache = hs::build_cache(hs::build_basis(n_modes, n_quad));
  ThresholdBuild tb = build_thresholds(cfg, cache, nu, epsilon, force, clock);

  clock.start("write");
  const fs::path dir = ensure_out_dir(g);
  json j = threshold_json(tb);
  j["force"] = force_json(force);
  j["n_modes"] = n_modes;
  j["n_quad"] = n_quad;
  const fs::path jpath = dir / "threshold.json";
  write_json_file(jpath, j);

  hs::RunManifest m;
  m.command = "threshold";
  m.config_path = g.config_path;
  m.config = cfg.entries();
  if (tb.c_source == "empirical") m.seeds["threshold.c_seed"] = tb.c_seed;
  m.seeds["force.seed"] = force.seed;
  m.inputs = {g.config_path};
  m.out_dir = dir.string();
  hs::record_artifact(m, jpath.string());
  m.timings = clock.timings();
  hs::write_manifest((dir / "manifest.json").string(), m);

  if (!g.quiet) std::cout << j.dump(2) << "\n";
  return tb.params.rejected ? 1 : 0;
}

int run_dissipativity(const GlobalOpts& g) {
  hs::Config cfg = required_config(g);
  if (g.seed_given) cfg.set("diss.seed", std::to_string(g.seed));
  const int n_modes = static_cast<int>(cfg.get_int("diss.n_modes", 6));
  int n_quad = static_cast<int>(cfg.get_int("diss.n_quad", 0));
  const double nu = cfg.get_double("diss.nu", 1.0);
  const double epsilon = cfg.get_double("diss.epsilon", 0.25);
  const std::uint64_t seed = cfg.get_uint64("diss.seed", 1);
  const int default_samples = static_cast<int>(cfg.get_int("diss.samples", 50));
  if (n_modes < 1) throw hs::validation_error("dissipativity: n_modes must be >= 1");
  if (default_samples < 1)
    throw hs::validation_error("dissipativity: diss.samples must be >= 1");
  if (n_quad == 0) n_quad = hs::default_n_quad(n_modes);
  const hs::ForceModel force = parse_force(cfg);

  hs::PhaseClock clock;
  clock.start("build_cache");
  const hs::OperatorCache cache = hs::build_cache(hs::build_basis(n_modes, n_quad));
  ThresholdBuild tb = build_thresholds(cfg, cache, nu, epsilon, force, clock);
  const hs::ThresholdParams& p = tb.params;

  const hs::DissNotion notions[4] = {hs::DissNotion::zero_diss, hs::DissNotion::diss,
                                     hs::DissNotion::strong, hs::DissNotion::uniform};
  std::string csv = "notion,index,pairing,normalizer,value\n";
  json jnotions = json::array();
  bool asserted_failure = false;
  for (int i = 0; i < 4; ++i) {
    const char* name = notion_name(notions[i]);
    const std::string sname(name);
    const int n_k = static_cast<int>(cfg.get_int("diss.samples_" + sname, default_samples));
    const bool asserted = cfg.get_bool("diss.assert_" + sname, true);
    clock.start(sname);
    if (notions[i] != hs::DissNotion::zero_diss) {
      // identical-argument row: the difference pairing vanishes identically
      hs::SpectralField u = hs::detail::sample_in_A_ball(
          cache, hs::derive_seed(hs::derive_seed(seed, 90 + i), 0), 0.5 * p.u_plus);
      double pairing = 0.0;
      if (notions[i] == hs::DissNotion::uniform) {
        hs::SpectralField dA = hs::apply_script_A(u, 0.0, force, p, cache) -
                               hs::apply_script_A(u, 0.0, force, p, cache);
        pairing = hs::inner_H(dA, u - u);
      } else {
        hs::SpectralField dJ = hs::apply_J(u, 0.0, force, p, cache) -
                               hs::apply_J(u, 0.0, force, p, cache);
        pairing = hs::inner_H(dJ, hs::apply_frac(hs::FracOp::AB, -p.delta, u - u, cache));
      }
      csv += sname + ",-1," + num17(pairing) + ",0,0\n";
    }
    std::vector<hs::PairingSample> rows;
    const hs::DissipativityReport rep = hs::test_dissipativity(
        notions[i], p, force, n_k, hs::derive_seed(seed, 1 + i), cache, &rows);
    for (const hs::PairingSample& s : rows)
      csv += sname + ',' + std::to_string(s.index) + ',' + num17(s.pairing) + ',' +
             num17(s.normalizer) + ',' + num17(s.value) + '\n';
    jnotions.push_back(diss_json(rep, asserted));
    if (asserted && !rep.pass) asserted_failure = true;
    say(g, std::string("dissipativity: ") + name + (rep.pass ? " pass" : " FAIL") +
               " (worst " + num17(rep.worst_value) + ")");
  }

  clock.start("envelope");
  const int env_samples = static_cast<int>(cfg.get_int("diss.envelope_samples", 20));
  json jenv;
  if (env_samples > 0) {
    const auto env = hs::b_half_envelope(p, cache, env_samples, hs::derive_seed(seed, 5));
    jenv = {{"samples", env_samples}, {"lo", env.first}, {"hi", env.second}};
  } else {
    jenv = {{"samples", 0}};
  }

  clock.start("write");
  const fs::path dir = ensure_out_dir(g);
  json j;
  j["thresholds"] = threshold_json(tb);
  j["force"] = force_json(force);
  j["notions"] = jnotions;
  j["b_half_envelope"] = jenv;
  const fs::path jpath = dir / "dissipativity.json";
  const fs::path cpath = dir / "pairings.csv";
  write_json_file(jpath, j);
  write_text_file(cpath, csv);

  hs::RunManifest m;
  m.command = "dissipativity";
  m.config_path = g.config_path;
  m.config = cfg.entries();
  m.seeds["diss.seed"] = seed;
  m.seeds["force.seed"] = force.seed;
  if (tb.c_source == "empirical") m.seeds["threshold.c_seed"] = tb.c_seed;
  m.inputs = {g.config_path};
  m.out_dir = dir.string();
  hs::record_artifact(m, jpath.string());
  hs::record_artifact(m, cpath.string());
  m.timings = clock.timings();
  hs::write_manifest((dir / "manifest.json").string(), m);

  return asserted_failure ? 1 : 0;
}

int run_evolve(const GlobalOpts& g) {
  hs::Config cfg = required_config(g);
  if (g.seed_given) cfg.set("u0.seed", std::to_string(g.seed));

  hs::SimConfig sc;
  sc.n_modes = static_cast<int>(cfg.get_int("evolve.n_modes", 8));
  sc.n_quad = static_cast<int>(cfg.get_int("evolve.n_quad", 0));
  sc.nu = cfg.get_double("evolve.nu", 1.0);
  sc.epsilon = cfg.get_double("evolve.epsilon", 0.25);
  sc.dt = cfg.get_double("evolve.dt", 1e-3);
  sc.t_end = cfg.get_double("evolve.t_end", 0.1);
  sc.checkpoint_every = static_cast<int>(cfg.get_int("evolve.checkpoint_every", 0));
  sc.diagnostics_every = static_cast<int>(cfg.get_int("evolve.diagnostics_every", 1));
  sc.disable_nonlinearity = cfg.get_bool("evolve.disable_nonlinearity", false);
  const std::string scheme = cfg.get_string("evolve.scheme", "strang_heat_rk2");
  if (scheme == "strang_heat_rk2")
    sc.scheme = hs::Scheme::strang_heat_rk2;
  else if (scheme == "imex_euler")
    sc.scheme = hs::Scheme::imex_euler;
  else
    throw hs::validation_error(
        "evolve: evolve.scheme must be strang_heat_rk2 or imex_euler");
  sc.force = parse_force(cfg);
  const std::string u0_kind = cfg.get_string("u0.kind", "random_in_ball");
  if (u0_kind == "random_in_ball")
    sc.u0.kind = hs::U0Kind::random_in_ball;
  else if (u0_kind == "from_checkpoint")
    sc.u0.kind = hs::U0Kind::from_checkpoint;
  else
    throw hs::validation_error("evolve: u0.kind must be random_in_ball or from_checkpoint");
  sc.u0.seed = cfg.get_uint64("u0.seed", 1);
  sc.u0.ball_fraction = cfg.get_double("u0.ball_fraction", 0.5);
  if (sc.u0.kind == hs::U0Kind::from_checkpoint)
    sc.u0.checkpoint_path = cfg.get_string("u0.checkpoint_path");
  if (sc.n_modes < 1) throw hs::validation_error("evolve: n_modes must be >= 1");
  const int n_quad = sc.n_quad == 0 ? hs::default_n_quad(sc.n_modes) : sc.n_quad;

  hs::PhaseClock clock;
  clock.start("build_cache");
  const hs::OperatorCache cache = hs::build_cache(hs::build_basis(sc.n_modes, n_quad));
  ThresholdBuild tb = build_thresholds(cfg, cache, sc.nu, sc.epsilon, sc.force, clock);

  clock.start("evolve");
  const hs::EvolveResult result = hs::evolve(sc, tb.params, cache);

  clock.start("write");
  const fs::path dir = ensure_out_dir(g);
  const fs::path dpath = dir / "diagnostics.csv";
  hs::write_diagnostics_csv(dpath.string(), result.diagnostics);

  std::vector<std::string> ck_paths;
  for (const hs::Checkpoint& ck : result.checkpoints) {
    char name[32];
    std::snprintf(name, sizeof name, "ck_%08d.hsf", ck.step);
    const fs::path cpath = dir / name;
    hs::save_checkpoint(cpath.string(), ck.state, ck.step, ck.t);
    ck_paths.push_back(cpath.string());
  }

  const hs::RegularityVerdict verdict = hs::detect_regularity(result, tb.params);
  json jv;
  jv["stayed_in_ball"] = verdict.stayed_in_ball;
  jv["max_norm_V"] = verdict.max_norm_V;
  jv["min_decay_rate"] = verdict.min_decay_rate;
  jv["blew_up"] = verdict.blew_up;
  jv["out_of_regime"] = verdict.out_of_regime;
  jv["asserts_no_blowup"] = verdict.asserts_no_blowup;
  jv["final_step"] = result.final_step;
  jv["final_time"] = result.final_time;
  jv["initial_norm_H"] = result.initial_norm_H;
  jv["stiffness_number"] = result.stiffness_number;
  jv["thresholds"] = threshold_json(tb);
  const fs::path vpath = dir / "verdict.json";
  write_json_file(vpath, jv);

  hs::RunManifest m;
  m.command = "evolve";
  m.config_path = g.config_path;
  m.config = cfg.entries();
  m.seeds["u0.seed"] = sc.u0.seed;
  m.seeds["force.seed"] = sc.force.seed;
  if (tb.c_source == "empirical") m.seeds["threshold.c_seed"] = tb.c_seed;
  m.inputs = {g.config_path};
  if (sc.u0.kind == hs::U0Kind::from_checkpoint) m.inputs.push_back(sc.u0.checkpoint_path);
  m.out_dir = dir.string();
  hs::record_artifact(m, dpath.string());
  for (const std::string& path : ck_paths) hs::record_artifact(m, path);
  hs::record_artifact(m, vpath.string());
  m.timings = clock.timings();
  hs::write_manifest((dir / "manifest.json").string(), m);

  say(g, "evolve: " + std::to_string(result.final_step) + " steps to t=" +
             num17(result.final_time) + (result.blew_up ? " [BLOW-UP]" : ""));
  return result.blew_up ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  GlobalOpts g;
  CLI::App app{"hermstokes: Hermite spectral toolkit for dissipative flow calculus"};
  app.set_version_flag("--version", std::string(hermstokes::kVersion));
  app.require_subcommand(1);
  app.add_option("--config", g.config_path, "configuration file (section.key = value lines)");
  app.add_option("--out", g.out_dir, "output directory, created if absent")
      ->capture_default_str();
  CLI::Option* seed_opt =
      app.add_option("--seed", g.seed, "override the command's primary seed");
  app.add_flag("--quiet", g.quiet, "suppress stdout summaries");

  int n_modes = 0;
  int n_quad = 0;
  CLI::App* basis_cmd =
      app.add_subcommand("basis", "write quadrature nodes, weights, and 1D eigenvalues");
  basis_cmd->add_option("--n-modes", n_modes, "modes per axis")->required();
  basis_cmd->add_option("--n-quad", n_quad, "quadrature points (0 = dealiasing default)");
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "run the operator-estimate suite and write reports");
  CLI::App* threshold_cmd =
      app.add_subcommand("threshold", "compute the dissipativity threshold constants");
  CLI::App* diss_cmd =
      app.add_subcommand("dissipativity", "evaluate the four dissipativity notions");
  CLI::App* evolve_cmd = app.add_subcommand("evolve", "time-step the truncated flow");
  for (CLI::App* sub : {basis_cmd, verify_cmd, threshold_cmd, diss_cmd, evolve_cmd})
    sub->fallthrough();  // let the global --config/--out/--seed/--quiet follow the verb

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  g.seed_given = seed_opt->count() > 0;

  try {
    if (basis_cmd->parsed()) return run_basis(g, n_modes, n_quad);
    if (verify_cmd->parsed()) return run_verify(g);
    if (threshold_cmd->parsed()) return run_threshold(g);
    if (diss_cmd->parsed()) return run_dissipativity(g);
    if (evolve_cmd->parsed()) return run_evolve(g);
  } catch (const hermstokes::validation_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const hermstokes::io_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const hermstokes::invariant_error& e) {
    std::cerr << "invariant failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <cstring>
#include <filesystem>

#include "hermstokes/evolution.hpp"
#include "test_util.hpp"

using namespace hermstokes;

namespace {

const OperatorCache& cache6() {
  static OperatorCache c = build_cache(build_basis(6, default_n_quad(6)));
  return c;
}

/** f_sup=0 parameters with the measured operator constants and a small fixed c. */
ThresholdParams decay_params(double nu) {
  const OperatorCache& c = cache6();
  static const double a = constant_a(c, 0.375);
  const double lam1 = c.lambda1_B;
  return compute_thresholds(nu, 0.0, 0.01, a, lam1, select_lambda0(c.eig_B.values, 1, 1.0),
                            0.25);
}

SpectralField scaled_sample(std::uint64_t seed, double target_norm_H, double decay = 2.5) {
  SpectralField u = random_field(seed, RandomFieldSpec{decay, true}, cache6().proj);
  return (target_norm_H / norm_H(u)) * u;
}

std::filesystem::path tmp_dir() {
  std::filesystem::path p = std::filesystem::current_path() / "test_tmp_evolution";
  std::filesystem::create_directories(p);
  return p;
}

bool bitwise_equal(const Vec& a, const Vec& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

}  // namespace

TEST_CASE("container files round trip bit-exactly") {
  const std::string path = (tmp_dir() / "roundtrip.hsf").string();
  Vec v1(5);
  v1 << 0.0, -0.0, 3.141592653589793, -2.2250738585072014e-308, 1e300;
  Vec v2(6);
  for (int i = 0; i < 6; ++i) v2[i] = uniform_pm1(99, static_cast<std::uint64_t>(i));
  write_container(path, 4, 7, {{"alpha", {5}, v1}, {"beta", {2, 3}, v2}});

  ContainerFile file = read_container(path);
  CHECK(file.n_modes == 4);
  CHECK(file.n_quad == 7);
  REQUIRE(file.arrays.size() == 2);
  CHECK(file.arrays[0].name == "alpha");
  CHECK(bitwise_equal(file.get("alpha").data, v1));
  CHECK(bitwise_equal(file.get("beta").data, v2));
  CHECK(file.get("beta").shape == std::vector<long>{2, 3});
  CHECK_THROWS_AS(file.get("missing"), io_error);

  // rewriting produces a byte-identical file
  std::string first;
  {
    std::ifstream in(path, std::ios::binary);
    first.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  write_container(path, 4, 7, {{"alpha", {5}, v1}, {"beta", {2, 3}, v2}});
  std::string second;
  {
    std::ifstream in(path, std::ios::binary);
    second.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  CHECK(first == second);

  CHECK_THROWS_AS(read_container((tmp_dir() / "absent.hsf").string()), io_error);
  CHECK_THROWS_AS(write_container(path, 4, 7, {{"bad", {3}, v1}}), validation_error);

  // truncated payload is rejected
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 8);
  CHECK_THROWS_AS(read_container(path), io_error);
}

TEST_CASE("checkpoints preserve state, step, and time") {
  const OperatorCache& c = cache6();
  const std::string path = (tmp_dir() / "ck_test.hsf").string();
  SpectralField u = scaled_sample(271, 3.5);
  save_checkpoint(path, u, 40, 0.04);
  Checkpoint ck = load_checkpoint(path, c.basis);
  CHECK(bitwise_equal(ck.state.coeffs, u.coeffs));
  CHECK(ck.state.div_free);
  CHECK(ck.step == 40);
  CHECK(ck.t == 0.04);

  auto other = build_basis(5, default_n_quad(5));
  CHECK_THROWS_AS(load_checkpoint(path, other), validation_error);
}

TEST_CASE("operator cache files restore the dense machinery") {
  const OperatorCache& c = cache6();
  const std::string path = (tmp_dir() / "cache6.hsf").string();
  save_operator_cache(path, c, 0.375);
  auto [loaded, a, delta] = load_operator_cache(path);

  CHECK(delta == 0.375);
  CHECK(a == constant_a(c, 0.375));
  CHECK(loaded.d_df == c.d_df);
  CHECK(loaded.lambda1_B == c.lambda1_B);
  CHECK(loaded.muN_A == c.muN_A);
  CHECK(bitwise_equal(Eigen::Map<const Vec>(loaded.P.data(), loaded.P.size()),
                      Eigen::Map<const Vec>(c.P.data(), c.P.size())));
  CHECK(bitwise_equal(loaded.eig_AB_sym.values, c.eig_AB_sym.values));

  SpectralField u = scaled_sample(33, 1.0);
  SpectralField r1 = apply_frac(FracOp::AB, -0.7, u, c);
  SpectralField r2 = apply_frac(FracOp::AB, -0.7, u, loaded);
  CHECK(norm_H(r1 - r2) == 0.0);
}

TEST_CASE("simulation config validation") {
  const OperatorCache& c = cache6();
  ThresholdParams p = decay_params(1.0);
  SimConfig base;
  base.n_modes = 6;
  base.dt = 1e-3;
  base.t_end = 5e-3;

  SimConfig bad = base;
  bad.n_modes = 8;
  CHECK_THROWS_AS(evolve(bad, p, c), validation_error);
  bad = base;
  bad.dt = 0.0;
  CHECK_THROWS_AS(evolve(bad, p, c), validation_error);
  bad = base;
  bad.t_end = 1e-4;
  CHECK_THROWS_AS(evolve(bad, p, c), validation_error);
  bad = base;
  bad.nu = 2.0;  // disagrees with p.nu
  CHECK_THROWS_AS(evolve(bad, p, c), validation_error);
  bad = base;
  bad.diagnostics_every = 0;
  CHECK_THROWS_AS(evolve(bad, p, c), validation_error);
  bad = base;
  bad.u0.ball_fraction = 1.5;
  CHECK_THROWS_AS(evolve(bad, p, c), validation_error);
}

TEST_CASE("zero data with zero force is a fixed point") {
  const OperatorCache& c = cache6();
  ThresholdParams p = decay_params(1.0);
  SimConfig config;
  config.n_modes = 6;
  config.dt = 1e-3;
  config.t_end = 0.02;
  config.diagnostics_every = 5;
  config.u0.ball_fraction = 0.0;

  EvolveResult r = evolve(config, p, c);
  CHECK_FALSE(r.blew_up);
  CHECK(r.final_step == 20);
  CHECK(norm_H(r.final_state) == 0.0);
  for (const DiagnosticsRow& row : r.diagnostics) {
    CHECK(row.norm_H == 0.0);
    CHECK(row.norm_V == 0.0);
    CHECK(row.energy_flux == 0.0);
    CHECK(row.in_ball);
  }
  RegularityVerdict v = detect_regularity(r, p);
  CHECK(v.stayed_in_ball);
  CHECK_FALSE(v.blew_up);
  CHECK_FALSE(v.out_of_regime);
  CHECK(v.asserts_no_blowup);
  CHECK(v.max_norm_V == 0.0);
}

TEST_CASE("energy decays monotonically without forcing") {
  const OperatorCache& c = cache6();
  ThresholdParams p = decay_params(1.0);
  SimConfig config;
  config.n_modes = 6;
  config.dt = 1e-3;
  config.t_end = 0.15;
  config.diagnostics_every = 10;
  config.u0.seed = 3;
  config.u0.ball_fraction = 1.0;

  EvolveResult r = evolve(config, p, c);
  CHECK_FALSE(r.blew_up);
  REQUIRE(r.diagnostics.size() >= 10);
  for (std::size_t i = 1; i < r.diagnostics.size(); ++i)
    CHECK(r.diagnostics[i].norm_H < r.diagnostics[i - 1].norm_H);
  for (const DiagnosticsRow& row : r.diagnostics) {
    CHECK(row.div_residual <= 1e-8);
    CHECK(row.energy_flux < 0.0);
  }
  CHECK(r.diagnostics.front().norm_Au == Catch::Approx(0.5 * p.u_plus).epsilon(1e-12));

  RegularityVerdict v = detect_regularity(r, p);
  CHECK(v.stayed_in_ball);
  CHECK(v.asserts_no_blowup);
  CHECK(v.min_decay_rate > 0.0);
  CHECK(v.max_norm_V == Catch::Approx(r.diagnostics.front().norm_V).epsilon(1e-12));
}

TEST_CASE("linear regime matches the diffusion oracle") {
  const OperatorCache& c = cache6();
  ThresholdParams p = decay_params(1.0);
  SimConfig config;
  config.n_modes = 6;
  config.dt = 1e-3;
  config.t_end = 0.1;
  config.diagnostics_every = 100;

  SpectralField u0 = scaled_sample(9, 1e-6);
  EvolveResult r = evolve(config, p, c, &u0);
  REQUIRE_FALSE(r.blew_up);

  T3 sym = c.proj.wave_k2();
  sym.data = (-config.nu * 0.1 * sym.data.array()).exp().matrix();
  SpectralField oracle = c.proj.wave_multiplier(u0, sym);
  CHECK(norm_H(r.final_state - oracle) <= 1e-8 * norm_H(oracle));
}

TEST_CASE("disabled nonlinearity reproduces exact heat decay") {
  const OperatorCache& c = cache6();
  ThresholdParams p = decay_params(1.0);
  SimConfig config;
  config.n_modes = 6;
  config.dt = 1e-3;
  config.t_end = 0.1;
  config.diagnostics_every = 100;
  config.disable_nonlinearity = true;

  SpectralField u0 = scaled_sample(11, 4.0);
  EvolveResult r = evolve(config, p, c, &u0);
  REQUIRE_FALSE(r.blew_up);

  T3 sym = c.proj.wave_k2();
  sym.data = (-config.nu * 0.1 * sym.data.array()).exp().matrix();
  SpectralField oracle = c.proj.leray_project(c.proj.wave_multiplier(u0, sym));
  CHECK(norm_H(r.final_state - oracle) <= 1e-12 * norm_H(oracle));
}

TEST_CASE("self-convergence order of the default scheme is second") {
  const OperatorCache& c = cache6();
  ThresholdParams p = decay_params(1.0);
  SpectralField u0 = scaled_sample(5, 5.0);

  std::vector<SpectralField> sols;
  for (double dt : {4e-3, 2e-3, 1e-3}) {
    SimConfig config;
    config.n_modes = 6;
    config.dt = dt;
    config.t_end = 0.2;
    config.diagnostics_every = 1000;
    EvolveResult r = evolve(config, p, c, &u0);
    REQUIRE_FALSE(r.blew_up);
    sols.push_back(r.final_state);
  }
  const double order =
      std::log2(norm_H(sols[0] - sols[1]) / norm_H(sols[1] - sols[2]));
  CAPTURE(order);
  CHECK(order >= 1.8);
  CHECK(order <= 2.2);
}

TEST_CASE("implicit-explicit euler scheme also dissipates") {
  const OperatorCache& c = cache6();
  ThresholdParams p = decay_params(1.0);
  SimConfig config;
  config.n_modes = 6;
  config.dt = 1e-3;
  config.t_end = 0.05;
  config.diagnostics_every = 10;
  config.scheme = Scheme::imex_euler;
  config.u0.seed = 3;
  config.u0.ball_fraction = 0.8;

  EvolveResult r = evolve(config, p, c);
  CHECK_FALSE(r.blew_up);
  for (std::size_t i = 1; i < r.diagnostics.size(); ++i)
    CHECK(r.diagnostics[i].norm_H < r.diagnostics[i - 1].norm_H);
}

TEST_CASE("runs are deterministic and resumable from checkpoints") {
  const OperatorCache& c = cache6();
  ThresholdParams p = decay_params(1.0);
  SimConfig config;
  config.n_modes = 6;
  config.dt = 1e-3;
  config.t_end = 0.06;
  config.diagnostics_every = 10;
  config.checkpoint_every = 20;
  config.u0.seed = 77;
  config.u0.ball_fraction = 0.6;
  config.force = ForceModel{ForceKind::hoelder, 0.02, 0.5, 1.0, 555};

  EvolveResult full = evolve(config, p, c);
  REQUIRE_FALSE(full.blew_up);
  EvolveResult again = evolve(config, p, c);
  CHECK(format_diagnostics_csv(full.diagnostics) ==
        format_diagnostics_csv(again.diagnostics));
  REQUIRE(full.checkpoints.size() == 3);  // steps 20, 40, 60
  CHECK(full.checkpoints[0].step == 20);
  CHECK(full.checkpoints[2].step == 60);

  const std::string path = (tmp_dir() / "resume.hsf").string();
  const Checkpoint& mid = full.checkpoints[1];
  save_checkpoint(path, mid.state, mid.step, mid.t);

  SimConfig resumed = config;
  resumed.u0.kind = U0Kind::from_checkpoint;
  resumed.u0.checkpoint_path = path;
  EvolveResult tail = evolve(resumed, p, c);
  REQUIRE_FALSE(tail.blew_up);
  CHECK(tail.final_step == 60);
  CHECK(norm_H(tail.final_state - full.final_state) == 0.0);

  // diagnostics rows from the resume point onward are bit-identical
  const std::vector<DiagnosticsRow> expected(full.diagnostics.end() - 3,
                                             full.diagnostics.end());
  CHECK(format_diagnostics_csv(tail.diagnostics) == format_diagnostics_csv(expected));
}

TEST_CASE("blow-up is reported with the last valid state") {
  const OperatorCache& c = cache6();
  ThresholdParams p = decay_params(1e-4);
  SimConfig config;
  config.n_modes = 6;
  config.nu = 1e-4;
  config.dt = 1e-2;
  config.t_end = 1.0;
  config.diagnostics_every = 1;

  SpectralField u0 = scaled_sample(8, 1e6, 1.5);
  EvolveResult r = evolve(config, p, c, &u0);
  CHECK(r.blew_up);
  CHECK(r.final_step < 100);
  CHECK(norm_H(r.final_state) <= 1e3 * r.initial_norm_H);
  CHECK(std::isfinite(norm_H(r.final_state)));
  CHECK(r.final_time == r.final_step * config.dt);

  RegularityVerdict v = detect_regularity(r, p);
  CHECK(v.blew_up);
  CHECK_FALSE(v.asserts_no_blowup);
}

TEST_CASE("out-of-regime runs carry no regularity claim") {
  const OperatorCache& c = cache6();
  const double a = constant_a(c, 0.375);
  const double lam1 = c.lambda1_B;
  const double lam0 = select_lambda0(c.eig_B.values, 1, 1.0);
  const double delta = 0.375;
  // tune f_sup to the double root
  const double f_tuned = std::pow(a, 1.0 - delta) * std::pow(lam1, 1.0 + delta) /
                         (4.0 * 0.01 * lam0 * lam0);
  ThresholdParams p = compute_thresholds(1.0, f_tuned, 0.01, a, lam1, lam0, 0.25);
  REQUIRE(p.degenerate);

  SimConfig config;
  config.n_modes = 6;
  config.dt = 1e-3;
  config.t_end = 5e-3;
  config.u0.ball_fraction = 0.1;
  config.force = ForceModel{ForceKind::constant, 0.01, 0.5, 1.0, 2};

  EvolveResult r = evolve(config, p, c);
  RegularityVerdict v = detect_regularity(r, p);
  CHECK(v.out_of_regime);
  CHECK_FALSE(v.asserts_no_blowup);
}

TEST_CASE("stiffness number and csv formatting are reported") {
  const OperatorCache& c = cache6();
  ThresholdParams p = decay_params(1.0);
  SimConfig config;
  config.n_modes = 6;
  config.dt = 2e-3;
  config.t_end = 4e-3;
  config.u0.ball_fraction = 0.0;

  EvolveResult r = evolve(config, p, c);
  CHECK(r.stiffness_number ==
        Catch::Approx(2e-3 * c.proj.wave_k2().data.maxCoeff()).epsilon(1e-12));

  std::string csv = format_diagnostics_csv(r.diagnostics);
  CHECK(csv.rfind("t,norm_H,norm_V,norm_Au,div_residual,energy_flux,in_ball\n", 0) == 0);
  // 17-significant-digit round trip: parse the first data value back
  const std::size_t line2 = csv.find('\n') + 1;
  const double t0 = std::stod(csv.substr(line2));
  CHECK(t0 == r.diagnostics.front().t);
}

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <numbers>

#include "hermstokes/dissipativity.hpp"
#include "test_util.hpp"

using namespace hermstokes;

namespace {

const OperatorCache& cache6() {
  static OperatorCache c = build_cache(build_basis(6, default_n_quad(6)));
  return c;
}

/** Quadratic whose roots the thresholds must reproduce. */
double threshold_quadratic(const ThresholdParams& p, double x) {
  return p.c / (p.nu * std::pow(p.lambda1, 1.0 + p.delta)) * x * x -
         x / (p.lambda0 * std::pow(p.a, p.delta)) +
         p.f_sup / (p.nu * std::pow(p.a, 1.0 + p.delta));
}

double threshold_quadratic_scale(const ThresholdParams& p, double x) {
  return p.c / (p.nu * std::pow(p.lambda1, 1.0 + p.delta)) * x * x +
         x / (p.lambda0 * std::pow(p.a, p.delta)) +
         p.f_sup / (p.nu * std::pow(p.a, 1.0 + p.delta)) + 1e-300;
}

}  // namespace

TEST_CASE("threshold validation rejects inadmissible parameters") {
  CHECK_THROWS_AS(compute_thresholds(0.0, 0.1, 1, 1, 1, 1, 0.25), validation_error);
  CHECK_THROWS_AS(compute_thresholds(-1.0, 0.1, 1, 1, 1, 1, 0.25), validation_error);
  CHECK_THROWS_AS(compute_thresholds(1, -0.1, 1, 1, 1, 1, 0.25), validation_error);
  CHECK_THROWS_AS(compute_thresholds(1, 0.1, 0, 1, 1, 1, 0.25), validation_error);
  CHECK_THROWS_AS(compute_thresholds(1, 0.1, 1, 0, 1, 1, 0.25), validation_error);
  CHECK_THROWS_AS(compute_thresholds(1, 0.1, 1, 1, 0, 1, 0.25), validation_error);
  CHECK_THROWS_AS(compute_thresholds(1, 0.1, 1, 1, 1, 0, 0.25), validation_error);
  CHECK_THROWS_AS(compute_thresholds(1, 0.1, 1, 1, 1, 1, 0.0), validation_error);
  CHECK_THROWS_AS(compute_thresholds(1, 0.1, 1, 1, 1, 1, 0.5), validation_error);
  CHECK_NOTHROW(compute_thresholds(1, 0.1, 1, 1, 1, 1, 0.49));
}

TEST_CASE("threshold closed forms match the worked example") {
  ThresholdParams p = compute_thresholds(1.0, 0.125, 1.0, 1.0, 1.0, 1.0, 0.25);
  CHECK(p.delta == Catch::Approx(0.375).epsilon(1e-15));
  CHECK(p.gamma == Catch::Approx(0.5).epsilon(1e-15));
  const double half_sqrt = std::sqrt(0.5);
  CHECK(p.u_plus == Catch::Approx(0.5 * (1.0 + half_sqrt)).epsilon(1e-14));
  CHECK(p.u_minus == Catch::Approx(0.5 * (1.0 - half_sqrt)).epsilon(1e-14));
  CHECK(p.alpha_strong == Catch::Approx(0.5 * (1.0 - half_sqrt)).epsilon(1e-14));
  CHECK_FALSE(p.rejected);
  CHECK_FALSE(p.degenerate);
  CHECK(p.u_minus <= p.u_plus);
}

TEST_CASE("quadratic root identities hold across a parameter grid") {
  for (double nu : {0.5, 1.0, 2.0})
    for (double f : {0.0, 0.01, 0.3})
      for (double c : {0.5, 2.0})
        for (double a : {0.7, 1.3})
          for (double lam1 : {1.5, 2.5})
            for (double eps : {0.1, 0.25, 0.4}) {
              ThresholdParams p = compute_thresholds(nu, f, c, a, lam1, lam1, eps);
              if (p.rejected) continue;
              for (double x : {p.u_minus, p.u_plus}) {
                CAPTURE(nu, f, c, a, lam1, eps, x);
                CHECK(std::abs(threshold_quadratic(p, x)) <=
                      1e-12 * threshold_quadratic_scale(p, x));
              }
              CHECK(p.u_minus <= p.u_plus);
              // Vieta: sum and product against the coefficient ratios
              const double K =
                  nu * std::pow(lam1, 1.0 + p.delta) / (2.0 * c * lam1 * std::pow(a, p.delta));
              const double prod =
                  f * std::pow(lam1, 1.0 + p.delta) / (c * std::pow(a, 1.0 + p.delta));
              CHECK(p.u_plus + p.u_minus == Catch::Approx(2.0 * K).epsilon(1e-12));
              CHECK(p.u_plus * p.u_minus ==
                    Catch::Approx(prod).epsilon(1e-12).margin(1e-250));
            }
}

TEST_CASE("degenerate and rejected regimes are flagged") {
  const double nu = 0.8, c = 1.3, a = 1.1, lam1 = 2.0, lam0 = 1.7, eps = 0.3;
  const double delta = 0.25 + eps / 2.0;
  const double f_tuned = nu * nu * std::pow(a, 1.0 - delta) * std::pow(lam1, 1.0 + delta) /
                         (4.0 * c * lam0 * lam0);

  ThresholdParams pd = compute_thresholds(nu, f_tuned, c, a, lam1, lam0, eps);
  CHECK(pd.degenerate);
  CHECK_FALSE(pd.rejected);
  const double K = nu * std::pow(lam1, 1.0 + delta) / (2.0 * c * lam0 * std::pow(a, delta));
  CHECK(pd.u_minus == Catch::Approx(K).epsilon(1e-12));
  CHECK(pd.u_plus == Catch::Approx(K).epsilon(1e-12));

  ThresholdParams pr = compute_thresholds(nu, 2.0 * f_tuned, c, a, lam1, lam0, eps);
  CHECK(pr.rejected);
  CHECK(pr.gamma > 1.0);
  CHECK(pr.u_plus == 0.0);
}

TEST_CASE("zero forcing collapses the lower root") {
  const double nu = 1.7, c = 0.6, a = 2.2, lam1 = 1.9, lam0 = 1.4, eps = 0.2;
  ThresholdParams p = compute_thresholds(nu, 0.0, c, a, lam1, lam0, eps);
  CHECK(p.gamma == 0.0);
  CHECK(p.u_minus == 0.0);
  CHECK(p.alpha_strong == 0.0);
  const double delta = 0.25 + eps / 2.0;
  CHECK(p.u_plus ==
        Catch::Approx(nu * std::pow(lam1, 1.0 + delta) / (c * lam0 * std::pow(a, delta)))
            .epsilon(1e-12));
}

TEST_CASE("real-root condition matches the viscosity inequality on a grid") {
  const double c = 0.7, a = 1.3, lam1 = 2.0, lam0 = 2.0, eps = 0.3;
  const double delta = 0.25 + eps / 2.0;
  double prev_up_along_nu[10];
  for (int j = 0; j < 10; ++j) prev_up_along_nu[j] = -1.0;
  for (int i = 0; i < 10; ++i) {
    const double nu = 0.2 * std::pow(1.45, i);
    double prev_up = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 10; ++j) {
      const double f = 0.05 + 0.21 * j;
      ThresholdParams p = compute_thresholds(nu, f, c, a, lam1, lam0, eps);
      const double nu_threshold = 2.0 * lam0 * std::pow(a, -(1.0 - delta) / 2.0) *
                                  std::pow(lam1, -(1.0 + delta) / 2.0) * std::sqrt(c * f);
      CAPTURE(nu, f, p.gamma, nu_threshold);
      REQUIRE(std::abs(p.gamma - 1.0) > 1e-9);  // grid avoids the boundary
      CHECK((p.gamma < 1.0) == (nu > nu_threshold));
      if (p.rejected) continue;
      // u_plus decreasing in f at fixed nu, increasing in nu at fixed f
      CHECK(p.u_plus < prev_up);
      prev_up = p.u_plus;
      if (prev_up_along_nu[j] >= 0.0) CHECK(p.u_plus > prev_up_along_nu[j]);
      prev_up_along_nu[j] = p.u_plus;
    }
  }
}

TEST_CASE("force model validation, envelope, and time regularity") {
  const Projector& proj = cache6().proj;

  CHECK_THROWS_AS(force_sup({ForceKind::hoelder, 1.0, 0.0, 1.0, 1}), validation_error);
  CHECK_THROWS_AS(force_sup({ForceKind::hoelder, 1.0, 1.0, 1.0, 1}), validation_error);
  CHECK_THROWS_AS(force_sup({ForceKind::hoelder, 1.0, 0.5, 0.0, 1}), validation_error);
  CHECK_THROWS_AS(force_sup({ForceKind::hoelder, -1.0, 0.5, 1.0, 1}), validation_error);

  ForceModel zf{};
  CHECK(force_sup(zf) == 0.0);
  CHECK(norm_H(force_at(zf, 1.3, proj)) == 0.0);

  ForceModel cf{ForceKind::constant, 0.7, 0.5, 1.0, 11};
  CHECK(force_sup(cf) == 0.7);
  SpectralField f0 = force_at(cf, 0.0, proj);
  SpectralField f1 = force_at(cf, 3.7, proj);
  CHECK(norm_H(f0) == Catch::Approx(0.7).epsilon(1e-12));
  CHECK(norm_H(f0 - f1) == 0.0);
  CHECK(f0.div_free);
  CHECK(div_residual(f0) <= 1e-10);

  ForceModel hf{ForceKind::hoelder, 0.05, 0.5, 1.0, 4242};
  CHECK(force_sup(hf) == 0.05);
  const double r = force_rate(hf);
  CHECK(r == Catch::Approx(2.0 * std::pow(1.0 / 0.05, 2.0)).epsilon(1e-12));
  // envelope peak attained where sin(rt) = 1
  const double t_star = 0.5 * std::numbers::pi / r;
  CHECK(norm_H(force_at(hf, t_star, proj)) == Catch::Approx(0.05).epsilon(1e-10));
  // the stated time regularity, sampled
  int violations = 0;
  for (int k = 0; k < 200; ++k) {
    const std::uint64_t sk = derive_seed(909, static_cast<std::uint64_t>(k));
    const double t = 5.0 * (uniform_pm1(sk, 0) + 1.0);
    const double tau = 5.0 * (uniform_pm1(sk, 1) + 1.0);
    if (t == tau) continue;
    const double lhs = norm_H(force_at(hf, t, proj) - force_at(hf, tau, proj));
    if (lhs > hf.d_lip * std::pow(std::abs(t - tau), hf.theta) * (1.0 + 1e-9)) ++violations;
  }
  CHECK(violations == 0);

  ForceModel hz{ForceKind::hoelder, 0.0, 0.5, 1.0, 7};
  CHECK(norm_H(force_at(hz, 2.0, proj)) == 0.0);
}

TEST_CASE("shifted operator assembly and round trips") {
  const OperatorCache& c = cache6();
  ThresholdParams p =
      compute_thresholds(1.25, 0.05, 1.0, 1.0, c.lambda1_B, c.lambda1_B, 0.25);
  REQUIRE_FALSE(p.rejected);

  SECTION("zero field and zero force map to zero") {
    ForceModel zf{};
    SpectralField z = SpectralField::zero(c.basis);
    z.div_free = true;
    CHECK(norm_H(apply_J(z, 0.0, zf, p, c)) == 0.0);
    CHECK(norm_H(apply_script_A(z, 0.0, zf, p, c)) == 0.0);
  }

  SECTION("zero field with constant force keeps only the forcing term") {
    ForceModel cf{ForceKind::constant, 0.7, 0.5, 1.0, 11};
    SpectralField z = SpectralField::zero(c.basis);
    z.div_free = true;
    SpectralField j = apply_J(z, 0.0, cf, p, c);
    SpectralField expected =
        apply_frac(FracOp::AB, -(1.0 + p.delta), (1.0 / p.nu) * force_at(cf, 0.0, c.proj), c);
    CHECK(norm_H(j - expected) <= 1e-12 * norm_H(expected));
  }

  SECTION("grouped round trip reproduces the plain right-hand side") {
    ForceModel cf{ForceKind::constant, 0.4, 0.5, 1.0, 23};
    for (int k = 0; k < 3; ++k) {
      SpectralField u = detail::sample_df(c, 3100, static_cast<std::uint64_t>(k));
      CHECK(j_roundtrip_residual(u, 0.0, cf, p, c, JForm::grouped) <= 1e-7);
    }
  }

  SECTION("printed composition order leaves a measurable residual") {
    ForceModel cf{ForceKind::constant, 0.4, 0.5, 1.0, 23};
    SpectralField u = detail::sample_df(c, 3100, 0);
    const double printed = j_roundtrip_residual(u, 0.0, cf, p, c, JForm::printed);
    CHECK(std::isfinite(printed));
    CHECK(printed > 1e-4);
    CHECK(printed < 1.0);
  }

  SECTION("nonlinearity is exactly quadratic at small amplitude") {
    ForceModel zf{};
    SpectralField u = detail::sample_df(c, 3200, 0);
    const double s = 1e-4;
    SpectralField su = s * u;
    SpectralField resid =
        apply_script_A(su, 0.0, zf, p, c) + p.nu * c.proj.apply_A(su);
    const double expected = s * s * norm_H(nonlinear_C(c.proj, u, u));
    CHECK(norm_H(resid) == Catch::Approx(expected).epsilon(1e-10));
  }

  SECTION("non-divergence-free input is rejected") {
    SpectralField raw = random_field(42, RandomFieldSpec{}, c.basis);
    ForceModel zf{};
    CHECK_THROWS_AS(apply_J(raw, 0.0, zf, p, c), validation_error);
    CHECK_THROWS_AS(apply_script_A(raw, 0.0, zf, p, c), validation_error);
  }
}

TEST_CASE("dissipativity ensemble at the half-gamma regime") {
  const OperatorCache& c = cache6();
  const double eps = 0.25, delta = 0.375, nu = 1.0, gamma_target = 0.5;
  const double c5 = verify_thm3(eps, 40, 12345, c).empirical_constant;
  const double a = constant_a(c, delta);
  const double lam1 = c.lambda1_B;
  const double lam0 = select_lambda0(c.eig_B.values, 1, 1.0);
  const double f_sup = gamma_target * nu * nu * std::pow(a, 1.0 - delta) *
                       std::pow(lam1, 1.0 + delta) / (4.0 * c5 * lam0 * lam0);
  ThresholdParams p = compute_thresholds(nu, f_sup, c5, a, lam1, lam0, eps);
  REQUIRE(p.gamma == Catch::Approx(gamma_target).epsilon(1e-12));
  REQUIRE_FALSE(p.rejected);
  ForceModel force{ForceKind::constant, f_sup, 0.5, 1.0, 77777};

  SECTION("zero dissipativity on the annulus") {
    DissipativityReport rep =
        test_dissipativity(DissNotion::zero_diss, p, force, 100, 5000, c);
    CHECK(rep.notion == DissNotion::zero_diss);
    CHECK(rep.samples == 100);
    CHECK(rep.pass);
    CHECK(rep.worst_value < -1e-3);
  }

  SECTION("difference pairings are dissipative on the half ball") {
    DissipativityReport rep = test_dissipativity(DissNotion::diss, p, force, 60, 6000, c);
    CHECK(rep.pass);
    CHECK(rep.worst_value < 0.0);
  }

  SECTION("strong dissipativity constant meets the stated bound") {
    DissipativityReport rep =
        test_dissipativity(DissNotion::strong, p, force, 60, 6000, c);
    CHECK(rep.pass);
    CHECK(rep.alpha_measured >= 0.95 * p.alpha_strong);
    CHECK(std::isfinite(rep.alpha_measured));
  }

  SECTION("uniform dissipativity with the first-power modulus") {
    DissipativityReport rep =
        test_dissipativity(DissNotion::uniform, p, force, 40, 7000, c);
    CHECK(rep.pass);
    CHECK(rep.worst_value < -0.5);
    CHECK(rep.alpha_measured > 0.0);
  }

  SECTION("coinciding arguments give an exactly zero difference pairing") {
    SpectralField u = detail::sample_df(c, 9090, 0);
    SpectralField dj =
        apply_J(u, 0.0, force, p, c) - apply_J(u, 0.0, force, p, c);
    CHECK(norm_H(dj) == 0.0);
  }

  SECTION("the two-sided envelope is measured, not asserted") {
    auto env = b_half_envelope(p, c, 40, 31);
    CHECK(env.first > 0.0);
    CHECK(env.first <= env.second);
    CHECK(std::isfinite(env.second));
  }

  SECTION("rejected regimes cannot be sampled") {
    ThresholdParams bad = compute_thresholds(0.1, 10.0, c5, a, lam1, lam0, eps);
    REQUIRE(bad.rejected);
    CHECK_THROWS_AS(test_dissipativity(DissNotion::zero_diss, bad, force, 1, 1, c),
                    validation_error);
  }
}

TEST_CASE("tiny fields pair strictly negative under zero force") {
  const OperatorCache& c = cache6();
  const double delta = 0.375;
  const double a = constant_a(c, delta);
  const double lam1 = c.lambda1_B;
  ThresholdParams p = compute_thresholds(1.0, 0.0, 1.0, a, lam1, lam1, 0.25);
  ForceModel zf{};
  for (int k = 0; k < 5; ++k) {
    SpectralField dir = detail::unit_direction(c, derive_seed(99, static_cast<std::uint64_t>(k)));
    SpectralField tiny = 1e-3 * dir;
    SpectralField j = apply_J(tiny, 0.0, zf, p, c);
    SpectralField g = apply_frac(FracOp::AB, -p.delta, tiny, c);
    const double pairing = inner_H(j, g) / (norm_H(tiny) * norm_H(tiny));
    CAPTURE(k, pairing);
    CHECK(pairing < 0.0);
    CHECK(pairing <= -1e-2);
  }
}

TEST_CASE("time lipschitz bound for the shifted operator") {
  const OperatorCache& c = cache6();
  const double delta = 0.375;
  const double a = constant_a(c, delta);
  ThresholdParams p = compute_thresholds(1.0, 0.05, 1.0, a, c.lambda1_B, c.lambda1_B, 0.25);
  ForceModel hf{ForceKind::hoelder, 0.05, 0.5, 1.0, 4242};

  EstimateReport rep = test_J_time_lipschitz(hf, p, c, 300, 888);
  CHECK(rep.estimate_id == "thm8_lipschitz");
  CHECK(rep.violations == 0);
  CHECK(rep.empirical_constant <= 1.0 + 1e-9);
  CHECK(rep.empirical_constant > 0.01);
  CHECK(rep.parameters.at("d_prime") ==
        Catch::Approx(hf.d_lip / p.nu * std::pow(a, -(1.0 + delta))).epsilon(1e-12));

  ForceModel cf{ForceKind::constant, 0.05, 0.5, 1.0, 4242};
  CHECK_THROWS_AS(test_J_time_lipschitz(cf, p, c, 10, 1), validation_error);
}

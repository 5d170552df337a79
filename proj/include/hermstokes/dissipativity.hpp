#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "hermstokes/estimates.hpp"
#include "hermstokes/operators.hpp"

namespace hermstokes {

// ------------------------------------------------------------------- forcing

enum class ForceKind { zero, constant, hoelder };

/**
 * @brief Time-dependent forcing ℙf(t) = amplitude·s(t)·F̂₀ with a fixed unit
 * divergence-free direction F̂₀ drawn from the seed.
 *
 * The hoelder kind uses s(t) = ½(1 + sin(rt)) with r = 2(d_lip/amplitude)^{1/θ},
 * which satisfies ‖f(t)−f(τ)‖ ≤ d_lip·|t−τ|^θ rigorously: |sin a − sin b| ≤
 * min(2, |a−b|) and min(1,x) ≤ x^θ give amplitude·(r/2)^θ = d_lip.
 */
struct ForceModel {
  ForceKind kind = ForceKind::zero;
  double amplitude = 0.0;
  double theta = 0.5;
  double d_lip = 1.0;
  std::uint64_t seed = 1;
};

inline void validate_force(const ForceModel& f) {
  if (f.kind == ForceKind::hoelder) {
    if (!(f.theta > 0.0 && f.theta < 1.0))
      throw validation_error("ForceModel: hoelder theta must lie in (0,1)");
    if (!(f.d_lip > 0.0)) throw validation_error("ForceModel: d_lip must be positive");
    if (f.amplitude < 0.0)
      throw validation_error("ForceModel: hoelder amplitude must be nonnegative");
  }
}

/** @brief Unit-norm divergence-free direction (zero field for kind zero). */
inline SpectralField force_direction(const ForceModel& f, const Projector& proj) {
  validate_force(f);
  if (f.kind == ForceKind::zero || f.amplitude == 0.0) {
    SpectralField z = SpectralField::zero(proj.basis_ptr());
    z.div_free = true;
    return z;
  }
  SpectralField dir = random_field(f.seed, RandomFieldSpec{1.5, true}, proj);
  const double n = norm_H(dir);
  if (n == 0.0) throw invariant_error("force_direction: degenerate direction sample");
  return (1.0 / n) * dir;
}

/** @brief Oscillation rate r of the hoelder envelope. */
inline double force_rate(const ForceModel& f) {
  if (f.kind != ForceKind::hoelder || f.amplitude == 0.0) return 0.0;
  return 2.0 * std::pow(f.d_lip / f.amplitude, 1.0 / f.theta);
}

/** @brief Scalar envelope: f(t) = force_scale(t)·F̂₀. */
inline double force_scale(const ForceModel& f, double t) {
  validate_force(f);
  switch (f.kind) {
    case ForceKind::zero:
      return 0.0;
    case ForceKind::constant:
      return f.amplitude;
    case ForceKind::hoelder:
      if (f.amplitude == 0.0) return 0.0;
      return 0.5 * f.amplitude * (1.0 + std::sin(force_rate(f) * t));
  }
  return 0.0;
}

inline SpectralField force_at(const ForceModel& f, double t, const Projector& proj) {
  return force_scale(f, t) * force_direction(f, proj);
}

/** @brief sup_t ‖ℙf(t)‖_H (the envelope peak; the direction has unit norm). */
inline double force_sup(const ForceModel& f) {
  validate_force(f);
  switch (f.kind) {
    case ForceKind::zero:
      return 0.0;
    case ForceKind::constant:
      return std::abs(f.amplitude);
    case ForceKind::hoelder:
      return f.amplitude;
  }
  return 0.0;
}

// ---------------------------------------------------------------- thresholds

/**
 * @brief The smallness-ball parameters: γ, the ball radii u±, and the strong
 * dissipativity constant, all from the closed forms of the quadratic root
 * analysis. rejected flags γ > 1 (no real roots — no dissipativity ball).
 */
struct ThresholdParams {
  double nu = 1.0;
  double f_sup = 0.0;
  double c = 1.0;
  double a = 1.0;
  double lambda1 = 1.0;
  double lambda0 = 1.0;
  double omega = 1.0;
  int n_sel = 1;
  double epsilon = 0.25;
  double delta = 0.375;
  double gamma = 0.0;
  double u_minus = 0.0;
  double u_plus = 0.0;
  double alpha_strong = 0.0;
  bool rejected = false;
  bool degenerate = false;
};

/** @brief λ₀ from λ₀^{−1} = max{λₙ^{−1}, λ₁^{−ω}} over the B spectrum. */
inline double select_lambda0(const Vec& b_eigenvalues, int n_sel, double omega) {
  if (n_sel < 1 || n_sel > b_eigenvalues.size())
    throw validation_error("select_lambda0: n_sel outside the spectrum range");
  const double lam_n = b_eigenvalues[n_sel - 1];
  const double lam1 = b_eigenvalues[0];
  if (!(lam_n > 0.0 && lam1 > 0.0))
    throw validation_error("select_lambda0: eigenvalues must be positive");
  return 1.0 / std::max(1.0 / lam_n, std::pow(lam1, -omega));
}

inline ThresholdParams compute_thresholds(double nu, double f_sup, double c, double a,
                                          double lambda1, double lambda0, double epsilon,
                                          int n_sel = 1, double omega = 1.0) {
  if (!(nu > 0.0)) throw validation_error("compute_thresholds: nu must be positive");
  if (!(f_sup >= 0.0))
    throw validation_error("compute_thresholds: f_sup must be nonnegative");
  if (!(c > 0.0)) throw validation_error("compute_thresholds: c must be positive");
  if (!(a > 0.0)) throw validation_error("compute_thresholds: a must be positive");
  if (!(lambda1 > 0.0))
    throw validation_error("compute_thresholds: lambda1 must be positive");
  if (!(lambda0 > 0.0))
    throw validation_error("compute_thresholds: lambda0 must be positive");
  if (!(epsilon > 0.0 && epsilon < 0.5))
    throw validation_error("compute_thresholds: epsilon must lie in (0, 1/2)");

  ThresholdParams p;
  p.nu = nu;
  p.f_sup = f_sup;
  p.c = c;
  p.a = a;
  p.lambda1 = lambda1;
  p.lambda0 = lambda0;
  p.omega = omega;
  p.n_sel = n_sel;
  p.epsilon = epsilon;
  p.delta = 0.25 + epsilon / 2.0;

  const double lam_pow = std::pow(lambda1, 1.0 + p.delta);
  p.gamma = 4.0 * c * lambda0 * lambda0 * f_sup /
            (nu * nu * std::pow(a, 1.0 - p.delta) * lam_pow);
  p.degenerate = std::abs(p.gamma - 1.0) <= 1e-12;
  p.rejected = !p.degenerate && p.gamma > 1.0;

  const double K = nu * lam_pow / (2.0 * c * lambda0 * std::pow(a, p.delta));
  if (p.rejected) {
    p.u_minus = p.u_plus = 0.0;
    p.alpha_strong = 0.0;
    return p;
  }
  const double root = p.degenerate ? 0.0 : std::sqrt(1.0 - std::min(p.gamma, 1.0));
  p.u_plus = K * (1.0 + root);
  // cancellation-free form of K(1−√(1−γ))
  p.u_minus = p.degenerate ? K : K * p.gamma / (1.0 + root);
  p.alpha_strong =
      0.5 / lambda0 * std::pow(a, -2.0 * p.delta) * p.gamma / (1.0 + root);
  return p;
}

// ------------------------------------------------------------ the J operator

enum class JForm { printed, grouped };

/**
 * @brief Shifted right-hand side: J(u,t) = −B^{−(1+δ)}A^{−δ}u
 * − ν^{−1}(AB)^{−(1+δ)}C(u,u) + ν^{−1}(AB)^{−(1+δ)}ℙf(t).
 *
 * The linear term as displayed (printed) applies B^{−(1+δ)} after A^{−δ};
 * since A and B do not commute this differs from the grouped composition
 * −(AB)^{−(1+δ)}Au that makes ν(AB)^{1+δ}J reproduce the plain evolution
 * right-hand side exactly. Both forms are exposed; the round-trip residual of
 * the printed form is measured, not reconciled away (see
 * j_roundtrip_residual). Dissipativity pairings use the printed form.
 */
inline SpectralField apply_J(const SpectralField& u, double t, const ForceModel& force,
                             const ThresholdParams& p, const OperatorCache& cache,
                             JForm form = JForm::printed) {
  if (!u.div_free) require_div_free(u, "apply_J");
  const double beta = 1.0 + p.delta;
  SpectralField cf = nonlinear_C(cache.proj, u, u);
  SpectralField fld = force_at(force, t, cache.proj);
  SpectralField rest = apply_frac(FracOp::AB, -beta, (1.0 / p.nu) * (fld - cf), cache);
  if (form == JForm::grouped) {
    SpectralField lin = apply_frac(FracOp::AB, -beta, cache.proj.apply_A(u), cache);
    return rest - lin;
  }
  SpectralField lin =
      apply_frac(FracOp::B, -beta, apply_frac(FracOp::A, -p.delta, u, cache), cache);
  return rest - lin;
}

/** @brief 𝒜(t)u = ν(AB)^{1+δ}J(u,t) ≡ −νAu − C(u,u) + ℙf(t) (defining identity). */
inline SpectralField apply_script_A(const SpectralField& u, double t,
                                    const ForceModel& force, const ThresholdParams& p,
                                    const OperatorCache& cache) {
  if (!u.div_free) require_div_free(u, "apply_script_A");
  SpectralField out = force_at(force, t, cache.proj) - nonlinear_C(cache.proj, u, u);
  out = out - p.nu * cache.proj.apply_A(u);
  return assert_finite(out, "apply_script_A");
}

/**
 * @brief Relative residual of ν(AB)^{1+δ}J(u,t) + νAu + C(u,u) − ℙf(t).
 *
 * Grouped form: machine-level (group law). Printed form: the measured
 * noncommutativity gap between B^{−(1+δ)}A^{−δ} and (AB)^{−(1+δ)}A.
 */
inline double j_roundtrip_residual(const SpectralField& u, double t,
                                   const ForceModel& force, const ThresholdParams& p,
                                   const OperatorCache& cache, JForm form) {
  SpectralField j = apply_J(u, t, force, p, cache, form);
  SpectralField lhs = p.nu * apply_frac(FracOp::AB, 1.0 + p.delta, j, cache);
  SpectralField rhs = apply_script_A(u, t, force, p, cache);
  return norm_H(lhs - rhs) / (norm_H(rhs) + 1e-300);
}

// -------------------------------------------------------- dissipativity tests

enum class DissNotion { zero_diss, diss, strong, uniform };

/** @brief One ensemble member: raw pairing, its normalizer, and the ratio. */
struct PairingSample {
  int index = 0;
  double pairing = 0.0;
  double normalizer = 0.0;
  double value = 0.0;
};

/**
 * @brief One dissipativity verdict: worst normalized pairing over the sample
 * ensemble, the measured modulus constant, and the pass flag at absolute
 * tolerance 1e−9 on the unit-normalized inner-product scale.
 */
struct DissipativityReport {
  DissNotion notion = DissNotion::zero_diss;
  int samples = 0;
  double worst_value = 0.0;
  double alpha_measured = 0.0;
  bool pass = false;
  double tolerance = 1e-9;
  double slack = 0.05;  ///< ensemble slack on the strong/uniform constant
};

namespace detail {

/** @brief Unit direction on the divergence-free sphere. */
inline SpectralField unit_direction(const OperatorCache& cache, std::uint64_t seed) {
  SpectralField g = random_field(seed, RandomFieldSpec{1.5, true}, cache.proj);
  const double n = norm_H(g);
  if (n == 0.0) throw invariant_error("unit_direction: degenerate sample");
  return (1.0 / n) * g;
}

/** @brief Sample with ‖Au‖ = r, r uniform in (0, cap]. */
inline SpectralField sample_in_A_ball(const OperatorCache& cache, std::uint64_t seed,
                                      double cap) {
  SpectralField dir = unit_direction(cache, derive_seed(seed, 0));
  const double v01 = 0.5 * (uniform_pm1(derive_seed(seed, 1), 0) + 1.0);
  const double r = cap * (1.0 - v01);  // (0, cap]
  const double na = norm_Au(dir, cache);
  return (r / na) * dir;
}

/** @brief Sample with ‖u‖_H = ρ, ρ uniform in [lo, hi]. */
inline SpectralField sample_in_H_annulus(const OperatorCache& cache, std::uint64_t seed,
                                         double lo, double hi) {
  SpectralField dir = unit_direction(cache, derive_seed(seed, 0));
  const double v01 = 0.5 * (uniform_pm1(derive_seed(seed, 1), 0) + 1.0);
  return (lo + (hi - lo) * v01) * dir;
}

}  // namespace detail

/**
 * @brief Evaluate one dissipativity notion over a seeded ensemble.
 *
 * zero_diss: ⟨J(u,t),(AB)^{−δ}u⟩ ≤ 0 on the H-annulus [u₋,u₊].
 * diss/strong: ⟨J(u,t)−J(v,t),(AB)^{−δ}(u−v)⟩ on the ‖A·‖ ≤ u₊/2 ball;
 * strong additionally requires the measured α ≥ alpha_strong·(1−slack).
 * uniform: ⟨𝒜u−𝒜v,u−v⟩ ≤ −κ‖A^{1/2}(u−v)‖‖u−v‖ with
 * κ = ½νλ₀^{−1}a^{−δ}(1−√(1−γ)) — the modulus is quadratic in u−v overall,
 * matching the quadratic left side.
 */
inline DissipativityReport test_dissipativity(DissNotion notion, const ThresholdParams& p,
                                              const ForceModel& force, int n_samples,
                                              std::uint64_t seed,
                                              const OperatorCache& cache,
                                              std::vector<PairingSample>* samples_out = nullptr) {
  if (p.rejected)
    throw validation_error(
        "test_dissipativity: parameters carry the rejected-regime flag (gamma >= 1)");
  DissipativityReport rep;
  rep.notion = notion;
  rep.samples = n_samples;
  rep.worst_value = -std::numeric_limits<double>::infinity();
  rep.alpha_measured = std::numeric_limits<double>::infinity();
  const double t0 = 0.0;
  bool sign_ok = true;

  for (int k = 0; k < n_samples; ++k) {
    const std::uint64_t sk = derive_seed(seed, static_cast<std::uint64_t>(k));
    if (notion == DissNotion::zero_diss) {
      SpectralField u =
          detail::sample_in_H_annulus(cache, derive_seed(sk, 11), p.u_minus, p.u_plus);
      SpectralField ju = apply_J(u, t0, force, p, cache);
      SpectralField gu = apply_frac(FracOp::AB, -p.delta, u, cache);
      const double pairing = inner_H(ju, gu);
      const double scale = norm_H(u) * norm_H(u) + 1e-300;
      const double val = pairing / scale;
      rep.worst_value = std::max(rep.worst_value, val);
      if (samples_out) samples_out->push_back({k, pairing, scale, val});
      if (val > rep.tolerance) sign_ok = false;
      continue;
    }

    const double cap = 0.5 * p.u_plus;
    SpectralField u = detail::sample_in_A_ball(cache, derive_seed(sk, 21), cap);
    SpectralField v = detail::sample_in_A_ball(cache, derive_seed(sk, 22), cap);
    SpectralField w = u - v;
    const double nw2 = norm_H(w) * norm_H(w);
    if (nw2 == 0.0) continue;

    if (notion == DissNotion::uniform) {
      SpectralField dA = apply_script_A(u, t0, force, p, cache) -
                         apply_script_A(v, t0, force, p, cache);
      const double pairing = inner_H(dA, w);
      const double nv = norm_V(w, cache);
      const double nw = norm_H(w);
      const double kappa = 0.5 * p.nu / p.lambda0 * std::pow(p.a, -p.delta) * p.gamma /
                           (1.0 + std::sqrt(std::max(0.0, 1.0 - p.gamma)));
      const double val = (pairing + kappa * nv * nw) / nw2;
      rep.worst_value = std::max(rep.worst_value, val);
      rep.alpha_measured = std::min(rep.alpha_measured, -pairing / (nv * nw));
      if (samples_out) samples_out->push_back({k, pairing, nw2, val});
      if (val > rep.tolerance) sign_ok = false;
      continue;
    }

    SpectralField dJ =
        apply_J(u, t0, force, p, cache) - apply_J(v, t0, force, p, cache);
    SpectralField gw = apply_frac(FracOp::AB, -p.delta, w, cache);
    const double pairing = inner_H(dJ, gw);
    const double val = pairing / nw2;
    rep.worst_value = std::max(rep.worst_value, val);
    rep.alpha_measured = std::min(rep.alpha_measured, -pairing / nw2);
    if (samples_out) samples_out->push_back({k, pairing, nw2, val});
    if (val > rep.tolerance) sign_ok = false;
  }

  if (!std::isfinite(rep.worst_value)) rep.worst_value = 0.0;
  if (!std::isfinite(rep.alpha_measured)) rep.alpha_measured = 0.0;
  switch (notion) {
    case DissNotion::zero_diss:
    case DissNotion::diss:
      rep.pass = sign_ok;
      break;
    case DissNotion::strong:
      rep.pass = sign_ok && rep.alpha_measured >= p.alpha_strong * (1.0 - rep.slack);
      break;
    case DissNotion::uniform:
      rep.pass = sign_ok;
      break;
  }
  return rep;
}

/**
 * @brief Empirical envelope of ‖B^{−1/2}(AB)^{−δ}u‖/‖u‖ over a seeded
 * ensemble. The two-sided bounds on this quantity carry an ambiguous
 * quantifier in the source analysis, so the envelope is measured and
 * reported rather than asserted.
 */
inline std::pair<double, double> b_half_envelope(const ThresholdParams& p,
                                                 const OperatorCache& cache,
                                                 int n_samples, std::uint64_t seed) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int k = 0; k < n_samples; ++k) {
    SpectralField u =
        detail::unit_direction(cache, derive_seed(seed, static_cast<std::uint64_t>(k)));
    SpectralField g = apply_frac(FracOp::AB, -p.delta, u, cache);
    const double r = detail::frac_norm(cache, FracOp::B, -0.5, g);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  if (!std::isfinite(lo)) lo = 0.0;
  return {lo, hi};
}

/**
 * @brief Time regularity of J: ‖J(u,t)−J(u,τ)‖ ≤ d′|t−τ|^θ with
 * d′ = d_lip·ν^{−1}·a^{−(1+δ)} — the u-dependence cancels, so the bound chains
 * the force's Hölder bound through the operator norm a^{−(1+δ)}.
 */
inline EstimateReport test_J_time_lipschitz(const ForceModel& force,
                                            const ThresholdParams& p,
                                            const OperatorCache& cache, int pairs,
                                            std::uint64_t seed) {
  if (force.kind != ForceKind::hoelder)
    throw validation_error("test_J_time_lipschitz: requires a hoelder force");
  const double beta = 1.0 + p.delta;
  const double d_prime = force.d_lip / p.nu * std::pow(p.a, -beta);
  EstimateReport rep{"thm8_lipschitz", pairs, cache.basis->n_modes, seed, 0.0, 0, {}};
  SpectralField u = detail::sample_df(cache, derive_seed(seed, 999), 0);
  const double horizon = 10.0;
  for (int k = 0; k < pairs; ++k) {
    const std::uint64_t sk = derive_seed(seed, static_cast<std::uint64_t>(k));
    const double t = horizon * 0.5 * (uniform_pm1(sk, 0) + 1.0);
    const double tau = horizon * 0.5 * (uniform_pm1(sk, 1) + 1.0);
    if (t == tau) continue;
    SpectralField dj = apply_J(u, t, force, p, cache) - apply_J(u, tau, force, p, cache);
    const double ratio = norm_H(dj) / std::pow(std::abs(t - tau), force.theta);
    rep.empirical_constant = std::max(rep.empirical_constant, ratio / d_prime);
    if (ratio > d_prime * (1.0 + 1e-9)) ++rep.violations;
  }
  rep.parameters = {{"theta", force.theta},
                    {"d_lip", force.d_lip},
                    {"d_prime", d_prime},
                    {"nu", p.nu},
                    {"a", p.a},
                    {"delta", p.delta}};
  return rep;
}

}  // namespace hermstokes

#pragma once

#include <memory>
#include <utility>

#include "hermstokes/basis.hpp"
#include "hermstokes/rng.hpp"

namespace hermstokes {

/**
 * @brief Velocity field as Hermite coefficients: 3 components × n_modes³ reals.
 *
 * Coefficients are stored flat in (component, n1, n2, n3) lexicographic order.
 * Values are immutable by convention — operations return new fields — and the
 * divergence-free property is a checked tag, not a type: truncation makes
 * exact algebraic closure impossible, so the invariant is numeric with
 * tolerance 1e-8 relative.
 */
struct SpectralField {
  std::shared_ptr<const BasisTable> basis;
  Vec coeffs;
  bool div_free = false;

  Eigen::Index modes3() const {
    const Eigen::Index n = basis->n_modes;
    return n * n * n;
  }

  static SpectralField zero(std::shared_ptr<const BasisTable> b) {
    SpectralField f;
    f.coeffs = Vec::Zero(3 * b->n_modes * b->n_modes * static_cast<Eigen::Index>(b->n_modes));
    f.basis = std::move(b);
    return f;
  }

  T3 component(int c) const {
    const Eigen::Index n = basis->n_modes, m3 = modes3();
    T3 t = T3::cube(n);
    t.data = coeffs.segment(c * m3, m3);
    return t;
  }

  void set_component(int c, const T3& t) {
    const Eigen::Index m3 = modes3();
    coeffs.segment(c * m3, m3) = t.data;
  }
};

/** @brief Physical-space counterpart: 3 × n_quad³ point values (plumbing type). */
struct GridField {
  std::shared_ptr<const BasisTable> basis;
  Vec values;

  Eigen::Index quad3() const {
    const Eigen::Index q = basis->n_quad;
    return q * q * q;
  }
  T3 component(int c) const {
    const Eigen::Index q = basis->n_quad, q3 = quad3();
    T3 t(q, q, q);
    t.data = values.segment(c * q3, q3);
    return t;
  }
};

/** @brief Every operation asserts finite output; NaN/Inf is an invariant breach. */
inline const SpectralField& assert_finite(const SpectralField& u, const char* where) {
  if (!u.coeffs.allFinite())
    throw invariant_error(std::string(where) + ": non-finite coefficients");
  return u;
}

inline void require_same_basis(const SpectralField& u, const BasisTable& b, const char* where) {
  if (!u.basis || u.basis->id != b.id)
    throw validation_error(std::string(where) + ": field was built against a different basis");
}

/** @brief H-norm: Euclidean norm of the coefficients (basis orthonormality). */
inline double norm_H(const SpectralField& u) { return u.coeffs.norm(); }

inline double inner_H(const SpectralField& u, const SpectralField& v) {
  return u.coeffs.dot(v.coeffs);
}

inline SpectralField operator+(const SpectralField& a, const SpectralField& b) {
  SpectralField r;
  r.basis = a.basis;
  r.coeffs = a.coeffs + b.coeffs;
  r.div_free = a.div_free && b.div_free;
  return r;
}

inline SpectralField operator-(const SpectralField& a, const SpectralField& b) {
  SpectralField r;
  r.basis = a.basis;
  r.coeffs = a.coeffs - b.coeffs;
  r.div_free = a.div_free && b.div_free;
  return r;
}

inline SpectralField operator*(double s, const SpectralField& a) {
  SpectralField r;
  r.basis = a.basis;
  r.coeffs = s * a.coeffs;
  r.div_free = a.div_free;
  return r;
}

// ------------------------------------------------------------- differential

/** @brief Discrete divergence ∂₁u₁+∂₂u₂+∂₃u₃ via the derivative recurrence. */
inline T3 divergence(const SpectralField& u) {
  const BasisTable& b = *u.basis;
  T3 div = T3::cube(b.n_modes);
  for (int c = 0; c < 3; ++c) {
    T3 d = apply_1d_recurrences(Recurrence::derivative, u.component(c), c, b);
    div.data += d.data;
  }
  return div;
}

/** @brief ‖div u‖ / ‖u‖ (0 for the zero field). */
inline double div_residual(const SpectralField& u) {
  const double nu = norm_H(u);
  if (nu == 0.0) return 0.0;
  return divergence(u).data.norm() / nu;
}

inline bool check_div_free(const SpectralField& u, double tol = 1e-8) {
  return div_residual(u) <= tol;
}

inline void require_div_free(const SpectralField& u, const char* where, double tol = 1e-8) {
  if (!check_div_free(u, tol))
    throw validation_error(std::string(where) + ": input is not divergence-free");
}

/** @brief Gradient of a scalar coefficient tensor (result is a plain field). */
inline SpectralField grad_scalar(const T3& q, std::shared_ptr<const BasisTable> basis) {
  SpectralField g = SpectralField::zero(basis);
  for (int c = 0; c < 3; ++c)
    g.set_component(c, apply_1d_recurrences(Recurrence::derivative, q, c, *basis));
  return assert_finite(g, "grad_scalar");
}

/** @brief Curl of a vector potential; pointwise divergence-free up to truncation. */
inline SpectralField curl(const SpectralField& psi) {
  const BasisTable& b = *psi.basis;
  auto d = [&](int comp, int axis) {
    return apply_1d_recurrences(Recurrence::derivative, psi.component(comp), axis, b);
  };
  SpectralField u = SpectralField::zero(psi.basis);
  T3 u0 = d(2, 1), u1 = d(0, 2), u2 = d(1, 0);
  u0.data -= d(1, 2).data;
  u1.data -= d(2, 0).data;
  u2.data -= d(0, 1).data;
  u.set_component(0, u0);
  u.set_component(1, u1);
  u.set_component(2, u2);
  return assert_finite(u, "curl");
}

// ------------------------------------------------------------------ sampling

struct RandomFieldSpec {
  double decay_rate = 1.5;
  bool divergence_free = false;
};

/**
 * @brief Deterministic random field: uniform [-1,1) draws shaped by the
 * envelope (1+n1+n2+n3)^{-decay_rate}. Draw i feeds flat coefficient slot i,
 * so the result depends only on (seed, basis shape).
 *
 * The divergence_free flag needs the projection machinery; use the overload
 * in the operators module for that.
 */
inline SpectralField random_field(std::uint64_t seed, const RandomFieldSpec& spec,
                                  std::shared_ptr<const BasisTable> basis) {
  if (!(spec.decay_rate > 0.0))
    throw validation_error("random_field: decay_rate must be > 0");
  if (spec.divergence_free)
    throw validation_error(
        "random_field: divergence_free sampling requires the projection overload");
  const int n = basis->n_modes;
  SpectralField f = SpectralField::zero(std::move(basis));
  Eigen::Index i = 0;
  for (int c = 0; c < 3; ++c)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int k = 0; k < n; ++k, ++i) {
          const double env = std::pow(1.0 + a + b + k, -spec.decay_rate);
          f.coeffs[i] = env * uniform_pm1(seed, static_cast<std::uint64_t>(i));
        }
  return assert_finite(f, "random_field");
}

// --------------------------------------------------------------- grid moves

inline GridField synthesize_field(const SpectralField& u) {
  const BasisTable& b = *u.basis;
  const Eigen::Index q3 = static_cast<Eigen::Index>(b.n_quad) * b.n_quad * b.n_quad;
  GridField g;
  g.basis = u.basis;
  g.values = Vec(3 * q3);
  for (int c = 0; c < 3; ++c)
    g.values.segment(c * q3, q3) = hermite_synthesize(u.component(c), b).data;
  return g;
}

inline SpectralField analyze_field(const GridField& g) {
  const BasisTable& b = *g.basis;
  SpectralField u = SpectralField::zero(g.basis);
  for (int c = 0; c < 3; ++c) u.set_component(c, hermite_analyze(g.component(c), b));
  return assert_finite(u, "analyze_field");
}

}  // namespace hermstokes

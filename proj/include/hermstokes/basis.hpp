#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>

#include "hermstokes/errors.hpp"
#include "hermstokes/hashing.hpp"
#include "hermstokes/linalg.hpp"
#include "hermstokes/tensor.hpp"

namespace hermstokes {

/** @brief Tensor mode label (n1, n2, n3), each in [0, n_modes). */
struct MultiIndex {
  int n1 = 0, n2 = 0, n3 = 0;
  int total() const noexcept { return n1 + n2 + n3; }
};

/**
 * @brief One-dimensional Hermite-function basis plus its Gauss quadrature rule.
 *
 * values(n, q) holds the n-th L2-normalized Hermite function at node q, so the
 * discrete inner product  Σ_q dweights(q) f(x_q) g(x_q)  reproduces ∫ f g dx
 * exactly for integrands of polynomial-times-Gaussian degree ≤ 2 n_quad − 1,
 * which makes the mode-space Gram matrix the identity whenever
 * n_quad ≥ n_modes.
 */
struct BasisTable {
  int n_modes = 0;
  int n_quad = 0;
  double dilation = 1.0;  ///< basis scale λ: functions √λ h_n(λx); 1 = unscaled
  Vec nodes;              ///< physical nodes, ascending, exactly ±-symmetric
  Vec weights;            ///< Gauss weights for the e^{-t²} reference measure
  Vec dweights;           ///< plain-measure weights: Σ dweights f(x_q) ≈ ∫ f dx
  Vec eigs_1d;            ///< oscillator spectrum λ²(n + 1/2)
  Mat values;             ///< n_modes × n_quad function table
  Mat synth_m;            ///< n_quad × n_modes (coefficients → grid)
  Mat analysis_m;         ///< n_modes × n_quad (grid → coefficients)
  std::uint64_t id = 0;   ///< identity token: fields must match their table

  double deriv_scale() const noexcept { return dilation; }
  double pos_scale() const noexcept { return 1.0 / dilation; }
};

/** @brief Dealiasing default: ⌈3 n_modes / 2⌉ quadrature points. */
inline int default_n_quad(int n_modes) { return (3 * n_modes + 1) / 2; }

namespace detail {

/** @brief Values of h_0..h_{nmax-1} at reference points t (stable recurrence). */
inline Mat hermite_values(int nmax, const Vec& t) {
  const Eigen::Index q = t.size();
  Mat v(nmax, q);
  const double c0 = std::pow(std::numbers::pi, -0.25);
  for (Eigen::Index j = 0; j < q; ++j) v(0, j) = c0 * std::exp(-0.5 * t[j] * t[j]);
  if (nmax > 1) v.row(1) = std::sqrt(2.0) * t.transpose().cwiseProduct(v.row(0));
  for (int n = 1; n + 1 < nmax; ++n) {
    const double a = 1.0 / std::sqrt((n + 1) / 2.0);
    const double b = std::sqrt(n / 2.0);
    for (Eigen::Index j = 0; j < q; ++j)
      v(n + 1, j) = a * (t[j] * v(n, j) - b * v(n - 1, j));
  }
  return v;
}

/** @brief Gauss nodes/weights for ∫ f(t) e^{-t²} dt via the Jacobi matrix. */
inline std::pair<Vec, Vec> gauss_hermite(int n) {
  Vec diag = Vec::Zero(n), off(n - 1 > 0 ? n - 1 : 0);
  for (int k = 1; k < n; ++k) off[k - 1] = std::sqrt(k / 2.0);
  EigDecomp e = n > 1 ? eigh_tridiagonal(diag, off)
                      : EigDecomp{Vec::Zero(1), Mat::Ones(1, 1)};
  Vec x = e.values, w(n);
  const double spi = std::sqrt(std::numbers::pi);
  for (int j = 0; j < n; ++j) w[j] = spi * e.vectors(0, j) * e.vectors(0, j);
  // enforce exact ± symmetry of the rule (nodes come out ascending)
  for (int i = 0; i < n / 2; ++i) {
    const int m = n - 1 - i;
    const double s = 0.5 * (x[m] - x[i]);
    x[i] = -s;
    x[m] = s;
    const double wm = 0.5 * (w[i] + w[m]);
    w[i] = wm;
    w[m] = wm;
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
  return {x, w};
}

}  // namespace detail

/**
 * @brief Build the 1D basis/quadrature table shared by all 3D transforms.
 *
 * Requires n_quad ≥ n_modes so the discrete Gram matrix is exactly the
 * identity (up to roundoff); dilation rescales the basis as √λ h_n(λx).
 */
inline std::shared_ptr<const BasisTable> build_basis(int n_modes, int n_quad,
                                                     double dilation = 1.0) {
  if (n_modes < 1) throw validation_error("build_basis: n_modes must be >= 1");
  if (n_quad < n_modes)
    throw validation_error("build_basis: n_quad >= n_modes required for exact Gram");
  if (!(dilation > 0.0)) throw validation_error("build_basis: dilation must be > 0");

  auto b = std::make_shared<BasisTable>();
  b->n_modes = n_modes;
  b->n_quad = n_quad;
  b->dilation = dilation;
  auto [t, w] = detail::gauss_hermite(n_quad);
  b->weights = w;
  b->nodes = t / dilation;
  b->dweights = Vec(n_quad);
  for (int q = 0; q < n_quad; ++q)
    b->dweights[q] = w[q] * std::exp(t[q] * t[q]) / dilation;
  b->values = std::sqrt(dilation) * detail::hermite_values(n_modes, t);
  b->eigs_1d = Vec(n_modes);
  for (int n = 0; n < n_modes; ++n)
    b->eigs_1d[n] = dilation * dilation * (n + 0.5);
  b->synth_m = b->values.transpose();
  b->analysis_m = b->values * b->dweights.asDiagonal();

  std::uint64_t h = fnv1a64_of(n_modes);
  h = fnv1a64_of(n_quad, h);
  h = fnv1a64_of(dilation, h);
  b->id = h;
  return b;
}

// ------------------------------------------------------------ 3D transforms

namespace detail {
template <class S>
Tensor3<S> separable(const Tensor3<S>& t, const Mat& m) {
  return apply_axis(apply_axis(apply_axis(t, m, 0), m, 1), m, 2);
}

inline void require_dims(const std::array<Eigen::Index, 3>& dims, Eigen::Index d,
                         const char* what) {
  if (dims[0] != d || dims[1] != d || dims[2] != d)
    throw validation_error(std::string(what) + ": tensor shape does not match basis");
}
}  // namespace detail

/** @brief Grid values → coefficients: three weighted contractions, one per axis. */
template <class S>
Tensor3<S> hermite_analyze(const Tensor3<S>& grid, const BasisTable& b) {
  detail::require_dims(grid.dims, b.n_quad, "hermite_analyze");
  return detail::separable(grid, b.analysis_m);
}

/** @brief Coefficients → grid values at the quadrature nodes. */
template <class S>
Tensor3<S> hermite_synthesize(const Tensor3<S>& coeffs, const BasisTable& b) {
  detail::require_dims(coeffs.dims, b.n_modes, "hermite_synthesize");
  return detail::separable(coeffs, b.synth_m);
}

/**
 * @brief Diagonal Fourier transform in mode space: multiply by i^{±(n1+n2+n3)}.
 *
 * The transform with kernel e^{+ix·y} maps the (n1,n2,n3) basis function to
 * i^{n1+n2+n3} times itself, so the full 3D transform is this phase diagonal;
 * direction −1 applies the inverse phases and four applications are the
 * identity.
 */
inline CT3 fourier_diagonal(const CT3& coeffs, int direction = +1) {
  if (direction != 1 && direction != -1)
    throw validation_error("fourier_diagonal: direction must be +1 or -1");
  const Eigen::Index n = coeffs.dims[0];
  detail::require_dims(coeffs.dims, n, "fourier_diagonal");
  static const cplx table[4] = {cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)};
  CT3 out = coeffs;
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      for (Eigen::Index c = 0; c < n; ++c) {
        const int tot = static_cast<int>((a + b + c) % 4);
        const int idx = direction == 1 ? tot : (4 - tot) % 4;
        out(a, b, c) *= table[idx];
      }
  return out;
}

inline CT3 fourier_diagonal(const T3& coeffs, int direction = +1) {
  return fourier_diagonal(to_complex(coeffs), direction);
}

// ------------------------------------------------------- 1D mode recurrences

enum class Recurrence { derivative, position };

/**
 * @brief Exact rectangular (n_modes+1) × n_modes recurrence matrix.
 *
 * Column n carries the image of mode n including the outflow row n_modes;
 * this is the building block for Galerkin assembly, where the outflow
 * contributions must be retained.
 */
inline Mat recurrence_matrix_rect(Recurrence kind, int n_modes, double dilation = 1.0) {
  Mat m = Mat::Zero(n_modes + 1, n_modes);
  const double sgn = kind == Recurrence::derivative ? -1.0 : 1.0;
  const double sc =
      kind == Recurrence::derivative ? dilation : 1.0 / dilation;
  for (int n = 0; n < n_modes; ++n) {
    if (n - 1 >= 0) m(n - 1, n) = sc * std::sqrt(n / 2.0);
    m(n + 1, n) = sgn * sc * std::sqrt((n + 1) / 2.0);
  }
  return m;
}

/** @brief Truncated square recurrence matrix: the outflow row is dropped. */
inline Mat recurrence_matrix(Recurrence kind, const BasisTable& b) {
  return recurrence_matrix_rect(kind, b.n_modes, b.dilation).topRows(b.n_modes);
}

/**
 * @brief Apply d/dx or multiplication by x along one axis in coefficient space.
 *
 * Bidiagonal couplings n ↔ n±1; the outflow component at n_modes−1 → n_modes
 * is truncated away, which is the only approximation in the operator.
 */
inline T3 apply_1d_recurrences(Recurrence kind, const T3& coeffs, int axis,
                               const BasisTable& b) {
  detail::require_dims(coeffs.dims, b.n_modes, "apply_1d_recurrences");
  return apply_axis(coeffs, recurrence_matrix(kind, b), axis);
}

}  // namespace hermstokes

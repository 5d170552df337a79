#pragma once

#include <lapacke.h>

#include <Eigen/Dense>
#include <cmath>
#include <utility>

#include "hermstokes/errors.hpp"

namespace hermstokes {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

/** @brief Symmetric eigendecomposition, values ascending, orthonormal columns. */
struct EigDecomp {
  Vec values;
  Mat vectors;
};

/** @brief Divide-and-conquer symmetric eigensolver (column-major, in place). */
inline EigDecomp eigh(Mat a) {
  if (a.rows() != a.cols() || a.rows() == 0) throw validation_error("eigh: square matrix required");
  const auto n = static_cast<lapack_int>(a.rows());
  Vec w(n);
  const lapack_int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, w.data());
  if (info != 0) throw invariant_error("eigh: dsyevd failed with info " + std::to_string(info));
  return EigDecomp{std::move(w), std::move(a)};
}

/** @brief Eigendecomposition of a symmetric tridiagonal matrix (values ascending). */
inline EigDecomp eigh_tridiagonal(Vec diag, Vec offdiag) {
  const auto n = static_cast<lapack_int>(diag.size());
  if (offdiag.size() != n - 1) throw validation_error("eigh_tridiagonal: bad band sizes");
  Mat z(n, n);
  const lapack_int info =
      LAPACKE_dstev(LAPACK_COL_MAJOR, 'V', n, diag.data(), offdiag.data(), z.data(), n);
  if (info != 0) throw invariant_error("eigh_tridiagonal: dstev failed");
  return EigDecomp{std::move(diag), std::move(z)};
}

/** @brief All singular values, descending (for cross-checking operator norms). */
inline Vec singular_values(Mat a) {
  const auto m = static_cast<lapack_int>(a.rows());
  const auto n = static_cast<lapack_int>(a.cols());
  Vec s(std::min(m, n));
  const lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', m, n, a.data(), m, s.data(),
                                         nullptr, m, nullptr, n);
  if (info != 0) throw invariant_error("singular_values: dgesdd failed");
  return s;
}

/**
 * @brief Largest singular value by deterministic power iteration on GᵀG.
 *
 * Fixed start vector; converges to machine-level relative accuracy for the
 * well-separated spectra produced by the dense operator matrices here.
 */
inline double op_norm_2(const Mat& g, int max_iters = 500, double rel_tol = 1e-14) {
  const Eigen::Index n = g.cols();
  if (n == 0) return 0.0;
  Vec x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = 1.0 + 1e-3 * static_cast<double>(i % 7);
  x.normalize();
  double sigma = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Vec y = g * x;
    const double s = y.norm();
    if (s == 0.0) return 0.0;
    Vec z = g.transpose() * y;
    const double zn = z.norm();
    if (zn == 0.0) return 0.0;
    x = z / zn;
    if (it > 0 && std::abs(s - sigma) <= rel_tol * s) {
      sigma = s;
      break;
    }
    sigma = s;
  }
  return sigma;
}

/** @brief Apply a scalar function to a symmetric matrix through its eigensystem. */
template <class F>
Mat spectral_apply(const EigDecomp& e, F&& f) {
  Vec d(e.values.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = f(e.values[i]);
  return e.vectors * d.asDiagonal() * e.vectors.transpose();
}

}  // namespace hermstokes

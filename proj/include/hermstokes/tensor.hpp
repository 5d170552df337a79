#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>

#include "hermstokes/errors.hpp"
#include "hermstokes/linalg.hpp"

namespace hermstokes {

using cplx = std::complex<double>;

/**
 * @brief Dense rank-3 tensor, row-major (d0, d1, d2) layout.
 *
 * Separable spectral transforms reduce to one matrix contraction per axis,
 * which is the performance-critical path; everything here maps onto batched
 * matrix products.
 */
template <class S>
struct Tensor3 {
  std::array<Eigen::Index, 3> dims{0, 0, 0};
  Eigen::Matrix<S, Eigen::Dynamic, 1> data;

  Tensor3() = default;
  Tensor3(Eigen::Index d0, Eigen::Index d1, Eigen::Index d2)
      : dims{d0, d1, d2},
        data(Eigen::Matrix<S, Eigen::Dynamic, 1>::Zero(d0 * d1 * d2)) {}

  static Tensor3 cube(Eigen::Index d) { return Tensor3(d, d, d); }

  Eigen::Index size() const { return data.size(); }
  S& operator()(Eigen::Index i, Eigen::Index j, Eigen::Index k) {
    return data[(i * dims[1] + j) * dims[2] + k];
  }
  const S& operator()(Eigen::Index i, Eigen::Index j, Eigen::Index k) const {
    return data[(i * dims[1] + j) * dims[2] + k];
  }
};

using T3 = Tensor3<double>;
using CT3 = Tensor3<cplx>;

namespace detail {
template <class S>
using RowMajorMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
}

/** @brief Contract matrix m (p × dims[axis]) with the tensor along one axis. */
template <class S>
Tensor3<S> apply_axis(const Tensor3<S>& t,
                      const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& m, int axis) {
  using RM = detail::RowMajorMat<S>;
  const Eigen::Index d0 = t.dims[0], d1 = t.dims[1], d2 = t.dims[2];
  const Eigen::Index p = m.rows();
  if (axis < 0 || axis > 2 || m.cols() != t.dims[axis])
    throw validation_error("apply_axis: shape mismatch");
  if (axis == 0) {
    Tensor3<S> out(p, d1, d2);
    Eigen::Map<const RM> in(t.data.data(), d0, d1 * d2);
    Eigen::Map<RM> ov(out.data.data(), p, d1 * d2);
    ov.noalias() = m * in;
    return out;
  }
  if (axis == 2) {
    Tensor3<S> out(d0, d1, p);
    Eigen::Map<const RM> in(t.data.data(), d0 * d1, d2);
    Eigen::Map<RM> ov(out.data.data(), d0 * d1, p);
    ov.noalias() = in * m.transpose();
    return out;
  }
  Tensor3<S> out(d0, p, d2);
  for (Eigen::Index i = 0; i < d0; ++i) {
    Eigen::Map<const RM> in(t.data.data() + i * d1 * d2, d1, d2);
    Eigen::Map<RM> ov(out.data.data() + i * p * d2, p, d2);
    ov.noalias() = m * in;
  }
  return out;
}

/** @brief Real matrix acting on a complex tensor (matrix promoted once). */
inline CT3 apply_axis(const CT3& t, const Mat& m, int axis) {
  const CMat mc = m.cast<cplx>();
  return apply_axis<cplx>(t, mc, axis);
}

inline CT3 to_complex(const T3& t) {
  CT3 out;
  out.dims = t.dims;
  out.data = t.data.cast<cplx>();
  return out;
}

/** @brief Real part, asserting the imaginary residue is negligible. */
inline T3 to_real_checked(const CT3& t, double rel_tol = 1e-10) {
  T3 out;
  out.dims = t.dims;
  out.data = t.data.real();
  const double im = t.data.imag().matrix().norm();
  const double sc = out.data.norm();
  if (im > rel_tol * (sc + 1e-300) && im > 1e-13)
    throw invariant_error("to_real_checked: non-negligible imaginary part");
  return out;
}

template <class S>
Tensor3<S> cwise_mul(const Tensor3<S>& a, const Tensor3<S>& b) {
  if (a.dims != b.dims) throw validation_error("cwise_mul: shape mismatch");
  Tensor3<S> out;
  out.dims = a.dims;
  out.data = a.data.cwiseProduct(b.data);
  return out;
}

inline CT3 cwise_mul(const T3& a, const CT3& b) {
  if (a.dims != b.dims) throw validation_error("cwise_mul: shape mismatch");
  CT3 out;
  out.dims = b.dims;
  out.data = b.data.cwiseProduct(a.data.cast<cplx>());
  return out;
}

}  // namespace hermstokes

#include <catch2/catch_amalgamated.hpp>

#include "hermstokes/basis.hpp"
#include "test_util.hpp"

using namespace hermstokes;
using hstest::gaussian_moment;
using hstest::max_abs;
using hstest::random_tensor;

namespace {

Mat gram(const BasisTable& b) {
  return b.values * b.dweights.asDiagonal() * b.values.transpose();
}

}  // namespace

TEST_CASE("quadrature rule integrates Gaussian moments exactly") {
  for (int nq : {1, 2, 5, 8, 24, 48}) {
    auto b = build_basis(1, nq);
    REQUIRE(b->nodes.size() == nq);
    // all moments t^m with m <= 2 nq - 1; odd ones vanish by symmetry.
    // Error is measured against the summed term magnitude: for large m the
    // cancellation is exact in exact arithmetic but conditioned by the terms.
    for (int m = 0; m <= 2 * nq - 1; ++m) {
      double s = 0.0, sabs = 0.0;
      for (int q = 0; q < nq; ++q) {
        const double term = b->weights[q] * std::pow(b->nodes[q], m);
        s += term;
        sabs += std::abs(term);
      }
      const double expected = m % 2 == 1 ? 0.0 : gaussian_moment(m / 2);
      REQUIRE(std::abs(s - expected) <= 1e-13 * (sabs + std::abs(expected)));
    }
  }
}

TEST_CASE("nodes are ascending and exactly symmetric, weights positive") {
  for (int nq : {2, 7, 12, 24, 48}) {
    auto b = build_basis(1, nq);
    for (int q = 0; q + 1 < nq; ++q) REQUIRE(b->nodes[q] < b->nodes[q + 1]);
    for (int q = 0; q < nq; ++q) {
      REQUIRE(b->nodes[q] == -b->nodes[nq - 1 - q]);
      REQUIRE(b->weights[q] > 0.0);
      REQUIRE(b->dweights[q] > 0.0);
    }
  }
}

TEST_CASE("function values match the closed-form chain at the origin") {
  // value at x = 0: even modes alternate via v_{n+1} = -sqrt(n/(n+1)) v_{n-1}
  auto b = build_basis(12, 13);  // odd rule -> middle node is exactly 0
  const int mid = 13 / 2;
  REQUIRE(b->nodes[mid] == 0.0);
  const double h0 = std::pow(std::numbers::pi, -0.25);
  REQUIRE(std::abs(b->values(0, mid) - h0) <= 1e-15);
  REQUIRE(std::abs(h0 - 0.7511255444649425) <= 1e-15);
  double prev = h0;
  for (int n = 1; n < 12; ++n) {
    if (n % 2 == 1) {
      REQUIRE(std::abs(b->values(n, mid)) <= 1e-15);
    } else {
      const double expect = -std::sqrt((n - 1.0) / n) * prev;
      REQUIRE(std::abs(b->values(n, mid) - expect) <= 1e-13);
      prev = expect;
    }
  }
}

TEST_CASE("single-mode table reproduces the ground state at the origin") {
  auto b = build_basis(1, 1);
  REQUIRE(b->nodes[0] == 0.0);
  REQUIRE(std::abs(b->values(0, 0) - 0.7511255444649425) <= 1e-15);
}

TEST_CASE("discrete Gram matrix is the identity") {
  auto check = [](int n, int nq, double tol) {
    auto b = build_basis(n, nq);
    Mat g = gram(*b);
    REQUIRE(max_abs(g - Mat::Identity(n, n)) <= tol);
  };
  check(4, 4, 1e-12);
  check(16, 24, 1e-10);
  check(32, 48, 1e-10);
  check(8, 12, 1e-12);
}

TEST_CASE("oscillator identity: derivative and position recurrences") {
  // 1/2 (DᵀD + XᵀX) = diag(n + 1/2) exactly, using rectangular matrices
  for (int n : {4, 16}) {
    Mat d = recurrence_matrix_rect(Recurrence::derivative, n);
    Mat x = recurrence_matrix_rect(Recurrence::position, n);
    Mat osc = 0.5 * (d.transpose() * d + x.transpose() * x);
    auto b = build_basis(n, n);
    Mat expect = b->eigs_1d.asDiagonal();
    REQUIRE(max_abs(osc - expect) <= 1e-10);
  }
}

TEST_CASE("interior commutator of derivative and position is the identity") {
  const int n = 10;
  auto b = build_basis(n, n);
  Mat d = recurrence_matrix(Recurrence::derivative, *b);
  Mat x = recurrence_matrix(Recurrence::position, *b);
  Mat comm = d * x - x * d;
  // truncation corrupts only the last mode; interior block must be exact
  REQUIRE(max_abs(comm.topLeftCorner(n - 1, n - 1) - Mat::Identity(n - 1, n - 1)) <= 1e-12);
}

TEST_CASE("derivative recurrence matches finite differences off the grid") {
  const int n = 8;
  auto b = build_basis(n, 12);
  T3 c = random_tensor(11, n);
  // zero the top mode along axis 0 so the axis-0 derivative stays in band
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = 0; k < n; ++k) c(n - 1, j, k) = 0.0;
  T3 dc = apply_1d_recurrences(Recurrence::derivative, c, 0, *b);

  // pointwise evaluation helper at arbitrary (x, node j, node k)
  auto eval = [&](const T3& t, double x, int j, int k) {
    Vec tx(1);
    tx[0] = x;
    Mat hv = hermstokes::detail::hermite_values(n, tx);
    double s = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b2 = 0; b2 < n; ++b2)
        for (int c2 = 0; c2 < n; ++c2)
          s += t(a, b2, c2) * hv(a, 0) * b->values(b2, static_cast<Eigen::Index>(0) + j) *
               b->values(c2, k);
    return s;
  };
  const double h = 1e-5;
  for (double x : {-0.7, 0.3, 1.1}) {
    const double fd = (eval(c, x + h, 2, 3) - eval(c, x - h, 2, 3)) / (2 * h);
    const double an = eval(dc, x, 2, 3);
    REQUIRE(std::abs(fd - an) <= 1e-6 * (1.0 + std::abs(an)));
  }
}

TEST_CASE("synthesize/analyze roundtrip is the identity on coefficients") {
  auto b = build_basis(8, 12);
  T3 c = random_tensor(3, 8);
  T3 back = hermite_analyze(hermite_synthesize(c, *b), *b);
  REQUIRE((back.data - c.data).norm() <= 1e-10 * c.data.norm());
}

TEST_CASE("Parseval: coefficient norm equals quadrature norm of the synthesis") {
  auto b = build_basis(8, 12);
  T3 c = random_tensor(5, 8);
  T3 g = hermite_synthesize(c, *b);
  double q = 0.0;
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j)
      for (int k = 0; k < 12; ++k)
        q += b->dweights[i] * b->dweights[j] * b->dweights[k] * g(i, j, k) * g(i, j, k);
  REQUIRE(std::abs(std::sqrt(q) - c.data.norm()) <= 1e-8 * c.data.norm());
}

TEST_CASE("mode-space transform phases: fourth power is the identity, isometric") {
  const int n = 6;
  T3 c = random_tensor(7, n);
  CT3 f1 = fourier_diagonal(c);
  REQUIRE(std::abs(f1.data.norm() - c.data.norm()) <= 1e-14 * c.data.norm());
  CT3 f4 = fourier_diagonal(fourier_diagonal(fourier_diagonal(f1)));
  REQUIRE((f4.data - to_complex(c).data).norm() <= 1e-14 * c.data.norm());
  CT3 inv = fourier_diagonal(f1, -1);
  REQUIRE((inv.data - to_complex(c).data).norm() <= 1e-14 * c.data.norm());
}

TEST_CASE("transform phases agree with the integral-kernel quadrature oracle") {
  // 1D oracle: F[m,n] = (2π)^{-1/2} Σ_{p,q} W_p W_q h_m(x_p) e^{i x_p y_q} h_n(y_q)
  const int n = 8, big = 48;
  auto b = build_basis(n, big);
  CMat kern(big, big);
  for (int p = 0; p < big; ++p)
    for (int q = 0; q < big; ++q)
      kern(p, q) = std::exp(cplx(0.0, b->nodes[p] * b->nodes[q]));
  const CMat an = b->analysis_m.cast<cplx>();
  CMat f = (1.0 / std::sqrt(2.0 * std::numbers::pi)) * (an * (kern * an.transpose()));
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k) {
      static const cplx tab[4] = {cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)};
      const cplx expect = m == k ? tab[m % 4] : cplx(0, 0);
      REQUIRE(std::abs(f(m, k) - expect) <= 1e-12);
    }
}

TEST_CASE("dilated basis keeps exact Gram identity and scaled spectrum") {
  auto b = build_basis(6, 9, 2.0);
  REQUIRE(max_abs(gram(*b) - Mat::Identity(6, 6)) <= 1e-12);
  for (int n = 0; n < 6; ++n) REQUIRE(b->eigs_1d[n] == 4.0 * (n + 0.5));
  // values are √λ h_n(λ x) at the physical nodes
  Vec t = 2.0 * b->nodes;
  Mat ref = hermstokes::detail::hermite_values(6, t);
  REQUIRE(max_abs(b->values - std::sqrt(2.0) * ref) <= 1e-13);
}

TEST_CASE("basis construction rejects invalid shapes") {
  REQUIRE_THROWS_AS(build_basis(0, 4), validation_error);
  REQUIRE_THROWS_AS(build_basis(8, 7), validation_error);
  REQUIRE_THROWS_AS(build_basis(4, 6, 0.0), validation_error);
}

TEST_CASE("basis identity token distinguishes tables") {
  auto a = build_basis(8, 12);
  auto b = build_basis(8, 12);
  auto c = build_basis(8, 13);
  REQUIRE(a->id == b->id);
  REQUIRE(a->id != c->id);
}

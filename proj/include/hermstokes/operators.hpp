#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <utility>

#include "hermstokes/field.hpp"
#include "hermstokes/linalg.hpp"

namespace hermstokes {

/**
 * @brief Wave-grid machinery: Leray projection and k-space multipliers.
 *
 * The mode-space Fourier transform is a phase diagonal, so k-space values of
 * a field live on a second, square quadrature grid (n_modes nodes). On that
 * grid the projection I − k̂k̂ᵀ is exact pointwise algebra: the synthesis
 * matrix is square and invertible, making the composite projector exactly
 * idempotent and symmetric.
 *
 * Requires dilation 1: the oscillator diagonal and the k↔x symmetry used
 * here are specific to the unscaled basis.
 */
class Projector {
 public:
  explicit Projector(std::shared_ptr<const BasisTable> basis) : basis_(std::move(basis)) {
    const BasisTable& b = *basis_;
    if (b.dilation != 1.0)
      throw validation_error("Projector: requires an unscaled basis (dilation 1)");
    const int n = b.n_modes;
    auto [kx, kw] = detail::gauss_hermite(n);
    knodes_ = kx;
    kdweights_ = kw.array() * (kx.array().square()).exp();
    kvalues_ = detail::hermite_values(n, knodes_);
    ksynth_ = kvalues_.transpose();
    kanalysis_ = kvalues_ * kdweights_.asDiagonal();

    phase_ = CT3::cube(n);
    conj_phase_ = CT3::cube(n);
    static const cplx table[4] = {cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)};
    osc_ = T3::cube(n);
    for (int a = 0; a < n; ++a)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          const int tot = (a + c + d) % 4;
          phase_(a, c, d) = table[tot];
          conj_phase_(a, c, d) = table[(4 - tot) % 4];
          osc_(a, c, d) = a + c + d + 1.5;
        }

    for (auto& t : Pi_) t = T3::cube(n);
    wave_k2_ = T3::cube(n);
    for (int a = 0; a < n; ++a)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          const double k1 = knodes_[a], k2 = knodes_[c], k3 = knodes_[d];
          const double kk = k1 * k1 + k2 * k2 + k3 * k3;
          wave_k2_(a, c, d) = kk;
          if (kk == 0.0) continue;  // zero node maps by the zero matrix
          const double kv[3] = {k1, k2, k3};
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
              Pi_[3 * i + j](a, c, d) = (i == j ? 1.0 : 0.0) - kv[i] * kv[j] / kk;
        }

    const Vec& x = b.nodes;
    k2_dealiased_ = T3::cube(b.n_quad);
    for (int a = 0; a < b.n_quad; ++a)
      for (int c = 0; c < b.n_quad; ++c)
        for (int d = 0; d < b.n_quad; ++d)
          k2_dealiased_(a, c, d) = x[a] * x[a] + x[c] * x[c] + x[d] * x[d];
  }

  const BasisTable& basis() const { return *basis_; }
  std::shared_ptr<const BasisTable> basis_ptr() const { return basis_; }
  const Vec& wave_nodes() const { return knodes_; }
  const Vec& wave_dweights() const { return kdweights_; }
  const Mat& wave_values() const { return kvalues_; }
  const T3& wave_k2() const { return wave_k2_; }
  const T3& k2_dealiased() const { return k2_dealiased_; }
  const CT3& phases() const { return phase_; }

  CT3 wave_synth(const CT3& c) const { return detail::separable(c, ksynth_); }
  CT3 wave_analyze(const CT3& g) const { return detail::separable(g, kanalysis_); }

  /** @brief Pointwise I − k̂k̂ᵀ on k-space components (complex coefficients). */
  void project_kspace(std::array<CT3, 3>& comp) const {
    std::array<CT3, 3> grid;
    for (int c = 0; c < 3; ++c) grid[c] = wave_synth(comp[c]);
    for (int i = 0; i < 3; ++i) {
      CT3 acc = cwise_mul(Pi_[3 * i + 0], grid[0]);
      acc.data += cwise_mul(Pi_[3 * i + 1], grid[1]).data;
      acc.data += cwise_mul(Pi_[3 * i + 2], grid[2]).data;
      comp[i] = wave_analyze(acc);
    }
  }

  /** @brief Orthogonal projection onto the discrete divergence-free subspace. */
  SpectralField leray_project(const SpectralField& u) const {
    require_same_basis(u, *basis_, "leray_project");
    std::array<CT3, 3> ch;
    for (int c = 0; c < 3; ++c) ch[c] = cwise_mul(u.component(c), phase_);
    project_kspace(ch);
    SpectralField out = SpectralField::zero(basis_);
    for (int c = 0; c < 3; ++c)
      out.set_component(c, to_real_checked(cwise_mul(ch[c], conj_phase_)));
    out.div_free = true;
    return assert_finite(out, "leray_project");
  }

  /** @brief −Δ via the |k|² multiplier on the dealiased grid (exact Galerkin). */
  SpectralField minus_laplace(const SpectralField& u) const {
    require_same_basis(u, *basis_, "minus_laplace");
    SpectralField out = SpectralField::zero(basis_);
    for (int c = 0; c < 3; ++c) {
      CT3 ch = cwise_mul(u.component(c), phase_);
      CT3 gh = hermite_synthesize(ch, *basis_);
      CT3 back = hermite_analyze(cwise_mul(k2_dealiased_, gh), *basis_);
      out.set_component(c, to_real_checked(cwise_mul(back, conj_phase_)));
    }
    return assert_finite(out, "minus_laplace");
  }

  /** @brief Stokes operator A = ℙ(−Δ) on divergence-free fields. */
  SpectralField apply_A(const SpectralField& u) const {
    if (!u.div_free) require_div_free(u, "apply_A");
    return leray_project(minus_laplace(u));
  }

  /** @brief Oscillator diagonal (n1+n2+n3+3/2) without projection. */
  SpectralField oscillator_scale(const SpectralField& u) const {
    require_same_basis(u, *basis_, "oscillator_scale");
    SpectralField out = SpectralField::zero(basis_);
    for (int c = 0; c < 3; ++c) out.set_component(c, cwise_mul(osc_, u.component(c)));
    return out;
  }

  /** @brief B = ℙ∘½(−Δ+|x|²): oscillator diagonal followed by projection. */
  SpectralField apply_B(const SpectralField& u) const {
    if (!u.div_free) require_div_free(u, "apply_B");
    return leray_project(oscillator_scale(u));
  }

  /**
   * @brief Apply a scalar k-space multiplier sampled on the wave grid
   * (collocation; exact when the symbol times the field stays in band).
   */
  SpectralField wave_multiplier(const SpectralField& u, const T3& sym) const {
    require_same_basis(u, *basis_, "wave_multiplier");
    SpectralField out = SpectralField::zero(basis_);
    for (int c = 0; c < 3; ++c) {
      CT3 ch = cwise_mul(u.component(c), phase_);
      CT3 gh = wave_synth(ch);
      CT3 back = wave_analyze(cwise_mul(sym, gh));
      out.set_component(c, to_real_checked(cwise_mul(back, conj_phase_)));
    }
    return assert_finite(out, "wave_multiplier");
  }

  /**
   * @brief 1D physical-space matrix of an even separable k-symbol f(k).
   *
   * The mode-space transform contributes i^{n−m}; even symbols couple only
   * same-parity modes, so the matrix is real with signs (−1)^{(n−m)/2} and the
   * odd-parity entries (pure quadrature noise) are zeroed outright.
   */
  Mat symbol_matrix_1d(const std::function<double(double)>& f) const {
    const int n = basis_->n_modes;
    Vec fx(n);
    for (int j = 0; j < n; ++j) fx[j] = f(knodes_[j]);
    Mat m1 = kanalysis_ * fx.asDiagonal() * ksynth_;
    for (int mm = 0; mm < n; ++mm)
      for (int nn = 0; nn < n; ++nn) {
        const int d = nn - mm;
        if (d % 2 != 0)
          m1(mm, nn) = 0.0;
        else if (((d % 4) + 4) % 4 == 2)
          m1(mm, nn) = -m1(mm, nn);
      }
    return m1;
  }

 private:
  std::shared_ptr<const BasisTable> basis_;
  Vec knodes_, kdweights_;
  Mat kvalues_, ksynth_, kanalysis_;
  CT3 phase_, conj_phase_;
  T3 osc_;
  std::array<T3, 9> Pi_;
  T3 wave_k2_;
  T3 k2_dealiased_;
};

// ------------------------------------------------------------- nonlinear term

/**
 * @brief C(u,v) = ℙ(u·∇)v: derivative recurrences, pointwise product on the
 * dealiased grid, analysis, projection. Pass project=false for the raw
 * advection term (used by identity cross-checks).
 */
inline SpectralField nonlinear_C(const Projector& proj, const SpectralField& u,
                                 const SpectralField& v, bool project = true) {
  const BasisTable& b = proj.basis();
  require_same_basis(u, b, "nonlinear_C");
  require_same_basis(v, b, "nonlinear_C");
  std::array<T3, 3> ugrid;
  for (int j = 0; j < 3; ++j) ugrid[j] = hermite_synthesize(u.component(j), b);
  SpectralField out = SpectralField::zero(proj.basis_ptr());
  for (int i = 0; i < 3; ++i) {
    const T3 vi = v.component(i);
    T3 acc(b.n_quad, b.n_quad, b.n_quad);
    for (int j = 0; j < 3; ++j) {
      T3 dv = apply_1d_recurrences(Recurrence::derivative, vi, j, b);
      acc.data += cwise_mul(ugrid[j], hermite_synthesize(dv, b)).data;
    }
    out.set_component(i, hermite_analyze(acc, b));
  }
  assert_finite(out, "nonlinear_C");
  return project ? proj.leray_project(out) : out;
}

// ------------------------------------------------------------------- sampling

/** @brief random_field overload honoring the divergence_free flag. */
inline SpectralField random_field(std::uint64_t seed, const RandomFieldSpec& spec,
                                  const Projector& proj) {
  RandomFieldSpec raw = spec;
  raw.divergence_free = false;
  SpectralField f = random_field(seed, raw, proj.basis_ptr());
  if (!spec.divergence_free) return f;
  SpectralField p = proj.leray_project(f);
  if (!check_div_free(p))
    throw invariant_error("random_field: projected sample failed the divergence check");
  return p;
}

/**
 * @brief Curl of a band-interior random potential: exactly divergence-free
 * (all derivative recurrences stay inside the band, so div∘curl is exact).
 */
inline SpectralField random_solenoidal(std::uint64_t seed,
                                       std::shared_ptr<const BasisTable> basis,
                                       double decay = 8.0, int margin = 1) {
  const int n = basis->n_modes;
  if (margin < 1 || margin >= n)
    throw validation_error("random_solenoidal: margin must be in [1, n_modes)");
  SpectralField psi = random_field(seed, RandomFieldSpec{decay, false}, basis);
  for (int c = 0; c < 3; ++c) {
    T3 t = psi.component(c);
    for (int a = 0; a < n; ++a)
      for (int bb = 0; bb < n; ++bb)
        for (int d = 0; d < n; ++d)
          if (a >= n - margin || bb >= n - margin || d >= n - margin) t(a, bb, d) = 0.0;
    psi.set_component(c, t);
  }
  SpectralField u = curl(psi);
  u.div_free = true;
  return u;
}

// ----------------------------------------------------------------- dense cache

enum class FracOp { A, B, AB };

/**
 * @brief Dense spectral machinery on the divergence-free subspace.
 *
 * P_basis columns form an explicit orthonormal basis of the projector's
 * range, built from transverse pairs at the wave nodes; A_df and B_df are the
 * Galerkin matrices in those coordinates, and fractional powers come from the
 * cached eigendecompositions. Immutable after build; all applies are pure.
 */
struct OperatorCache {
  std::shared_ptr<const BasisTable> basis;
  Projector proj;
  Eigen::Index d_df = 0;
  Mat P;                ///< 3·n_modes³ × d_df, orthonormal columns
  Mat A_df, B_df;       ///< Galerkin matrices of A and B in P coordinates
  EigDecomp eig_A, eig_B;
  EigDecomp eig_AB_sym;  ///< of A^{1/2} B_df A^{1/2} (similar to A_df·B_df)
  Mat sqrtA, inv_sqrtA;
  double lambda1_B = 0.0;  ///< smallest B_df eigenvalue
  double muN_A = 0.0;      ///< smallest A_df eigenvalue (truncation-dependent)
};

namespace detail {

/**
 * @brief Explicit orthonormal real basis of the projector range.
 *
 * Wave nodes come in exact ± mirror pairs; for each pair take the canonical
 * representative k (positive first nonzero component), two unit tangents
 * t₁ ⟂ t₂ ⟂ k, and the normalized nodal function δ-column in k-space. The
 * real and imaginary parts of phase-adjusted tangent columns give 2×2 real
 * orthonormal columns per pair — d_df total, spanning exactly range(ℙ).
 */
inline Mat df_basis(const Projector& proj) {
  const int n = proj.basis().n_modes;
  const Vec& k1d = proj.wave_nodes();
  const Vec& w1d = proj.wave_dweights();
  const Mat& kv = proj.wave_values();
  const CT3& phase = proj.phases();
  const Eigen::Index n3 = static_cast<Eigen::Index>(n) * n * n;

  std::vector<Vec> cols;
  cols.reserve(2 * static_cast<std::size_t>(n3));
  std::vector<char> visited(static_cast<std::size_t>(n3), 0);
  auto flat = [n](int a, int b, int c) {
    return (static_cast<Eigen::Index>(a) * n + b) * n + c;
  };

  const double rt2 = std::sqrt(2.0);
  for (int j1 = 0; j1 < n; ++j1)
    for (int j2 = 0; j2 < n; ++j2)
      for (int j3 = 0; j3 < n; ++j3) {
        if (visited[flat(j1, j2, j3)]) continue;
        visited[flat(j1, j2, j3)] = 1;
        Eigen::Vector3d kvec(k1d[j1], k1d[j2], k1d[j3]);
        if (kvec.isZero(0.0)) continue;  // zero node carries no range
        const int m1 = n - 1 - j1, m2 = n - 1 - j2, m3 = n - 1 - j3;
        visited[flat(m1, m2, m3)] = 1;
        const bool selfpair = (m1 == j1 && m2 == j2 && m3 == j3);

        Eigen::Vector3d rep = kvec;
        for (int i = 0; i < 3; ++i) {
          if (rep[i] == 0.0) continue;
          if (rep[i] < 0.0) rep = -rep;
          break;
        }
        int ax = 0;
        for (int i = 1; i < 3; ++i)
          if (std::abs(rep[i]) < std::abs(rep[ax])) ax = i;
        Eigen::Vector3d e = Eigen::Vector3d::Zero();
        e[ax] = 1.0;
        Eigen::Vector3d t1 = rep.cross(e);
        t1.normalize();
        Eigen::Vector3d t2 = rep.normalized().cross(t1);

        const Vec f1 = std::sqrt(w1d[j1]) * kv.col(j1);
        const Vec f2 = std::sqrt(w1d[j2]) * kv.col(j2);
        const Vec f3 = std::sqrt(w1d[j3]) * kv.col(j3);
        CT3 base = CT3::cube(n);
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
              base(a, b, c) = std::conj(phase(a, b, c)) * (f1[a] * f2[b] * f3[c]);

        for (const Eigen::Vector3d& t : {t1, t2}) {
          Vec re(3 * n3), im(3 * n3);
          for (int i = 0; i < 3; ++i) {
            re.segment(i * n3, n3) = t[i] * base.data.real();
            im.segment(i * n3, n3) = t[i] * base.data.imag();
          }
          if (selfpair) {
            cols.push_back(re);
          } else {
            cols.push_back(rt2 * re);
            cols.push_back(rt2 * im);
          }
        }
      }

  Mat P(3 * n3, static_cast<Eigen::Index>(cols.size()));
  for (Eigen::Index c = 0; c < P.cols(); ++c) P.col(c) = cols[static_cast<std::size_t>(c)];
  return P;
}

inline void require_symmetric(const Mat& m, const char* name) {
  const double asym = (m - m.transpose()).norm();
  if (asym > 1e-10 * (m.norm() + 1e-300))
    throw invariant_error(std::string(name) + ": symmetry invariant violated");
}

}  // namespace detail

/** @brief Assemble the dense divergence-free-subspace cache (eager, one-time). */
inline OperatorCache build_cache(std::shared_ptr<const BasisTable> basis) {
  if (basis->n_modes < 2)
    throw validation_error("build_cache: n_modes must be at least 2");
  OperatorCache cache{basis, Projector(basis), 0, {}, {}, {},
                      {},    {},               {}, {}, {}, 0.0, 0.0};
  const int n = basis->n_modes;
  const Eigen::Index n3 = static_cast<Eigen::Index>(n) * n * n;

  cache.P = detail::df_basis(cache.proj);
  cache.d_df = cache.P.cols();

  // Galerkin −Δ: exact 1D matrix D1ᵀD1 (outflow row retained), kron-summed.
  const Mat d1 = recurrence_matrix_rect(Recurrence::derivative, n, basis->dilation);
  const Mat L1 = d1.transpose() * d1;
  Mat LP(3 * n3, cache.d_df);
  for (Eigen::Index col = 0; col < cache.d_df; ++col) {
    for (int i = 0; i < 3; ++i) {
      T3 t = T3::cube(n);
      t.data = cache.P.col(col).segment(i * n3, n3);
      Vec acc = apply_axis(t, L1, 0).data;
      acc += apply_axis(t, L1, 1).data;
      acc += apply_axis(t, L1, 2).data;
      LP.col(col).segment(i * n3, n3) = acc;
    }
  }
  cache.A_df.noalias() = cache.P.transpose() * LP;
  LP.resize(0, 0);

  Vec lamvec(3 * n3);
  {
    Eigen::Index idx = 0;
    for (int i = 0; i < 3; ++i)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c, ++idx) lamvec[idx] = a + b + c + 1.5;
  }
  cache.B_df.noalias() = cache.P.transpose() * (lamvec.asDiagonal() * cache.P);

  // exact symmetrization kills rounding asymmetry before the eigensolves
  detail::require_symmetric(cache.A_df, "A_df");
  detail::require_symmetric(cache.B_df, "B_df");
  cache.A_df = 0.5 * (cache.A_df + cache.A_df.transpose()).eval();
  cache.B_df = 0.5 * (cache.B_df + cache.B_df.transpose()).eval();

  cache.eig_A = eigh(cache.A_df);
  cache.eig_B = eigh(cache.B_df);
  if (cache.eig_A.values[0] <= 0.0 || cache.eig_B.values[0] <= 0.0)
    throw invariant_error("build_cache: A_df/B_df must be positive definite");
  cache.muN_A = cache.eig_A.values[0];
  cache.lambda1_B = cache.eig_B.values[0];

  cache.sqrtA = spectral_apply(cache.eig_A, [](double x) { return std::sqrt(x); });
  cache.inv_sqrtA = spectral_apply(cache.eig_A, [](double x) { return 1.0 / std::sqrt(x); });
  Mat s = cache.sqrtA * cache.B_df * cache.sqrtA;
  s = 0.5 * (s + s.transpose()).eval();
  cache.eig_AB_sym = eigh(s);
  if (cache.eig_AB_sym.values[0] <= 0.0)
    throw invariant_error("build_cache: symmetrized AB must be positive definite");
  return cache;
}

/** @brief Coordinates of (the divergence-free part of) u in the P basis. */
inline Vec to_df(const OperatorCache& cache, const SpectralField& u) {
  require_same_basis(u, *cache.basis, "to_df");
  return cache.P.transpose() * u.coeffs;
}

inline SpectralField from_df(const OperatorCache& cache, const Vec& y) {
  if (y.size() != cache.d_df) throw validation_error("from_df: coordinate size mismatch");
  SpectralField u = SpectralField::zero(cache.basis);
  u.coeffs.noalias() = cache.P * y;
  u.div_free = true;
  return assert_finite(u, "from_df");
}

namespace detail {
inline Vec frac_coords(const OperatorCache& cache, FracOp op, double s, const Vec& y) {
  auto spec_pow = [s](const EigDecomp& e, const Vec& v) -> Vec {
    Vec z = e.vectors.transpose() * v;
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] *= std::pow(e.values[i], s);
    return e.vectors * z;
  };
  switch (op) {
    case FracOp::A:
      return spec_pow(cache.eig_A, y);
    case FracOp::B:
      return spec_pow(cache.eig_B, y);
    case FracOp::AB:
      // AB = A^{1/2}(A^{1/2}BA^{1/2})A^{−1/2}: powers through the similarity
      return cache.sqrtA * spec_pow(cache.eig_AB_sym, cache.inv_sqrtA * y);
  }
  throw validation_error("apply_frac: unknown operator");
}
}  // namespace detail

/**
 * @brief Fractional powers A^s, B^s, (AB)^s on divergence-free fields.
 *
 * (AB)^s is defined through the similarity to the symmetrized product, the
 * unique definition consistent with its positive real spectrum.
 */
inline SpectralField apply_frac(FracOp op, double s, const SpectralField& u,
                                const OperatorCache& cache) {
  if (!u.div_free) require_div_free(u, "apply_frac");
  if (!std::isfinite(s)) throw validation_error("apply_frac: exponent must be finite");
  return from_df(cache, detail::frac_coords(cache, op, s, to_df(cache, u)));
}

/** @brief V-norm ‖A^{1/2}u‖ via the dense cache (u divergence-free). */
inline double norm_V(const SpectralField& u, const OperatorCache& cache) {
  if (!u.div_free) require_div_free(u, "norm_V");
  return (cache.sqrtA * to_df(cache, u)).norm();
}

inline double norm_Au(const SpectralField& u, const OperatorCache& cache) {
  if (!u.div_free) require_div_free(u, "norm_Au");
  return (cache.A_df * to_df(cache, u)).norm();
}

/** @brief Quadrature-only V-norm √⟨Au,u⟩ (no dense cache needed). */
inline double norm_V_quadrature(const Projector& proj, const SpectralField& u) {
  const double q = inner_H(proj.apply_A(u), u);
  return std::sqrt(std::max(q, 0.0));
}

inline double norm_Au_quadrature(const Projector& proj, const SpectralField& u) {
  return norm_H(proj.apply_A(u));
}

/**
 * @brief The truncation constant a: ‖(AB)^{−(1+δ)}‖ = a^{−(1+δ)}, computed as
 * the operator 2-norm (largest singular value) of the dense matrix.
 */
inline double constant_a(const OperatorCache& cache, double delta) {
  if (!(delta > -1.0)) throw validation_error("constant_a: requires delta > -1");
  const double expo = -(1.0 + delta);
  Mat m = cache.sqrtA *
          spectral_apply(cache.eig_AB_sym, [expo](double x) { return std::pow(x, expo); }) *
          cache.inv_sqrtA;
  const double sigma = op_norm_2(m);
  return std::pow(sigma, -1.0 / (1.0 + delta));
}

}  // namespace hermstokes

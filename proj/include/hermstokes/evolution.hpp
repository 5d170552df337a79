#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "hermstokes/container.hpp"
#include "hermstokes/dissipativity.hpp"

namespace hermstokes {

enum class Scheme { strang_heat_rk2, imex_euler };

enum class U0Kind { random_in_ball, from_checkpoint };

/**
 * @brief Initial-data recipe: a seeded random divergence-free direction scaled
 * so ‖Au₀‖ = ball_fraction·(u₊/2), or a state loaded from a checkpoint file.
 */
struct U0Spec {
  U0Kind kind = U0Kind::random_in_ball;
  std::uint64_t seed = 1;
  double ball_fraction = 0.5;
  std::string checkpoint_path;
};

struct SimConfig {
  int n_modes = 8;
  int n_quad = 0;  ///< 0 → default_n_quad(n_modes)
  double nu = 1.0;
  double epsilon = 0.25;
  ForceModel force;
  U0Spec u0;
  double dt = 1e-3;
  double t_end = 0.1;
  int checkpoint_every = 0;  ///< in steps; 0 → no checkpoints
  int diagnostics_every = 1;
  Scheme scheme = Scheme::strang_heat_rk2;
  bool disable_nonlinearity = false;  ///< diagnostic: drop C(u,u) from the step
};

struct DiagnosticsRow {
  double t = 0.0;
  double norm_H = 0.0;
  double norm_V = 0.0;
  double norm_Au = 0.0;
  double div_residual = 0.0;
  double energy_flux = 0.0;  ///< ⟨𝒜(t)u, u⟩
  bool in_ball = false;      ///< ‖Au‖ ≤ u₊/2
};

/** @brief Run outcome; blow-up is a result, not an exception — the last valid
 * state and its time are carried here. */
struct EvolveResult {
  SpectralField final_state;
  double final_time = 0.0;
  int final_step = 0;
  std::vector<DiagnosticsRow> diagnostics;
  std::vector<Checkpoint> checkpoints;
  bool blew_up = false;
  double stiffness_number = 0.0;  ///< dt·ν·max|k|² on the quadrature grid
  double initial_norm_H = 0.0;
};

/**
 * @brief One-step integrator with per-run precomputed heat symbols and forcing
 * direction. strang_heat_rk2: exact k-grid diffusion half step, explicit Heun
 * step of −C(u,u)+ℙf(t), diffusion half step, final projection. imex_euler:
 * explicit Euler on −C(u,u)+ℙf(t) composed with the k-grid resolvent
 * (1+νdt|k|²)^{−1}, then projection.
 */
class Stepper {
 public:
  Stepper(const SimConfig& config, const OperatorCache& cache)
      : proj_(cache.proj),
        scheme_(config.scheme),
        dt_(config.dt),
        nu_(config.nu),
        nonlinear_(!config.disable_nonlinearity),
        force_(config.force),
        fdir_(force_direction(config.force, cache.proj)) {
    const T3& k2 = proj_.wave_k2();
    half_heat_ = k2;
    half_heat_.data = (-0.5 * nu_ * dt_ * k2.data.array()).exp().matrix();
    resolvent_ = k2;
    resolvent_.data = (1.0 + nu_ * dt_ * k2.data.array()).inverse().matrix();
  }

  SpectralField step(const SpectralField& u, double t) const {
    if (scheme_ == Scheme::strang_heat_rk2) {
      SpectralField u1 = proj_.wave_multiplier(u, half_heat_);
      SpectralField k1 = advective_rhs(u1, t);
      SpectralField k2 = advective_rhs(u1 + dt_ * k1, t + dt_);
      SpectralField u2 = u1 + (0.5 * dt_) * (k1 + k2);
      return proj_.leray_project(proj_.wave_multiplier(u2, half_heat_));
    }
    SpectralField pred = u + dt_ * advective_rhs(u, t);
    return proj_.leray_project(proj_.wave_multiplier(pred, resolvent_));
  }

  /** @brief −C(u,u) + ℙf(t) (C dropped when the diagnostic flag is set). */
  SpectralField advective_rhs(const SpectralField& u, double t) const {
    SpectralField out = force_scale(force_, t) * fdir_;
    if (nonlinear_) out = out - nonlinear_C(proj_, u, u);
    return out;
  }

  const SpectralField& force_dir() const { return fdir_; }

 private:
  const Projector& proj_;
  Scheme scheme_;
  double dt_;
  double nu_;
  bool nonlinear_;
  ForceModel force_;
  SpectralField fdir_;
  T3 half_heat_;
  T3 resolvent_;
};

namespace detail {

inline void validate_sim_config(const SimConfig& config, const ThresholdParams& params,
                                const OperatorCache& cache) {
  if (config.n_modes != cache.basis->n_modes)
    throw validation_error("evolve: config n_modes does not match the cache");
  if (config.n_quad != 0 && config.n_quad != cache.basis->n_quad)
    throw validation_error("evolve: config n_quad does not match the cache");
  if (!(config.dt > 0.0)) throw validation_error("evolve: dt must be positive");
  if (!(config.t_end >= config.dt))
    throw validation_error("evolve: t_end must be at least one step");
  if (!(config.nu > 0.0)) throw validation_error("evolve: nu must be positive");
  if (std::abs(config.nu - params.nu) > 1e-12 * std::abs(params.nu))
    throw validation_error("evolve: config nu disagrees with threshold parameters");
  if (config.diagnostics_every < 1)
    throw validation_error("evolve: diagnostics_every must be >= 1");
  if (config.checkpoint_every < 0)
    throw validation_error("evolve: checkpoint_every must be >= 0");
}

inline SpectralField initial_state(const SimConfig& config, const ThresholdParams& params,
                                   const OperatorCache& cache, int& start_step) {
  start_step = 0;
  if (config.u0.kind == U0Kind::from_checkpoint) {
    Checkpoint ck = load_checkpoint(config.u0.checkpoint_path, cache.basis);
    if (std::abs(ck.t - ck.step * config.dt) > 1e-9 * std::max(1.0, std::abs(ck.t)))
      throw validation_error("evolve: checkpoint time is not on this run's step grid");
    start_step = ck.step;
    if (!ck.state.div_free) ck.state = cache.proj.leray_project(ck.state);
    return ck.state;
  }
  if (!(config.u0.ball_fraction >= 0.0 && config.u0.ball_fraction <= 1.0))
    throw validation_error("evolve: u0 ball_fraction must lie in [0,1]");
  if (params.rejected)
    throw validation_error("evolve: no dissipativity ball in the rejected regime");
  if (config.u0.ball_fraction == 0.0) {
    SpectralField z = SpectralField::zero(cache.basis);
    z.div_free = true;
    return z;
  }
  SpectralField dir = unit_direction(cache, config.u0.seed);
  const double target = config.u0.ball_fraction * 0.5 * params.u_plus;
  return (target / norm_Au(dir, cache)) * dir;
}

}  // namespace detail

/** @brief One diagnostics row at state u, time t. */
inline DiagnosticsRow diagnose(const SpectralField& u, double t, const Stepper& stepper,
                               const SimConfig& config, const ThresholdParams& params,
                               const OperatorCache& cache) {
  DiagnosticsRow row;
  row.t = t;
  row.norm_H = norm_H(u);
  row.norm_V = norm_V(u, cache);
  SpectralField au = cache.proj.apply_A(u);
  row.norm_Au = norm_H(au);
  row.div_residual = div_residual(u);
  SpectralField rhs = stepper.advective_rhs(u, t) - config.nu * au;
  row.energy_flux = inner_H(rhs, u);
  row.in_ball = row.norm_Au <= 0.5 * params.u_plus;
  return row;
}

/**
 * @brief Advance the projected system from the configured initial data to
 * t_end on the uniform grid t = step·dt, emitting diagnostics and in-memory
 * checkpoints at their configured step cadences. Terminates early when the
 * H-norm exceeds 10³× its initial value or stops being finite. A non-null
 * u0_override replaces the configured initial-data recipe.
 */
inline EvolveResult evolve(const SimConfig& config, const ThresholdParams& params,
                           const OperatorCache& cache,
                           const SpectralField* u0_override = nullptr) {
  detail::validate_sim_config(config, params, cache);
  Stepper stepper(config, cache);

  int start_step = 0;
  SpectralField u = u0_override
                        ? *u0_override
                        : detail::initial_state(config, params, cache, start_step);
  if (!u.div_free) {
    require_div_free(u, "evolve");
    u.div_free = true;
  }

  EvolveResult result;
  result.initial_norm_H = norm_H(u);
  result.stiffness_number = config.dt * config.nu * cache.proj.wave_k2().data.maxCoeff();
  const double blow_threshold = result.initial_norm_H > 0.0
                                    ? 1e3 * result.initial_norm_H
                                    : std::numeric_limits<double>::infinity();

  const int total_steps =
      static_cast<int>(std::ceil(config.t_end / config.dt - 1e-9));
  if (start_step > total_steps)
    throw validation_error("evolve: checkpoint is already past t_end");

  auto emit = [&](int step, double t) {
    if (step % config.diagnostics_every == 0 || step == total_steps)
      result.diagnostics.push_back(diagnose(u, t, stepper, config, params, cache));
    if (config.checkpoint_every > 0 && step > start_step &&
        (step % config.checkpoint_every == 0 || step == total_steps))
      result.checkpoints.push_back({u, step, t});
  };

  emit(start_step, start_step * config.dt);
  result.final_state = u;
  result.final_time = start_step * config.dt;
  result.final_step = start_step;

  for (int step = start_step + 1; step <= total_steps; ++step) {
    const double t_prev = (step - 1) * config.dt;
    SpectralField next;
    try {
      next = stepper.step(u, t_prev);
    } catch (const invariant_error&) {
      // non-finite intermediates: numerical blow-up inside the step
      result.blew_up = true;
      return result;
    }
    const double n = norm_H(next);
    if (!std::isfinite(n) || n > blow_threshold) {
      result.blew_up = true;
      return result;
    }
    u = next;
    result.final_state = u;
    result.final_time = step * config.dt;
    result.final_step = step;
    emit(step, result.final_time);
  }
  return result;
}

// ------------------------------------------------------------------ verdicts

struct RegularityVerdict {
  bool stayed_in_ball = false;
  double max_norm_V = 0.0;
  double min_decay_rate = 0.0;  ///< min of −Δlog‖u‖_H/Δt over diagnostics rows
  bool blew_up = false;
  bool out_of_regime = false;
  bool asserts_no_blowup = false;  ///< in-ball γ<1 runs that completed cleanly
};

inline RegularityVerdict detect_regularity(const EvolveResult& result,
                                           const ThresholdParams& params) {
  RegularityVerdict v;
  v.blew_up = result.blew_up;
  v.out_of_regime = params.rejected || params.gamma >= 1.0;
  v.stayed_in_ball = !result.diagnostics.empty();
  double min_rate = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < result.diagnostics.size(); ++i) {
    const DiagnosticsRow& row = result.diagnostics[i];
    v.stayed_in_ball = v.stayed_in_ball && row.in_ball;
    v.max_norm_V = std::max(v.max_norm_V, row.norm_V);
    if (i > 0) {
      const DiagnosticsRow& prev = result.diagnostics[i - 1];
      if (prev.norm_H > 0.0 && row.norm_H > 0.0 && row.t > prev.t)
        min_rate = std::min(
            min_rate, (std::log(prev.norm_H) - std::log(row.norm_H)) / (row.t - prev.t));
    }
  }
  v.min_decay_rate = std::isfinite(min_rate) ? min_rate : 0.0;
  v.asserts_no_blowup = !v.out_of_regime && v.stayed_in_ball && !v.blew_up;
  return v;
}

// ---------------------------------------------------------------- CSV output

/** @brief Diagnostics CSV with full binary64 round-trip precision. */
inline std::string format_diagnostics_csv(const std::vector<DiagnosticsRow>& rows) {
  std::string out = "t,norm_H,norm_V,norm_Au,div_residual,energy_flux,in_ball\n";
  char buf[256];
  for (const DiagnosticsRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", r.t,
                  r.norm_H, r.norm_V, r.norm_Au, r.div_residual, r.energy_flux,
                  r.in_ball ? 1 : 0);
    out += buf;
  }
  return out;
}

inline void write_diagnostics_csv(const std::string& path,
                                  const std::vector<DiagnosticsRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("write_diagnostics_csv: cannot open '" + path + "'");
  out << format_diagnostics_csv(rows);
  if (!out) throw io_error("write_diagnostics_csv: short write to '" + path + "'");
}

}  // namespace hermstokes

#include "cspd/solver.hpp"

#include <algorithm>
#include <chrono>
#include <string>

#include "cspd/prox.hpp"

namespace cspd {

namespace {

void check_size(const Vec& v, Index expected, const char* channel, std::int64_t t) {
  if (v.size() != expected) {
    throw NumericError(std::string("oracle channel ") + channel + " returned size " +
                           std::to_string(v.size()) + ", expected " + std::to_string(expected),
                       t);
  }
}

void check_size(const Mat& m, Index rows, Index cols, const char* channel, std::int64_t t) {
  if (m.cols() != cols || (cols > 0 && m.rows() != rows)) {
    throw NumericError(std::string("oracle channel ") + channel + " returned " +
                           std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                           ", expected " + std::to_string(rows) + "x" + std::to_string(cols),
                       t);
  }
}

void validate_config(const ProblemInstance& problem, const RunConfig& config,
                     const InitialPoint& init) {
  problem.validate();
  if (config.n_iters < 1) throw ConfigError("run: n_iters must be >= 1");
  std::int64_t prev = 0;
  for (auto c : config.checkpoints) {
    if (c <= prev || c > config.n_iters) {
      throw ConfigError("run: checkpoints must be strictly increasing within [1, n_iters]");
    }
    prev = c;
  }
  const Dims& d = problem.dims;
  if (init.x0.size() != d.d_x || init.y0.size() != d.d_y || init.gamma0.size() != d.m1 ||
      init.lambda0.size() != d.m2) {
    throw ConfigError("run: initial point dimensions do not match the problem");
  }
  if ((init.gamma0.array() < 0.0).any() || (init.lambda0.array() < 0.0).any()) {
    throw ConfigError("run: initial multipliers must be nonnegative");
  }
}

enum class Variant { Basic, Adaptive };

RunTrace run_loop(const ProblemInstance& problem, const RunConfig& config, Variant variant) {
  const InitialPoint init = config.initial_point ? *config.initial_point
                                                 : default_initial_point(problem);
  validate_config(problem, config, init);
  const Dims& d = problem.dims;
  const SamplingOracle& oracle = *problem.oracle;

  IterateState state = IterateState::start(init.x0, init.y0, init.gamma0, init.lambda0);
  RunTrace trace;
  trace.records.reserve(config.checkpoints.size());
  auto next_cp = config.checkpoints.begin();

  Vec h_val, g_val, gx, gy;
  Mat h_jac, g_jac;
  Vec comb_x(d.d_x), comb_y(d.d_y);
  const auto t_start = std::chrono::steady_clock::now();

  for (std::int64_t t = 0; t < config.n_iters; ++t) {
    const StepSizes s = config.schedule.at(t);
    auto stream = [&](QuerySlot slot) {
      return Rng::stream(config.seed, config.run_id, static_cast<std::uint64_t>(t), slot);
    };

    Rng r_h = stream(QuerySlot::kHValue);
    oracle.sample_h_value(state.x, r_h, h_val);
    check_size(h_val, d.m1, "h_value", t);
    Rng r_g = stream(QuerySlot::kGValue);
    oracle.sample_g_value(state.y, r_g, g_val);
    check_size(g_val, d.m2, "g_value", t);

    Vec gamma_next, lambda_next;
    if (variant == Variant::Basic) {
      gamma_next = dual_prox_basic(state.gamma, h_val, s.beta);
      lambda_next = dual_prox_basic(state.lambda, g_val, s.alpha);
    } else {
      gamma_next = dual_prox_adaptive(state.gamma, init.gamma0, h_val, s.beta, s.tau);
      lambda_next = dual_prox_adaptive(state.lambda, init.lambda0, g_val, s.alpha, s.nu);
    }

    Rng r_gx = stream(QuerySlot::kGradX);
    oracle.sample_grad_x(state.x, state.y, r_gx, gx);
    check_size(gx, d.d_x, "grad_x", t);
    Rng r_hj = stream(QuerySlot::kHJacobian);
    oracle.sample_h_jacobian(state.x, r_hj, h_jac);
    check_size(h_jac, d.d_x, d.m1, "h_jacobian", t);
    comb_x = gx;
    if (d.m1 > 0) comb_x.noalias() += h_jac * gamma_next;

    Rng r_gy = stream(QuerySlot::kGradY);
    oracle.sample_grad_y(state.x, state.y, r_gy, gy);
    check_size(gy, d.d_y, "grad_y", t);
    Rng r_gj = stream(QuerySlot::kGJacobian);
    oracle.sample_g_jacobian(state.y, r_gj, g_jac);
    check_size(g_jac, d.d_y, d.m2, "g_jacobian", t);
    comb_y = gy;
    if (d.m2 > 0) comb_y.noalias() -= g_jac * lambda_next;

    Vec x_next, y_next;
    if (variant == Variant::Basic) {
      x_next = primal_prox_basic(state.x, comb_x, s.eta, problem.proj_x);
      y_next = primal_ascent_basic(state.y, comb_y, s.kappa, problem.proj_y);
    } else {
      x_next = primal_prox_adaptive(state.x, init.x0, comb_x, s.eta, s.rho, problem.proj_x);
      y_next = primal_ascent_adaptive(state.y, init.y0, comb_y, s.kappa, s.phi, problem.proj_y);
    }

    if (!x_next.allFinite() || !y_next.allFinite() || !gamma_next.allFinite() ||
        !lambda_next.allFinite()) {
      throw NumericError("non-finite iterate at iteration " + std::to_string(t), t);
    }

    state.x = std::move(x_next);
    state.y = std::move(y_next);
    state.gamma = std::move(gamma_next);
    state.lambda = std::move(lambda_next);
    update_running_average(state, state.x, state.y);
    const double gn2 = state.gamma.squaredNorm();
    const double ln2 = state.lambda.squaredNorm();
    state.max_gamma_norm = std::max(state.max_gamma_norm, std::sqrt(gn2));
    state.max_lambda_norm = std::max(state.max_lambda_norm, std::sqrt(ln2));
    state.max_dual_sq = std::max(state.max_dual_sq, gn2 + ln2);

    if (config.on_step) config.on_step(state);

    if (next_cp != config.checkpoints.end() && *next_cp == state.t) {
      CheckpointRecord rec;
      rec.t = state.t;
      rec.x_bar = state.x_mean();
      rec.y_bar = state.y_mean();
      rec.gamma_norm_max = state.max_gamma_norm;
      rec.lambda_norm_max = state.max_lambda_norm;
      rec.dual_sq_max = state.max_dual_sq;
      rec.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t_start)
                        .count();
      trace.records.push_back(std::move(rec));
      ++next_cp;
    }
  }
  trace.final_state = std::move(state);
  return trace;
}

}  // namespace

InitialPoint default_initial_point(const ProblemInstance& problem) {
  const Dims& d = problem.dims;
  return InitialPoint{project(problem.proj_x, Vec::Zero(d.d_x)),
                      project(problem.proj_y, Vec::Zero(d.d_y)), Vec::Zero(d.m1),
                      Vec::Zero(d.m2)};
}

RunTrace run_basic_cspd(const ProblemInstance& problem, const RunConfig& config) {
  const auto& sch = config.schedule;
  if (sch.kind == ScheduleKind::AdaptiveOpen) {
    throw ConfigError("run_basic_cspd: needs a fixed-horizon or constant schedule");
  }
  if (sch.kind == ScheduleKind::BasicFixed && sch.horizon != config.n_iters) {
    throw ConfigError("run_basic_cspd: schedule horizon must equal n_iters");
  }
  return run_loop(problem, config, Variant::Basic);
}

RunTrace run_adp_cspd(const ProblemInstance& problem, const RunConfig& config) {
  if (config.schedule.kind == ScheduleKind::BasicFixed) {
    throw ConfigError("run_adp_cspd: needs an adaptive or constant schedule");
  }
  if (config.initial_point && (config.initial_point->gamma0.any() ||
                               config.initial_point->lambda0.any())) {
    throw ConfigError("run_adp_cspd: initial multipliers must be zero");
  }
  return run_loop(problem, config, Variant::Adaptive);
}

}  // namespace cspd

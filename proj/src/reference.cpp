#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "cspd/metrics.hpp"
#include "cspd/prox.hpp"

namespace cspd {

namespace {

struct Point {
  Vec x, y, gamma, lambda;
};

// Extragradient on the Lagrangian operator. Blocks not marked free are held
// fixed (best-response solves freeze the opposing player).
class SaddleSolver {
 public:
  SaddleSolver(const ProblemInstance& problem, bool free_x, bool free_y)
      : p_(problem), ex_(problem.require_exact()), free_x_(free_x), free_y_(free_y) {}

  struct Result {
    Point z;
    std::int64_t iterations = 0;
    double residual = 0.0;
  };

  Result solve(Point z, const ReferenceConfig& cfg) {
    project_point(z);
    Point v = field(z);
    Point z_half, v_half, trial;
    double step = 1.0;
    std::deque<double> history;

    for (std::int64_t it = 0;; ++it) {
      const double res = natural_residual(z, v);
      if (it % 1000 == 0) {
        history.push_back(res);
        if (history.size() > 64) history.pop_front();
      }
      if (res <= cfg.target_tol / 10.0 && certified(z, cfg.target_tol)) {
        return Result{std::move(z), it, res};
      }
      if (it >= cfg.max_iters) {
        throw ReferenceFailure("reference solver did not converge within " +
                                   std::to_string(cfg.max_iters) + " iterations (residual " +
                                   std::to_string(res) + ")",
                               std::vector<double>(history.begin(), history.end()));
      }

      for (int bt = 0;; ++bt) {
        z_half = z;
        axpy(z_half, -step, v);
        project_point(z_half);
        v_half = field(z_half);
        const double move = dist(z_half, z);
        const double dv = dist(v_half, v);
        if (step * dv <= 0.9 * move || move == 0.0 || bt > 200) break;
        step *= 0.5;
      }
      trial = z;
      axpy(trial, -step, v_half);
      project_point(trial);
      z = std::move(trial);
      v = field(z);
      step = std::min(step * 1.2, 1e6);
    }
  }

  // Feasibility and complementary slackness at z, for the free blocks.
  bool certified(const Point& z, double tol) const {
    if (free_x_ && p_.dims.m1 > 0) {
      ex_.h_value(z.x, h_);
      if (positive_part(h_).norm() > tol) return false;
      if (std::abs(z.gamma.dot(h_)) > tol * (1.0 + z.gamma.norm())) return false;
    }
    if (free_y_ && p_.dims.m2 > 0) {
      ex_.g_value(z.y, g_);
      if (positive_part(g_).norm() > tol) return false;
      if (std::abs(z.lambda.dot(g_)) > tol * (1.0 + z.lambda.norm())) return false;
    }
    return true;
  }

 private:
  Point field(const Point& z) const {
    Point v;
    if (free_x_) {
      ex_.grad_x(z.x, z.y, v.x);
      if (p_.dims.m1 > 0) {
        ex_.h_jacobian(z.x, jh_);
        v.x.noalias() += jh_ * z.gamma;
        ex_.h_value(z.x, v.gamma);
        v.gamma = -v.gamma;
      } else {
        v.gamma.resize(0);
      }
    }
    if (free_y_) {
      ex_.grad_y(z.x, z.y, v.y);
      v.y = -v.y;
      if (p_.dims.m2 > 0) {
        ex_.g_jacobian(z.y, jg_);
        v.y.noalias() += jg_ * z.lambda;
        ex_.g_value(z.y, v.lambda);
        v.lambda = -v.lambda;
      } else {
        v.lambda.resize(0);
      }
    }
    return v;
  }

  void project_point(Point& z) const {
    if (free_x_) {
      project_inplace(p_.proj_x, z.x);
      z.gamma = z.gamma.cwiseMax(0.0);
    }
    if (free_y_) {
      project_inplace(p_.proj_y, z.y);
      z.lambda = z.lambda.cwiseMax(0.0);
    }
  }

  void axpy(Point& z, double a, const Point& v) const {
    if (free_x_) {
      z.x += a * v.x;
      z.gamma += a * v.gamma;
    }
    if (free_y_) {
      z.y += a * v.y;
      z.lambda += a * v.lambda;
    }
  }

  double dist(const Point& a, const Point& b) const {
    double acc = 0.0;
    if (free_x_) acc += (a.x - b.x).squaredNorm() + (a.gamma - b.gamma).squaredNorm();
    if (free_y_) acc += (a.y - b.y).squaredNorm() + (a.lambda - b.lambda).squaredNorm();
    return std::sqrt(acc);
  }

  double natural_residual(const Point& z, const Point& v) const {
    Point w = z;
    axpy(w, -1.0, v);
    project_point(w);
    return dist(w, z);
  }

  const ProblemInstance& p_;
  const ExactOracle& ex_;
  bool free_x_, free_y_;
  mutable Mat jh_, jg_;
  mutable Vec h_, g_;
};

Point start_point(const ProblemInstance& problem, const std::optional<InitialPoint>& init) {
  const InitialPoint ip = init ? *init : default_initial_point(problem);
  return Point{ip.x0, ip.y0, ip.gamma0, ip.lambda0};
}

}  // namespace

ReferenceSolution solve_reference(const ProblemInstance& problem, const ReferenceConfig& config,
                                  const std::optional<InitialPoint>& warm_start) {
  problem.validate();
  const ExactOracle& ex = problem.require_exact();
  if (!(config.target_tol > 0.0)) throw ConfigError("reference: target_tol must be positive");

  SaddleSolver solver(problem, true, true);
  auto result = solver.solve(start_point(problem, warm_start), config);
  Point& z = result.z;

  // Clamp multipliers of inactive constraints.
  const double clamp = 10.0 * config.target_tol;
  if (problem.dims.m1 > 0) {
    Vec h;
    ex.h_value(z.x, h);
    for (Index j = 0; j < h.size(); ++j) {
      if (h[j] < 0.0 && z.gamma[j] < clamp) z.gamma[j] = 0.0;
    }
  }
  if (problem.dims.m2 > 0) {
    Vec g;
    ex.g_value(z.y, g);
    for (Index j = 0; j < g.size(); ++j) {
      if (g[j] < 0.0 && z.lambda[j] < clamp) z.lambda[j] = 0.0;
    }
  }

  ReferenceSolution ref;
  ref.f_star = ex.objective(z.x, z.y);
  ref.x_star = std::move(z.x);
  ref.y_star = std::move(z.y);
  ref.gamma_star = std::move(z.gamma);
  ref.lambda_star = std::move(z.lambda);
  ref.tolerance = config.target_tol;
  ref.iterations = result.iterations;
  return ref;
}

Vec best_response_x(const Vec& y, const ProblemInstance& problem, const ReferenceConfig& config) {
  const ExactOracle& ex = problem.require_exact();
  if (auto closed = ex.best_response_x(y)) return *closed;
  Point z = start_point(problem, std::nullopt);
  z.y = y;
  SaddleSolver solver(problem, true, false);
  return solver.solve(std::move(z), config).z.x;
}

Vec best_response_y(const Vec& x, const ProblemInstance& problem, const ReferenceConfig& config) {
  const ExactOracle& ex = problem.require_exact();
  if (auto closed = ex.best_response_y(x)) return *closed;
  Point z = start_point(problem, std::nullopt);
  z.x = x;
  SaddleSolver solver(problem, false, true);
  return solver.solve(std::move(z), config).z.y;
}

std::optional<double> duality_gap(const Vec& x_bar, const Vec& y_bar,
                                  const ProblemInstance& problem, const ReferenceConfig& config) {
  const ExactOracle& ex = problem.require_exact();
  const bool x_ok = is_bounded(problem.proj_x) || ex.strongly_convex_x();
  const bool y_ok = is_bounded(problem.proj_y) || ex.strongly_concave_y();
  if (!x_ok || !y_ok) return std::nullopt;
  const Vec y_resp = best_response_y(x_bar, problem, config);
  const Vec x_resp = best_response_x(y_bar, problem, config);
  return ex.objective(x_bar, y_resp) - ex.objective(x_resp, y_bar);
}

}  // namespace cspd

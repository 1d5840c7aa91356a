#include "cspd/core.hpp"

#include <cmath>
#include <string>

namespace cspd {

void Dims::validate() const {
  if (d_x < 1 || d_y < 1) throw ConfigError("dims: d_x and d_y must be >= 1");
  if (m1 < 0 || m2 < 0) throw ConfigError("dims: constraint counts must be >= 0");
}

void ProblemConstants::validate() const {
  for (double c : {c_x, c_y, c_h, c_g, sigma_h, sigma_g}) {
    if (!std::isfinite(c) || c < 0.0) {
      throw ConfigError("problem constants must be finite and nonnegative");
    }
  }
}

void ProblemInstance::validate() const {
  dims.validate();
  constants.validate();
  if (!oracle) throw ConfigError("problem '" + name + "' has no sampling oracle");
  if (auto d = set_dimension(proj_x); d && *d != dims.d_x) {
    throw ConfigError("problem '" + name + "': proj_x dimension does not match d_x");
  }
  if (auto d = set_dimension(proj_y); d && *d != dims.d_y) {
    throw ConfigError("problem '" + name + "': proj_y dimension does not match d_y");
  }
}

const ExactOracle& ProblemInstance::require_exact() const {
  if (!exact) throw ConfigError("problem '" + name + "' has no exact oracle");
  return *exact;
}

IterateState IterateState::start(Vec x0, Vec y0, Vec gamma0, Vec lambda0) {
  IterateState s;
  s.x_sum = Vec::Zero(x0.size());
  s.y_sum = Vec::Zero(y0.size());
  s.x = std::move(x0);
  s.y = std::move(y0);
  s.gamma = std::move(gamma0);
  s.lambda = std::move(lambda0);
  s.max_gamma_norm = s.gamma.norm();
  s.max_lambda_norm = s.lambda.norm();
  s.max_dual_sq = s.gamma.squaredNorm() + s.lambda.squaredNorm();
  return s;
}

Vec IterateState::x_mean() const {
  if (t == 0) return x;
  return x_sum / static_cast<double>(t);
}

Vec IterateState::y_mean() const {
  if (t == 0) return y;
  return y_sum / static_cast<double>(t);
}

double euclidean_norm(const Vec& v) { return v.norm(); }

Vec positive_part(const Vec& v) { return v.cwiseMax(0.0); }

void update_running_average(IterateState& state, const Vec& x_new, const Vec& y_new) {
  if (x_new.size() != state.x_sum.size() || y_new.size() != state.y_sum.size()) {
    throw ConfigError("update_running_average: dimension mismatch");
  }
  state.x_sum += x_new;
  state.y_sum += y_new;
  ++state.t;
}

bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace cspd

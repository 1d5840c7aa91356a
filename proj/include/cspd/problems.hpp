#pragma once

#include <cstdint>
#include <memory>

#include "cspd/core.hpp"

namespace cspd {

enum class ThetaMode { Interior, Boundary };

double theta_factor(ThetaMode mode);

/// Quadratic-constrained quadratic saddle:
///   min_x max_{||y|| <= 1} E[(x - x~0)'Q(x - x~0) + x'w] + x'y
///   s.t. E[((x - x~_j)'s_j + xi_j)^2] - theta_j <= 0,  j = 1..m
/// with w ~ U[0,1]^d, xi_j ~ N(0,1).
struct QcqpSaddleSpec {
  Index d = 10;
  Index m = 5;
  std::uint64_t seed = 1;
  ThetaMode theta_mode = ThetaMode::Boundary;
};

/// Instance data, exposed for tests and reports.
struct QcqpData {
  Mat q;        // d x d, L L' + I
  Vec x_tilde0;
  Mat x_tilde;  // d x m, column j is x~_j
  Mat s;        // d x m, column j is s_j
  Vec theta;    // m
  Vec theta_hat;
  Vec x_hat;    // minimizer with the constraints dropped
  double c_y = 1.0;
};

/// Robust pricing. x = theta = (theta_0, theta_1..theta_d) is the adversary's
/// demand parameter in a box, y = p is the live price in [p_min, p_max]:
///   min_theta max_p  p (s'theta_{1:d} + theta_0 p)
///   s.t. d_i - s_i'theta_{1:d} - theta_0 p_i <= 0 in expectation (noise N(0,1)).
struct PricingSpec {
  Index d = 20;
  Index m = 500;
  std::uint64_t seed = 1;
  double price_min = 0.0;
  double price_max = 30.0;
};

struct PricingData {
  Vec lower, upper;    // box on theta, index 0 is the price slope
  Vec theta_tilde;     // calibration parameter drawn from the box
  Vec feature;         // s, the priced product
  Mat hist_features;   // d x m
  Vec hist_prices;     // m
  Vec hist_slack;      // m, the U[0,5] offsets
  Vec hist_demand;     // m, lower bounds d_i
  double price_min = 0.0;
  double price_max = 30.0;
};

struct QcqpInstance {
  ProblemInstance problem;
  std::shared_ptr<const QcqpData> data;
};

struct PricingInstance {
  ProblemInstance problem;
  std::shared_ptr<const PricingData> data;
};

QcqpInstance generate_qcqp(const QcqpSaddleSpec& opts);

PricingInstance generate_pricing(const PricingSpec& opts);

/// f(x, y) = x'Ay with A = [[1,-1],[-1,1]] on [0,1]^2 x [0,1]^2, one budget
/// constraint per side: E[c'x + xi] <= b with c = (1,2), b = 1.4.
/// Gradients and constraint values carry N(0, 0.5^2) noise.
ProblemInstance generate_zero_sum_toy();

/// Noise parameters of the zero-sum toy.
inline constexpr double kToyNoise = 0.5;
inline constexpr double kToyBudget = 1.4;

/// f(x, y) = x * y on [-1,1] x [-1,1], no constraints, deterministic oracle.
ProblemInstance generate_bilinear_toy();

}  // namespace cspd

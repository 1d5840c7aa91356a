#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "cspd/prox.hpp"
#include "cspd/rng.hpp"
#include "cspd/types.hpp"

namespace cspd {

struct Dims {
  Index d_x = 1;
  Index d_y = 1;
  Index m1 = 0;  // constraints on x
  Index m2 = 0;  // constraints on y

  void validate() const;
};

/// Gradient and constraint bounds from the standing assumptions.
struct ProblemConstants {
  double c_x = 1.0;
  double c_y = 1.0;
  double c_h = 1.0;
  double c_g = 1.0;
  double sigma_h = 0.0;
  double sigma_g = 0.0;

  void validate() const;
};

/// Stochastic first/zeroth-order oracle. Outputs are resized by the callee
/// only when their size differs, so a caller reusing buffers stays
/// allocation-free. Every call consumes only the stream it is handed.
class SamplingOracle {
 public:
  virtual ~SamplingOracle() = default;

  virtual void sample_grad_x(const Vec& x, const Vec& y, Rng& rng, Vec& out) const = 0;
  virtual void sample_grad_y(const Vec& x, const Vec& y, Rng& rng, Vec& out) const = 0;
  virtual void sample_h_value(const Vec& x, Rng& rng, Vec& out) const = 0;
  /// d_x × m1, column j is the sampled gradient of constraint j.
  virtual void sample_h_jacobian(const Vec& x, Rng& rng, Mat& out) const = 0;
  virtual void sample_g_value(const Vec& y, Rng& rng, Vec& out) const = 0;
  virtual void sample_g_jacobian(const Vec& y, Rng& rng, Mat& out) const = 0;
};

/// Closed-form expectations F, H, G and their (sub)gradients.
class ExactOracle {
 public:
  virtual ~ExactOracle() = default;

  virtual double objective(const Vec& x, const Vec& y) const = 0;
  virtual void grad_x(const Vec& x, const Vec& y, Vec& out) const = 0;
  virtual void grad_y(const Vec& x, const Vec& y, Vec& out) const = 0;
  virtual void h_value(const Vec& x, Vec& out) const = 0;
  virtual void h_jacobian(const Vec& x, Mat& out) const = 0;
  virtual void g_value(const Vec& y, Vec& out) const = 0;
  virtual void g_jacobian(const Vec& y, Mat& out) const = 0;

  /// Closed-form argmax over {y in Y : G(y) <= 0} of F(x, .), when known.
  virtual std::optional<Vec> best_response_y(const Vec& /*x*/) const { return std::nullopt; }
  /// Closed-form argmin over {x in X : H(x) <= 0} of F(., y), when known.
  virtual std::optional<Vec> best_response_x(const Vec& /*y*/) const { return std::nullopt; }

  /// F(., y) strongly convex for every y; makes the x best response well posed
  /// on an unbounded X.
  virtual bool strongly_convex_x() const { return false; }
  virtual bool strongly_concave_y() const { return false; }
};

/// Immutable once built; share freely across threads.
struct ProblemInstance {
  std::string name;
  Dims dims;
  ProblemConstants constants;
  std::shared_ptr<const SamplingOracle> oracle;
  std::shared_ptr<const ExactOracle> exact;
  ProjectionOp proj_x = FullSpace{};
  ProjectionOp proj_y = FullSpace{};

  void validate() const;
  const ExactOracle& require_exact() const;
};

/// Primal-dual point plus the running statistics a run keeps.
struct IterateState {
  Vec x, y, gamma, lambda;
  Vec x_sum, y_sum;
  std::int64_t t = 0;
  double max_gamma_norm = 0.0;
  double max_lambda_norm = 0.0;
  /// max over steps of ||gamma_t||^2 + ||lambda_t||^2
  double max_dual_sq = 0.0;

  static IterateState start(Vec x0, Vec y0, Vec gamma0, Vec lambda0);

  Vec x_mean() const;
  Vec y_mean() const;
};

struct ReferenceSolution {
  Vec x_star, y_star, gamma_star, lambda_star;
  double f_star = 0.0;
  double tolerance = 0.0;
  std::int64_t iterations = 0;
};

double euclidean_norm(const Vec& v);

Vec positive_part(const Vec& v);

/// Adds (x_new, y_new) to the running sums and advances t.
void update_running_average(IterateState& state, const Vec& x_new, const Vec& y_new);

/// True when every entry is finite.
bool all_finite(const Vec& v);

}  // namespace cspd

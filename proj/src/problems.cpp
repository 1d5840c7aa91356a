#include "cspd/problems.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "cspd/prox.hpp"

namespace cspd {

namespace {

// Stream keys for generator randomness, kept apart from solver streams.
constexpr std::uint64_t kGenDataRun = 0xD47A;
constexpr std::uint64_t kGenConstantsRun = 0xC025;

Rng generator_stream(std::uint64_t seed, std::uint64_t run) { return Rng::stream(seed, run, 0, 0); }

// ---------------------------------------------------------------------------
// Quadratic saddle

class QcqpOracle final : public SamplingOracle, public ExactOracle {
 public:
  explicit QcqpOracle(std::shared_ptr<const QcqpData> data) : data_(std::move(data)) {}

  void sample_grad_x(const Vec& x, const Vec& y, Rng& rng, Vec& out) const override {
    out.resize(x.size());
    out.noalias() = 2.0 * (data_->q * (x - data_->x_tilde0));
    for (Index i = 0; i < out.size(); ++i) out[i] += rng.uniform() + y[i];
  }
  void sample_grad_y(const Vec& x, const Vec&, Rng&, Vec& out) const override { out = x; }
  void sample_h_value(const Vec& x, Rng& rng, Vec& out) const override {
    const Index m = data_->theta.size();
    out.resize(m);
    for (Index j = 0; j < m; ++j) {
      const double r = residual(x, j) + rng.normal();
      out[j] = r * r - data_->theta[j];
    }
  }
  void sample_h_jacobian(const Vec& x, Rng& rng, Mat& out) const override {
    const Index m = data_->theta.size();
    out.resize(x.size(), m);
    for (Index j = 0; j < m; ++j) {
      const double r = residual(x, j) + rng.normal();
      out.col(j) = (2.0 * r) * data_->s.col(j);
    }
  }
  void sample_g_value(const Vec&, Rng&, Vec& out) const override { out.resize(0); }
  void sample_g_jacobian(const Vec& y, Rng&, Mat& out) const override { out.resize(y.size(), 0); }

  double objective(const Vec& x, const Vec& y) const override {
    const Vec dx = x - data_->x_tilde0;
    return dx.dot(data_->q * dx) + 0.5 * x.sum() + x.dot(y);
  }
  void grad_x(const Vec& x, const Vec& y, Vec& out) const override {
    out = 2.0 * (data_->q * (x - data_->x_tilde0));
    out.array() += 0.5;
    out += y;
  }
  void grad_y(const Vec& x, const Vec&, Vec& out) const override { out = x; }
  void h_value(const Vec& x, Vec& out) const override {
    const Index m = data_->theta.size();
    out.resize(m);
    for (Index j = 0; j < m; ++j) {
      const double r = residual(x, j);
      out[j] = r * r + 1.0 - data_->theta[j];
    }
  }
  void h_jacobian(const Vec& x, Mat& out) const override {
    const Index m = data_->theta.size();
    out.resize(x.size(), m);
    for (Index j = 0; j < m; ++j) out.col(j) = (2.0 * residual(x, j)) * data_->s.col(j);
  }
  void g_value(const Vec&, Vec& out) const override { out.resize(0); }
  void g_jacobian(const Vec& y, Mat& out) const override { out.resize(y.size(), 0); }

  // Support point of the unit ball (y_0 = 0, M = I).
  std::optional<Vec> best_response_y(const Vec& x) const override {
    const double n = x.norm();
    if (n == 0.0) return Vec::Zero(x.size());
    return Vec((data_->c_y / n) * x);
  }
  bool strongly_convex_x() const override { return true; }

 private:
  double residual(const Vec& x, Index j) const {
    return (x - data_->x_tilde.col(j)).dot(data_->s.col(j));
  }

  std::shared_ptr<const QcqpData> data_;
};

// argmin (x - x0)'Q(x - x0) + 0.5 * sum(x) + c_y * ||x|| by proximal gradient.
Vec qcqp_unconstrained_minimizer(const Mat& q, const Vec& x_tilde0, double c_y) {
  Eigen::SelfAdjointEigenSolver<Mat> es(q, Eigen::EigenvaluesOnly);
  const double lip = 2.0 * es.eigenvalues().maxCoeff();
  const double step = 1.0 / lip;
  Vec x = x_tilde0;
  for (int it = 0; it < 1000000; ++it) {
    Vec z = x - step * (2.0 * (q * (x - x_tilde0)) + Vec::Constant(x.size(), 0.5));
    const double nz = z.norm();
    const double shrink = nz > step * c_y ? 1.0 - step * c_y / nz : 0.0;
    z *= shrink;
    const double change = (z - x).norm();
    x = std::move(z);
    if (change <= 1e-15 * (1.0 + x.norm())) break;
  }
  return x;
}

ProblemConstants qcqp_constants(const QcqpData& data, std::uint64_t seed) {
  const Index d = data.x_hat.size();
  const Index m = data.theta.size();
  ProblemConstants c;
  c.c_x = std::sqrt(static_cast<double>(d) / 12.0);  // Var of U[0,1]^d noise
  c.c_y = 0.0;
  c.c_h = 0.0;
  for (Index j = 0; j < m; ++j) {
    c.c_h = std::max(c.c_h, 2.0 * ((data.x_hat - data.x_tilde.col(j)).norm() + 3.0) *
                                data.s.col(j).norm());
  }
  // Jacobian noise second moment: sum_j 4 ||s_j||^2.
  c.c_h = std::max(c.c_h, 2.0 * data.s.norm());
  c.c_g = 0.0;
  c.sigma_g = 0.0;
  c.sigma_h = 0.0;

  const double radius = 3.0 * std::max(1.0, data.x_hat.norm());
  Rng rng = generator_stream(seed, kGenConstantsRun);
  Vec x(d), y(d);
  for (int draw = 0; draw < 10000; ++draw) {
    for (Index i = 0; i < d; ++i) x[i] = data.x_hat[i] + rng.uniform(-radius, radius);
    for (Index i = 0; i < d; ++i) y[i] = rng.normal();
    y *= rng.uniform() / std::max(y.norm(), 1e-300);
    Vec gx = 2.0 * (data.q * (x - data.x_tilde0));
    gx.array() += 0.5;
    gx += y;
    c.c_x = std::max(c.c_x, gx.norm());
    c.c_y = std::max(c.c_y, x.norm());
    double var_h = 0.0;
    for (Index j = 0; j < m; ++j) {
      const double a = (x - data.x_tilde.col(j)).dot(data.s.col(j));
      var_h += 4.0 * a * a + 2.0;  // Var((a + xi)^2) for xi ~ N(0,1)
    }
    c.sigma_h = std::max(c.sigma_h, std::sqrt(var_h));
  }
  if (m == 0) c.c_h = 0.0;
  return c;
}

// ---------------------------------------------------------------------------
// Pricing

class PricingOracle final : public SamplingOracle, public ExactOracle {
 public:
  explicit PricingOracle(std::shared_ptr<const PricingData> data) : data_(std::move(data)) {}

  void sample_grad_x(const Vec& x, const Vec& y, Rng&, Vec& out) const override {
    grad_x(x, y, out);
  }
  void sample_grad_y(const Vec& x, const Vec& y, Rng& rng, Vec& out) const override {
    grad_y(x, y, out);
    out[0] += rng.normal();
  }
  void sample_h_value(const Vec& x, Rng& rng, Vec& out) const override {
    h_value(x, out);
    for (Index i = 0; i < out.size(); ++i) out[i] -= rng.normal();
  }
  void sample_h_jacobian(const Vec& x, Rng&, Mat& out) const override { h_jacobian(x, out); }
  void sample_g_value(const Vec&, Rng&, Vec& out) const override { out.resize(0); }
  void sample_g_jacobian(const Vec& y, Rng&, Mat& out) const override { out.resize(y.size(), 0); }

  double objective(const Vec& x, const Vec& y) const override {
    const double p = y[0];
    return p * (demand_slope_part(x) + x[0] * p);
  }
  void grad_x(const Vec& x, const Vec& y, Vec& out) const override {
    const double p = y[0];
    out.resize(x.size());
    out[0] = p * p;
    out.tail(x.size() - 1) = p * data_->feature;
  }
  void grad_y(const Vec& x, const Vec& y, Vec& out) const override {
    out.resize(1);
    out[0] = demand_slope_part(x) + 2.0 * x[0] * y[0];
  }
  void h_value(const Vec& x, Vec& out) const override {
    const Index d = x.size() - 1;
    out.resize(data_->hist_demand.size());
    out.noalias() = data_->hist_demand - data_->hist_features.transpose() * x.tail(d);
    out -= x[0] * data_->hist_prices;
  }
  void h_jacobian(const Vec& x, Mat& out) const override {
    const Index d = x.size() - 1;
    out.resize(x.size(), data_->hist_demand.size());
    out.row(0) = -data_->hist_prices.transpose();
    out.bottomRows(d) = -data_->hist_features;
  }
  void g_value(const Vec&, Vec& out) const override { out.resize(0); }
  void g_jacobian(const Vec& y, Mat& out) const override { out.resize(y.size(), 0); }

  bool strongly_concave_y() const override { return true; }

 private:
  double demand_slope_part(const Vec& x) const {
    return data_->feature.dot(x.tail(x.size() - 1));
  }

  std::shared_ptr<const PricingData> data_;
};

ProblemConstants pricing_constants(const PricingData& data) {
  const Index m = data.hist_demand.size();
  ProblemConstants c;
  const double pmax = std::max(std::abs(data.price_min), std::abs(data.price_max));
  c.c_x = pmax * std::sqrt(pmax * pmax + data.feature.squaredNorm());
  // |dF/dp| over the box, plus unit demand noise.
  double lo = 0.0, hi = 0.0;
  const Index d = data.feature.size();
  for (Index i = 0; i < d; ++i) {
    lo += data.feature[i] * data.lower[i + 1];
    hi += data.feature[i] * data.upper[i + 1];
  }
  const double slope_extreme = 2.0 * std::max(std::abs(data.lower[0]), std::abs(data.upper[0])) * pmax;
  c.c_y = std::max({std::abs(lo), std::abs(hi)}) + slope_extreme + 1.0;
  c.c_h = m > 0 ? std::sqrt(data.hist_prices.squaredNorm() + data.hist_features.squaredNorm())
                : 0.0;
  c.sigma_h = std::sqrt(static_cast<double>(m));
  c.c_g = 0.0;
  c.sigma_g = 0.0;
  return c;
}

// ---------------------------------------------------------------------------
// Toys

class ZeroSumToyOracle final : public SamplingOracle, public ExactOracle {
 public:
  ZeroSumToyOracle() {
    a_ << 1.0, -1.0, -1.0, 1.0;
    c_ << 1.0, 2.0;
  }

  void sample_grad_x(const Vec& x, const Vec& y, Rng& rng, Vec& out) const override {
    grad_x(x, y, out);
    for (Index i = 0; i < 2; ++i) out[i] += kToyNoise * rng.normal();
  }
  void sample_grad_y(const Vec& x, const Vec& y, Rng& rng, Vec& out) const override {
    grad_y(x, y, out);
    for (Index i = 0; i < 2; ++i) out[i] += kToyNoise * rng.normal();
  }
  void sample_h_value(const Vec& x, Rng& rng, Vec& out) const override {
    h_value(x, out);
    out[0] += kToyNoise * rng.normal();
  }
  void sample_h_jacobian(const Vec& x, Rng&, Mat& out) const override { h_jacobian(x, out); }
  void sample_g_value(const Vec& y, Rng& rng, Vec& out) const override {
    g_value(y, out);
    out[0] += kToyNoise * rng.normal();
  }
  void sample_g_jacobian(const Vec& y, Rng&, Mat& out) const override { g_jacobian(y, out); }

  double objective(const Vec& x, const Vec& y) const override { return x.dot(a_ * y); }
  void grad_x(const Vec&, const Vec& y, Vec& out) const override { out = a_ * y; }
  void grad_y(const Vec& x, const Vec&, Vec& out) const override { out = a_.transpose() * x; }
  void h_value(const Vec& x, Vec& out) const override {
    out.resize(1);
    out[0] = c_.dot(x) - kToyBudget;
  }
  void h_jacobian(const Vec&, Mat& out) const override { out = c_; }
  void g_value(const Vec& y, Vec& out) const override {
    out.resize(1);
    out[0] = c_.dot(y) - kToyBudget;
  }
  void g_jacobian(const Vec&, Mat& out) const override { out = c_; }

 private:
  Mat a_ = Mat(2, 2);
  Vec c_ = Vec(2);
};

class BilinearToyOracle final : public SamplingOracle, public ExactOracle {
 public:
  void sample_grad_x(const Vec& x, const Vec& y, Rng&, Vec& out) const override { grad_x(x, y, out); }
  void sample_grad_y(const Vec& x, const Vec& y, Rng&, Vec& out) const override { grad_y(x, y, out); }
  void sample_h_value(const Vec&, Rng&, Vec& out) const override { out.resize(0); }
  void sample_h_jacobian(const Vec& x, Rng&, Mat& out) const override { out.resize(x.size(), 0); }
  void sample_g_value(const Vec&, Rng&, Vec& out) const override { out.resize(0); }
  void sample_g_jacobian(const Vec& y, Rng&, Mat& out) const override { out.resize(y.size(), 0); }

  double objective(const Vec& x, const Vec& y) const override { return x[0] * y[0]; }
  void grad_x(const Vec&, const Vec& y, Vec& out) const override { out = y; }
  void grad_y(const Vec& x, const Vec&, Vec& out) const override { out = x; }
  void h_value(const Vec&, Vec& out) const override { out.resize(0); }
  void h_jacobian(const Vec& x, Mat& out) const override { out.resize(x.size(), 0); }
  void g_value(const Vec&, Vec& out) const override { out.resize(0); }
  void g_jacobian(const Vec& y, Mat& out) const override { out.resize(y.size(), 0); }
};

}  // namespace

double theta_factor(ThetaMode mode) { return mode == ThetaMode::Interior ? 1.2 : 0.9; }

QcqpInstance generate_qcqp(const QcqpSaddleSpec& opts) {
  if (opts.d < 1 || opts.m < 0) throw ConfigError("qcqp: need d >= 1 and m >= 0");
  const Index d = opts.d;
  const Index m = opts.m;
  auto data = std::make_shared<QcqpData>();
  Rng rng = generator_stream(opts.seed, kGenDataRun);

  data->x_tilde0.resize(d);
  for (Index i = 0; i < d; ++i) data->x_tilde0[i] = rng.normal(0.0, std::sqrt(0.3));
  Mat l(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index k = 0; k < d; ++k) l(i, k) = rng.normal();
  }
  data->q = l * l.transpose() + Mat::Identity(d, d);
  data->q = (0.5 * (data->q + data->q.transpose())).eval();
  data->c_y = 1.0;
  data->x_hat = qcqp_unconstrained_minimizer(data->q, data->x_tilde0, data->c_y);

  // Constraints with factor * theta_hat - 1 < kMinSlabSq are redrawn.
  const double factor = theta_factor(opts.theta_mode);
  constexpr double kMinSlabSq = 0.1;
  data->x_tilde.resize(d, m);
  data->s.resize(d, m);
  data->theta.resize(m);
  data->theta_hat.resize(m);
  for (Index j = 0; j < m; ++j) {
    for (int attempt = 0;; ++attempt) {
      for (Index i = 0; i < d; ++i) data->x_tilde(i, j) = rng.normal();
      for (Index i = 0; i < d; ++i) data->s(i, j) = rng.uniform();
      const double r = (data->x_hat - data->x_tilde.col(j)).dot(data->s.col(j));
      const double theta_hat = r * r + 1.0;
      if (factor * theta_hat - 1.0 >= kMinSlabSq || attempt >= 10000) {
        data->theta_hat[j] = theta_hat;
        data->theta[j] = factor * theta_hat;
        break;
      }
    }
  }

  QcqpInstance inst;
  auto oracle = std::make_shared<QcqpOracle>(data);
  ProblemInstance& p = inst.problem;
  p.name = "qcqp";
  p.dims = Dims{d, d, m, 0};
  p.constants = qcqp_constants(*data, opts.seed);
  p.oracle = oracle;
  p.exact = oracle;
  p.proj_x = FullSpace{};
  p.proj_y = make_ball(Vec::Zero(d), data->c_y);
  inst.data = std::move(data);
  return inst;
}

PricingInstance generate_pricing(const PricingSpec& opts) {
  if (opts.d < 1 || opts.m < 0) throw ConfigError("pricing: need d >= 1 and m >= 0");
  if (!(opts.price_min < opts.price_max)) throw ConfigError("pricing: price_min must be < price_max");
  const Index d = opts.d;
  const Index m = opts.m;
  auto data = std::make_shared<PricingData>();
  Rng rng = generator_stream(opts.seed, kGenDataRun);

  data->lower.resize(d + 1);
  data->upper.resize(d + 1);
  data->lower[0] = -5.0;
  for (Index i = 1; i <= d; ++i) data->lower[i] = rng.uniform(0.0, 2.0);
  for (Index i = 0; i <= d; ++i) data->upper[i] = data->lower[i] + rng.uniform(0.0, 3.0);
  data->theta_tilde.resize(d + 1);
  for (Index i = 0; i <= d; ++i) data->theta_tilde[i] = rng.uniform(data->lower[i], data->upper[i]);
  data->feature.resize(d);
  for (Index i = 0; i < d; ++i) data->feature[i] = rng.uniform(0.0, 3.0);

  // Rows whose demand bound the upper box corner cannot meet are redrawn.
  data->hist_features.resize(d, m);
  data->hist_prices.resize(m);
  data->hist_slack.resize(m);
  data->hist_demand.resize(m);
  const Vec& th = data->theta_tilde;
  for (Index i = 0; i < m; ++i) {
    for (int attempt = 0;; ++attempt) {
      for (Index k = 0; k < d; ++k) data->hist_features(k, i) = rng.uniform(0.0, 3.0);
      const double price = rng.uniform(10.0, 20.0);
      const double slack = rng.uniform(0.0, 5.0);
      const double base = data->hist_features.col(i).dot(th.tail(d)) + th[0] * price;
      const double demand = base + slack;
      const double corner =
          data->hist_features.col(i).dot(data->upper.tail(d)) + data->upper[0] * price;
      if (corner > demand || attempt >= 10000) {
        data->hist_prices[i] = price;
        data->hist_slack[i] = slack;
        data->hist_demand[i] = demand;
        break;
      }
    }
  }
  data->price_min = opts.price_min;
  data->price_max = opts.price_max;

  PricingInstance inst;
  auto oracle = std::make_shared<PricingOracle>(data);
  ProblemInstance& p = inst.problem;
  p.name = "pricing";
  p.dims = Dims{d + 1, 1, m, 0};
  p.constants = pricing_constants(*data);
  p.oracle = oracle;
  p.exact = oracle;
  p.proj_x = make_box(data->lower, data->upper);
  p.proj_y = make_box(Vec::Constant(1, opts.price_min), Vec::Constant(1, opts.price_max));
  inst.data = std::move(data);
  return inst;
}

ProblemInstance generate_zero_sum_toy() {
  auto oracle = std::make_shared<ZeroSumToyOracle>();
  ProblemInstance p;
  p.name = "toy";
  p.dims = Dims{2, 2, 1, 1};
  const double lip = 2.0 * std::sqrt(2.0);  // ||A||_2 * max ||y|| on the box
  p.constants = ProblemConstants{lip, lip, std::sqrt(5.0), std::sqrt(5.0), kToyNoise, kToyNoise};
  p.oracle = oracle;
  p.exact = oracle;
  p.proj_x = make_box(Vec::Zero(2), Vec::Ones(2));
  p.proj_y = make_box(Vec::Zero(2), Vec::Ones(2));
  return p;
}

ProblemInstance generate_bilinear_toy() {
  auto oracle = std::make_shared<BilinearToyOracle>();
  ProblemInstance p;
  p.name = "bilinear";
  p.dims = Dims{1, 1, 0, 0};
  p.constants = ProblemConstants{1.0, 1.0, 1.0, 1.0, 0.0, 0.0};
  p.oracle = oracle;
  p.exact = oracle;
  p.proj_x = make_box(Vec::Constant(1, -1.0), Vec::Constant(1, 1.0));
  p.proj_y = make_box(Vec::Constant(1, -1.0), Vec::Constant(1, 1.0));
  return p;
}

}  // namespace cspd

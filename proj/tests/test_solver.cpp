#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "cspd/problems.hpp"
#include "cspd/solver.hpp"

using namespace cspd;

namespace {

double clip(double v) { return std::clamp(v, -1.0, 1.0); }

InitialPoint bilinear_start(double x0, double y0) {
  return InitialPoint{Vec::Constant(1, x0), Vec::Constant(1, y0), Vec(0), Vec(0)};
}

// f(x, y) = x * y with a zero gradient in every channel.
class ZeroOracle final : public SamplingOracle {
 public:
  void sample_grad_x(const Vec& x, const Vec&, Rng&, Vec& out) const override {
    out = Vec::Zero(x.size());
  }
  void sample_grad_y(const Vec&, const Vec& y, Rng&, Vec& out) const override {
    out = Vec::Zero(y.size());
  }
  void sample_h_value(const Vec&, Rng&, Vec& out) const override { out = Vec::Constant(1, -1.0); }
  void sample_h_jacobian(const Vec& x, Rng&, Mat& out) const override {
    out = Mat::Zero(x.size(), 1);
  }
  void sample_g_value(const Vec&, Rng&, Vec& out) const override { out = Vec::Constant(1, -1.0); }
  void sample_g_jacobian(const Vec& y, Rng&, Mat& out) const override {
    out = Mat::Zero(y.size(), 1);
  }
};

class NanOracle final : public SamplingOracle {
 public:
  explicit NanOracle(std::int64_t from) : from_(from) {}
  void sample_grad_x(const Vec& x, const Vec&, Rng&, Vec& out) const override {
    out = Vec::Zero(x.size());
    if (++calls_ > from_) out[0] = std::nan("");
  }
  void sample_grad_y(const Vec&, const Vec& y, Rng&, Vec& out) const override {
    out = Vec::Zero(y.size());
  }
  void sample_h_value(const Vec&, Rng&, Vec& out) const override { out.resize(0); }
  void sample_h_jacobian(const Vec& x, Rng&, Mat& out) const override { out.resize(x.size(), 0); }
  void sample_g_value(const Vec&, Rng&, Vec& out) const override { out.resize(0); }
  void sample_g_jacobian(const Vec& y, Rng&, Mat& out) const override { out.resize(y.size(), 0); }

 private:
  std::int64_t from_;
  mutable std::int64_t calls_ = 0;
};

class WrongSizeOracle final : public SamplingOracle {
 public:
  void sample_grad_x(const Vec& x, const Vec&, Rng&, Vec& out) const override {
    out = Vec::Zero(x.size() + 1);
  }
  void sample_grad_y(const Vec&, const Vec& y, Rng&, Vec& out) const override {
    out = Vec::Zero(y.size());
  }
  void sample_h_value(const Vec&, Rng&, Vec& out) const override { out.resize(0); }
  void sample_h_jacobian(const Vec& x, Rng&, Mat& out) const override { out.resize(x.size(), 0); }
  void sample_g_value(const Vec&, Rng&, Vec& out) const override { out.resize(0); }
  void sample_g_jacobian(const Vec& y, Rng&, Mat& out) const override { out.resize(y.size(), 0); }
};

ProblemInstance with_oracle(std::shared_ptr<const SamplingOracle> oracle, Index m) {
  ProblemInstance p;
  p.name = "custom";
  p.dims = Dims{2, 2, m, m};
  p.oracle = std::move(oracle);
  p.proj_x = make_box(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0));
  p.proj_y = make_box(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0));
  return p;
}

}  // namespace

TEST_SUITE("solver") {
  TEST_CASE("basic run on the bilinear toy matches a direct recursion") {
    const ProblemInstance p = generate_bilinear_toy();
    const std::int64_t n = 10000;
    RunConfig rc;
    rc.n_iters = n;
    rc.schedule = StepSchedule::basic(n, p.constants, p.dims);
    rc.initial_point = bilinear_start(0.5, 0.5);
    rc.checkpoints = {n};
    const RunTrace tr = run_basic_cspd(p, rc);

    const double step = 4.0 * std::sqrt(static_cast<double>(n));
    double x = 0.5, y = 0.5, sx = 0.0, sy = 0.0;
    for (std::int64_t t = 0; t < n; ++t) {
      const double xn = clip(x - y / step);
      const double yn = clip(y + x / step);
      x = xn;
      y = yn;
      sx += x;
      sy += y;
    }
    REQUIRE(tr.records.size() == 1);
    CHECK(tr.records[0].x_bar[0] == doctest::Approx(sx / n).epsilon(1e-10));
    CHECK(tr.records[0].y_bar[0] == doctest::Approx(sy / n).epsilon(1e-10));
    CHECK(std::hypot(tr.records[0].x_bar[0], tr.records[0].y_bar[0]) <= 0.1);
    CHECK(std::hypot(tr.records[0].x_bar[0], tr.records[0].y_bar[0]) ==
          doctest::Approx(0.00391662).epsilon(1e-5));
  }

  TEST_CASE("adaptive run on the bilinear toy matches a direct recursion") {
    const ProblemInstance p = generate_bilinear_toy();
    const std::int64_t n = 10000;
    RunConfig rc;
    rc.n_iters = n;
    rc.schedule = StepSchedule::adaptive(p.constants, p.dims);
    rc.initial_point = bilinear_start(0.5, 0.5);
    rc.checkpoints = {n};
    const RunTrace tr = run_adp_cspd(p, rc);

    double x = 0.5, y = 0.5, sx = 0.0, sy = 0.0;
    for (std::int64_t t = 0; t < n; ++t) {
      const double eta = 16.0 * std::sqrt(t + 2.0);
      const double rho = 16.0 * std::sqrt(t + 3.0) - eta;
      const double xn = clip((eta * x + rho * 0.5 - y) / (eta + rho));
      const double yn = clip((eta * y + rho * 0.5 + x) / (eta + rho));
      x = xn;
      y = yn;
      sx += x;
      sy += y;
    }
    REQUIRE(tr.records.size() == 1);
    CHECK(tr.records[0].x_bar[0] == doctest::Approx(sx / n).epsilon(1e-8));
    CHECK(tr.records[0].y_bar[0] == doctest::Approx(sy / n).epsilon(1e-8));
    CHECK(std::hypot(tr.records[0].x_bar[0], tr.records[0].y_bar[0]) ==
          doctest::Approx(0.11371541).epsilon(1e-6));
  }

  TEST_CASE("zero gradients and slack constraints leave the start fixed") {
    const ProblemInstance p = with_oracle(std::make_shared<ZeroOracle>(), 1);
    RunConfig rc;
    rc.n_iters = 50;
    rc.schedule = StepSchedule::constant(StepSizes{});
    InitialPoint ip{Vec::Constant(2, 0.3), Vec::Constant(2, -0.2), Vec::Zero(1), Vec::Zero(1)};
    rc.initial_point = ip;
    for (int variant = 0; variant < 2; ++variant) {
      const RunTrace tr = variant == 0 ? run_basic_cspd(p, rc) : run_adp_cspd(p, rc);
      CHECK(tr.final_state.x == ip.x0);
      CHECK(tr.final_state.y == ip.y0);
      CHECK(tr.final_state.gamma[0] == 0.0);
      CHECK(tr.final_state.lambda[0] == 0.0);
      CHECK(tr.final_state.x_mean().isApprox(ip.x0, 1e-15));
    }
  }

  TEST_CASE("iterates stay feasible and duals nonnegative") {
    const ProblemInstance p = generate_zero_sum_toy();
    RunConfig rc;
    rc.n_iters = 2000;
    rc.seed = 9;
    rc.schedule = StepSchedule::adaptive(p.constants, p.dims);
    std::int64_t steps = 0;
    bool ok = true;
    rc.on_step = [&](const IterateState& s) {
      ++steps;
      ok = ok && contains(p.proj_x, s.x) && contains(p.proj_y, s.y) &&
           (s.gamma.array() >= 0.0).all() && (s.lambda.array() >= 0.0).all();
    };
    run_adp_cspd(p, rc);
    CHECK(steps == 2000);
    CHECK(ok);
    rc.schedule = StepSchedule::basic(2000, p.constants, p.dims);
    steps = 0;
    run_basic_cspd(p, rc);
    CHECK(steps == 2000);
    CHECK(ok);
  }

  TEST_CASE("anchored variant with a constant schedule and no anchor weight equals basic") {
    const ProblemInstance p = generate_zero_sum_toy();
    StepSizes s;
    s.eta = 30.0;
    s.kappa = 25.0;
    s.alpha = 40.0;
    s.beta = 45.0;
    RunConfig rc;
    rc.n_iters = 3000;
    rc.seed = 4;
    rc.schedule = StepSchedule::constant(s);
    rc.checkpoints = {1000, 3000};
    const RunTrace a = run_basic_cspd(p, rc);
    const RunTrace b = run_adp_cspd(p, rc);
    REQUIRE(a.records.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(a.records[i].x_bar == b.records[i].x_bar);
      CHECK(a.records[i].y_bar == b.records[i].y_bar);
      CHECK(a.records[i].dual_sq_max == b.records[i].dual_sq_max);
    }
  }

  TEST_CASE("adaptive checkpoints do not depend on the run length") {
    const ProblemInstance p = generate_zero_sum_toy();
    RunConfig longer;
    longer.n_iters = 5000;
    longer.seed = 17;
    longer.schedule = StepSchedule::adaptive(p.constants, p.dims);
    longer.checkpoints = {100, 1000, 5000};
    RunConfig shorter = longer;
    shorter.n_iters = 1000;
    shorter.checkpoints = {1000};
    const RunTrace a = run_adp_cspd(p, longer);
    const RunTrace b = run_adp_cspd(p, shorter);
    CHECK(a.records[1].t == 1000);
    CHECK(a.records[1].x_bar == b.records[0].x_bar);
    CHECK(a.records[1].y_bar == b.records[0].y_bar);
    CHECK(a.records[1].dual_sq_max == b.records[0].dual_sq_max);
  }

  TEST_CASE("runs are deterministic and averages are plain means") {
    const QcqpInstance q = generate_qcqp(QcqpSaddleSpec{4, 2, 3, ThetaMode::Boundary});
    RunConfig rc;
    rc.n_iters = 500;
    rc.seed = 5;
    rc.schedule = StepSchedule::basic(500, q.problem.constants, q.problem.dims);
    rc.checkpoints = {500};
    Vec sx = Vec::Zero(4), sy = Vec::Zero(4);
    rc.on_step = [&](const IterateState& s) {
      sx += s.x;
      sy += s.y;
    };
    const RunTrace a = run_basic_cspd(q.problem, rc);
    rc.on_step = nullptr;
    const RunTrace b = run_basic_cspd(q.problem, rc);
    CHECK(a.records[0].x_bar == b.records[0].x_bar);
    CHECK(a.final_state.gamma == b.final_state.gamma);
    CHECK((a.records[0].x_bar - sx / 500.0).norm() <= 1e-12 * (1.0 + sx.norm()));
    CHECK((a.records[0].y_bar - sy / 500.0).norm() <= 1e-12 * (1.0 + sy.norm()));

    rc.seed = 6;
    const RunTrace c = run_basic_cspd(q.problem, rc);
    CHECK(c.records[0].x_bar != a.records[0].x_bar);
  }

  TEST_CASE("non-finite iterates abort with the iteration index") {
    const ProblemInstance p = with_oracle(std::make_shared<NanOracle>(7), 0);
    RunConfig rc;
    rc.n_iters = 20;
    rc.schedule = StepSchedule::constant(StepSizes{});
    try {
      run_basic_cspd(p, rc);
      FAIL("expected NumericError");
    } catch (const NumericError& e) {
      CHECK(e.iteration() == 7);
    }
  }

  TEST_CASE("oracle size mismatch is reported") {
    const ProblemInstance p = with_oracle(std::make_shared<WrongSizeOracle>(), 0);
    RunConfig rc;
    rc.n_iters = 3;
    rc.schedule = StepSchedule::constant(StepSizes{});
    CHECK_THROWS_AS(run_basic_cspd(p, rc), NumericError);
  }

  TEST_CASE("configuration errors") {
    const ProblemInstance p = generate_zero_sum_toy();
    RunConfig rc;
    rc.n_iters = 100;
    rc.schedule = StepSchedule::basic(50, p.constants, p.dims);
    CHECK_THROWS_AS(run_basic_cspd(p, rc), ConfigError);
    CHECK_THROWS_AS(run_adp_cspd(p, rc), ConfigError);
    rc.schedule = StepSchedule::adaptive(p.constants, p.dims);
    CHECK_THROWS_AS(run_basic_cspd(p, rc), ConfigError);

    InitialPoint ip = default_initial_point(p);
    ip.gamma0[0] = 1.0;
    rc.initial_point = ip;
    CHECK_THROWS_AS(run_adp_cspd(p, rc), ConfigError);

    rc.initial_point.reset();
    rc.checkpoints = {10, 5};
    CHECK_THROWS_AS(run_adp_cspd(p, rc), ConfigError);
    rc.checkpoints = {101};
    CHECK_THROWS_AS(run_adp_cspd(p, rc), ConfigError);
    rc.checkpoints = {};
    rc.n_iters = 0;
    CHECK_THROWS_AS(run_adp_cspd(p, rc), ConfigError);
  }
}

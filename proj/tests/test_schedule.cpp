#include <doctest.h>

#include "cspd/schedule.hpp"

using namespace cspd;

namespace {
ProblemConstants consts(double ch, double cg) {
  ProblemConstants c;
  c.c_h = ch;
  c.c_g = cg;
  return c;
}
const Dims kBoth{2, 2, 1, 1};
}  // namespace

TEST_SUITE("schedule") {
  TEST_CASE("basic steps") {
    const StepSizes s = basic_steps(100, consts(2.0, 1.0), kBoth);
    CHECK(s.eta == doctest::Approx(160.0));
    CHECK(s.beta == doctest::Approx(40.0));
    CHECK(s.rho == 0.0);
    CHECK(s.tau == 0.0);

    const StepSizes one = basic_steps(1, consts(1.0, 1.0), kBoth);
    CHECK(one.eta == 4.0);
    CHECK(one.kappa == 4.0);
    CHECK(one.alpha == 4.0);
    CHECK(one.beta == 4.0);
  }

  TEST_CASE("basic steps scale as sqrt(N)") {
    const StepSizes a = basic_steps(250, consts(1.3, 0.7), kBoth, {0.5, 3.0});
    const StepSizes b = basic_steps(1000, consts(1.3, 0.7), kBoth, {0.5, 3.0});
    CHECK(b.eta / a.eta == doctest::Approx(2.0));
    CHECK(b.kappa / a.kappa == doctest::Approx(2.0));
    CHECK(b.alpha / a.alpha == doctest::Approx(2.0));
    CHECK(b.beta / a.beta == doctest::Approx(2.0));
    const StepSchedule sch = StepSchedule::basic(1000, consts(1.3, 0.7), kBoth);
    CHECK(sch.at(0).eta == sch.at(999).eta);
  }

  TEST_CASE("experiment preset coefficients") {
    const StepSizes q = basic_steps(400, experiment_coefficients("qcqp"));
    CHECK(q.alpha == doctest::Approx(500.0 * 20.0));
    CHECK(q.eta == doctest::Approx(30.0 * 20.0));
    CHECK(q.kappa == doctest::Approx(30.0 * 20.0));
    const StepSizes p = adaptive_steps(2, experiment_coefficients("pricing"));
    CHECK(p.beta == doctest::Approx(100.0 * std::sqrt(3.0)));
    CHECK(p.eta == doctest::Approx(10.0 * 2.0));
    CHECK_THROWS_AS(experiment_coefficients("toy"), ConfigError);
  }

  TEST_CASE("adaptive steps at t = 0") {
    const StepSizes s = adaptive_steps(0, consts(1.0, 1.0), kBoth);
    CHECK(s.beta == doctest::Approx(1.0));
    CHECK(s.tau == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-12));
    CHECK(s.eta == doctest::Approx(16.0 * std::sqrt(2.0)));
    CHECK(s.rho == doctest::Approx(16.0 * (std::sqrt(3.0) - std::sqrt(2.0))).epsilon(1e-12));
    CHECK(s.tau == doctest::Approx(0.414214).epsilon(1e-6));
    CHECK(s.eta == doctest::Approx(22.627417).epsilon(1e-7));
    CHECK(s.rho == doctest::Approx(5.085396).epsilon(1e-6));
  }

  TEST_CASE("adaptive telescoping identities") {
    for (double ch : {0.3, 1.0, 7.5}) {
      const ProblemConstants c = consts(ch, 2.0 * ch);
      StepSizes prev = adaptive_steps(0, c, kBoth, {1.7, 0.4});
      for (std::int64_t t = 1; t <= 10000; ++t) {
        const StepSizes cur = adaptive_steps(t, c, kBoth, {1.7, 0.4});
        CHECK(prev.beta + prev.tau - cur.beta == doctest::Approx(0.0).epsilon(1e-12 * cur.beta));
        CHECK(std::abs(prev.beta + prev.tau - cur.beta) <= 1e-12 * cur.beta);
        CHECK(std::abs(prev.alpha + prev.nu - cur.alpha) <= 1e-12 * cur.alpha);
        CHECK(std::abs(prev.eta + prev.rho - cur.eta) <= 1e-12 * cur.eta);
        CHECK(std::abs(prev.kappa + prev.phi - cur.kappa) <= 1e-12 * cur.kappa);
        prev = cur;
      }
    }
  }

  TEST_CASE("adaptive monotonicity and the telescoped sum") {
    const ProblemConstants c = consts(2.5, 1.5);
    const StepMultipliers m{0.3, 2.0};
    StepSizes prev = adaptive_steps(0, c, kBoth, m);
    double sum_tau = prev.beta;
    for (std::int64_t t = 1; t < 5000; ++t) {
      const StepSizes cur = adaptive_steps(t, c, kBoth, m);
      sum_tau += prev.tau;
      CHECK(cur.eta >= prev.eta);
      CHECK(cur.kappa >= prev.kappa);
      CHECK(cur.alpha >= prev.alpha);
      CHECK(cur.beta >= prev.beta);
      CHECK(cur.tau > 0.0);
      CHECK(cur.tau < prev.tau);
      CHECK(cur.rho < prev.rho);
      CHECK(cur.nu < prev.nu);
      CHECK(cur.phi < prev.phi);
      prev = cur;
    }
    sum_tau += prev.tau;
    const double expect = 0.3 * 2.5 * 2.5 * std::sqrt(5001.0);
    CHECK(std::abs(sum_tau - expect) <= 1e-9 * expect);
  }

  TEST_CASE("empty constraint side defaults to constant 1") {
    const Dims none{2, 2, 0, 0};
    const StepSizes s = basic_steps(1, consts(0.0, 0.0), none);
    CHECK(s.eta == 4.0);
    CHECK(s.kappa == 4.0);
    const ProblemConstants e = effective_constants(consts(0.0, 3.0), Dims{2, 2, 0, 1});
    CHECK(e.c_h == 1.0);
    CHECK(e.c_g == 3.0);
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(basic_steps(0, consts(1, 1), kBoth), ConfigError);
    CHECK_THROWS_AS(StepSchedule::basic(0, consts(1, 1), kBoth), ConfigError);
    CHECK_THROWS_AS(basic_steps(10, consts(0, 1), kBoth), ConfigError);
    CHECK_THROWS_AS(basic_steps(10, consts(1, 1), kBoth, {0.0, 1.0}), ConfigError);
    CHECK_THROWS_AS(adaptive_steps(-1, consts(1, 1), kBoth), ConfigError);
    StepSizes bad;
    bad.eta = 0.0;
    CHECK_THROWS_AS(StepSchedule::constant(bad), ConfigError);
  }

  TEST_CASE("adaptive schedule never reads a horizon") {
    StepSchedule a = StepSchedule::adaptive(consts(1.2, 0.8), kBoth);
    StepSchedule b = a;
    b.horizon = 123456;
    for (std::int64_t t : {0, 1, 17, 99999}) {
      CHECK(a.at(t).eta == b.at(t).eta);
      CHECK(a.at(t).tau == b.at(t).tau);
    }
  }
}

#include <doctest.h>

#include <vector>

#include "cspd/core.hpp"

using namespace cspd;

namespace {
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}
}  // namespace

TEST_SUITE("core") {
  TEST_CASE("euclidean_norm") {
    CHECK(euclidean_norm(v2(3, 4)) == 5.0);
    CHECK(euclidean_norm(Vec()) == 0.0);
    CHECK(euclidean_norm(Vec::Ones(4)) == 2.0);
  }

  TEST_CASE("positive_part") {
    Vec v(3);
    v << -1, 2, 0;
    Vec expect(3);
    expect << 0, 2, 0;
    CHECK(positive_part(v) == expect);
    CHECK(positive_part(Vec::Zero(2)) == Vec::Zero(2));
    CHECK(positive_part(Vec::Constant(1, -5.0)) == Vec::Zero(1));
  }

  TEST_CASE("positive_part is idempotent and monotone") {
    Rng rng(7);
    for (int k = 0; k < 100; ++k) {
      Vec a(5), b(5);
      for (int i = 0; i < 5; ++i) {
        a[i] = rng.normal();
        b[i] = a[i] + std::abs(rng.normal());
      }
      CHECK(positive_part(positive_part(a)) == positive_part(a));
      CHECK(((positive_part(b) - positive_part(a)).array() >= 0.0).all());
    }
  }

  TEST_CASE("running average") {
    IterateState s = IterateState::start(Vec::Zero(2), Vec::Zero(2), Vec(), Vec());
    update_running_average(s, v2(2, 4), v2(0, 0));
    update_running_average(s, v2(4, 8), v2(0, 0));
    CHECK(s.t == 2);
    CHECK(s.x_mean() == v2(3, 6));

    IterateState one = IterateState::start(Vec::Zero(2), Vec::Zero(1), Vec(), Vec());
    update_running_average(one, v2(1.5, -2), Vec::Constant(1, 7.0));
    CHECK(one.x_mean() == v2(1.5, -2));
    CHECK(one.y_mean()[0] == 7.0);

    IterateState many = IterateState::start(Vec::Zero(2), Vec::Zero(1), Vec(), Vec());
    for (int i = 0; i < 64; ++i) update_running_average(many, v2(0.25, 3), Vec::Constant(1, 1.0));
    CHECK(many.x_mean() == v2(0.25, 3));
  }

  TEST_CASE("running average matches the brute-force mean") {
    Rng rng(11);
    IterateState s = IterateState::start(Vec::Zero(3), Vec::Zero(1), Vec(), Vec());
    std::vector<Vec> traj;
    for (int t = 0; t < 100; ++t) {
      Vec x(3);
      for (int i = 0; i < 3; ++i) x[i] = rng.normal(0.0, 10.0);
      traj.push_back(x);
      update_running_average(s, x, Vec::Zero(1));
    }
    Vec brute = Vec::Zero(3);
    for (const auto& x : traj) brute += x;
    brute /= 100.0;
    CHECK((s.x_mean() - brute).norm() <= 1e-12 * (1.0 + brute.norm()));
  }

  TEST_CASE("validation") {
    Dims d;
    d.d_x = 0;
    CHECK_THROWS_AS(d.validate(), ConfigError);
    d = Dims{2, 2, -1, 0};
    CHECK_THROWS_AS(d.validate(), ConfigError);
    CHECK_NOTHROW((Dims{1, 1, 0, 0}.validate()));

    ProblemConstants c;
    c.c_h = -1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ProblemConstants{};
    c.sigma_g = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }

  TEST_CASE("rng streams are reproducible and distinct") {
    Rng a = Rng::stream(1, 2, 3, QuerySlot::kHValue);
    Rng b = Rng::stream(1, 2, 3, QuerySlot::kHValue);
    Rng c = Rng::stream(1, 2, 3, QuerySlot::kGradX);
    Rng d = Rng::stream(1, 2, 4, QuerySlot::kHValue);
    const auto va = a();
    CHECK(va == b());
    CHECK(va != c());
    CHECK(va != d());
  }

  TEST_CASE("rng uniform and normal moments") {
    Rng rng(3);
    const int n = 200000;
    double su = 0.0, sn = 0.0, sn2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double u = rng.uniform();
      CHECK_UNARY(u >= 0.0);
      CHECK_UNARY(u < 1.0);
      su += u;
      const double z = rng.normal();
      sn += z;
      sn2 += z * z;
    }
    CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(std::abs(sn / n) < 0.01);
    CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
  }

  TEST_CASE("all_finite") {
    CHECK(all_finite(v2(1, 2)));
    CHECK_FALSE(all_finite(v2(1, std::nan(""))));
    CHECK_FALSE(all_finite(v2(std::numeric_limits<double>::infinity(), 0)));
  }
}

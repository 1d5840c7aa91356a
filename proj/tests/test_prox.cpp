#include <doctest.h>

#include <functional>

#include "cspd/prox.hpp"
#include "cspd/rng.hpp"

using namespace cspd;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Vec randn(Rng& rng, Index n, double s = 1.0) {
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = s * rng.normal();
  return v;
}

ProjectionOp random_set(Rng& rng, Index n, int which) {
  switch (which % 5) {
    case 0:
      return FullSpace{};
    case 1: {
      Vec lo = randn(rng, n);
      return make_box(lo, lo + Vec::Constant(n, rng.uniform(0.1, 2.0)));
    }
    case 2:
      return make_ball(randn(rng, n), rng.uniform(0.2, 2.0));
    case 3: {
      Vec m(n);
      for (Index i = 0; i < n; ++i) m[i] = rng.uniform(0.1, 10.0);
      return make_diag_ellipsoid(randn(rng, n), m, rng.uniform(0.2, 2.0));
    }
    default:
      return NonnegOrthant{};
  }
}

// Golden-section minimum of a convex function on [a, b].
double golden(const std::function<double(double)>& f, double a, double b) {
  const double r = 0.6180339887498949;
  double c = b - r * (b - a), d = a + r * (b - a), fc = f(c), fd = f(d);
  for (int i = 0; i < 150; ++i) {
    if (fc < fd) {
      b = d, d = c, fd = fc, c = b - r * (b - a), fc = f(c);
    } else {
      a = c, c = d, fc = fd, d = a + r * (b - a), fd = f(d);
    }
  }
  return std::min(fc, fd);
}

// Feasible interval for coordinate 1 given coordinate 0 (or the whole range for i = 0).
std::pair<double, double> slice(const ProjectionOp& op, Index i, double z0, double big) {
  if (std::holds_alternative<FullSpace>(op)) return {-big, big};
  if (std::holds_alternative<NonnegOrthant>(op)) return {0.0, big};
  if (const auto* b = std::get_if<Box>(&op)) return {b->lower[i], b->upper[i]};
  if (const auto* b = std::get_if<Ball>(&op)) {
    const double used = i == 0 ? 0.0 : (z0 - b->center[0]) * (z0 - b->center[0]);
    const double w = std::sqrt(std::max(0.0, b->radius * b->radius - used));
    return {b->center[i] - w, b->center[i] + w};
  }
  const auto& e = std::get<DiagEllipsoid>(op);
  const double used = i == 0 ? 0.0 : e.diag_m[0] * (z0 - e.center[0]) * (z0 - e.center[0]);
  const double w = std::sqrt(std::max(0.0, e.radius * e.radius - used) / e.diag_m[i]);
  return {e.center[i] - w, e.center[i] + w};
}

double numeric_min(const std::function<double(const Vec&)>& f, const ProjectionOp& op, Index n,
                   double big) {
  if (n == 1) {
    auto [a, b] = slice(op, 0, 0.0, big);
    return golden([&](double t) { return f(Vec::Constant(1, t)); }, a, b);
  }
  auto [a, b] = slice(op, 0, 0.0, big);
  return golden(
      [&](double s) {
        auto [c, d] = slice(op, 1, s, big);
        return golden([&](double t) { return f(vec({s, t})); }, c, d);
      },
      a, b);
}

}  // namespace

TEST_SUITE("prox") {
  TEST_CASE("projection examples") {
    CHECK((project(make_ball(Vec::Zero(2), 1.0), vec({3, 4})) - vec({0.6, 0.8})).norm() < 1e-15);
    CHECK(project(make_box(Vec::Zero(2), Vec::Ones(2)), vec({-1, 2})) == vec({0, 1}));
    CHECK(project(NonnegOrthant{}, vec({-1, 2, 0})) == vec({0, 2, 0}));
    CHECK(project(FullSpace{}, vec({-1, 2})) == vec({-1, 2}));
  }

  TEST_CASE("feasible points are returned unchanged") {
    const Vec inside = vec({0.1, -0.2});
    CHECK(project(make_ball(Vec::Zero(2), 1.0), inside) == inside);
    CHECK(project(make_diag_ellipsoid(Vec::Zero(2), vec({1, 4}), 1.0), inside) == inside);
    CHECK(project(make_box(-Vec::Ones(2), Vec::Ones(2)), inside) == inside);
  }

  TEST_CASE("ellipsoid projection satisfies the constraint and the optimality condition") {
    Rng rng(5);
    for (int k = 0; k < 200; ++k) {
      const Index n = 1 + k % 6;
      Vec m(n);
      for (Index i = 0; i < n; ++i) m[i] = rng.uniform(0.01, 50.0);
      const auto e = make_diag_ellipsoid(randn(rng, n), m, rng.uniform(0.1, 3.0));
      const Vec v = e.center + randn(rng, n, 5.0);
      const Vec p = project(e, v);
      const double lhs = (m.array() * (p - e.center).array().square()).sum();
      CHECK(lhs <= e.radius * e.radius * (1.0 + 1e-12));
      if (!contains(e, v)) {
        CHECK(lhs >= e.radius * e.radius * (1.0 - 1e-9));
        // v - p is parallel to the normal M (p - c) with a nonnegative factor.
        const Vec normal = m.cwiseProduct(p - e.center);
        const double s = (v - p).dot(normal) / normal.squaredNorm();
        CHECK(s >= 0.0);
        CHECK((v - p - s * normal).norm() <= 1e-7 * (1.0 + (v - p).norm()));
      }
    }
  }

  TEST_CASE("projection is idempotent and non-expansive") {
    Rng rng(9);
    for (int k = 0; k < 500; ++k) {
      const Index n = 1 + k % 5;
      const ProjectionOp op = random_set(rng, n, k);
      const Vec u = randn(rng, n, 4.0), v = randn(rng, n, 4.0);
      const Vec pu = project(op, u), pv = project(op, v);
      CHECK((project(op, pu) - pu).norm() <= 1e-12);
      CHECK((pu - pv).norm() <= (u - v).norm() + 1e-12);
      CHECK(contains(op, pu, 1e-12));
    }
  }

  TEST_CASE("dimension mismatch and malformed sets") {
    CHECK_THROWS_AS(project(make_box(Vec::Zero(2), Vec::Ones(2)), Vec::Zero(3)), ConfigError);
    CHECK_THROWS_AS(project(make_ball(Vec::Zero(2), 1.0), Vec::Zero(1)), ConfigError);
    CHECK_THROWS_AS(make_box(Vec::Ones(2), Vec::Zero(2)), ConfigError);
    CHECK_THROWS_AS(make_ball(Vec::Zero(2), 0.0), ConfigError);
    CHECK_THROWS_AS(make_diag_ellipsoid(Vec::Zero(2), vec({1, 0}), 1.0), ConfigError);
  }

  TEST_CASE("dual_prox_basic") {
    CHECK(dual_prox_basic(vec({1, 0}), vec({-2, 3}), 2.0) == vec({0, 1.5}));
    CHECK(dual_prox_basic(vec({0}), vec({-1}), 1.0) == vec({0}));
    CHECK(dual_prox_basic(vec({2}), vec({0}), 5.0) == vec({2}));
    CHECK_THROWS_AS(dual_prox_basic(vec({1}), vec({1}), 0.0), ConfigError);
    CHECK_THROWS_AS(dual_prox_basic(vec({1}), vec({1}), -1.0), ConfigError);
  }

  TEST_CASE("dual_prox_adaptive") {
    CHECK(dual_prox_adaptive(vec({1}), vec({0}), vec({2}), 1.0, 1.0) == vec({1.5}));
    CHECK(dual_prox_adaptive(vec({0}), vec({0}), vec({-3}), 2.0, 1.0) == vec({0}));
    Rng rng(2);
    for (int k = 0; k < 100; ++k) {
      const Vec g = randn(rng, 4).cwiseAbs(), s = randn(rng, 4), g0 = randn(rng, 4).cwiseAbs();
      const double beta = rng.uniform(0.1, 10.0);
      CHECK(dual_prox_adaptive(g, g0, s, beta, 0.0) == dual_prox_basic(g, s, beta));
    }
    CHECK_THROWS_AS(dual_prox_adaptive(vec({1}), vec({0}), vec({1}), 0.0, 0.0), ConfigError);
  }

  TEST_CASE("primal_prox_basic") {
    CHECK(primal_prox_basic(vec({0, 0}), vec({2, -4}), 2.0, FullSpace{}) == vec({-1, 2}));
    CHECK((primal_prox_basic(vec({0, 0}), vec({-2, 0}), 1.0, make_ball(Vec::Zero(2), 1.0)) -
           vec({1, 0}))
              .norm() < 1e-15);
    Rng rng(4);
    for (int k = 0; k < 50; ++k) {
      const ProjectionOp op = random_set(rng, 3, k);
      const Vec x = project(op, randn(rng, 3));
      CHECK((primal_prox_basic(x, Vec::Zero(3), 1.7, op) - x).norm() <= 1e-12);
    }
    CHECK_THROWS_AS(primal_prox_basic(vec({0}), vec({1}), 0.0, FullSpace{}), ConfigError);
  }

  TEST_CASE("primal_prox_adaptive") {
    CHECK(primal_prox_adaptive(vec({2}), vec({0}), vec({0}), 1.0, 1.0, FullSpace{}) == vec({1}));
    CHECK(primal_prox_adaptive(vec({1}), vec({1}), vec({-10}), 1.0, 1.0,
                               make_box(Vec::Zero(1), Vec::Ones(1))) == vec({1}));
    Rng rng(6);
    for (int k = 0; k < 100; ++k) {
      const ProjectionOp op = random_set(rng, 3, k);
      const Vec x = randn(rng, 3), x0 = randn(rng, 3), g = randn(rng, 3);
      const double eta = rng.uniform(0.1, 10.0);
      CHECK(primal_prox_adaptive(x, x0, g, eta, 0.0, op) == primal_prox_basic(x, g, eta, op));
      CHECK(primal_ascent_adaptive(x, x0, g, eta, 0.0, op) == primal_ascent_basic(x, g, eta, op));
    }
    CHECK_THROWS_AS(primal_prox_adaptive(vec({0}), vec({0}), vec({1}), 0.0, 0.0, FullSpace{}),
                    ConfigError);
    CHECK_THROWS_AS(primal_prox_adaptive(vec({0}), vec({0}), vec({1}), 1.0, -1.0, FullSpace{}),
                    ConfigError);
  }

  TEST_CASE("combine_grad") {
    CHECK(combine_grad_x(vec({1, 2}), Mat(2, 0), Vec()) == vec({1, 2}));
    Mat j(2, 1);
    j << 0, 1;
    CHECK(combine_grad_x(vec({1, 0}), j, vec({2})) == vec({1, 2}));
    CHECK(combine_grad_x(vec({1, 0}), j, vec({0})) == vec({1, 0}));
    CHECK(combine_grad_y(vec({1, 0}), j, vec({2})) == vec({1, -2}));
    CHECK_THROWS_AS(combine_grad_x(vec({1, 0}), j, vec({1, 1})), ConfigError);
    CHECK_THROWS_AS(combine_grad_y(vec({1, 0, 0}), j, vec({1})), ConfigError);
  }

  // Every prox map is argmin pi'z + (c/2)|z - zb|^2 + (a/2)|z - z0|^2 over a set.
  struct Case {
    ProjectionOp set;
    Vec pi, zb, z0, out;
    double c, a;
    double f(const Vec& z) const {
      return pi.dot(z) + 0.5 * c * (z - zb).squaredNorm() + 0.5 * a * (z - z0).squaredNorm();
    }
  };

  Case make_case(Rng & rng, Index n, int k) {
    Case cs;
    const int op = k % 6;
    cs.set = op < 2 ? ProjectionOp{NonnegOrthant{}} : random_set(rng, n, k / 6);
    cs.zb = project(cs.set, randn(rng, n, 1.5));
    cs.z0 = project(cs.set, randn(rng, n, 1.5));
    cs.c = rng.uniform(0.1, 10.0);
    cs.a = op % 2 ? rng.uniform(0.0, 5.0) : 0.0;
    const Vec g = randn(rng, n, 3.0);
    switch (op) {
      case 0: cs.pi = -g; cs.out = dual_prox_basic(cs.zb, g, cs.c); break;
      case 1: cs.pi = -g; cs.out = dual_prox_adaptive(cs.zb, cs.z0, g, cs.c, cs.a); break;
      case 2: cs.pi = g; cs.out = primal_prox_basic(cs.zb, g, cs.c, cs.set); break;
      case 3: cs.pi = g; cs.out = primal_prox_adaptive(cs.zb, cs.z0, g, cs.c, cs.a, cs.set); break;
      case 4: cs.pi = -g; cs.out = primal_ascent_basic(cs.zb, g, cs.c, cs.set); break;
      default: cs.pi = -g; cs.out = primal_ascent_adaptive(cs.zb, cs.z0, g, cs.c, cs.a, cs.set);
    }
    return cs;
  }

  TEST_CASE("prox maps match golden-section minimization in 1-D and 2-D") {
    Rng rng(21);
    for (int k = 0; k < 240; ++k) {
      const Index n = 1 + k % 2;
      const Case cs = make_case(rng, n, k / 2);
      const double big = 20.0 + cs.pi.norm() + cs.zb.norm() + cs.z0.norm();
      const double ref = numeric_min([&](const Vec& z) { return cs.f(z); }, cs.set, n, big);
      CHECK(contains(cs.set, cs.out, 1e-10));
      CHECK(std::abs(cs.f(cs.out) - ref) <= 1e-8);
    }
  }

  TEST_CASE("prox maps dominate random feasible candidates in higher dimension") {
    Rng rng(22);
    for (int k = 0; k < 200; ++k) {
      const Index n = 3 + k % 10;
      const Case cs = make_case(rng, n, k);
      const double mine = cs.f(cs.out);
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < 2000; ++i) {
        const double scale = std::pow(10.0, -(i % 5));
        best = std::min(best, cs.f(project(cs.set, cs.out + randn(rng, n, scale))));
      }
      CHECK(mine <= best + 1e-9);
    }
  }

  TEST_CASE("three-point inequality") {
    Rng rng(23);
    double worst = -1.0;
    for (int k = 0; k < 1000; ++k) {
      const Index n = 1 + k % 6;
      const Case cs = make_case(rng, n, k);
      const Vec y = project(cs.set, randn(rng, n, 2.0));
      const Vec& yh = cs.out;
      auto phi = [&](const Vec& v) { return 0.5 * cs.a * (v - cs.z0).squaredNorm(); };
      const double lhs = (yh - y).dot(cs.pi) + phi(yh) - phi(y);
      const double rhs = 0.5 * cs.c * (cs.zb - y).squaredNorm() -
                         0.5 * (cs.c + cs.a) * (yh - y).squaredNorm() -
                         0.5 * cs.c * (cs.zb - yh).squaredNorm();
      worst = std::max(worst, lhs - rhs);
    }
    CHECK(worst <= 1e-9);
  }
}

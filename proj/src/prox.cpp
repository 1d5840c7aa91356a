#include "cspd/prox.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cspd {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_dim(const ProjectionOp& op, const Vec& v) {
  if (auto d = set_dimension(op); d && *d != v.size()) {
    throw ConfigError("projection dimension mismatch: set has " + std::to_string(*d) +
                      ", vector has " + std::to_string(v.size()));
  }
}

void check_same_size(const Vec& a, const Vec& b, const char* what) {
  if (a.size() != b.size()) {
    throw ConfigError(std::string(what) + ": dimension mismatch (" + std::to_string(a.size()) +
                      " vs " + std::to_string(b.size()) + ")");
  }
}

double ellipsoid_value(const DiagEllipsoid& e, const Vec& v) {
  return (e.diag_m.array() * (v - e.center).array().square()).sum();
}

// Scale s in the KKT form y_i = c_i + (v_i - c_i) / (1 + s * m_i).
double ellipsoid_residual(const DiagEllipsoid& e, const Vec& diff, double s) {
  double acc = 0.0;
  for (Index i = 0; i < diff.size(); ++i) {
    const double q = diff[i] / (1.0 + s * e.diag_m[i]);
    acc += e.diag_m[i] * q * q;
  }
  return acc - e.radius * e.radius;
}

void project_ellipsoid(const DiagEllipsoid& e, Vec& v) {
  if (ellipsoid_value(e, v) <= e.radius * e.radius) return;
  const Vec diff = v - e.center;
  double lo = 0.0;
  double hi = 1.0;
  while (ellipsoid_residual(e, diff, hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double r = ellipsoid_residual(e, diff, mid);
    if (r > 0.0) {
      lo = mid;
    } else {
      hi = mid;
      if (r >= -1e-12) break;
    }
  }
  // hi always sits on the feasible side.
  for (Index i = 0; i < v.size(); ++i) {
    v[i] = e.center[i] + diff[i] / (1.0 + hi * e.diag_m[i]);
  }
}

}  // namespace

Box make_box(Vec lower, Vec upper) {
  if (lower.size() != upper.size()) throw ConfigError("box: lower/upper size mismatch");
  for (Index i = 0; i < lower.size(); ++i) {
    if (!(lower[i] <= upper[i])) throw ConfigError("box: lower > upper at index " + std::to_string(i));
  }
  return Box{std::move(lower), std::move(upper)};
}

Ball make_ball(Vec center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ConfigError("ball: radius must be positive");
  return Ball{std::move(center), radius};
}

DiagEllipsoid make_diag_ellipsoid(Vec center, Vec diag_m, double radius) {
  if (center.size() != diag_m.size()) throw ConfigError("ellipsoid: center/diag size mismatch");
  if (!(radius > 0.0)) throw ConfigError("ellipsoid: radius must be positive");
  if (!(diag_m.array() > 0.0).all()) throw ConfigError("ellipsoid: diag_m must be strictly positive");
  return DiagEllipsoid{std::move(center), std::move(diag_m), radius};
}

std::optional<Index> set_dimension(const ProjectionOp& op) {
  return std::visit(Overloaded{
                        [](const FullSpace&) -> std::optional<Index> { return std::nullopt; },
                        [](const NonnegOrthant&) -> std::optional<Index> { return std::nullopt; },
                        [](const Box& b) -> std::optional<Index> { return b.lower.size(); },
                        [](const Ball& b) -> std::optional<Index> { return b.center.size(); },
                        [](const DiagEllipsoid& e) -> std::optional<Index> { return e.center.size(); },
                    },
                    op);
}

bool is_bounded(const ProjectionOp& op) {
  return std::holds_alternative<Box>(op) || std::holds_alternative<Ball>(op) ||
         std::holds_alternative<DiagEllipsoid>(op);
}

bool contains(const ProjectionOp& op, const Vec& v, double tol) {
  check_dim(op, v);
  return std::visit(
      Overloaded{
          [](const FullSpace&) { return true; },
          [&](const NonnegOrthant&) { return (v.array() >= -tol).all(); },
          [&](const Box& b) {
            return ((v - b.lower).array() >= -tol).all() && ((b.upper - v).array() >= -tol).all();
          },
          [&](const Ball& b) { return (v - b.center).norm() <= b.radius + tol; },
          [&](const DiagEllipsoid& e) {
            return std::sqrt(ellipsoid_value(e, v)) <= e.radius + tol;
          },
      },
      op);
}

void project_inplace(const ProjectionOp& op, Vec& v) {
  check_dim(op, v);
  std::visit(Overloaded{
                 [](const FullSpace&) {},
                 [&](const NonnegOrthant&) { v = v.cwiseMax(0.0); },
                 [&](const Box& b) { v = v.cwiseMax(b.lower).cwiseMin(b.upper); },
                 [&](const Ball& b) {
                   const double dist = (v - b.center).norm();
                   if (dist > b.radius) v = b.center + (b.radius / dist) * (v - b.center);
                 },
                 [&](const DiagEllipsoid& e) { project_ellipsoid(e, v); },
             },
             op);
}

Vec project(const ProjectionOp& op, const Vec& v) {
  Vec out = v;
  project_inplace(op, out);
  return out;
}

Vec dual_prox_basic(const Vec& gamma_t, const Vec& sample, double beta_t) {
  if (!(beta_t > 0.0)) throw ConfigError("dual_prox_basic: beta must be positive");
  check_same_size(gamma_t, sample, "dual_prox_basic");
  Vec out(gamma_t.size());
  for (Index i = 0; i < out.size(); ++i) out[i] = std::max(gamma_t[i] + sample[i] / beta_t, 0.0);
  return out;
}

// (beta*g_t + tau*g_0 + s)/(beta + tau) written as g_t + (tau*(g_0 - g_t) + s)/(beta + tau),
// which collapses to the basic update exactly when tau == 0.
Vec dual_prox_adaptive(const Vec& gamma_t, const Vec& gamma_0, const Vec& sample, double beta_t,
                       double tau_t) {
  if (!(beta_t > 0.0) || !(tau_t >= 0.0)) {
    throw ConfigError("dual_prox_adaptive: need beta > 0 and tau >= 0");
  }
  check_same_size(gamma_t, sample, "dual_prox_adaptive");
  check_same_size(gamma_t, gamma_0, "dual_prox_adaptive");
  const double denom = beta_t + tau_t;
  Vec out(gamma_t.size());
  for (Index i = 0; i < out.size(); ++i) {
    const double pull = tau_t == 0.0 ? 0.0 : tau_t * (gamma_0[i] - gamma_t[i]);
    out[i] = std::max(gamma_t[i] + (pull + sample[i]) / denom, 0.0);
  }
  return out;
}

Vec primal_prox_basic(const Vec& x_t, const Vec& combined_grad, double eta_t,
                      const ProjectionOp& proj) {
  if (!(eta_t > 0.0)) throw ConfigError("primal_prox_basic: eta must be positive");
  check_same_size(x_t, combined_grad, "primal_prox_basic");
  Vec out(x_t.size());
  for (Index i = 0; i < out.size(); ++i) out[i] = x_t[i] - combined_grad[i] / eta_t;
  project_inplace(proj, out);
  return out;
}

Vec primal_prox_adaptive(const Vec& x_t, const Vec& x_0, const Vec& combined_grad, double eta_t,
                         double rho_t, const ProjectionOp& proj) {
  if (!(eta_t > 0.0) || !(rho_t >= 0.0)) {
    throw ConfigError("primal_prox_adaptive: need eta > 0 and rho >= 0");
  }
  check_same_size(x_t, combined_grad, "primal_prox_adaptive");
  check_same_size(x_t, x_0, "primal_prox_adaptive");
  const double denom = eta_t + rho_t;
  Vec out(x_t.size());
  for (Index i = 0; i < out.size(); ++i) {
    if (rho_t == 0.0) {
      out[i] = x_t[i] - combined_grad[i] / denom;
    } else {
      out[i] = x_t[i] + (rho_t * (x_0[i] - x_t[i]) - combined_grad[i]) / denom;
    }
  }
  project_inplace(proj, out);
  return out;
}

Vec primal_ascent_basic(const Vec& y_t, const Vec& combined_grad, double kappa_t,
                        const ProjectionOp& proj) {
  if (!(kappa_t > 0.0)) throw ConfigError("primal_ascent_basic: kappa must be positive");
  check_same_size(y_t, combined_grad, "primal_ascent_basic");
  Vec out(y_t.size());
  for (Index i = 0; i < out.size(); ++i) out[i] = y_t[i] + combined_grad[i] / kappa_t;
  project_inplace(proj, out);
  return out;
}

Vec primal_ascent_adaptive(const Vec& y_t, const Vec& y_0, const Vec& combined_grad,
                           double kappa_t, double phi_t, const ProjectionOp& proj) {
  if (!(kappa_t > 0.0) || !(phi_t >= 0.0)) {
    throw ConfigError("primal_ascent_adaptive: need kappa > 0 and phi >= 0");
  }
  check_same_size(y_t, combined_grad, "primal_ascent_adaptive");
  check_same_size(y_t, y_0, "primal_ascent_adaptive");
  const double denom = kappa_t + phi_t;
  Vec out(y_t.size());
  for (Index i = 0; i < out.size(); ++i) {
    const double pull = phi_t == 0.0 ? 0.0 : phi_t * (y_0[i] - y_t[i]);
    out[i] = y_t[i] + (pull + combined_grad[i]) / denom;
  }
  project_inplace(proj, out);
  return out;
}

Vec combine_grad_x(const Vec& grad_f_x, const Mat& h_jacobian, const Vec& gamma) {
  if (h_jacobian.cols() != gamma.size() ||
      (gamma.size() > 0 && h_jacobian.rows() != grad_f_x.size())) {
    throw ConfigError("combine_grad_x: dimension mismatch");
  }
  if (gamma.size() == 0) return grad_f_x;
  return grad_f_x + h_jacobian * gamma;
}

Vec combine_grad_y(const Vec& grad_f_y, const Mat& g_jacobian, const Vec& lambda) {
  if (g_jacobian.cols() != lambda.size() ||
      (lambda.size() > 0 && g_jacobian.rows() != grad_f_y.size())) {
    throw ConfigError("combine_grad_y: dimension mismatch");
  }
  if (lambda.size() == 0) return grad_f_y;
  return grad_f_y - g_jacobian * lambda;
}

}  // namespace cspd

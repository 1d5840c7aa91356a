#pragma once

#include <optional>
#include <variant>

#include "cspd/types.hpp"

namespace cspd {

struct FullSpace {};

struct Box {
  Vec lower, upper;
};

struct Ball {
  Vec center;
  double radius = 1.0;
};

/// {y : sum_i diag_m[i] * (y[i] - center[i])^2 <= radius^2}
struct DiagEllipsoid {
  Vec center, diag_m;
  double radius = 1.0;
};

struct NonnegOrthant {};

using ProjectionOp = std::variant<FullSpace, Box, Ball, DiagEllipsoid, NonnegOrthant>;

/// Validating constructors; throw ConfigError on malformed parameters.
Box make_box(Vec lower, Vec upper);
Ball make_ball(Vec center, double radius);
DiagEllipsoid make_diag_ellipsoid(Vec center, Vec diag_m, double radius);

/// Fixed dimension of the set, if it has one (FullSpace and NonnegOrthant adapt).
std::optional<Index> set_dimension(const ProjectionOp& op);

bool is_bounded(const ProjectionOp& op);

/// Membership predicate with absolute slack `tol`.
bool contains(const ProjectionOp& op, const Vec& v, double tol = 1e-12);

/// Euclidean projection. Feasible points are returned unchanged.
Vec project(const ProjectionOp& op, const Vec& v);
void project_inplace(const ProjectionOp& op, Vec& v);

/// argmax_{g >= 0} { sample'g - (beta/2)||gamma_t - g||^2 }.
Vec dual_prox_basic(const Vec& gamma_t, const Vec& sample, double beta_t);

/// As dual_prox_basic with an extra -(tau/2)||gamma_0 - g||^2 anchor term.
/// tau_t == 0 reproduces dual_prox_basic bit for bit.
Vec dual_prox_adaptive(const Vec& gamma_t, const Vec& gamma_0, const Vec& sample, double beta_t,
                       double tau_t);

/// argmin_{x in X} { g'x + (eta/2)||x - x_t||^2 }.
Vec primal_prox_basic(const Vec& x_t, const Vec& combined_grad, double eta_t,
                      const ProjectionOp& proj);

/// argmin_{x in X} { g'x + (eta/2)||x - x_t||^2 + (rho/2)||x - x_0||^2 }.
Vec primal_prox_adaptive(const Vec& x_t, const Vec& x_0, const Vec& combined_grad, double eta_t,
                         double rho_t, const ProjectionOp& proj);

/// argmax_{y in Y} { g'y - (kappa/2)||y - y_t||^2 }.
Vec primal_ascent_basic(const Vec& y_t, const Vec& combined_grad, double kappa_t,
                        const ProjectionOp& proj);

/// argmax_{y in Y} { g'y - (kappa/2)||y - y_t||^2 - (phi/2)||y - y_0||^2 }.
Vec primal_ascent_adaptive(const Vec& y_t, const Vec& y_0, const Vec& combined_grad,
                           double kappa_t, double phi_t, const ProjectionOp& proj);

/// grad_f_x + h_jacobian * gamma
Vec combine_grad_x(const Vec& grad_f_x, const Mat& h_jacobian, const Vec& gamma);
/// grad_f_y - g_jacobian * lambda
Vec combine_grad_y(const Vec& grad_f_y, const Mat& g_jacobian, const Vec& lambda);

}  // namespace cspd

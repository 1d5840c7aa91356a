#include "cspd/metrics.hpp"

#include <cmath>

namespace cspd {

GapReport evaluate(const Vec& x_bar, const Vec& y_bar, const ProblemInstance& problem,
                   const ReferenceSolution& ref) {
  const ExactOracle& ex = problem.require_exact();
  if (x_bar.size() != problem.dims.d_x || y_bar.size() != problem.dims.d_y) {
    throw ConfigError("evaluate: point dimensions do not match the problem");
  }
  GapReport r;
  r.obj_gap = ex.objective(x_bar, ref.y_star) - ex.objective(ref.x_star, y_bar);

  Vec h, g;
  ex.h_value(x_bar, h);
  ex.g_value(y_bar, g);
  r.feas_x = euclidean_norm(positive_part(h));
  r.feas_y = euclidean_norm(positive_part(g));
  r.lower_bound = -euclidean_norm(ref.gamma_star) * r.feas_x -
                  euclidean_norm(ref.lambda_star) * r.feas_y;
  r.lagrangian_at_point = ex.objective(x_bar, y_bar);
  if (h.size() > 0) r.lagrangian_at_point += ref.gamma_star.dot(h);
  if (g.size() > 0) r.lagrangian_at_point -= ref.lambda_star.dot(g);
  return r;
}

SlopeFit slope_fit(const std::vector<std::pair<double, double>>& points) {
  SlopeFit fit;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto [n, v] = points[i];
    if (!(v > 0.0) || !(n > 0.0) || !std::isfinite(v)) {
      fit.excluded.push_back(i);
      continue;
    }
    lx.push_back(std::log(n));
    ly.push_back(std::log(v));
  }
  if (lx.size() < 3) {
    throw ConfigError("slope_fit: need at least 3 positive points, have " +
                      std::to_string(lx.size()));
  }
  const double k = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw ConfigError("slope_fit: all abscissae are equal");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss_res += e * e;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

double theory_constant_R(const ReferenceSolution& ref, const InitialPoint& init,
                         const ProblemConstants& c) {
  if (!(c.c_h > 0.0) || !(c.c_g > 0.0)) {
    throw ConfigError("theory_constant_R: C_h and C_g must be positive");
  }
  const double ch2 = c.c_h * c.c_h;
  const double cg2 = c.c_g * c.c_g;
  const double gs = ref.gamma_star.norm();
  const double ls = ref.lambda_star.norm();
  const double x_block = 11.0 * c.c_x * c.c_x / (8.0 * ch2) +
                         2.0 * (init.gamma0 - ref.gamma_star).squaredNorm() + gs * c.sigma_h +
                         c.sigma_h * c.sigma_h / 8.0 + 19.0 * gs * gs / 8.0 +
                         2.0 * ch2 * (init.x0 - ref.x_star).squaredNorm() +
                         2.0 * ch2 * ref.x_star.squaredNorm();
  const double y_block = 11.0 * c.c_y * c.c_y / (8.0 * cg2) +
                         2.0 * (init.lambda0 - ref.lambda_star).squaredNorm() + ls * c.sigma_g +
                         c.sigma_g * c.sigma_g / 8.0 + 19.0 * ls * ls / 8.0 +
                         2.0 * cg2 * (init.y0 - ref.y_star).squaredNorm() +
                         2.0 * cg2 * ref.y_star.squaredNorm();
  return x_block + y_block;
}

}  // namespace cspd

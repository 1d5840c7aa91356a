#include "cspd/acceptance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>

namespace cspd {

namespace {

std::string fmt(const char* pattern, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

StepMultipliers times(StepMultipliers a, StepMultipliers b) {
  return {a.dual_scale * b.dual_scale, a.primal_scale * b.primal_scale};
}

// ---------------------------------------------------------------------------
// Prox maps against numeric minimization.

double golden_min(const std::function<double(double)>& f, double a, double b, int iters = 120) {
  if (b - a <= 0.0) return f(a);
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters && b - a > 1e-15 * (1.0 + std::abs(a) + std::abs(b)); ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return std::min({fc, fd, f(0.5 * (a + b))});
}

// Interval of coordinate i given the already-fixed leading coordinates z[0..i-1].
struct Section {
  double lo, hi;
};

Section section(const ProjectionOp& op, const Vec& z, Index i, double bound) {
  return std::visit(
      [&](const auto& s) -> Section {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, FullSpace>) {
          return {-bound, bound};
        } else if constexpr (std::is_same_v<S, NonnegOrthant>) {
          return {0.0, bound};
        } else if constexpr (std::is_same_v<S, Box>) {
          return {s.lower[i], s.upper[i]};
        } else if constexpr (std::is_same_v<S, Ball>) {
          double used = 0.0;
          for (Index k = 0; k < i; ++k) used += (z[k] - s.center[k]) * (z[k] - s.center[k]);
          const double w = std::sqrt(std::max(0.0, s.radius * s.radius - used));
          return {s.center[i] - w, s.center[i] + w};
        } else {
          double used = 0.0;
          for (Index k = 0; k < i; ++k) used += s.diag_m[k] * (z[k] - s.center[k]) * (z[k] - s.center[k]);
          const double w = std::sqrt(std::max(0.0, s.radius * s.radius - used) / s.diag_m[i]);
          return {s.center[i] - w, s.center[i] + w};
        }
      },
      op);
}

// min over the set of phi by nested golden section (dimension 1 or 2).
double numeric_min(const std::function<double(const Vec&)>& phi, const ProjectionOp& op, Index dim,
                   double bound) {
  Vec z = Vec::Zero(dim);
  std::function<double(Index)> level = [&](Index i) -> double {
    const Section sec = section(op, z, i, bound);
    return golden_min(
        [&](double v) {
          z[i] = v;
          if (i + 1 == dim) return phi(z);
          return level(i + 1);
        },
        sec.lo, sec.hi);
  };
  return level(0);
}

Vec random_vec(Rng& rng, Index n, double scale) {
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = scale * rng.normal();
  return v;
}

ProjectionOp random_set(Rng& rng, Index n, int which) {
  switch (which % 5) {
    case 0:
      return FullSpace{};
    case 1: {
      Vec lo = random_vec(rng, n, 1.0);
      Vec hi = lo;
      for (Index i = 0; i < n; ++i) hi[i] += rng.uniform(0.0, 2.0);
      return make_box(lo, hi);
    }
    case 2:
      return make_ball(random_vec(rng, n, 1.0), rng.uniform(0.2, 2.0));
    case 3: {
      Vec m(n);
      for (Index i = 0; i < n; ++i) m[i] = rng.uniform(0.2, 5.0);
      return make_diag_ellipsoid(random_vec(rng, n, 1.0), m, rng.uniform(0.2, 2.0));
    }
    default:
      return NonnegOrthant{};
  }
}

// One random prox problem: minimize pi'z + (c/2)|z - center|^2 + (a/2)|z - anchor|^2
// over a set, together with the library's closed-form answer.
struct ProxCase {
  ProjectionOp set;
  Vec pi, center, anchor;
  double c = 1.0, a = 0.0;
  Vec answer;

  double objective(const Vec& z) const {
    return pi.dot(z) + 0.5 * c * (z - center).squaredNorm() + 0.5 * a * (z - anchor).squaredNorm();
  }
};

ProxCase random_prox_case(Rng& rng, Index n, int k) {
  ProxCase pc;
  const int op = k % 6;
  const bool dual = op < 2;
  pc.set = dual ? ProjectionOp{NonnegOrthant{}} : random_set(rng, n, k / 6);
  pc.center = random_vec(rng, n, 1.5);
  pc.anchor = random_vec(rng, n, 1.5);
  if (dual) {
    pc.center = pc.center.cwiseMax(0.0);
    pc.anchor = pc.anchor.cwiseMax(0.0);
  } else {
    project_inplace(pc.set, pc.center);
    project_inplace(pc.set, pc.anchor);
  }
  const Vec g = random_vec(rng, n, 3.0);
  pc.c = rng.uniform(0.1, 10.0);
  const double anchor_w = (op % 2 == 1) ? rng.uniform(0.0, 5.0) : 0.0;
  pc.a = anchor_w;
  switch (op) {
    case 0:  // argmax g'z - (c/2)|z - center|^2 over z >= 0
      pc.pi = -g;
      pc.answer = dual_prox_basic(pc.center, g, pc.c);
      break;
    case 1:
      pc.pi = -g;
      pc.answer = dual_prox_adaptive(pc.center, pc.anchor, g, pc.c, anchor_w);
      break;
    case 2:
      pc.pi = g;
      pc.answer = primal_prox_basic(pc.center, g, pc.c, pc.set);
      break;
    case 3:
      pc.pi = g;
      pc.answer = primal_prox_adaptive(pc.center, pc.anchor, g, pc.c, anchor_w, pc.set);
      break;
    case 4:
      pc.pi = -g;
      pc.answer = primal_ascent_basic(pc.center, g, pc.c, pc.set);
      break;
    default:
      pc.pi = -g;
      pc.answer = primal_ascent_adaptive(pc.center, pc.anchor, g, pc.c, anchor_w, pc.set);
      break;
  }
  return pc;
}

double candidate_min(const ProxCase& pc, Rng& rng, int count) {
  double best = std::numeric_limits<double>::infinity();
  const Index n = pc.answer.size();
  for (int i = 0; i < count; ++i) {
    const double scale = std::pow(10.0, -4.0 + 4.0 * (i % 5) / 4.0);
    Vec z = (i % 2 == 0 ? pc.answer : pc.center) + random_vec(rng, n, scale);
    project_inplace(pc.set, z);
    best = std::min(best, pc.objective(z));
  }
  return best;
}

CriterionResult criterion_prox_equivalence(std::uint64_t master) {
  CriterionResult r{1, "Prox-oracle equivalence", true, ""};
  const int kInstances = 200;
  double worst = 0.0;
  int failures = 0;
  for (int k = 0; k < kInstances; ++k) {
    Rng rng = Rng::stream(master, 101, static_cast<std::uint64_t>(k), 0);
    const bool low_dim = k % 2 == 0;
    const Index n = low_dim ? 1 + (k / 2) % 2 : 3 + k % 8;
    const ProxCase pc = random_prox_case(rng, n, k / 2);
    const double mine = pc.objective(pc.answer);
    double excess;
    if (!contains(pc.set, pc.answer, 1e-10)) {
      excess = std::numeric_limits<double>::infinity();
    } else if (low_dim) {
      const Vec unc = (pc.c * pc.center + pc.a * pc.anchor - pc.pi) / (pc.c + pc.a);
      const double bound = unc.cwiseAbs().maxCoeff() + pc.center.cwiseAbs().maxCoeff() + 1.0;
      const double ref = numeric_min([&](const Vec& z) { return pc.objective(z); }, pc.set, n, bound);
      excess = std::abs(mine - ref);
    } else {
      excess = std::max(0.0, mine - candidate_min(pc, rng, 10000));
    }
    worst = std::max(worst, excess);
    if (!(excess <= 1e-8)) ++failures;
  }
  r.passed = failures == 0;
  r.detail = std::to_string(kInstances) + " instances, worst excess " + fmt("%.2e", worst);
  return r;
}

// ---------------------------------------------------------------------------
// Three-point inequality with V = |.|^2 / 2:
// (zh - z)'pi + phi(zh) - phi(z) <= c V(zb, z) - (c + mu) V(zh, z) - c V(zb, zh),
// phi = (a/2)|. - anchor|^2, mu = a.

CriterionResult criterion_three_point(std::uint64_t master) {
  CriterionResult r{2, "Three-point inequality", true, ""};
  const int kInstances = 1000;
  double worst = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < kInstances; ++k) {
    Rng rng = Rng::stream(master, 102, static_cast<std::uint64_t>(k), 0);
    const Index n = 1 + k % 6;
    const ProxCase pc = random_prox_case(rng, n, k);
    Vec z = pc.center + random_vec(rng, n, 2.0);
    project_inplace(pc.set, z);
    const Vec& zh = pc.answer;
    auto phi = [&](const Vec& v) { return 0.5 * pc.a * (v - pc.anchor).squaredNorm(); };
    const double lhs = (zh - z).dot(pc.pi) + phi(zh) - phi(z);
    const double rhs = 0.5 * pc.c * (pc.center - z).squaredNorm() -
                       0.5 * (pc.c + pc.a) * (zh - z).squaredNorm() -
                       0.5 * pc.c * (pc.center - zh).squaredNorm();
    worst = std::max(worst, lhs - rhs);
  }
  r.passed = worst <= 1e-9;
  r.detail = std::to_string(kInstances) + " instances, worst violation " + fmt("%.2e", worst);
  return r;
}

// ---------------------------------------------------------------------------
// Unbiasedness of the six oracle channels.

struct Moments {
  Vec sum, sumsq;
  void add(const Eigen::Ref<const Vec>& v) {
    if (sum.size() == 0) {
      sum = Vec::Zero(v.size());
      sumsq = Vec::Zero(v.size());
    }
    sum += v;
    sumsq += v.cwiseProduct(v);
  }
  // Worst |mean - exact| / se over coordinates; zero-variance coordinates must
  // match exactly (to rounding).
  double worst_z(const Vec& exact, long n, bool* exact_ok) const {
    double worst = 0.0;
    if (exact.size() == 0) return 0.0;
    for (Index i = 0; i < exact.size(); ++i) {
      const double mean = sum[i] / static_cast<double>(n);
      const double var = std::max(0.0, sumsq[i] / static_cast<double>(n) - mean * mean);
      const double se = std::sqrt(var * static_cast<double>(n) / static_cast<double>(n - 1) /
                                  static_cast<double>(n));
      const double err = std::abs(mean - exact[i]);
      if (se <= 1e-12 * (1.0 + std::abs(exact[i]))) {
        if (err > 1e-9 * (1.0 + std::abs(exact[i]))) *exact_ok = false;
      } else {
        worst = std::max(worst, err / se);
      }
    }
    return worst;
  }
};

double channel_check(const ProblemInstance& p, const Vec& x, const Vec& y, std::uint64_t master,
                     std::uint64_t point, long draws, bool* exact_ok) {
  const ExactOracle& ex = p.require_exact();
  Moments gx, gy, hv, hj, gv, gj;
  Vec v;
  Mat m;
  for (long t = 0; t < draws; ++t) {
    const auto it = static_cast<std::uint64_t>(t);
    Rng r1 = Rng::stream(master, point, it, QuerySlot::kGradX);
    p.oracle->sample_grad_x(x, y, r1, v);
    gx.add(v);
    Rng r2 = Rng::stream(master, point, it, QuerySlot::kGradY);
    p.oracle->sample_grad_y(x, y, r2, v);
    gy.add(v);
    if (p.dims.m1 > 0) {
      Rng r3 = Rng::stream(master, point, it, QuerySlot::kHValue);
      p.oracle->sample_h_value(x, r3, v);
      hv.add(v);
      Rng r4 = Rng::stream(master, point, it, QuerySlot::kHJacobian);
      p.oracle->sample_h_jacobian(x, r4, m);
      hj.add(Eigen::Map<const Vec>(m.data(), m.size()));
    }
    if (p.dims.m2 > 0) {
      Rng r5 = Rng::stream(master, point, it, QuerySlot::kGValue);
      p.oracle->sample_g_value(y, r5, v);
      gv.add(v);
      Rng r6 = Rng::stream(master, point, it, QuerySlot::kGJacobian);
      p.oracle->sample_g_jacobian(y, r6, m);
      gj.add(Eigen::Map<const Vec>(m.data(), m.size()));
    }
  }
  double worst = 0.0;
  Vec e;
  Mat em;
  ex.grad_x(x, y, e);
  worst = std::max(worst, gx.worst_z(e, draws, exact_ok));
  ex.grad_y(x, y, e);
  worst = std::max(worst, gy.worst_z(e, draws, exact_ok));
  if (p.dims.m1 > 0) {
    ex.h_value(x, e);
    worst = std::max(worst, hv.worst_z(e, draws, exact_ok));
    ex.h_jacobian(x, em);
    worst = std::max(worst, hj.worst_z(Eigen::Map<const Vec>(em.data(), em.size()), draws, exact_ok));
  }
  if (p.dims.m2 > 0) {
    ex.g_value(y, e);
    worst = std::max(worst, gv.worst_z(e, draws, exact_ok));
    ex.g_jacobian(y, em);
    worst = std::max(worst, gj.worst_z(Eigen::Map<const Vec>(em.data(), em.size()), draws, exact_ok));
  }
  return worst;
}

Vec random_point_in(const ProjectionOp& op, Index n, const Vec& around, Rng& rng) {
  Vec v(n);
  if (const auto* box = std::get_if<Box>(&op)) {
    for (Index i = 0; i < n; ++i) v[i] = rng.uniform(box->lower[i], box->upper[i]);
    return v;
  }
  v = around + random_vec(rng, n, 1.0);
  project_inplace(op, v);
  return v;
}

CriterionResult criterion_unbiasedness(std::uint64_t master) {
  CriterionResult r{3, "Oracle unbiasedness", true, ""};
  const long kDraws = 100000;
  const ProblemInstance problems[] = {generate_qcqp({10, 5, 1, ThetaMode::Boundary}).problem,
                                      generate_pricing({20, 500, 1}).problem};
  double worst = 0.0;
  bool exact_ok = true;
  for (std::uint64_t pi = 0; pi < 2; ++pi) {
    const ProblemInstance& p = problems[pi];
    for (std::uint64_t k = 0; k < 5; ++k) {
      Rng rng = Rng::stream(master, 103, pi * 16 + k, 0);
      const Vec x = random_point_in(p.proj_x, p.dims.d_x, Vec::Zero(p.dims.d_x), rng);
      const Vec y = random_point_in(p.proj_y, p.dims.d_y, Vec::Zero(p.dims.d_y), rng);
      worst = std::max(worst, channel_check(p, x, y, splitmix64(master + 103), pi * 16 + k,
                                            kDraws, &exact_ok));
    }
  }
  r.passed = worst <= 5.0 && exact_ok;
  r.detail = "qcqp + pricing, 5 points each, 1e5 draws; worst deviation " + fmt("%.2f", worst) +
             " standard errors" + (exact_ok ? "" : "; a zero-variance channel disagrees");
  return r;
}

// ---------------------------------------------------------------------------
// Shared experiment plumbing.

struct SuiteState {
  explicit SuiteState(const AcceptanceOptions& o) : opt(o) {}

  const AcceptanceOptions& opt;
  // Lower-bound status of every row evaluated so far.
  long bound_rows = 0;
  long bound_bad = 0;
  double bound_worst = std::numeric_limits<double>::infinity();
  std::optional<ExperimentResult> boundary_sweep;
  std::optional<ExperimentConfig> boundary_config;

  void record(const ExperimentResult& res) {
    const double slack = 10.0 * res.reference.tolerance;
    for (const auto& row : res.rows) {
      ++bound_rows;
      const double margin = row.gap.obj_gap - row.gap.lower_bound;
      bound_worst = std::min(bound_worst, margin);
      if (!lower_bound_holds(row.gap, slack)) ++bound_bad;
    }
  }

  ExperimentConfig base(const std::string& kind, ThetaMode mode) const {
    ExperimentConfig c;
    c.problem.kind = kind;
    c.problem.theta_mode = mode;
    if (kind == "pricing") {
      c.problem.d = 20;
      c.problem.m = 500;
    }
    c.master_seed = opt.master_seed;
    c.reference_tol = opt.reference_tol;
    c.jobs = opt.jobs;
    c.duality_gap = false;
    c.schedule.preset = "experiment";
    c.schedule.multipliers =
        kind == "qcqp" ? times(kQcqpDeskScale, opt.extra) : opt.extra;
    return c;
  }

  ExperimentResult run(const ExperimentConfig& c,
                       const std::optional<ReferenceSolution>& ref = std::nullopt) {
    ExperimentResult res = run_experiment(c, ref);
    record(res);
    return res;
  }

  const ExperimentResult& sweep() {
    if (!boundary_sweep) {
      ExperimentConfig c = base("qcqp", ThetaMode::Boundary);
      c.n_list = {1000, 3000, 10000, 30000, 100000};
      for (std::uint64_t s = 1; s <= 10; ++s) c.seeds.push_back(s);
      boundary_config = c;
      boundary_sweep = run(c);
    }
    return *boundary_sweep;
  }
};

std::string failures_text(const ExperimentResult& res) {
  if (res.failures.empty()) return "";
  return "; numeric abort in " + res.failures.front().run_id + " at iteration " +
         std::to_string(res.failures.front().iteration);
}

std::map<std::int64_t, std::vector<const RunRow*>> rows_by_n(const ExperimentResult& res,
                                                             SolverKind solver) {
  std::map<std::int64_t, std::vector<const RunRow*>> out;
  for (const auto& r : res.rows) {
    if (r.solver == solver) out[r.n].push_back(&r);
  }
  return out;
}

double mean_of(const std::vector<const RunRow*>& rows, const std::function<double(const RunRow&)>& f) {
  double s = 0.0;
  for (const RunRow* r : rows) s += f(*r);
  return rows.empty() ? std::numeric_limits<double>::quiet_NaN() : s / static_cast<double>(rows.size());
}

CriterionResult criterion_toy(SuiteState& st) {
  CriterionResult r{4, "Zero-sum toy ground truth", true, ""};
  ExperimentConfig c = st.base("toy", ThetaMode::Boundary);
  c.schedule.preset = "theory";
  c.n_list = {100000};
  c.seeds = {1, 2, 3, 4, 5};
  c.duality_gap = true;
  c.x0 = Vec(2);
  *c.x0 << 1.0, 0.0;
  c.y0 = Vec(2);
  *c.y0 << 0.0, 1.0;
  ToyGridSaddle grid = toy_grid_saddle();
  grid.ref.tolerance = st.opt.reference_tol;
  const ExperimentResult res = st.run(c, grid.ref);
  r.passed = res.complete();
  std::string detail = "grid saddle value " + fmt("%.3g", grid.value);
  for (SolverKind s : c.solvers) {
    const auto rows = rows_by_n(res, s)[100000];
    const double gap = mean_of(rows, [](const RunRow& x) { return std::abs(x.gap.obj_gap); });
    const double fx = mean_of(rows, [](const RunRow& x) { return x.gap.feas_x; });
    const double fy = mean_of(rows, [](const RunRow& x) { return x.gap.feas_y; });
    const double dg = mean_of(rows, [](const RunRow& x) { return x.gap.duality_gap.value_or(NAN); });
    r.passed = r.passed && rows.size() == 5 && gap <= 0.02 && fx <= 0.02 && fy <= 0.02;
    detail += std::string("; ") + solver_name(s) + " |gap| " + fmt("%.2e", gap) + " feas " +
              fmt("%.2e", std::max(fx, fy)) + " (duality gap " + fmt("%.2e", dg) + ")";
  }
  r.detail = detail + failures_text(res);
  return r;
}

CriterionResult criterion_rate(SuiteState& st, int id, bool feasibility) {
  CriterionResult r{id, feasibility ? "Rate claim, feasibility" : "Rate claim, objective gap", true,
                    ""};
  const ExperimentResult& res = st.sweep();
  r.passed = res.complete();
  std::string detail = "qcqp boundary, N 1e3..1e5, 10 seeds";
  const RateWindow window;
  for (SolverKind s : st.boundary_config->solvers) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& [n, rows] : rows_by_n(res, s)) {
      pts.emplace_back(static_cast<double>(n),
                       mean_of(rows, [&](const RunRow& x) {
                         return feasibility ? x.gap.feas_x : std::abs(x.gap.obj_gap);
                       }));
    }
    try {
      const SlopeFit fit = slope_fit(pts);
      r.passed = r.passed && window.contains(fit);
      detail += std::string("; ") + solver_name(s) + " slope " + fmt("%.3f", fit.slope) + " r2 " +
                fmt("%.3f", fit.r2);
    } catch (const ConfigError& e) {
      r.passed = false;
      detail += std::string("; ") + solver_name(s) + " " + e.what();
    }
  }
  r.detail = detail + failures_text(res);
  return r;
}

CriterionResult criterion_interior(SuiteState& st) {
  CriterionResult r{7, "Interior-mode feasibility vanishes", true, ""};
  ExperimentConfig c = st.base("qcqp", ThetaMode::Interior);
  c.n_list = {100000};
  for (std::uint64_t s = 1; s <= 10; ++s) c.seeds.push_back(s);
  const ExperimentResult res = st.run(c);
  r.passed = res.complete();
  std::string detail;
  for (SolverKind s : c.solvers) {
    int zero = 0;
    const auto rows = rows_by_n(res, s)[100000];
    for (const RunRow* row : rows) zero += row->gap.feas_x == 0.0;
    r.passed = r.passed && zero >= 8;
    detail += std::string(detail.empty() ? "" : "; ") + solver_name(s) + " " +
              std::to_string(zero) + "/10 seeds exactly feasible at N=1e5";
  }
  r.detail = detail + failures_text(res);
  return r;
}

CriterionResult criterion_dual_bound(SuiteState& st) {
  CriterionResult r{8, "Dual boundedness", true, ""};
  const ExperimentResult& res = st.sweep();
  bool growth_ok = res.complete();
  double worst_ratio = 0.0;
  for (SolverKind s : st.boundary_config->solvers) {
    std::map<std::uint64_t, double> at4, at5;
    for (const auto& row : res.rows) {
      if (row.solver != s) continue;
      if (row.n == 10000) at4[row.seed] = row.max_gamma_norm;
      if (row.n == 100000) at5[row.seed] = row.max_gamma_norm;
    }
    for (const auto& [seed, g5] : at5) {
      const double g4 = at4.count(seed) ? at4[seed] : 0.0;
      const double ratio = g4 > 0.0 ? g5 / g4 : std::numeric_limits<double>::infinity();
      worst_ratio = std::max(worst_ratio, g5 == 0.0 ? 0.0 : ratio);
      if (!(g5 <= 3.0 * g4)) growth_ok = false;
    }
  }

  // Unscaled fixed-horizon schedule against 2 R e^2.
  const QcqpInstance inst = generate_qcqp({10, 5, 1, ThetaMode::Boundary});
  const ProblemInstance& p = inst.problem;
  const ReferenceSolution ref = solve_reference(p, st.opt.reference_tol);
  RunConfig rc;
  rc.n_iters = 10000;
  rc.seed = splitmix64(st.opt.master_seed ^ splitmix64(1));
  rc.schedule = StepSchedule::basic(rc.n_iters, p.constants, p.dims, st.opt.extra);
  rc.checkpoints = {rc.n_iters};
  const InitialPoint ip = default_initial_point(p);
  const RunTrace trace = run_basic_cspd(p, rc);
  const double R = theory_constant_R(ref, ip, effective_constants(p.constants, p.dims));
  const double bound = 2.0 * R * std::exp(2.0);
  const double observed = trace.final_state.max_dual_sq;
  const bool bound_ok = observed <= bound;

  r.passed = growth_ok && bound_ok;
  r.detail = "worst max|gamma| ratio N=1e5 vs 1e4 " + fmt("%.2f", worst_ratio) +
             "; theory run max|(gamma,lambda)|^2 " + fmt("%.3e", observed) + " vs 2Re^2 " +
             fmt("%.3e", bound) + failures_text(res);
  return r;
}

CriterionResult criterion_lower_bound(SuiteState& st) {
  CriterionResult r{9, "Multiplier lower bound", true, ""};
  if (st.bound_rows == 0) {
    ExperimentConfig c = st.base("qcqp", ThetaMode::Boundary);
    c.n_list = {1000, 10000};
    c.seeds = {1, 2, 3};
    st.run(c);
  }
  r.passed = st.bound_bad == 0;
  r.detail = std::to_string(st.bound_rows) + " checkpoints, " + std::to_string(st.bound_bad) +
             " below bound; smallest obj_gap - bound " + fmt("%.3e", st.bound_worst);
  return r;
}

bool same_record(const CheckpointRecord& a, const CheckpointRecord& b) {
  auto bits_equal = [](const Vec& u, const Vec& v) {
    return u.size() == v.size() &&
           std::equal(u.data(), u.data() + u.size(), v.data(), [](double s, double t) {
             return std::memcmp(&s, &t, sizeof(double)) == 0;
           });
  };
  auto same = [](double s, double t) { return std::memcmp(&s, &t, sizeof(double)) == 0; };
  return a.t == b.t && bits_equal(a.x_bar, b.x_bar) && bits_equal(a.y_bar, b.y_bar) &&
         same(a.gamma_norm_max, b.gamma_norm_max) && same(a.lambda_norm_max, b.lambda_norm_max) &&
         same(a.dual_sq_max, b.dual_sq_max);
}

CriterionResult criterion_prefix(SuiteState& st) {
  CriterionResult r{10, "Adaptive prefix consistency", true, ""};
  const QcqpInstance inst = generate_qcqp({10, 5, 1, ThetaMode::Boundary});
  RunConfig rc;
  rc.seed = splitmix64(st.opt.master_seed ^ splitmix64(1));
  rc.schedule = StepSchedule::adaptive_with(experiment_coefficients("qcqp"),
                                            times(kQcqpDeskScale, st.opt.extra));
  rc.n_iters = 10000;
  rc.checkpoints = {1000, 10000};
  const RunTrace longer = run_adp_cspd(inst.problem, rc);
  rc.n_iters = 1000;
  rc.checkpoints = {1000};
  const RunTrace shorter = run_adp_cspd(inst.problem, rc);
  r.passed = same_record(longer.records[0], shorter.records[0]);
  r.detail = r.passed ? "checkpoint t=1e3 of the N=1e4 run is bitwise equal to the N=1e3 run"
                      : "checkpoint t=1e3 differs between the N=1e4 and N=1e3 runs";
  return r;
}

CriterionResult criterion_pricing(SuiteState& st) {
  CriterionResult r{11, "Pricing scalability smoke test", true, ""};
  ExperimentConfig c = st.base("pricing", ThetaMode::Boundary);
  c.solvers = {SolverKind::Adaptive};
  c.n_list = {1000, 10000, 100000};
  c.seeds = {1, 2, 3};
  const ExperimentResult res = st.run(c);
  r.passed = res.complete();
  std::vector<double> gaps, feas;
  for (const auto& [n, rows] : rows_by_n(res, SolverKind::Adaptive)) {
    gaps.push_back(mean_of(rows, [](const RunRow& x) { return std::abs(x.gap.obj_gap); }));
    feas.push_back(mean_of(rows, [](const RunRow& x) { return x.gap.feas_x; }));
  }
  r.passed = r.passed && gaps.size() == 3;
  for (std::size_t i = 1; i < gaps.size(); ++i) {
    r.passed = r.passed && gaps[i] < gaps[i - 1] && feas[i] < feas[i - 1];
  }
  std::string detail = "d=20 m=500, mean |gap|";
  for (double g : gaps) detail += " " + fmt("%.3g", g);
  detail += ", mean feas_x";
  for (double f : feas) detail += " " + fmt("%.3g", f);
  r.detail = detail + failures_text(res);
  return r;
}

CriterionResult criterion_determinism(SuiteState& st) {
  CriterionResult r{12, "Determinism", true, ""};
  ExperimentConfig c = st.base("qcqp", ThetaMode::Boundary);
  c.n_list = {1000};
  for (std::uint64_t s = 1; s <= 10; ++s) c.seeds.push_back(s);
  c.duality_gap = true;
  c.jobs = 1;
  const ExperimentResult first = run_experiment(c);
  c.jobs = 2;
  const ExperimentResult second = run_experiment(c);
  r.passed = first.csv == second.csv && first.complete();
  r.detail = std::to_string(first.rows.size()) + " rows, " + std::to_string(first.csv.size()) +
             " bytes; repeat (jobs=2) " + (first.csv == second.csv ? "identical" : "differs");
  return r;
}

}  // namespace

ToyGridSaddle toy_grid_saddle() {
  // f(x, y) = x'Ay with A = [[1,-1],[-1,1]] equals (x1 - x2)(y1 - y2), so each
  // player's payoff against a fixed opponent depends on the opponent only
  // through one difference. Grid: multiples of 1e-3 in [0,1]^2 with
  // z1 + 2 z2 <= 1.4, tested in integer units.
  const int kRes = 1000;
  const int kBudget = 1400;
  int dmin = 0, dmax = 0;  // range of z1 - z2 over the feasible grid, in units
  for (int i = 0; i <= kRes; ++i) {
    for (int j = 0; j <= kRes; ++j) {
      if (i + 2 * j > kBudget) continue;
      dmin = std::min(dmin, i - j);
      dmax = std::max(dmax, i - j);
    }
  }
  const double lo = dmin / static_cast<double>(kRes);
  const double hi = dmax / static_cast<double>(kRes);
  // x minimizes max_y (x1-x2)(y1-y2); by symmetry y maximizes min_x of the same.
  double best_x = std::numeric_limits<double>::infinity();
  double best_y = -std::numeric_limits<double>::infinity();
  int xi = 0, xj = 0, yi = 0, yj = 0;
  for (int i = 0; i <= kRes; ++i) {
    for (int j = 0; j <= kRes; ++j) {
      if (i + 2 * j > kBudget) continue;
      const double u = (i - j) / static_cast<double>(kRes);
      const double worst_for_x = std::max(u * hi, u * lo);
      const double worst_for_y = std::min(u * hi, u * lo);
      if (worst_for_x < best_x) {
        best_x = worst_for_x;
        xi = i;
        xj = j;
      }
      if (worst_for_y > best_y) {
        best_y = worst_for_y;
        yi = i;
        yj = j;
      }
    }
  }
  ToyGridSaddle out;
  out.ref.x_star = Vec(2);
  out.ref.x_star << xi / static_cast<double>(kRes), xj / static_cast<double>(kRes);
  out.ref.y_star = Vec(2);
  out.ref.y_star << yi / static_cast<double>(kRes), yj / static_cast<double>(kRes);
  // Both budgets are slack at the returned points, so the multipliers vanish.
  out.ref.gamma_star = Vec::Zero(1);
  out.ref.lambda_star = Vec::Zero(1);
  out.ref.f_star = (out.ref.x_star[0] - out.ref.x_star[1]) * (out.ref.y_star[0] - out.ref.y_star[1]);
  out.ref.tolerance = 1.0 / kRes;
  out.value = best_x;
  return out;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, std::ostream& out) {
  std::set<int> wanted(options.criteria.begin(), options.criteria.end());
  for (int id : wanted) {
    if (id < 1 || id > 12) throw ConfigError("acceptance: criterion ids are 1..12");
  }
  auto want = [&](int id) { return wanted.empty() || wanted.count(id) > 0; };
  SuiteState st(options);
  std::vector<CriterionResult> results;
  auto report = [&](CriterionResult r) {
    out << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << ": " << r.detail
        << std::endl;
    results.push_back(std::move(r));
  };
  auto guarded = [&](int id, const char* name, const std::function<CriterionResult()>& f) {
    if (!want(id)) return;
    try {
      report(f());
    } catch (const std::exception& e) {
      report(CriterionResult{id, name, false, std::string("error: ") + e.what()});
    }
  };
  const std::uint64_t m = options.master_seed;
  guarded(1, "Prox-oracle equivalence", [&] { return criterion_prox_equivalence(m); });
  guarded(2, "Three-point inequality", [&] { return criterion_three_point(m); });
  guarded(3, "Oracle unbiasedness", [&] { return criterion_unbiasedness(m); });
  guarded(4, "Zero-sum toy ground truth", [&] { return criterion_toy(st); });
  guarded(5, "Rate claim, objective gap", [&] { return criterion_rate(st, 5, false); });
  guarded(6, "Rate claim, feasibility", [&] { return criterion_rate(st, 6, true); });
  guarded(7, "Interior-mode feasibility vanishes", [&] { return criterion_interior(st); });
  guarded(8, "Dual boundedness", [&] { return criterion_dual_bound(st); });
  guarded(10, "Adaptive prefix consistency", [&] { return criterion_prefix(st); });
  guarded(11, "Pricing scalability smoke test", [&] { return criterion_pricing(st); });
  guarded(12, "Determinism", [&] { return criterion_determinism(st); });
  guarded(9, "Multiplier lower bound", [&] { return criterion_lower_bound(st); });
  std::sort(results.begin(), results.end(),
            [](const CriterionResult& a, const CriterionResult& b) { return a.id < b.id; });
  return results;
}

AcceptanceOptions parse_acceptance_options(const nlohmann::json& j) {
  AcceptanceOptions o;
  if (!j.is_object()) throw ConfigError("check config: expected an object");
  auto bad = [](const std::string& field, const std::string& why) {
    throw ConfigError("config field '" + field + "': " + why);
  };
  for (const auto& [k, v] : j.items()) {
    if (k != "criteria" && k != "schedule" && k != "reference" && k != "jobs" &&
        k != "master_seed") {
      bad(k, "unknown key");
    }
  }
  try {
    if (j.contains("criteria")) o.criteria = j["criteria"].get<std::vector<int>>();
    if (j.contains("schedule")) {
      const auto& s = j["schedule"];
      for (const auto& [k, v] : s.items()) {
        if (k != "dual_scale" && k != "primal_scale") bad("schedule." + k, "unknown key");
      }
      o.extra.dual_scale = s.value("dual_scale", 1.0);
      o.extra.primal_scale = s.value("primal_scale", 1.0);
    }
    if (j.contains("reference")) o.reference_tol = j["reference"].value("target_tol", 1e-8);
    if (j.contains("jobs")) o.jobs = j["jobs"].get<int>();
    if (j.contains("master_seed")) o.master_seed = j["master_seed"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("check config: ") + e.what());
  }
  for (int id : o.criteria) {
    if (id < 1 || id > 12) bad("criteria", "ids must be in 1..12");
  }
  if (!(o.extra.dual_scale > 0.0) || !std::isfinite(o.extra.dual_scale)) {
    bad("schedule.dual_scale", "must be positive and finite");
  }
  if (!(o.extra.primal_scale > 0.0) || !std::isfinite(o.extra.primal_scale)) {
    bad("schedule.primal_scale", "must be positive and finite");
  }
  if (!(o.reference_tol > 0.0)) bad("reference.target_tol", "must be positive");
  if (o.jobs < 1) bad("jobs", "must be >= 1");
  return o;
}

}  // namespace cspd

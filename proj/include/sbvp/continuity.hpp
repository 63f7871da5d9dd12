#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sbvp/solver.hpp"
#include "sbvp/trend.hpp"

namespace sbvp {

/// Geometric parameter schedule eps_k = start * ratio^k, k = 0..count.
struct EpsSchedule {
  double start = 0.1;
  double ratio = 0.5;
  int count = 10;

  std::vector<double> values() const {
    if (!(start > 0.0) || !(ratio > 0.0 && ratio < 1.0) || count < 0)
      throw DomainError("epsilon schedule: need start > 0, ratio in (0,1), count >= 0");
    std::vector<double> v;
    double e = start;
    for (int k = 0; k <= count; ++k, e *= ratio) v.push_back(e);
    return v;
  }
};

/// A parameter-dependent family: the base problem at eps = 0 plus instances
/// sampled along a strictly decreasing positive schedule. All instances share
/// the dimensional parameters and the grid.
struct ParamFamily {
  ProblemInstance base;
  std::vector<std::pair<double, ProblemInstance>> instances;

  void validate() const {
    base.validate();
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& [eps, inst] : instances) {
      if (!(eps > 0.0) || !(eps < prev))
        throw DomainError("family: epsilon values must be positive and strictly decreasing");
      prev = eps;
      inst.validate();
      if (!(inst.system.params == base.system.params))
        throw DimensionError("family: instances must share the Sobolev parameters");
      if (!inst.system.grid().same_as(base.system.grid()))
        throw DimensionError("family: instances must share the grid");
    }
  }

  std::vector<double> epsilons() const {
    std::vector<double> v;
    v.reserve(instances.size());
    for (const auto& [eps, inst] : instances) v.push_back(eps);
    return v;
  }
};

inline ParamFamily make_param_family(
    const std::function<ProblemInstance(double)>& instance_at, const EpsSchedule& schedule) {
  ParamFamily fam{instance_at(0.0), {}};
  for (double eps : schedule.values()) fam.instances.emplace_back(eps, instance_at(eps));
  fam.validate();
  return fam;
}

struct LimitISection {
  std::vector<SequenceCheck> coefficients;  // one sequence per A_k
  Verdict verdict = Verdict::inconclusive;
};

struct LimitIISection {
  std::vector<SequenceCheck> probes;
  Verdict verdict = Verdict::inconclusive;
  // finite probe sets witness strong operator convergence, they cannot prove it
  std::string note = "probe verdicts are evidence, not proof, of strong convergence";
};

struct CanonicalLimitSection {
  std::vector<SequenceCheck> trace_matrices;  // per alpha_k, entry-sum deviations
  SequenceCheck kernel_norms;                 // L_q norms, boundedness heuristic
  SequenceCheck primitive_deviations;         // max over interior checkpoints
  Verdict verdict = Verdict::inconclusive;
};

struct TwoSidedRow {
  double eps = 0.0;
  double error = 0.0;        // ||y(.,0) - y(.,eps)||_{n+r,p}
  double discrepancy = 0.0;  // d_{n,p}(eps)
  double ratio = 0.0;
  bool ratio_defined = false;
  bool solved = false;
};

struct TwoSidedReport {
  std::vector<TwoSidedRow> rows;
  double gamma_lo = 0.0;
  double gamma_hi = 0.0;
  bool band_defined = false;
  std::optional<double> fitted_rate_error;
  std::optional<double> fitted_rate_discrepancy;
  std::vector<double> failed_eps;  // instances whose solve hit a singular matrix
};

struct ContinuityReport {
  Verdict cond0 = Verdict::inconclusive;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  LimitISection limit_i;
  LimitIISection limit_ii;
  std::optional<CanonicalLimitSection> canonical;
  Verdict overall = Verdict::inconclusive;
  std::optional<TwoSidedReport> experiment;
};

struct ContinuityOptions {
  double trend_tol = 1e-6;
  int min_samples = 4;
  double eps_cut = std::numeric_limits<double>::infinity();
  int fit_tail = 6;       // points entering the log-log rate fit, at least 4 kept
  int probe_degree = -1;  // top monomial degree of the default probes; -1 = n+r+2
  SolveOptions solve;
};

/// Default probe basis: per component, monomials t^d for d = 0..n+r+2 and
/// sin t, cos t, all carried as order-(n+r) stacks.
inline std::vector<GridFunction> default_probes(const SobolevParams& params,
                                                const Grid& grid, int max_degree = -1) {
  const int order = params.stack_order();
  if (max_degree < 0) max_degree = order + 2;
  std::vector<GridFunction> probes;
  auto place = [&](const ScalarSampler& f, int comp) {
    probes.push_back(make_grid_function(
        grid, Shape::vector(params.m), order,
        [&](int j, double t) {
          Matrix v = Matrix::Zero(params.m, 1);
          v(comp, 0) = f(j, t);
          return v;
        },
        // loose tolerance: closed forms are exact, only quadrature error enters
        1e-6));
  };
  for (int comp = 0; comp < params.m; ++comp) {
    for (int d = 0; d <= max_degree; ++d) {
      place(
          [d](int j, double t) -> complexd {
            if (j > d) return 0.0;
            double coef = 1.0;
            for (int k = 0; k < j; ++k) coef *= double(d - k);
            return coef * std::pow(t, d - j);
          },
          comp);
    }
    place(
        [](int j, double t) -> complexd {
          switch (j % 4) {
            case 0: return std::sin(t);
            case 1: return std::cos(t);
            case 2: return -std::sin(t);
            default: return -std::cos(t);
          }
        },
        comp);
    place(
        [](int j, double t) -> complexd {
          switch (j % 4) {
            case 0: return std::cos(t);
            case 1: return -std::sin(t);
            case 2: return -std::cos(t);
            default: return std::sin(t);
          }
        },
        comp);
  }
  return probes;
}

inline std::string probe_label(const SobolevParams& params, size_t index,
                               int max_degree = -1) {
  if (max_degree < 0) max_degree = params.stack_order() + 2;
  const int per_comp = max_degree + 3;  // degrees 0..max, sin, cos
  const int comp = static_cast<int>(index) / per_comp;
  const int k = static_cast<int>(index) % per_comp;
  std::string base;
  if (k < per_comp - 2)
    base = "t^" + std::to_string(k);
  else
    base = (k == per_comp - 2) ? "sin" : "cos";
  return "c" + std::to_string(comp) + "." + base;
}

/// Limit Condition (I): coefficient convergence in W^n_p, one deviation
/// sequence per coefficient matrix.
inline LimitISection check_limit_I(const ParamFamily& fam, double tol,
                                   int min_samples = 4) {
  fam.validate();
  if (static_cast<int>(fam.instances.size()) < min_samples)
    throw DomainError("check_limit_I: schedule too short for a trend verdict");
  const SobolevParams& P = fam.base.system.params;
  LimitISection section;
  for (int k = 0; k < P.r; ++k) {
    SequenceCheck check;
    check.item = "A" + std::to_string(k);
    for (const auto& [eps, inst] : fam.instances) {
      check.values.push_back(
          sobolev_norm(inst.system.coeffs[static_cast<size_t>(k)] -
                           fam.base.system.coeffs[static_cast<size_t>(k)],
                       P.n, P.p));
    }
    check.verdict = trend_to_zero(check.values, tol);
    section.coefficients.push_back(std::move(check));
  }
  section.verdict = conjunction_over(section.coefficients);
  return section;
}

/// Limit Condition (II) on a family of boundary operators, witnessed on a
/// fixed probe set: deviations ||B(eps) y - B(0) y|| per probe.
inline LimitIISection check_limit_II_operators(
    const BoundaryOperator& base,
    const std::vector<std::pair<double, BoundaryOperator>>& operators,
    const std::vector<GridFunction>& probes, double tol,
    const std::function<std::string(size_t)>& label = {}) {
  LimitIISection section;
  for (size_t pi = 0; pi < probes.size(); ++pi) {
    SequenceCheck check;
    check.item = label ? label(pi) : ("probe" + std::to_string(pi));
    const Vector base_value = apply_boundary_operator(base, probes[pi]);
    for (const auto& [eps, op] : operators)
      check.values.push_back(
          (apply_boundary_operator(op, probes[pi]) - base_value).norm());
    check.verdict = trend_to_zero(check.values, tol);
    section.probes.push_back(std::move(check));
  }
  section.verdict = conjunction_over(section.probes);
  return section;
}

inline LimitIISection check_limit_II_probes(const ParamFamily& fam,
                                            std::vector<GridFunction> probes,
                                            double tol, int probe_degree = -1) {
  fam.validate();
  const SobolevParams& P = fam.base.system.params;
  std::function<std::string(size_t)> label;  // pretty labels for the default basis
  if (probes.empty()) {
    probes = default_probes(P, fam.base.system.grid(), probe_degree);
    label = [&P, probe_degree](size_t i) { return probe_label(P, i, probe_degree); };
  }
  for (const GridFunction& probe : probes)
    if (probe.order() < P.stack_order())
      throw InsufficientOrderError("check_limit_II: probe stack order must reach n+r");
  std::vector<std::pair<double, BoundaryOperator>> ops;
  ops.reserve(fam.instances.size());
  for (const auto& [eps, inst] : fam.instances) ops.emplace_back(eps, inst.boundary);
  return check_limit_II_operators(fam.base.boundary, ops, probes, tol, label);
}

/// Canonical-form equivalent of the operator limit condition: the trace
/// matrices converge, the kernel L_q norms stay bounded, and the kernel
/// primitives converge at nine interior checkpoints.
inline CanonicalLimitSection check_canonical_limits(const ParamFamily& fam, double tol) {
  fam.validate();
  const SobolevParams& P = fam.base.system.params;
  const Grid& grid = fam.base.system.grid();
  const auto* base_form = std::get_if<CanonicalBoundaryForm>(&fam.base.boundary);
  if (!base_form)
    throw DomainError("check_canonical_limits: requires canonical boundary forms");
  for (const auto& [eps, inst] : fam.instances)
    if (!is_canonical(inst.boundary))
      throw DomainError("check_canonical_limits: requires canonical boundary forms");

  CanonicalLimitSection section;
  for (int k = 0; k < P.boundary_count(); ++k) {
    SequenceCheck check;
    check.item = "alpha" + std::to_string(k + 1);
    for (const auto& [eps, inst] : fam.instances) {
      const auto& form = std::get<CanonicalBoundaryForm>(inst.boundary);
      check.values.push_back((form.alphas[static_cast<size_t>(k)] -
                              base_form->alphas[static_cast<size_t>(k)])
                                 .cwiseAbs()
                                 .sum());
    }
    check.verdict = trend_to_zero(check.values, tol);
    section.trace_matrices.push_back(std::move(check));
  }

  const double q = P.conjugate_exponent();
  section.kernel_norms.item = "kernel";
  for (const auto& [eps, inst] : fam.instances) {
    const auto& form = std::get<CanonicalBoundaryForm>(inst.boundary);
    section.kernel_norms.values.push_back(form.kernel ? lq_kernel_norm(*form.kernel, q)
                                                      : 0.0);
  }
  section.kernel_norms.verdict = bounded_verdict(section.kernel_norms.values);

  // primitives at the interior checkpoints a + i(b-a)/10, i = 1..9, compared
  // entrywise against the base primitive
  auto primitive_at_checkpoints = [&](const std::optional<GridFunction>& kernel) {
    std::vector<Matrix> out;
    const int rm = P.system_size();
    if (!kernel) {
      out.assign(9, Matrix::Zero(rm, P.m));
      return out;
    }
    const std::vector<Matrix> prefix = cumulative_integrate<Matrix>(
        grid, [&](int i) -> Matrix { return kernel->value(0, i); },
        Matrix::Zero(rm, P.m));
    for (int i = 1; i <= 9; ++i) {
      const int node = (grid.num_intervals * i) / 10;
      out.push_back(prefix[static_cast<size_t>(node)]);
    }
    return out;
  };
  const std::vector<Matrix> base_prim = primitive_at_checkpoints(base_form->kernel);
  section.primitive_deviations.item = "primitive";
  for (const auto& [eps, inst] : fam.instances) {
    const auto& form = std::get<CanonicalBoundaryForm>(inst.boundary);
    const std::vector<Matrix> prim = primitive_at_checkpoints(form.kernel);
    double dev = 0.0;
    for (size_t i = 0; i < prim.size(); ++i)
      dev = std::max(dev, (prim[i] - base_prim[i]).cwiseAbs().sum());
    section.primitive_deviations.values.push_back(dev);
  }
  section.primitive_deviations.verdict =
      trend_to_zero(section.primitive_deviations.values, tol);

  section.verdict = conjunction(conjunction_over(section.trace_matrices),
                                conjunction(section.kernel_norms.verdict,
                                            section.primitive_deviations.verdict));
  return section;
}

/// Solves the base problem and every instance, tabulating the error
/// ||y(.,0) - y(.,eps)||_{n+r,p} against the discrepancy d_{n,p}(eps). The
/// ratio band [gamma_lo, gamma_hi] is taken over eps below eps_cut; rates are
/// least-squares slopes over the tail of the schedule.
inline TwoSidedReport convergence_experiment(const ParamFamily& fam,
                                             const ContinuityOptions& opts = {}) {
  fam.validate();
  const SobolevParams& P = fam.base.system.params;
  const SolveReport base = solve_bvp(fam.base, opts.solve);
  const double scale =
      sobolev_norm(base.y, P.stack_order(), P.p) + fam.base.c.norm() + 1.0;
  const double denom_floor = 1e2 * std::numeric_limits<double>::epsilon() * scale;

  TwoSidedReport report;
  for (const auto& [eps, inst] : fam.instances) {
    TwoSidedRow row;
    row.eps = eps;
    try {
      const SolveReport sr = solve_bvp(inst, opts.solve);
      row.solved = true;
      row.error = sobolev_norm(base.y - sr.y, P.stack_order(), P.p);
      row.discrepancy = discrepancy(inst, base.y);
      if (row.discrepancy > denom_floor) {
        row.ratio = row.error / row.discrepancy;
        row.ratio_defined = true;
      }
    } catch (const NoUniqueSolutionError&) {
      report.failed_eps.push_back(eps);
    }
    report.rows.push_back(row);
  }

  for (const TwoSidedRow& row : report.rows) {
    if (!row.solved || !row.ratio_defined || row.eps > opts.eps_cut) continue;
    if (!report.band_defined) {
      report.gamma_lo = report.gamma_hi = row.ratio;
      report.band_defined = true;
    } else {
      report.gamma_lo = std::min(report.gamma_lo, row.ratio);
      report.gamma_hi = std::max(report.gamma_hi, row.ratio);
    }
  }

  std::vector<double> eps_tail, err_tail, disc_tail;
  const int tail = std::max(4, opts.fit_tail);
  for (size_t i = report.rows.size() >= static_cast<size_t>(tail)
                      ? report.rows.size() - static_cast<size_t>(tail)
                      : 0;
       i < report.rows.size(); ++i) {
    if (!report.rows[i].solved) continue;
    eps_tail.push_back(report.rows[i].eps);
    err_tail.push_back(report.rows[i].error);
    disc_tail.push_back(report.rows[i].discrepancy);
  }
  report.fitted_rate_error = fit_log_slope(eps_tail, err_tail);
  report.fitted_rate_discrepancy = fit_log_slope(eps_tail, disc_tail);
  return report;
}

/// Aggregated criterion: Condition (0) at the base problem plus Limit
/// Conditions (I) and (II) (and their canonical-form equivalent when all
/// boundary operators are canonical). On an overall pass the convergence
/// experiment is attached as empirical corroboration.
inline ContinuityReport full_criterion(const ParamFamily& fam,
                                       std::vector<GridFunction> probes = {},
                                       const ContinuityOptions& opts = {}) {
  fam.validate();
  ContinuityReport report;

  const FirstOrderProblem red = companion_reduce(fam.base);
  const FundamentalMatrix fund =
      fundamental_matrix(red.state_matrix, opts.solve.fundamental_rank_tol);
  const CharacteristicMatrix cm = characteristic_matrix(fund, red.boundary);
  report.sigma_min = cm.sigma_min;
  report.sigma_max = cm.sigma_max;
  report.cond0 = condition0_check(cm, opts.solve.singular_tol) == Solvability::nonsingular
                     ? Verdict::pass
                     : Verdict::fail;

  report.limit_i = check_limit_I(fam, opts.trend_tol, opts.min_samples);
  report.limit_ii =
      check_limit_II_probes(fam, std::move(probes), opts.trend_tol, opts.probe_degree);

  bool all_canonical = is_canonical(fam.base.boundary);
  for (const auto& [eps, inst] : fam.instances)
    all_canonical = all_canonical && is_canonical(inst.boundary);
  if (all_canonical) report.canonical = check_canonical_limits(fam, opts.trend_tol);

  report.overall = conjunction(report.cond0,
                               conjunction(report.limit_i.verdict, report.limit_ii.verdict));
  if (report.canonical)
    report.overall = conjunction(report.overall, report.canonical->verdict);

  if (report.overall == Verdict::pass)
    report.experiment = convergence_experiment(fam, opts);
  return report;
}

}  // namespace sbvp

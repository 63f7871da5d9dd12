#include <catch2/catch_amalgamated.hpp>

#include "sbvp/continuity.hpp"
#include "test_helpers.hpp"

using namespace sbvp;
using namespace sbvp::testing;

namespace {

constexpr double kPi = 3.14159265358979323846;
const Grid kGrid(0.0, 1.0, 2000);

// y' + (1+eps) y = 0, y(0) = 1
ParamFamily decay_family(int count = 10) {
  const SobolevParams params(0, 2.0, 1, 1);
  return make_param_family(
      [&](double eps) {
        return scalar_problem(kGrid, params, {constant(1.0 + eps)}, constant(0.0),
                              initial_value_form(params), Vector::Ones(1));
      },
      EpsSchedule{0.1, 0.5, count});
}

ContinuityOptions with_tol(double tol) {
  ContinuityOptions opts;
  opts.trend_tol = tol;
  return opts;
}

}  // namespace

TEST_CASE("epsilon schedules are geometric and validated", "[continuity]") {
  const std::vector<double> v = EpsSchedule{0.1, 0.5, 3}.values();
  REQUIRE(v.size() == 4);
  CHECK(v[3] == Catch::Approx(0.0125));
  CHECK_THROWS_AS((EpsSchedule{0.1, 1.5, 3}.values()), DomainError);
  CHECK_THROWS_AS((EpsSchedule{-0.1, 0.5, 3}.values()), DomainError);
}

TEST_CASE("limit condition I: converging coefficients with closed-form deviations",
          "[continuity]") {
  // A0(t, eps) = 1 + eps sin t: deviation = eps ||sin||_{0,2}
  const SobolevParams params(0, 2.0, 1, 1);
  const ParamFamily fam = make_param_family(
      [&](double eps) {
        return scalar_problem(
            kGrid, params,
            {[eps](int j, double t) -> complexd {
              return j == 0 ? complexd(1.0 + eps * std::sin(t)) : complexd(0.0);
            }},
            constant(0.0), initial_value_form(params), Vector::Ones(1));
      },
      EpsSchedule{0.1, 0.5, 10});
  const LimitISection section = check_limit_I(fam, 1e-3);
  REQUIRE(section.coefficients.size() == 1);
  const double sin_norm = std::sqrt(0.5 - std::sin(2.0) / 4.0);
  for (size_t k = 0; k < section.coefficients[0].values.size(); ++k)
    CHECK(section.coefficients[0].values[k] ==
          Catch::Approx(0.1 * std::pow(0.5, double(k)) * sin_norm).margin(1e-8));
  CHECK(section.verdict == Verdict::pass);

  // identical coefficients: all deviations vanish
  const ParamFamily constant_fam = make_param_family(
      [&](double) {
        return scalar_problem(kGrid, params, {constant(1.0)}, constant(0.0),
                              initial_value_form(params), Vector::Ones(1));
      },
      EpsSchedule{0.1, 0.5, 5});
  const LimitISection zeros = check_limit_I(constant_fam, 1e-6);
  CHECK(zeros.verdict == Verdict::pass);
  CHECK(zeros.coefficients[0].values.back() == 0.0);

  CHECK_THROWS_AS(check_limit_I(constant_fam, 1e-6, 10), DomainError);
}

TEST_CASE("limit condition I: oscillation without convergence fails", "[continuity]") {
  // A0(t, eps) = 1 + sin(t/eps) stagnates near ||sin(t/.)||_{L_2} ~ 0.7
  const SobolevParams params(0, 2.0, 1, 1);
  const ParamFamily fam = make_param_family(
      [&](double eps) {
        return scalar_problem(
            kGrid, params,
            {[eps](int j, double t) -> complexd {
              if (j != 0) return 0.0;
              return eps == 0.0 ? complexd(1.0) : complexd(1.0 + std::sin(t / eps));
            }},
            constant(0.0), initial_value_form(params), Vector::Ones(1));
      },
      EpsSchedule{0.1, 0.5, 5});
  const LimitISection section = check_limit_I(fam, 1e-6);
  CHECK(section.verdict == Verdict::fail);
  CHECK(section.coefficients[0].values.back() > 0.5);
}

TEST_CASE("limit condition II: constant and converging operators pass", "[continuity]") {
  CHECK(check_limit_II_probes(decay_family(), {}, 1e-6).verdict == Verdict::pass);

  // multipoint operator y(t1 + eps) -> y(t1)
  const SobolevParams params(0, 2.0, 1, 1);
  const ParamFamily fam = make_param_family(
      [&](double eps) {
        MultipointBoundaryForm form;
        form.groups.push_back(MultipointGroup{
            0.25, {MultipointTerm{0.25 + eps, {Matrix::Identity(1, 1)}}}});
        return scalar_problem(kGrid, params, {constant(1.0)}, constant(0.0),
                              std::move(form), Vector::Ones(1));
      },
      EpsSchedule{0.1, 0.5, 10});
  const LimitIISection section = check_limit_II_probes(fam, {}, 1e-3);
  CHECK(section.verdict == Verdict::pass);
  CHECK_FALSE(section.note.empty());
}

TEST_CASE("limit condition II: wandering evaluation point fails on a probe",
          "[continuity]") {
  const SobolevParams params(0, 2.0, 1, 1);
  const ParamFamily fam = make_param_family(
      [&](double eps) {
        const double point = eps == 0.0 ? 0.5 : 0.5 + 0.25 * std::sin(1.0 / eps);
        MultipointBoundaryForm form;
        form.groups.push_back(
            MultipointGroup{0.5, {MultipointTerm{point, {Matrix::Identity(1, 1)}}}});
        return scalar_problem(kGrid, params, {constant(1.0)}, constant(0.0),
                              std::move(form), Vector::Ones(1));
      },
      EpsSchedule{0.1, 0.5, 10});
  const LimitIISection section = check_limit_II_probes(fam, {}, 1e-6);
  CHECK(section.verdict == Verdict::fail);
  // the linear probe alone witnesses the failure
  for (const auto& probe : section.probes)
    if (probe.item == "c0.t^1") CHECK(probe.verdict == Verdict::fail);
}

TEST_CASE("canonical-form limit checks", "[continuity]") {
  const SobolevParams params(0, 2.0, 1, 1);
  auto family_with_kernel = [&](const std::function<ScalarSampler(double)>& kernel_at) {
    return make_param_family(
        [&](double eps) {
          CanonicalBoundaryForm form = initial_value_form(params);
          form.kernel = coeff_gf(kGrid, 0, kernel_at(eps));
          return scalar_problem(kGrid, params, {constant(1.0)}, constant(0.0),
                                std::move(form), Vector::Ones(1));
        },
        EpsSchedule{0.1, 0.5, 5});
  };

  SECTION("constant forms pass all three conditions") {
    const CanonicalLimitSection s =
        check_canonical_limits(family_with_kernel([](double) { return sine(); }), 1e-6);
    CHECK(s.verdict == Verdict::pass);
    CHECK(s.kernel_norms.verdict == Verdict::pass);
    CHECK(s.primitive_deviations.values.back() == 0.0);
  }

  SECTION("oscillatory kernel: bounded norms, vanishing primitives") {
    // Phi(t, eps) = sin(t/eps): L_2 norms ~ 1/sqrt(2), primitives O(eps)
    const CanonicalLimitSection s = check_canonical_limits(
        family_with_kernel([](double eps) {
          return ScalarSampler([eps](int, double t) -> complexd {
            return eps == 0.0 ? complexd(0.0) : complexd(std::sin(t / eps));
          });
        }),
        0.05);
    CHECK(s.kernel_norms.verdict == Verdict::pass);
    CHECK(s.primitive_deviations.verdict == Verdict::pass);
    CHECK(s.verdict == Verdict::pass);
    // primitives are O(eps): int_0^t sin(s/eps) ds = eps (1 - cos(t/eps))
    CHECK(s.primitive_deviations.values.back() < 2.1 * 0.1 * std::pow(0.5, 5.0));
  }

  SECTION("concentrating spike with 1/eps scaling fails boundedness") {
    const CanonicalLimitSection s = check_canonical_limits(
        family_with_kernel([](double eps) {
          return ScalarSampler([eps](int, double t) -> complexd {
            if (eps == 0.0) return 0.0;
            return t <= eps ? complexd(1.0 / eps) : complexd(0.0);
          });
        }),
        1e-6);
    CHECK(s.kernel_norms.verdict == Verdict::fail);
    CHECK(s.verdict == Verdict::fail);
    // the L_2 norm grows like eps^{-1/2}
    CHECK(s.kernel_norms.values.back() > 4.0 * s.kernel_norms.values.front());
  }

  SECTION("multipoint forms are rejected") {
    MultipointBoundaryForm form;
    form.groups.push_back(
        MultipointGroup{0.0, {MultipointTerm{0.0, {Matrix::Identity(1, 1)}}}});
    const ParamFamily fam = make_param_family(
        [&](double) {
          return scalar_problem(kGrid, params, {constant(1.0)}, constant(0.0), form,
                                Vector::Ones(1));
        },
        EpsSchedule{0.1, 0.5, 4});
    CHECK_THROWS_AS(check_canonical_limits(fam, 1e-6), DomainError);
  }
}

TEST_CASE("convergence experiment on the decay family", "[continuity]") {
  const TwoSidedReport report = convergence_experiment(decay_family());
  REQUIRE(report.rows.size() == 11);
  CHECK(report.failed_eps.empty());
  for (const TwoSidedRow& row : report.rows) {
    CHECK(row.solved);
    CHECK(row.ratio_defined);
    CHECK(row.ratio > 0.0);
  }
  // error and discrepancy are both Theta(eps): rate 1 and a narrow band
  REQUIRE(report.fitted_rate_error.has_value());
  CHECK(*report.fitted_rate_error == Catch::Approx(1.0).margin(0.1));
  REQUIRE(report.fitted_rate_discrepancy.has_value());
  CHECK(std::abs(*report.fitted_rate_error - *report.fitted_rate_discrepancy) <= 0.2);
  CHECK(report.band_defined);
  CHECK(report.gamma_hi / report.gamma_lo <= 10.0);
  // d(eps) = eps ||e^{-t}||_{0,2} exactly
  const double base_norm = std::sqrt((1.0 - std::exp(-2.0)) / 2.0);
  CHECK(report.rows[0].discrepancy == Catch::Approx(0.1 * base_norm).margin(1e-7));
}

TEST_CASE("convergence experiment flags degenerate and failing cases", "[continuity]") {
  const SobolevParams params(0, 2.0, 1, 1);
  // identical instances: zero error and discrepancy, undefined ratios
  const ParamFamily constant_fam = make_param_family(
      [&](double) {
        return scalar_problem(kGrid, params, {constant(1.0)}, constant(0.0),
                              initial_value_form(params), Vector::Ones(1));
      },
      EpsSchedule{0.1, 0.5, 4});
  const TwoSidedReport degenerate = convergence_experiment(constant_fam);
  for (const TwoSidedRow& row : degenerate.rows) {
    CHECK(row.solved);
    CHECK_FALSE(row.ratio_defined);
  }
  CHECK_FALSE(degenerate.band_defined);

  // quadratic data perturbation: exact rate 2 by linearity of the solve map
  const ParamFamily quadratic = make_param_family(
      [&](double eps) {
        return scalar_problem(
            kGrid, params, {constant(1.0)},
            [eps](int j, double t) -> complexd { return eps * eps * cosine()(j, t); },
            initial_value_form(params), Vector::Ones(1));
      },
      EpsSchedule{0.1, 0.5, 10});
  const TwoSidedReport quad_report = convergence_experiment(quadratic);
  REQUIRE(quad_report.fitted_rate_error.has_value());
  CHECK(*quad_report.fitted_rate_error == Catch::Approx(2.0).margin(0.1));
}

TEST_CASE("full criterion: passing family attaches the experiment", "[continuity]") {
  const ContinuityReport report =
      full_criterion(decay_family(11), {}, with_tol(1e-3));
  CHECK(report.cond0 == Verdict::pass);
  CHECK(report.limit_i.verdict == Verdict::pass);
  CHECK(report.limit_ii.verdict == Verdict::pass);
  REQUIRE(report.canonical.has_value());
  CHECK(report.canonical->verdict == Verdict::pass);
  CHECK(report.overall == Verdict::pass);
  REQUIRE(report.experiment.has_value());
  const auto& rows = report.experiment->rows;
  // e_k shrinks by three decades across the schedule
  CHECK(rows.back().error < 1e-3 * rows.front().error);
  // monotone decrease over the last four samples
  for (size_t i = rows.size() - 4; i + 1 < rows.size(); ++i)
    CHECK(rows[i + 1].error < rows[i].error);
}

TEST_CASE("full criterion: constant nonresonant family coincides", "[continuity]") {
  const SobolevParams params(0, 2.0, 1, 1);
  const ParamFamily fam = make_param_family(
      [&](double) {
        return scalar_problem(kGrid, params, {constant(1.0)}, constant(0.0),
                              initial_value_form(params), Vector::Ones(1));
      },
      EpsSchedule{0.1, 0.5, 5});
  const ContinuityReport report = full_criterion(fam, {}, with_tol(1e-6));
  CHECK(report.overall == Verdict::pass);
  REQUIRE(report.experiment.has_value());
  for (const TwoSidedRow& row : report.experiment->rows) {
    CHECK(row.error <= 1e-12);
    CHECK_FALSE(row.ratio_defined);  // zero discrepancy, flagged as undefined
  }
}

TEST_CASE("full criterion: resonant base fails Condition (0) only", "[continuity]") {
  const SobolevParams params(0, 2.0, 1, 2);
  const ParamFamily fam = make_param_family(
      [&](double eps) {
        return scalar_problem(kGrid, params, {constant(kPi * kPi + eps), constant(0.0)},
                              constant(0.0), two_point_dirichlet(params, 0.0, 1.0),
                              Vector::Zero(2));
      },
      EpsSchedule{0.1, 0.5, 8});
  const ContinuityReport report =
      full_criterion(fam, {}, with_tol(1e-3));
  CHECK(report.cond0 == Verdict::fail);
  CHECK(report.limit_i.verdict == Verdict::pass);
  CHECK(report.limit_ii.verdict == Verdict::pass);
  CHECK(report.overall == Verdict::fail);
  CHECK_FALSE(report.experiment.has_value());

  // the base problem raises the singular error while every positive-eps
  // instance solves
  CHECK_THROWS_AS(solve_bvp(fam.base), NoUniqueSolutionError);
  for (const auto& [eps, inst] : fam.instances) CHECK_NOTHROW(solve_bvp(inst));
}

TEST_CASE("full criterion: boundary offset fails Limit Condition (II)", "[continuity]") {
  const SobolevParams params(0, 2.0, 1, 1);
  const ParamFamily fam = make_param_family(
      [&](double eps) {
        CanonicalBoundaryForm form = initial_value_form(params);
        if (eps > 0.0) form.alphas[0](0, 0) = 1.3;  // persistent offset
        return scalar_problem(kGrid, params, {constant(1.0)}, constant(0.0),
                              std::move(form), Vector::Ones(1));
      },
      EpsSchedule{0.1, 0.5, 6});
  const ContinuityReport report =
      full_criterion(fam, {}, with_tol(1e-3));
  CHECK(report.cond0 == Verdict::pass);
  CHECK(report.limit_i.verdict == Verdict::pass);
  CHECK(report.limit_ii.verdict == Verdict::fail);
  REQUIRE(report.canonical.has_value());
  CHECK(report.canonical->verdict == Verdict::fail);
  CHECK(report.overall == Verdict::fail);
}

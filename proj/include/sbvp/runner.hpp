#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "sbvp/config.hpp"

namespace sbvp {

/// Exit codes of the batch front-end.
enum ExitCode : int {
  kExitPass = 0,      // solved / all checks passed
  kExitMathFail = 1,  // singular problem or a failed condition
  kExitUsage = 2,     // configuration or validation error
};

struct RunResult {
  int exit_code = kExitPass;
  std::vector<std::string> artifacts;  // relative paths, in write order
  std::vector<std::string> messages;   // human-readable notes and errors
};

namespace csv {

/// Fixed 17-significant-digit formatting, locale independent, so identical
/// configs produce byte-identical tables.
inline std::string number(double v) {
  if (!std::isfinite(v)) return "undef";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v,
                                 std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline const char* undef() { return "undef"; }

/// Rectangular table; entries are numeric tokens, verdict tokens, or `undef`.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }

  std::string render() const {
    std::string out;
    for (size_t i = 0; i < header.size(); ++i) {
      if (i) out += ',';
      out += header[i];
    }
    out += '\n';
    for (const auto& row : rows) {
      for (size_t i = 0; i < row.size(); ++i) {
        if (i) out += ',';
        out += row[i];
      }
      out += '\n';
    }
    return out;
  }
};

}  // namespace csv

namespace detail {

class ArtifactWriter {
 public:
  ArtifactWriter(std::filesystem::path dir, RunResult& result)
      : dir_(std::move(dir)), result_(result) {
    std::filesystem::create_directories(dir_);
  }

  void write_text(const std::string& name, const std::string& content) {
    std::ofstream out(dir_ / name, std::ios::binary);
    out << content;
    result_.artifacts.push_back(name);
  }

  void write_table(const std::string& name, const csv::Table& table) {
    write_text(name, table.render());
  }

  void finish() {
    std::string manifest;
    for (const auto& name : result_.artifacts) manifest += name + "\n";
    std::ofstream out(dir_ / "MANIFEST", std::ios::binary);
    out << manifest;
  }

 private:
  std::filesystem::path dir_;
  RunResult& result_;
};

inline csv::Table condition0_table(const CharacteristicMatrix& cm, double singular_tol) {
  csv::Table table;
  table.header = {"sigma_min", "sigma_max", "sigma_ratio", "verdict"};
  const bool singular = condition0_check(cm, singular_tol) == Solvability::singular;
  table.add_row({csv::number(cm.sigma_min), csv::number(cm.sigma_max),
                 csv::number(cm.sigma_ratio()), singular ? "singular" : "nonsingular"});
  return table;
}

inline void append_sequence_rows(csv::Table& table, const std::string& check,
                                 const SequenceCheck& seq,
                                 const std::vector<double>& eps) {
  for (size_t k = 0; k < seq.values.size(); ++k)
    table.add_row({check, seq.item, csv::number(k < eps.size() ? eps[k] : 0.0),
                   csv::number(seq.values[k])});
}

inline csv::Table estimate_table(const TwoSidedReport& report) {
  csv::Table table;
  table.header = {"eps", "error", "discrepancy", "ratio"};
  for (const TwoSidedRow& row : report.rows) {
    if (!row.solved) {
      table.add_row({csv::number(row.eps), csv::undef(), csv::undef(), csv::undef()});
      continue;
    }
    table.add_row({csv::number(row.eps), csv::number(row.error),
                   csv::number(row.discrepancy),
                   row.ratio_defined ? csv::number(row.ratio) : csv::undef()});
  }
  return table;
}

inline csv::Table estimate_summary_table(const TwoSidedReport& report) {
  csv::Table table;
  table.header = {"gamma_lo", "gamma_hi", "fitted_rate_error", "fitted_rate_discrepancy"};
  table.add_row({report.band_defined ? csv::number(report.gamma_lo) : csv::undef(),
                 report.band_defined ? csv::number(report.gamma_hi) : csv::undef(),
                 report.fitted_rate_error ? csv::number(*report.fitted_rate_error)
                                          : csv::undef(),
                 report.fitted_rate_discrepancy
                     ? csv::number(*report.fitted_rate_discrepancy)
                     : csv::undef()});
  return table;
}

}  // namespace detail

/// Executes one experiment described by a validated configuration, writing
/// CSV artifacts plus a MANIFEST into the configured output directory.
inline RunResult run(const ExperimentConfig& cfg) {
  RunResult result;
  detail::ArtifactWriter writer(cfg.output, result);
  const SolveOptions solve_opts{cfg.tolerances.singular, 1e-12};
  ContinuityOptions copts;
  copts.trend_tol = cfg.tolerances.trend;
  copts.eps_cut = cfg.epsilon.cut_or_infinity();
  copts.probe_degree = cfg.probe_degree.value_or(-1);
  copts.solve = solve_opts;

  try {
    if (cfg.command == "solve") {
      const ProblemInstance prob = build_instance(cfg, 0.0);
      try {
        const SolveReport report = solve_bvp(prob, solve_opts);
        csv::Table table;
        table.header = {"t"};
        for (int comp = 0; comp < cfg.params.m; ++comp) {
          table.header.push_back("y" + std::to_string(comp) + "_re");
          table.header.push_back("y" + std::to_string(comp) + "_im");
        }
        const Grid grid = cfg.grid();
        for (int i = 0; i < grid.num_nodes(); ++i) {
          std::vector<std::string> row{csv::number(grid.node(i))};
          for (int comp = 0; comp < cfg.params.m; ++comp) {
            row.push_back(csv::number(report.y.value(0, i)(comp, 0).real()));
            row.push_back(csv::number(report.y.value(0, i)(comp, 0).imag()));
          }
          table.add_row(std::move(row));
        }
        // trailing summary row: residuals in the first two numeric columns
        std::vector<std::string> summary{csv::undef(), csv::number(report.residual_l),
                                         csv::number(report.residual_b)};
        summary.resize(table.header.size(), csv::undef());
        table.add_row(std::move(summary));
        writer.write_table("solution.csv", table);
      } catch (const NoUniqueSolutionError& e) {
        CharacteristicMatrix cm;
        cm.sigma_min = e.sigma_min;
        cm.sigma_max = e.sigma_max;
        writer.write_table("condition0.csv",
                           detail::condition0_table(cm, cfg.tolerances.singular));
        result.messages.push_back(e.what());
        result.exit_code = kExitMathFail;
      }
    } else if (cfg.command == "condition0") {
      const ProblemInstance prob = build_instance(cfg, 0.0);
      const FirstOrderProblem red = companion_reduce(prob);
      const CharacteristicMatrix cm =
          characteristic_matrix(fundamental_matrix(red.state_matrix), red.boundary);
      writer.write_table("condition0.csv",
                         detail::condition0_table(cm, cfg.tolerances.singular));
      if (condition0_check(cm, cfg.tolerances.singular) == Solvability::singular)
        result.exit_code = kExitMathFail;
    } else if (cfg.command == "continuity") {
      const ParamFamily fam = build_family(cfg);
      const ContinuityReport report = full_criterion(fam, {}, copts);
      const std::vector<double> eps = fam.epsilons();

      csv::Table rows;
      rows.header = {"check", "item", "eps", "value"};
      for (const auto& seq : report.limit_i.coefficients)
        detail::append_sequence_rows(rows, "limitI", seq, eps);
      for (const auto& seq : report.limit_ii.probes)
        detail::append_sequence_rows(rows, "limitII", seq, eps);
      if (report.canonical) {
        for (const auto& seq : report.canonical->trace_matrices)
          detail::append_sequence_rows(rows, "canonical.alpha", seq, eps);
        detail::append_sequence_rows(rows, "canonical.kernel",
                                     report.canonical->kernel_norms, eps);
        detail::append_sequence_rows(rows, "canonical.primitive",
                                     report.canonical->primitive_deviations, eps);
      }
      writer.write_table("continuity.csv", rows);

      csv::Table summary;
      summary.header = {"check", "item", "verdict"};
      summary.add_row({"cond0", "sigma_ratio",
                       report.cond0 == Verdict::pass ? "nonsingular" : "singular"});
      for (const auto& seq : report.limit_i.coefficients)
        summary.add_row({"limitI", seq.item, to_string(seq.verdict)});
      summary.add_row({"limitI", "all", to_string(report.limit_i.verdict)});
      for (const auto& seq : report.limit_ii.probes)
        summary.add_row({"limitII", seq.item, to_string(seq.verdict)});
      summary.add_row({"limitII", "all", to_string(report.limit_ii.verdict)});
      if (report.canonical) {
        for (const auto& seq : report.canonical->trace_matrices)
          summary.add_row({"canonical.alpha", seq.item, to_string(seq.verdict)});
        summary.add_row({"canonical.kernel", "kernel",
                         to_string(report.canonical->kernel_norms.verdict)});
        summary.add_row({"canonical.primitive", "primitive",
                         to_string(report.canonical->primitive_deviations.verdict)});
        summary.add_row({"canonical", "all", to_string(report.canonical->verdict)});
      }
      summary.add_row({"overall", "all", to_string(report.overall)});
      writer.write_table("summary.csv", summary);

      if (report.experiment) {
        writer.write_table("estimate.csv", detail::estimate_table(*report.experiment));
        writer.write_table("estimate_summary.csv",
                           detail::estimate_summary_table(*report.experiment));
      }
      if (report.overall != Verdict::pass) result.exit_code = kExitMathFail;
    } else if (cfg.command == "estimate") {
      const ParamFamily fam = build_family(cfg);
      try {
        const TwoSidedReport report = convergence_experiment(fam, copts);
        writer.write_table("estimate.csv", detail::estimate_table(report));
        writer.write_table("estimate_summary.csv",
                           detail::estimate_summary_table(report));
        if (!report.failed_eps.empty()) {
          result.exit_code = kExitMathFail;
          for (double eps : report.failed_eps)
            result.messages.push_back("singular instance at eps = " + csv::number(eps));
        }
      } catch (const NoUniqueSolutionError& e) {
        CharacteristicMatrix cm;
        cm.sigma_min = e.sigma_min;
        cm.sigma_max = e.sigma_max;
        writer.write_table("condition0.csv",
                           detail::condition0_table(cm, cfg.tolerances.singular));
        result.messages.push_back(std::string("base problem: ") + e.what());
        result.exit_code = kExitMathFail;
      }
    } else if (cfg.command == "multipoint-check") {
      const MultipointFamily fam = build_multipoint_family(cfg);
      DConditionOptions opts;
      opts.trend_tol = cfg.tolerances.trend;
      const DConditionReport report =
          check_d_conditions(fam, cfg.params, cfg.grid(), opts);
      std::vector<double> eps;
      for (const auto& [e, form] : fam.forms) eps.push_back(e);

      csv::Table rows;
      rows.header = {"condition", "item", "eps", "value"};
      for (const auto& seq : report.d1) detail::append_sequence_rows(rows, "d1", seq, eps);
      for (const auto& seq : report.d2) detail::append_sequence_rows(rows, "d2", seq, eps);
      for (const auto& seq : report.d3) detail::append_sequence_rows(rows, "d3", seq, eps);
      for (const auto& seq : report.d4) detail::append_sequence_rows(rows, "d4", seq, eps);
      for (const auto& seq : report.d5) detail::append_sequence_rows(rows, "d5", seq, eps);
      writer.write_table("dconditions.csv", rows);

      csv::Table summary;
      summary.header = {"condition", "item", "verdict"};
      auto add_section = [&](const char* name, const std::vector<SequenceCheck>& seqs,
                             Verdict verdict) {
        for (const auto& seq : seqs) summary.add_row({name, seq.item, to_string(seq.verdict)});
        summary.add_row({name, "all", to_string(verdict)});
      };
      add_section("d1", report.d1, report.v1);
      add_section("d2", report.d2, report.v2);
      add_section("d3", report.d3, report.v3);
      add_section("d4", report.d4, report.v4);
      add_section("d5", report.d5, report.v5);
      if (report.corroboration)
        summary.add_row({"limitII", "probes", to_string(report.corroboration->verdict)});
      summary.add_row({"overall", "all", to_string(report.overall)});
      writer.write_table("summary.csv", summary);

      if (report.corroboration) {
        csv::Table corr;
        corr.header = {"check", "item", "eps", "value"};
        for (const auto& seq : report.corroboration->probes)
          detail::append_sequence_rows(corr, "limitII", seq, eps);
        writer.write_table("corroboration.csv", corr);
      }
      if (!report.geometry_warnings.empty()) {
        std::string text;
        for (const auto& warning : report.geometry_warnings) text += warning + "\n";
        writer.write_text("warnings.txt", text);
      }
      if (report.overall != Verdict::pass) result.exit_code = kExitMathFail;
    } else {
      result.messages.push_back("unrecognized command '" + cfg.command + "'");
      result.exit_code = kExitUsage;
    }
  } catch (const SingularFundamentalMatrixError& e) {
    result.messages.push_back(e.what());
    result.exit_code = kExitMathFail;
  } catch (const NoUniqueSolutionError& e) {
    result.messages.push_back(e.what());
    result.exit_code = kExitMathFail;
  } catch (const Error& e) {
    // construction/validation failures surfaced while building instances
    result.messages.push_back(e.what());
    result.exit_code = kExitUsage;
  }

  writer.finish();
  return result;
}

}  // namespace sbvp

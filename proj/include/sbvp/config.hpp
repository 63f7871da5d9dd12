#pragma once

#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sbvp/continuity.hpp"
#include "sbvp/expr.hpp"
#include "sbvp/multipoint.hpp"

namespace sbvp {

/// One expression entry of a definition file; equality and serialization use
/// the original source text.
struct ExprField {
  std::string text;
  expr::ExprPtr ast;

  bool operator==(const ExprField& o) const { return text == o.text; }
};

using ExprMatrix = std::vector<std::vector<ExprField>>;

struct Tolerances {
  double trend = 1e-6;
  double singular = 1e-8;
  double solve = 1e-6;
  double consistency = 1e-6;
  bool operator==(const Tolerances&) const = default;
};

struct EpsConfig {
  std::optional<std::vector<double>> values;  // explicit schedule
  double start = 0.1;
  double ratio = 0.5;
  int count = 10;
  std::optional<double> cut;

  std::vector<double> resolved() const {
    if (values) return *values;
    return EpsSchedule{start, ratio, count}.values();
  }
  double cut_or_infinity() const {
    return cut ? *cut : std::numeric_limits<double>::infinity();
  }
  bool operator==(const EpsConfig&) const = default;
};

struct CanonicalSpec {
  std::vector<ExprMatrix> alpha;   // n+r matrices, rm x m, eps-expressions
  std::optional<ExprMatrix> phi;   // rm x m, t/eps-expressions
  bool operator==(const CanonicalSpec&) const = default;
};

struct PointSpec {
  ExprField point;                // eps-expression
  std::vector<ExprMatrix> alpha;  // n+r matrices, rm x m, eps-expressions
  bool operator==(const PointSpec&) const = default;
};

struct GroupSpec {
  std::optional<double> limit;
  std::vector<ExprMatrix> alpha;  // limiting coefficients, required with a limit
  std::vector<PointSpec> points;
  bool operator==(const GroupSpec&) const = default;
};

struct MultipointSpec {
  std::vector<GroupSpec> groups;
  bool operator==(const MultipointSpec&) const = default;
};

using BoundarySpec = std::variant<CanonicalSpec, MultipointSpec>;

struct ProblemSpec {
  std::vector<ExprMatrix> coefficients;  // index k holds the matrix on y^(k)
  std::vector<ExprField> rhs;
  BoundarySpec boundary;
  std::vector<ExprField> c;
  bool operator==(const ProblemSpec&) const = default;
};

/// Optional closed forms replacing the eps = 0 evaluation of the problem
/// expressions, for families whose expressions degenerate at eps = 0.
struct BaseOverride {
  std::optional<std::vector<ExprMatrix>> coefficients;
  std::optional<std::vector<ExprField>> rhs;
  std::optional<std::vector<ExprField>> c;
  bool operator==(const BaseOverride&) const = default;
};

struct ExperimentConfig {
  std::string command;  // solve | condition0 | continuity | estimate | multipoint-check
  SobolevParams params;
  double a = 0.0;
  double b = 1.0;
  int grid_n = 2000;
  Tolerances tolerances;
  EpsConfig epsilon;
  std::optional<int> probe_degree;
  std::string output = "out";
  ProblemSpec problem;
  std::optional<BaseOverride> base;

  Grid grid() const { return Grid(a, b, grid_n); }
  bool operator==(const ExperimentConfig& o) const {
    return command == o.command && params == o.params && a == o.a && b == o.b &&
           grid_n == o.grid_n && tolerances == o.tolerances && epsilon == o.epsilon &&
           probe_degree == o.probe_degree && output == o.output &&
           problem == o.problem && base == o.base;
  }
};

struct ConfigResult {
  std::optional<ExperimentConfig> config;
  std::vector<std::string> errors;  // all validation problems, not just the first
};

namespace detail {

inline std::string line_column(const std::string& text, size_t byte) {
  size_t line = 1, col = 1;
  for (size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

class ConfigReader {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& message) {
    errors.push_back(path + ": " + message);
  }

  ExprField parse_expr(const nlohmann::json& node, const std::string& path,
                       bool allow_t) {
    ExprField field;
    if (!node.is_string()) {
      fail(path, "expected an expression string");
      return field;
    }
    field.text = node.get<std::string>();
    try {
      field.ast = expr::parse(field.text);
    } catch (const expr::ParseError& e) {
      fail(path, "parse error at column " + std::to_string(e.position + 1) + ": " +
                     e.what());
      return field;
    }
    if (!allow_t && expr::depends_on_t(field.ast))
      fail(path, "expression must not depend on t");
    return field;
  }

  ExprMatrix parse_matrix(const nlohmann::json& node, const std::string& path,
                          int rows, int cols, bool allow_t) {
    ExprMatrix mat;
    if (!node.is_array() || static_cast<int>(node.size()) != rows) {
      fail(path, "expected " + std::to_string(rows) + " rows");
      return mat;
    }
    for (int rr = 0; rr < rows; ++rr) {
      const auto& row = node[static_cast<size_t>(rr)];
      std::vector<ExprField> out_row;
      if (!row.is_array() || static_cast<int>(row.size()) != cols) {
        fail(path + "[" + std::to_string(rr) + "]",
             "expected " + std::to_string(cols) + " entries");
      } else {
        for (int cc = 0; cc < cols; ++cc)
          out_row.push_back(parse_expr(row[static_cast<size_t>(cc)],
                                       path + "[" + std::to_string(rr) + "][" +
                                           std::to_string(cc) + "]",
                                       allow_t));
      }
      mat.push_back(std::move(out_row));
    }
    return mat;
  }

  void check_keys(const nlohmann::json& node, const std::string& path,
                  std::initializer_list<const char*> allowed) {
    if (!node.is_object()) return;
    for (const auto& [key, value] : node.items()) {
      bool ok = false;
      for (const char* name : allowed) ok = ok || key == name;
      if (!ok) fail(path.empty() ? key : path + "." + key, "unknown key");
    }
  }
};

}  // namespace detail

inline ConfigResult parse_config(const std::string& text) {
  ConfigResult result;
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    result.errors.push_back("syntax error at " + detail::line_column(text, e.byte) +
                            ": " + e.what());
    return result;
  }
  if (!root.is_object()) {
    result.errors.push_back("top level: expected an object");
    return result;
  }

  detail::ConfigReader reader;
  ExperimentConfig cfg;

  reader.check_keys(root, "",
                    {"command", "params", "interval", "grid", "tolerances", "epsilon",
                     "probe_degree", "output", "problem", "base"});

  // command
  if (!root.contains("command") || !root["command"].is_string()) {
    reader.fail("command", "required string");
  } else {
    cfg.command = root["command"].get<std::string>();
    const bool known = cfg.command == "solve" || cfg.command == "condition0" ||
                       cfg.command == "continuity" || cfg.command == "estimate" ||
                       cfg.command == "multipoint-check";
    if (!known) reader.fail("command", "unrecognized command '" + cfg.command + "'");
  }

  // params
  if (!root.contains("params") || !root["params"].is_object()) {
    reader.fail("params", "required object with n, p, m, r");
  } else {
    const auto& p = root["params"];
    reader.check_keys(p, "params", {"n", "p", "m", "r"});
    auto read_int = [&](const char* key, int fallback) {
      if (!p.contains(key) || !p[key].is_number_integer()) {
        reader.fail(std::string("params.") + key, "required integer");
        return fallback;
      }
      return p[key].get<int>();
    };
    cfg.params.n = read_int("n", 0);
    cfg.params.m = read_int("m", 1);
    cfg.params.r = read_int("r", 1);
    if (!p.contains("p") || !p["p"].is_number()) {
      reader.fail("params.p", "required number");
    } else {
      cfg.params.p = p["p"].get<double>();
    }
    try {
      cfg.params.validate();
    } catch (const Error& e) {
      reader.fail("params", e.what());
    }
  }

  // interval
  if (!root.contains("interval") || !root["interval"].is_array() ||
      root["interval"].size() != 2 || !root["interval"][0].is_number() ||
      !root["interval"][1].is_number()) {
    reader.fail("interval", "required [a, b] with numbers");
  } else {
    cfg.a = root["interval"][0].get<double>();
    cfg.b = root["interval"][1].get<double>();
    if (!(cfg.b > cfg.a)) reader.fail("interval", "right endpoint must exceed the left");
  }

  // grid
  if (!root.contains("grid") || !root["grid"].is_number_integer()) {
    reader.fail("grid", "required even integer");
  } else {
    cfg.grid_n = root["grid"].get<int>();
    if (cfg.grid_n < 2 || cfg.grid_n % 2 != 0)
      reader.fail("grid", "grid size must be even and at least 2");
  }

  // tolerances
  if (root.contains("tolerances")) {
    const auto& t = root["tolerances"];
    reader.check_keys(t, "tolerances", {"trend", "singular", "solve", "consistency"});
    auto read_tol = [&](const char* key, double& slot) {
      if (!t.contains(key)) return;
      if (!t[key].is_number() || !(t[key].get<double>() > 0.0))
        reader.fail(std::string("tolerances.") + key, "must be a positive number");
      else
        slot = t[key].get<double>();
    };
    read_tol("trend", cfg.tolerances.trend);
    read_tol("singular", cfg.tolerances.singular);
    read_tol("solve", cfg.tolerances.solve);
    read_tol("consistency", cfg.tolerances.consistency);
  }

  // epsilon schedule
  if (root.contains("epsilon")) {
    const auto& e = root["epsilon"];
    reader.check_keys(e, "epsilon", {"values", "start", "ratio", "count", "cut"});
    if (e.contains("values")) {
      if (!e["values"].is_array() || e["values"].empty()) {
        reader.fail("epsilon.values", "expected a non-empty array of numbers");
      } else {
        std::vector<double> vals;
        double prev = std::numeric_limits<double>::infinity();
        bool ok = true;
        for (const auto& v : e["values"]) {
          if (!v.is_number()) {
            reader.fail("epsilon.values", "entries must be numbers");
            ok = false;
            break;
          }
          const double x = v.get<double>();
          if (!(x > 0.0) || !(x < prev)) {
            reader.fail("epsilon.values", "epsilon schedule must strictly decrease");
            ok = false;
            break;
          }
          vals.push_back(x);
          prev = x;
        }
        if (ok) cfg.epsilon.values = std::move(vals);
      }
    } else {
      if (e.contains("start")) cfg.epsilon.start = e["start"].is_number() ? e["start"].get<double>() : 0.0;
      if (e.contains("ratio")) cfg.epsilon.ratio = e["ratio"].is_number() ? e["ratio"].get<double>() : 0.0;
      if (e.contains("count")) cfg.epsilon.count = e["count"].is_number_integer() ? e["count"].get<int>() : -1;
      if (!(cfg.epsilon.start > 0.0)) reader.fail("epsilon.start", "must be positive");
      if (!(cfg.epsilon.ratio > 0.0 && cfg.epsilon.ratio < 1.0))
        reader.fail("epsilon.ratio", "epsilon schedule must strictly decrease (ratio in (0,1))");
      if (cfg.epsilon.count < 0) reader.fail("epsilon.count", "must be a non-negative integer");
    }
    if (e.contains("cut")) {
      if (!e["cut"].is_number() || !(e["cut"].get<double>() > 0.0))
        reader.fail("epsilon.cut", "must be a positive number");
      else
        cfg.epsilon.cut = e["cut"].get<double>();
    }
  }

  if (root.contains("probe_degree")) {
    if (!root["probe_degree"].is_number_integer() || root["probe_degree"].get<int>() < 0)
      reader.fail("probe_degree", "must be a non-negative integer");
    else
      cfg.probe_degree = root["probe_degree"].get<int>();
  }

  if (root.contains("output")) {
    if (!root["output"].is_string())
      reader.fail("output", "must be a string");
    else
      cfg.output = root["output"].get<std::string>();
  }

  // problem
  const int m = cfg.params.m, rm = cfg.params.system_size();
  const int nr = cfg.params.boundary_count();
  if (!root.contains("problem") || !root["problem"].is_object()) {
    reader.fail("problem", "required object");
    result.errors = reader.errors;
    return result;
  }
  const auto& prob = root["problem"];
  reader.check_keys(prob, "problem", {"coefficients", "rhs", "boundary", "c"});

  if (!prob.contains("coefficients") || !prob["coefficients"].is_array() ||
      static_cast<int>(prob["coefficients"].size()) != cfg.params.r) {
    reader.fail("problem.coefficients",
                "expected " + std::to_string(cfg.params.r) + " coefficient matrices");
  } else {
    for (int k = 0; k < cfg.params.r; ++k)
      cfg.problem.coefficients.push_back(reader.parse_matrix(
          prob["coefficients"][static_cast<size_t>(k)],
          "problem.coefficients[" + std::to_string(k) + "]", m, m, true));
  }

  if (!prob.contains("rhs") || !prob["rhs"].is_array() ||
      static_cast<int>(prob["rhs"].size()) != m) {
    reader.fail("problem.rhs", "expected " + std::to_string(m) + " expressions");
  } else {
    for (int k = 0; k < m; ++k)
      cfg.problem.rhs.push_back(reader.parse_expr(
          prob["rhs"][static_cast<size_t>(k)], "problem.rhs[" + std::to_string(k) + "]",
          true));
  }

  if (!prob.contains("c") || !prob["c"].is_array() ||
      static_cast<int>(prob["c"].size()) != rm) {
    reader.fail("problem.c", "expected " + std::to_string(rm) + " expressions");
  } else {
    for (int k = 0; k < rm; ++k)
      cfg.problem.c.push_back(reader.parse_expr(prob["c"][static_cast<size_t>(k)],
                                                "problem.c[" + std::to_string(k) + "]",
                                                false));
  }

  if (!prob.contains("boundary") || !prob["boundary"].is_object() ||
      !prob["boundary"].contains("type") || !prob["boundary"]["type"].is_string()) {
    reader.fail("problem.boundary", "required object with a type");
  } else {
    const auto& bnd = prob["boundary"];
    const std::string type = bnd["type"].get<std::string>();
    if (type == "canonical") {
      reader.check_keys(bnd, "problem.boundary", {"type", "alpha", "phi"});
      CanonicalSpec spec;
      if (!bnd.contains("alpha") || !bnd["alpha"].is_array() ||
          static_cast<int>(bnd["alpha"].size()) != nr) {
        reader.fail("problem.boundary.alpha",
                    "expected " + std::to_string(nr) + " trace matrices");
      } else {
        for (int k = 0; k < nr; ++k)
          spec.alpha.push_back(reader.parse_matrix(
              bnd["alpha"][static_cast<size_t>(k)],
              "problem.boundary.alpha[" + std::to_string(k) + "]", rm, m, false));
      }
      if (bnd.contains("phi"))
        spec.phi = reader.parse_matrix(bnd["phi"], "problem.boundary.phi", rm, m, true);
      cfg.problem.boundary = std::move(spec);
    } else if (type == "multipoint") {
      reader.check_keys(bnd, "problem.boundary", {"type", "groups"});
      MultipointSpec spec;
      if (!bnd.contains("groups") || !bnd["groups"].is_array() || bnd["groups"].empty()) {
        reader.fail("problem.boundary.groups", "expected a non-empty array");
      } else {
        int limit_groups = 0, free_groups = 0;
        for (size_t gi = 0; gi < bnd["groups"].size(); ++gi) {
          const auto& g = bnd["groups"][gi];
          const std::string gpath = "problem.boundary.groups[" + std::to_string(gi) + "]";
          reader.check_keys(g, gpath, {"limit", "alpha", "points"});
          GroupSpec group;
          if (g.contains("limit")) {
            if (!g["limit"].is_number()) {
              reader.fail(gpath + ".limit", "must be a number");
            } else {
              group.limit = g["limit"].get<double>();
              ++limit_groups;
            }
            if (!g.contains("alpha") || !g["alpha"].is_array() ||
                static_cast<int>(g["alpha"].size()) != nr) {
              reader.fail(gpath + ".alpha",
                          "limit groups need " + std::to_string(nr) + " matrices");
            } else {
              for (int l = 0; l < nr; ++l)
                group.alpha.push_back(reader.parse_matrix(
                    g["alpha"][static_cast<size_t>(l)],
                    gpath + ".alpha[" + std::to_string(l) + "]", rm, m, false));
            }
          } else {
            ++free_groups;
            if (g.contains("alpha"))
              reader.fail(gpath + ".alpha", "free groups carry no limiting coefficients");
          }
          if (g.contains("points")) {
            if (!g["points"].is_array()) {
              reader.fail(gpath + ".points", "must be an array");
            } else {
              for (size_t pj = 0; pj < g["points"].size(); ++pj) {
                const auto& pt = g["points"][pj];
                const std::string ppath = gpath + ".points[" + std::to_string(pj) + "]";
                reader.check_keys(pt, ppath, {"point", "alpha"});
                PointSpec point;
                if (!pt.contains("point")) {
                  reader.fail(ppath + ".point", "required expression");
                } else {
                  point.point = reader.parse_expr(pt["point"], ppath + ".point", false);
                }
                if (!pt.contains("alpha") || !pt["alpha"].is_array() ||
                    static_cast<int>(pt["alpha"].size()) != nr) {
                  reader.fail(ppath + ".alpha",
                              "expected " + std::to_string(nr) + " matrices");
                } else {
                  for (int l = 0; l < nr; ++l)
                    point.alpha.push_back(reader.parse_matrix(
                        pt["alpha"][static_cast<size_t>(l)],
                        ppath + ".alpha[" + std::to_string(l) + "]", rm, m, false));
                }
                group.points.push_back(std::move(point));
              }
            }
          }
          spec.groups.push_back(std::move(group));
        }
        if (limit_groups < 1)
          reader.fail("problem.boundary.groups", "needs at least one group with a limit");
        if (free_groups > 1)
          reader.fail("problem.boundary.groups", "at most one free group is allowed");
      }
      cfg.problem.boundary = std::move(spec);
    } else {
      reader.fail("problem.boundary.type", "must be 'canonical' or 'multipoint'");
    }
  }
  if (cfg.command == "multipoint-check" &&
      !std::holds_alternative<MultipointSpec>(cfg.problem.boundary))
    reader.fail("problem.boundary", "multipoint-check requires a multipoint boundary");

  // base overrides
  if (root.contains("base")) {
    const auto& base = root["base"];
    reader.check_keys(base, "base", {"coefficients", "rhs", "c"});
    BaseOverride over;
    if (base.contains("coefficients")) {
      if (!base["coefficients"].is_array() ||
          static_cast<int>(base["coefficients"].size()) != cfg.params.r) {
        reader.fail("base.coefficients",
                    "expected " + std::to_string(cfg.params.r) + " matrices");
      } else {
        std::vector<ExprMatrix> mats;
        for (int k = 0; k < cfg.params.r; ++k)
          mats.push_back(reader.parse_matrix(base["coefficients"][static_cast<size_t>(k)],
                                             "base.coefficients[" + std::to_string(k) + "]",
                                             m, m, true));
        over.coefficients = std::move(mats);
      }
    }
    if (base.contains("rhs")) {
      if (!base["rhs"].is_array() || static_cast<int>(base["rhs"].size()) != m) {
        reader.fail("base.rhs", "expected " + std::to_string(m) + " expressions");
      } else {
        std::vector<ExprField> rhs;
        for (int k = 0; k < m; ++k)
          rhs.push_back(reader.parse_expr(base["rhs"][static_cast<size_t>(k)],
                                          "base.rhs[" + std::to_string(k) + "]", true));
        over.rhs = std::move(rhs);
      }
    }
    if (base.contains("c")) {
      if (!base["c"].is_array() || static_cast<int>(base["c"].size()) != rm) {
        reader.fail("base.c", "expected " + std::to_string(rm) + " expressions");
      } else {
        std::vector<ExprField> c;
        for (int k = 0; k < rm; ++k)
          c.push_back(reader.parse_expr(base["c"][static_cast<size_t>(k)],
                                        "base.c[" + std::to_string(k) + "]", false));
        over.c = std::move(c);
      }
    }
    cfg.base = std::move(over);
  }

  result.errors = reader.errors;
  if (result.errors.empty()) result.config = std::move(cfg);
  return result;
}

namespace detail {

inline nlohmann::ordered_json matrix_json(const ExprMatrix& mat) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : mat) {
    nlohmann::ordered_json out_row = nlohmann::ordered_json::array();
    for (const auto& field : row) out_row.push_back(field.text);
    rows.push_back(std::move(out_row));
  }
  return rows;
}

inline nlohmann::ordered_json fields_json(const std::vector<ExprField>& fields) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& field : fields) out.push_back(field.text);
  return out;
}

}  // namespace detail

inline std::string serialize_config(const ExperimentConfig& cfg) {
  nlohmann::ordered_json root;
  root["command"] = cfg.command;
  root["params"] = {{"n", cfg.params.n}, {"p", cfg.params.p},
                    {"m", cfg.params.m}, {"r", cfg.params.r}};
  root["interval"] = {cfg.a, cfg.b};
  root["grid"] = cfg.grid_n;
  root["tolerances"] = {{"trend", cfg.tolerances.trend},
                        {"singular", cfg.tolerances.singular},
                        {"solve", cfg.tolerances.solve},
                        {"consistency", cfg.tolerances.consistency}};
  nlohmann::ordered_json eps;
  if (cfg.epsilon.values) {
    eps["values"] = *cfg.epsilon.values;
  } else {
    eps["start"] = cfg.epsilon.start;
    eps["ratio"] = cfg.epsilon.ratio;
    eps["count"] = cfg.epsilon.count;
  }
  if (cfg.epsilon.cut) eps["cut"] = *cfg.epsilon.cut;
  root["epsilon"] = std::move(eps);
  if (cfg.probe_degree) root["probe_degree"] = *cfg.probe_degree;
  root["output"] = cfg.output;

  nlohmann::ordered_json prob;
  nlohmann::ordered_json coeffs = nlohmann::ordered_json::array();
  for (const auto& mat : cfg.problem.coefficients)
    coeffs.push_back(detail::matrix_json(mat));
  prob["coefficients"] = std::move(coeffs);
  prob["rhs"] = detail::fields_json(cfg.problem.rhs);
  nlohmann::ordered_json bnd;
  if (const auto* canonical = std::get_if<CanonicalSpec>(&cfg.problem.boundary)) {
    bnd["type"] = "canonical";
    nlohmann::ordered_json alpha = nlohmann::ordered_json::array();
    for (const auto& mat : canonical->alpha) alpha.push_back(detail::matrix_json(mat));
    bnd["alpha"] = std::move(alpha);
    if (canonical->phi) bnd["phi"] = detail::matrix_json(*canonical->phi);
  } else {
    const auto& mp = std::get<MultipointSpec>(cfg.problem.boundary);
    bnd["type"] = "multipoint";
    nlohmann::ordered_json groups = nlohmann::ordered_json::array();
    for (const auto& group : mp.groups) {
      nlohmann::ordered_json g;
      if (group.limit) {
        g["limit"] = *group.limit;
        nlohmann::ordered_json alpha = nlohmann::ordered_json::array();
        for (const auto& mat : group.alpha) alpha.push_back(detail::matrix_json(mat));
        g["alpha"] = std::move(alpha);
      }
      if (!group.points.empty()) {
        nlohmann::ordered_json points = nlohmann::ordered_json::array();
        for (const auto& point : group.points) {
          nlohmann::ordered_json p;
          p["point"] = point.point.text;
          nlohmann::ordered_json alpha = nlohmann::ordered_json::array();
          for (const auto& mat : point.alpha) alpha.push_back(detail::matrix_json(mat));
          p["alpha"] = std::move(alpha);
          points.push_back(std::move(p));
        }
        g["points"] = std::move(points);
      }
      groups.push_back(std::move(g));
    }
    bnd["groups"] = std::move(groups);
  }
  prob["boundary"] = std::move(bnd);
  prob["c"] = detail::fields_json(cfg.problem.c);
  root["problem"] = std::move(prob);

  if (cfg.base) {
    nlohmann::ordered_json base;
    if (cfg.base->coefficients) {
      nlohmann::ordered_json mats = nlohmann::ordered_json::array();
      for (const auto& mat : *cfg.base->coefficients)
        mats.push_back(detail::matrix_json(mat));
      base["coefficients"] = std::move(mats);
    }
    if (cfg.base->rhs) base["rhs"] = detail::fields_json(*cfg.base->rhs);
    if (cfg.base->c) base["c"] = detail::fields_json(*cfg.base->c);
    root["base"] = std::move(base);
  }
  return root.dump(2) + "\n";
}

// ---- builders: expressions -> problem instances --------------------------

namespace detail {

inline complexd eval_checked(const expr::ExprPtr& ast, double t, double eps,
                             const std::string& what) {
  const complexd v = expr::evaluate(ast, t, eps);
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    throw DomainError(what + ": expression evaluates to a non-finite value");
  return v;
}

/// Derivative stack of an expression matrix sampled at a fixed eps.
inline GridFunction sample_matrix(const ExprMatrix& mat, const Grid& grid, Shape shape,
                                  int order, double eps, double consistency_tol,
                                  const std::string& what) {
  std::vector<std::vector<expr::ExprPtr>> stacks;  // [row*cols + col][deriv]
  for (const auto& row : mat)
    for (const auto& field : row) {
      std::vector<expr::ExprPtr> stack{field.ast};
      for (int j = 0; j < order; ++j)
        stack.push_back(expr::differentiate_t(stack.back()));
      stacks.push_back(std::move(stack));
    }
  return make_grid_function(
      grid, shape, order,
      [&](int j, double t) {
        Matrix v(shape.rows, shape.cols);
        for (int rr = 0; rr < shape.rows; ++rr)
          for (int cc = 0; cc < shape.cols; ++cc)
            v(rr, cc) = eval_checked(
                stacks[static_cast<size_t>(rr * shape.cols + cc)][static_cast<size_t>(j)],
                t, eps, what);
        return v;
      },
      consistency_tol);
}

inline Matrix eval_matrix(const std::vector<ExprMatrix>& mats, size_t index, int rows,
                          int cols, double eps, const std::string& what) {
  Matrix v(rows, cols);
  for (int rr = 0; rr < rows; ++rr)
    for (int cc = 0; cc < cols; ++cc)
      v(rr, cc) = eval_checked(mats[index][static_cast<size_t>(rr)][static_cast<size_t>(cc)].ast,
                               0.0, eps, what);
  return v;
}

inline GridFunction sample_vector(const std::vector<ExprField>& fields, const Grid& grid,
                                  int order, double eps, double consistency_tol,
                                  const std::string& what) {
  ExprMatrix mat;
  for (const auto& field : fields) mat.push_back({field});
  return sample_matrix(mat, grid, Shape::vector(static_cast<int>(fields.size())), order,
                       eps, consistency_tol, what);
}

}  // namespace detail

/// Limiting multipoint operator: one term per limit group, at the limit.
inline MultipointBoundaryForm base_multipoint_form(const MultipointSpec& spec,
                                                   const SobolevParams& params) {
  MultipointBoundaryForm form;
  for (const auto& group : spec.groups) {
    MultipointGroup out;
    out.limit = group.limit;
    if (group.limit) {
      MultipointTerm term;
      term.point = *group.limit;
      for (int l = 0; l < params.boundary_count(); ++l)
        term.alphas.push_back(detail::eval_matrix(group.alpha, static_cast<size_t>(l),
                                                  params.system_size(), params.m, 0.0,
                                                  "boundary alpha"));
      out.terms.push_back(std::move(term));
    }
    form.groups.push_back(std::move(out));
  }
  return form;
}

/// Sampled multipoint operator at a positive parameter value.
inline MultipointBoundaryForm multipoint_form_at(const MultipointSpec& spec,
                                                 const SobolevParams& params,
                                                 const Grid& grid, double eps) {
  MultipointBoundaryForm form;
  for (const auto& group : spec.groups) {
    MultipointGroup out;
    out.limit = group.limit;
    for (const auto& point : group.points) {
      MultipointTerm term;
      const complexd location =
          detail::eval_checked(point.point.ast, 0.0, eps, "boundary point");
      if (std::abs(location.imag()) > 1e-12)
        throw DomainError("boundary point: evaluation point must be real");
      term.point = location.real();
      if (term.point < grid.a || term.point > grid.b)
        throw DomainError("boundary point: evaluation point outside the interval");
      for (int l = 0; l < params.boundary_count(); ++l)
        term.alphas.push_back(detail::eval_matrix(point.alpha, static_cast<size_t>(l),
                                                  params.system_size(), params.m, eps,
                                                  "boundary alpha"));
      out.terms.push_back(std::move(term));
    }
    form.groups.push_back(std::move(out));
  }
  return form;
}

/// Instantiates the problem at a parameter value. At eps = 0 the base
/// overrides (when present) replace the problem expressions, and a multipoint
/// boundary collapses to its limiting form.
inline ProblemInstance build_instance(const ExperimentConfig& cfg, double eps) {
  const Grid grid = cfg.grid();
  const SobolevParams& P = cfg.params;
  const double ctol = cfg.tolerances.consistency;
  const bool at_base = eps == 0.0;

  std::vector<GridFunction> coeffs;
  const std::vector<ExprMatrix>* coeff_mats = &cfg.problem.coefficients;
  if (at_base && cfg.base && cfg.base->coefficients) coeff_mats = &*cfg.base->coefficients;
  for (int k = 0; k < P.r; ++k)
    coeffs.push_back(detail::sample_matrix((*coeff_mats)[static_cast<size_t>(k)], grid,
                                           Shape::matrix(P.m, P.m), P.n, eps,
                                           ctol, "coefficient"));

  const std::vector<ExprField>* rhs_fields = &cfg.problem.rhs;
  if (at_base && cfg.base && cfg.base->rhs) rhs_fields = &*cfg.base->rhs;
  GridFunction rhs = detail::sample_vector(*rhs_fields, grid, P.n, eps, ctol, "rhs");

  BoundaryOperator boundary = [&]() -> BoundaryOperator {
    if (const auto* canonical = std::get_if<CanonicalSpec>(&cfg.problem.boundary)) {
      CanonicalBoundaryForm form;
      for (int k = 0; k < P.boundary_count(); ++k)
        form.alphas.push_back(detail::eval_matrix(canonical->alpha, static_cast<size_t>(k),
                                                  P.system_size(), P.m, eps,
                                                  "boundary alpha"));
      if (canonical->phi)
        form.kernel = detail::sample_matrix(*canonical->phi, grid,
                                            Shape::matrix(P.system_size(), P.m), 0, eps,
                                            ctol, "boundary kernel");
      return form;
    }
    const auto& mp = std::get<MultipointSpec>(cfg.problem.boundary);
    return at_base ? base_multipoint_form(mp, P) : multipoint_form_at(mp, P, grid, eps);
  }();

  const std::vector<ExprField>* c_fields = &cfg.problem.c;
  if (at_base && cfg.base && cfg.base->c) c_fields = &*cfg.base->c;
  Vector c(P.system_size());
  for (int k = 0; k < P.system_size(); ++k)
    c(k) = detail::eval_checked((*c_fields)[static_cast<size_t>(k)].ast, 0.0, eps,
                                "boundary data");

  ProblemInstance inst{DifferentialSystem{P, std::move(coeffs), std::move(rhs)},
                       std::move(boundary), std::move(c)};
  inst.validate();
  return inst;
}

inline ParamFamily build_family(const ExperimentConfig& cfg) {
  ParamFamily fam{build_instance(cfg, 0.0), {}};
  for (double eps : cfg.epsilon.resolved())
    fam.instances.emplace_back(eps, build_instance(cfg, eps));
  fam.validate();
  return fam;
}

inline MultipointFamily build_multipoint_family(const ExperimentConfig& cfg) {
  const auto* mp = std::get_if<MultipointSpec>(&cfg.problem.boundary);
  if (!mp) throw DomainError("multipoint-check requires a multipoint boundary");
  MultipointFamily fam;
  fam.base = base_multipoint_form(*mp, cfg.params);
  for (double eps : cfg.epsilon.resolved())
    fam.forms.emplace_back(eps, multipoint_form_at(*mp, cfg.params, cfg.grid(), eps));
  fam.validate(cfg.params, cfg.grid());
  return fam;
}

}  // namespace sbvp

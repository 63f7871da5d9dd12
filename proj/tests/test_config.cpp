#include <catch2/catch_amalgamated.hpp>

#include "sbvp/config.hpp"

using namespace sbvp;

namespace {

const char* kMinimalSolve = R"json({
  "command": "solve",
  "params": {"n": 0, "p": 2.0, "m": 1, "r": 1},
  "interval": [0.0, 1.0],
  "grid": 200,
  "problem": {
    "coefficients": [[["0"]]],
    "rhs": ["0"],
    "boundary": {"type": "canonical", "alpha": [[["1"]]]},
    "c": ["1"]
  }
})json";

std::string replace(std::string text, const std::string& from, const std::string& to) {
  return text.replace(text.find(from), from.size(), to);
}

}  // namespace

TEST_CASE("minimal solve config parses", "[config]") {
  const ConfigResult result = parse_config(kMinimalSolve);
  CAPTURE(result.errors);
  REQUIRE(result.config.has_value());
  CHECK(result.config->command == "solve");
  CHECK(result.config->grid_n == 200);
  CHECK(result.config->params.r == 1);
  CHECK(std::holds_alternative<CanonicalSpec>(result.config->problem.boundary));
}

TEST_CASE("odd grid sizes are rejected", "[config]") {
  const ConfigResult result = parse_config(replace(kMinimalSolve, "200", "101"));
  REQUIRE_FALSE(result.config.has_value());
  bool found = false;
  for (const auto& e : result.errors)
    found = found || e.find("grid size must be even") != std::string::npos;
  CHECK(found);
}

TEST_CASE("non-decreasing epsilon schedules are rejected", "[config]") {
  std::string text = replace(kMinimalSolve, "\"grid\": 200,",
                             "\"grid\": 200,\n  \"epsilon\": {\"values\": [0.1, 0.2]},");
  const ConfigResult result = parse_config(text);
  REQUIRE_FALSE(result.config.has_value());
  bool found = false;
  for (const auto& e : result.errors)
    found = found || e.find("epsilon schedule must strictly decrease") != std::string::npos;
  CHECK(found);
}

TEST_CASE("all validation errors are collected, not just the first", "[config]") {
  std::string text = kMinimalSolve;
  text = replace(text, "\"grid\": 200", "\"grid\": 101");
  text = replace(text, "\"c\": [\"1\"]", "\"c\": [\"1 +\"], \"mystery\": 1");
  const ConfigResult result = parse_config(text);
  REQUIRE_FALSE(result.config.has_value());
  CHECK(result.errors.size() >= 3u);
}

TEST_CASE("expression errors carry their position", "[config]") {
  const ConfigResult result = parse_config(replace(kMinimalSolve, "\"rhs\": [\"0\"]",
                                                   "\"rhs\": [\"1 + * 2\"]"));
  REQUIRE_FALSE(result.config.has_value());
  bool found = false;
  for (const auto& e : result.errors)
    found = found || (e.find("problem.rhs[0]") != std::string::npos &&
                      e.find("column 5") != std::string::npos);
  CHECK(found);
}

TEST_CASE("json syntax errors report line and column", "[config]") {
  const ConfigResult result = parse_config("{\n  \"command\": oops\n}");
  REQUIRE_FALSE(result.config.has_value());
  REQUIRE_FALSE(result.errors.empty());
  CHECK(result.errors.front().find("line 2") != std::string::npos);
}

TEST_CASE("boundary data must not depend on t", "[config]") {
  const ConfigResult result =
      parse_config(replace(kMinimalSolve, "\"c\": [\"1\"]", "\"c\": [\"t\"]"));
  REQUIRE_FALSE(result.config.has_value());
  bool found = false;
  for (const auto& e : result.errors)
    found = found || e.find("must not depend on t") != std::string::npos;
  CHECK(found);
}

TEST_CASE("multipoint-check requires a multipoint boundary", "[config]") {
  const ConfigResult result =
      parse_config(replace(kMinimalSolve, "\"command\": \"solve\"",
                           "\"command\": \"multipoint-check\""));
  REQUIRE_FALSE(result.config.has_value());
}

TEST_CASE("serialization round-trips canonical configs", "[config]") {
  std::string text = kMinimalSolve;
  text = replace(text, "\"boundary\": {\"type\": \"canonical\", \"alpha\": [[[\"1\"]]]}",
                 "\"boundary\": {\"type\": \"canonical\", \"alpha\": [[[\"1\"]]], "
                 "\"phi\": [[\"sin(t)\"]]}");
  const ConfigResult first = parse_config(text);
  CAPTURE(first.errors);
  REQUIRE(first.config.has_value());
  const std::string serialized = serialize_config(*first.config);
  const ConfigResult second = parse_config(serialized);
  CAPTURE(second.errors);
  REQUIRE(second.config.has_value());
  CHECK(*first.config == *second.config);
  CHECK(serialize_config(*second.config) == serialized);
}

TEST_CASE("serialization round-trips multipoint family configs", "[config]") {
  const char* text = R"json({
    "command": "multipoint-check",
    "params": {"n": 0, "p": 2.0, "m": 1, "r": 1},
    "interval": [0.0, 1.0],
    "grid": 200,
    "epsilon": {"start": 0.1, "ratio": 0.5, "count": 6, "cut": 0.2},
    "problem": {
      "coefficients": [[["0"]]],
      "rhs": ["0"],
      "boundary": {"type": "multipoint", "groups": [
        {"limit": 0.5, "alpha": [[["1"]]],
         "points": [{"point": "0.5 + eps", "alpha": [[["1"]]]}]},
        {"points": [{"point": "0.9", "alpha": [[["eps"]]]}]}
      ]},
      "c": ["1"]
    },
    "base": {"rhs": ["0"]}
  })json";
  const ConfigResult first = parse_config(text);
  CAPTURE(first.errors);
  REQUIRE(first.config.has_value());
  const ConfigResult second = parse_config(serialize_config(*first.config));
  CAPTURE(second.errors);
  REQUIRE(second.config.has_value());
  CHECK(*first.config == *second.config);
}

TEST_CASE("instances are built from expressions with exact stacks", "[config]") {
  const char* text = R"json({
    "command": "estimate",
    "params": {"n": 1, "p": 2.0, "m": 1, "r": 1},
    "interval": [0.0, 1.0],
    "grid": 200,
    "problem": {
      "coefficients": [[["1 + eps"]]],
      "rhs": ["sin(t)"],
      "boundary": {"type": "canonical", "alpha": [[["1"]], [["0"]]]},
      "c": ["2 + eps^2"]
    }
  })json";
  const ConfigResult result = parse_config(text);
  CAPTURE(result.errors);
  REQUIRE(result.config.has_value());
  const ProblemInstance inst = build_instance(*result.config, 0.5);
  CHECK(inst.system.coeffs[0].value(0, 0)(0, 0) == complexd(1.5));
  // derivative layer of sin(t) is cos(t), symbolically differentiated
  CHECK(std::abs(inst.system.rhs.value(1, 100)(0, 0) - complexd(std::cos(0.5))) <
        1e-15);
  CHECK(inst.c(0) == complexd(2.25));

  const ParamFamily fam = build_family(*result.config);
  CHECK(fam.instances.size() == 11);
  CHECK(fam.base.c(0) == complexd(2.0));
}

TEST_CASE("multipoint families use the limit form at the base", "[config]") {
  const char* text = R"json({
    "command": "multipoint-check",
    "params": {"n": 0, "p": 2.0, "m": 1, "r": 1},
    "interval": [0.0, 1.0],
    "grid": 200,
    "epsilon": {"count": 5},
    "problem": {
      "coefficients": [[["1"]]],
      "rhs": ["0"],
      "boundary": {"type": "multipoint", "groups": [
        {"limit": 0.0, "alpha": [[["1"]]],
         "points": [{"point": "eps", "alpha": [[["1"]]]}]}
      ]},
      "c": ["1"]
    }
  })json";
  const ConfigResult result = parse_config(text);
  CAPTURE(result.errors);
  REQUIRE(result.config.has_value());
  const MultipointFamily fam = build_multipoint_family(*result.config);
  CHECK(fam.base.groups[0].terms[0].point == 0.0);
  CHECK(fam.forms.front().second.groups[0].terms[0].point == 0.1);
}

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sbvp/types.hpp"

namespace sbvp {

/// One labelled deviation sequence over the epsilon schedule with its verdict.
struct SequenceCheck {
  std::string item;
  std::vector<double> values;
  Verdict verdict = Verdict::inconclusive;
};

/// Finite-sample surrogate for "the sequence tends to zero": the last value
/// must fall below tol and the run must have decreased by at least a factor
/// of two; growth beyond 10x the first value or stagnation above tol fails.
inline Verdict trend_to_zero(const std::vector<double>& v, double tol) {
  if (v.empty()) return Verdict::inconclusive;
  const double first = v.front();
  const double last = v.back();
  if (last <= 1e-14 * (1.0 + first)) return Verdict::pass;  // numerically zero
  if (last < tol && first >= 2.0 * last) return Verdict::pass;
  if (last > 10.0 * first) return Verdict::fail;
  if (last >= tol && first < 2.0 * last) return Verdict::fail;  // stagnation
  return Verdict::inconclusive;
}

/// Finite-sample surrogate for O(1) boundedness as the parameter vanishes.
/// Core heuristic: max <= 2 * median. A sequence whose values shrink toward
/// the small-epsilon end is bounded as well, so an overall non-growing run
/// also passes; a clear growth trend toward small epsilon fails. All of this
/// is a harness convention, reported alongside the raw values.
inline Verdict bounded_verdict(const std::vector<double>& v) {
  if (v.empty()) return Verdict::inconclusive;
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[sorted.size() / 2];
  const double max = sorted.back();
  if (max <= 1e-300) return Verdict::pass;
  const double floor = 1e-14 * (1.0 + max);
  if (v.back() >= 4.0 * std::max(v.front(), floor)) return Verdict::fail;
  if (max <= 2.0 * median) return Verdict::pass;
  if (v.back() <= std::max(v.front(), floor)) return Verdict::pass;
  return Verdict::inconclusive;
}

/// Least-squares slope of log(y) against log(x) over the entries where both
/// are positive and finite; empty when fewer than two remain.
inline std::optional<double> fit_log_slope(const std::vector<double>& x,
                                           const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(x[i]) && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  if (lx.size() < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= double(lx.size());
  my /= double(ly.size());
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) return std::nullopt;
  return sxy / sxx;
}

inline Verdict conjunction_over(const std::vector<SequenceCheck>& checks) {
  Verdict v = Verdict::pass;
  for (const auto& c : checks) v = conjunction(v, c.verdict);
  return v;
}

}  // namespace sbvp

#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace sbvp {

using complexd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Three-valued outcome of a trend or boundedness check.
enum class Verdict { pass, fail, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    default: return "inconclusive";
  }
}

inline Verdict conjunction(Verdict a, Verdict b) {
  if (a == Verdict::fail || b == Verdict::fail) return Verdict::fail;
  if (a == Verdict::inconclusive || b == Verdict::inconclusive)
    return Verdict::inconclusive;
  return Verdict::pass;
}

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A derivative stack whose layers fail the integral residual test.
struct StackConsistencyError : Error {
  StackConsistencyError(const std::string& what, int layer_)
      : Error(what), layer(layer_) {}
  int layer;  // derivative layer inconsistent with the one below it
};

struct DimensionError : Error {
  using Error::Error;
};

struct DomainError : Error {
  using Error::Error;
};

struct InsufficientOrderError : Error {
  using Error::Error;
};

/// The integrated fundamental matrix lost rank at some node; the step size is
/// too large for the system at hand.
struct SingularFundamentalMatrixError : Error {
  SingularFundamentalMatrixError(const std::string& what, double smin, double smax)
      : Error(what), sigma_min(smin), sigma_max(smax) {}
  double sigma_min, sigma_max;
};

/// The characteristic matrix is numerically singular: the homogeneous problem
/// admits a nontrivial solution.
struct NoUniqueSolutionError : Error {
  NoUniqueSolutionError(const std::string& what, double smin, double smax)
      : Error(what), sigma_min(smin), sigma_max(smax) {}
  double sigma_min, sigma_max;
};

namespace detail {

inline double binomial(int s, int i) {
  double v = 1.0;
  for (int k = 0; k < i; ++k) v = v * double(s - k) / double(k + 1);
  return v;
}

}  // namespace detail

}  // namespace sbvp

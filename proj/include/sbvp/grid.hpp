#pragma once

#include <cmath>
#include <limits>

#include "sbvp/types.hpp"

namespace sbvp {

/// Uniform grid on [a,b]. The number of intervals is even so that composite
/// Simpson quadrature applies without a remainder pair.
struct Grid {
  double a = 0.0;
  double b = 1.0;
  int num_intervals = 2;

  Grid() = default;
  Grid(double a_, double b_, int intervals) : a(a_), b(b_), num_intervals(intervals) {
    validate();
  }

  void validate() const {
    if (!(b > a)) throw DomainError("grid: right endpoint must exceed the left one");
    if (num_intervals < 2 || num_intervals % 2 != 0)
      throw DomainError("grid: number of intervals must be even and >= 2");
  }

  double spacing() const { return (b - a) / num_intervals; }
  int num_nodes() const { return num_intervals + 1; }
  double node(int i) const { return a + spacing() * i; }
  double length() const { return b - a; }

  bool same_as(const Grid& o) const {
    return a == o.a && b == o.b && num_intervals == o.num_intervals;
  }
};

/// Dimensional data of a problem class: smoothness index n, integrability p,
/// system dimension m, equation order r. The conjugate exponent q satisfies
/// 1/p + 1/q = 1 and is infinite exactly when p = 1.
struct SobolevParams {
  int n = 0;
  double p = 2.0;
  int m = 1;
  int r = 1;

  SobolevParams() = default;
  SobolevParams(int n_, double p_, int m_, int r_) : n(n_), p(p_), m(m_), r(r_) {
    validate();
  }

  void validate() const {
    if (n < 0) throw DomainError("params: smoothness index n must be >= 0");
    if (!(p >= 1.0) || !std::isfinite(p))
      throw DomainError("params: integrability p must lie in [1, infinity)");
    if (m < 1 || r < 1) throw DomainError("params: system dimension and order must be >= 1");
  }

  bool conjugate_is_infinite() const { return p == 1.0; }
  double conjugate_exponent() const {
    return conjugate_is_infinite() ? std::numeric_limits<double>::infinity()
                                   : p / (p - 1.0);
  }
  /// 1/q, the exponent appearing in the Hoelder-type point estimates; zero
  /// when p = 1.
  double holder_exponent() const { return 1.0 - 1.0 / p; }

  int system_size() const { return r * m; }   // rm, size of the reduced system
  int stack_order() const { return n + r; }   // derivative layers a solution carries
  int boundary_count() const { return n + r; }

  bool operator==(const SobolevParams&) const = default;
};

}  // namespace sbvp

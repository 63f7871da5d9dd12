#pragma once

#include <cmath>

#include "sbvp/grid_function.hpp"

namespace sbvp {

namespace detail {

inline double lp_norm_component(const GridFunction& g, int layer, int rr, int cc,
                                double p) {
  const double integral = simpson_integrate<double>(
      g.grid(), [&](int i) { return std::pow(std::abs(g.value(layer, i)(rr, cc)), p); },
      0.0);
  return std::pow(integral, 1.0 / p);
}

}  // namespace detail

/// L_p norm of one derivative layer. Vector- and matrix-valued functions use
/// the component-sum convention: the result is the sum of the scalar L_p
/// norms of all components.
inline double lp_norm(const GridFunction& g, int layer, double p) {
  if (!(p >= 1.0) || std::isinf(p))
    throw DomainError("lp_norm: p must lie in [1, infinity)");
  double total = 0.0;
  for (int rr = 0; rr < g.rows(); ++rr)
    for (int cc = 0; cc < g.cols(); ++cc)
      total += detail::lp_norm_component(g, layer, rr, cc, p);
  return total;
}

/// W^n_p norm: per component (sum_{j<=n} int |x^(j)|^p)^(1/p), summed over
/// components.
inline double sobolev_norm(const GridFunction& g, int n, double p) {
  if (!(p >= 1.0) || std::isinf(p))
    throw DomainError("sobolev_norm: p must lie in [1, infinity)");
  if (n < 0) throw DomainError("sobolev_norm: n must be >= 0");
  if (g.order() < n)
    throw InsufficientOrderError("sobolev_norm: stack order " +
                                 std::to_string(g.order()) +
                                 " is below the requested smoothness " +
                                 std::to_string(n));
  double total = 0.0;
  for (int rr = 0; rr < g.rows(); ++rr) {
    for (int cc = 0; cc < g.cols(); ++cc) {
      double acc = 0.0;
      for (int j = 0; j <= n; ++j)
        acc += simpson_integrate<double>(
            g.grid(),
            [&](int i) { return std::pow(std::abs(g.value(j, i)(rr, cc)), p); }, 0.0);
      total += std::pow(acc, 1.0 / p);
    }
  }
  return total;
}

/// Hoelder seminorm of one layer with exponent theta = 1/q in [0,1]:
/// max over node pairs of |x(t)-x(s)| / |t-s|^theta, component-summed.
/// At theta = 0 it degenerates to 2*sup|x| per component (diameter bound);
/// that convention mirrors the p = 1 case of the point estimates and is a
/// diagnostic, not a norm identity.
inline double holder_seminorm(const GridFunction& g, int layer, double theta) {
  if (theta < 0.0 || theta > 1.0)
    throw DomainError("holder_seminorm: exponent must lie in [0,1]");
  double total = 0.0;
  const int nn = g.grid().num_nodes();
  for (int rr = 0; rr < g.rows(); ++rr) {
    for (int cc = 0; cc < g.cols(); ++cc) {
      double best = 0.0;
      if (theta == 0.0) {
        for (int i = 0; i < nn; ++i)
          best = std::max(best, 2.0 * std::abs(g.value(layer, i)(rr, cc)));
      } else {
        for (int i = 0; i < nn; ++i) {
          const complexd xi = g.value(layer, i)(rr, cc);
          for (int k = i + 1; k < nn; ++k) {
            const double dt = g.grid().node(k) - g.grid().node(i);
            best = std::max(best, std::abs(g.value(layer, k)(rr, cc) - xi) /
                                      std::pow(dt, theta));
          }
        }
      }
      total += best;
    }
  }
  return total;
}

/// L_q norm of an order-0 kernel, component-summed; q may be infinite
/// (sup norm per component).
inline double lq_kernel_norm(const GridFunction& g, double q) {
  if (std::isinf(q)) {
    double total = 0.0;
    for (int rr = 0; rr < g.rows(); ++rr)
      for (int cc = 0; cc < g.cols(); ++cc) {
        double sup = 0.0;
        for (int i = 0; i < g.grid().num_nodes(); ++i)
          sup = std::max(sup, std::abs(g.value(0, i)(rr, cc)));
        total += sup;
      }
    return total;
  }
  return lp_norm(g, 0, q);
}

}  // namespace sbvp

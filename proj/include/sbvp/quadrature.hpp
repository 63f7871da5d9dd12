#pragma once

#include <vector>

#include "sbvp/grid.hpp"

namespace sbvp {

/// Composite Simpson weight of node i on an even uniform grid with spacing h.
inline double simpson_weight(int i, int num_intervals, double h) {
  if (i == 0 || i == num_intervals) return h / 3.0;
  return (i % 2 == 1) ? 4.0 * h / 3.0 : 2.0 * h / 3.0;
}

/// Composite Simpson over all grid nodes. `node_value(i)` supplies the sample
/// at node i; T must support += and scaling by double.
template <typename T, typename F>
T simpson_integrate(const Grid& g, F&& node_value, T acc) {
  const double h = g.spacing();
  for (int i = 0; i <= g.num_intervals; ++i)
    acc += node_value(i) * simpson_weight(i, g.num_intervals, h);
  return acc;
}

/// Prefix integrals at every node. Even prefixes use composite Simpson; odd
/// nodes are reached by a trapezoid step from the previous node. The final
/// value keeps the O(h^4) Simpson budget, interior odd nodes are O(h^3).
template <typename T, typename F>
std::vector<T> cumulative_integrate(const Grid& g, F&& node_value, T zero) {
  const double h = g.spacing();
  std::vector<T> prefix(static_cast<size_t>(g.num_nodes()), zero);
  for (int i = 1; i <= g.num_intervals; ++i) {
    if (i % 2 == 0)
      prefix[i] = prefix[i - 2] +
                  (node_value(i - 2) + 4.0 * node_value(i - 1) + node_value(i)) * (h / 3.0);
    else
      prefix[i] = prefix[i - 1] + (node_value(i - 1) + node_value(i)) * (h / 2.0);
  }
  return prefix;
}

}  // namespace sbvp

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "sbvp/quadrature.hpp"

namespace sbvp {

/// Value shape of a grid function: scalar, column vector, or matrix.
struct Shape {
  int rows = 1;
  int cols = 1;

  static Shape scalar() { return {1, 1}; }
  static Shape vector(int d) { return {d, 1}; }
  static Shape matrix(int r, int c) { return {r, c}; }

  int components() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
};

inline constexpr double kDefaultConsistencyTol = 1e-6;

/// Evaluates the j-th derivative of a closed-form function at t.
using Sampler = std::function<Matrix(int deriv, double t)>;
using ScalarSampler = std::function<complexd(int deriv, double t)>;

/// Complex function on a uniform grid storing node samples of its derivatives
/// 0..order as separate layers. Layers come from closed forms or from the
/// solver, never from numerical differentiation; mutual consistency of the
/// stack is checked with an integral residual test. Immutable after
/// construction, safe to share across threads.
class GridFunction {
 public:
  static GridFunction from_layers(const Grid& grid, Shape shape,
                                  std::vector<std::vector<Matrix>> layers) {
    return GridFunction(grid, shape, std::move(layers));
  }

  static GridFunction zero(const Grid& grid, Shape shape, int order) {
    std::vector<std::vector<Matrix>> layers(
        static_cast<size_t>(order) + 1,
        std::vector<Matrix>(static_cast<size_t>(grid.num_nodes()),
                            Matrix::Zero(shape.rows, shape.cols)));
    return GridFunction(grid, shape, std::move(layers));
  }

  const Grid& grid() const { return grid_; }
  Shape shape() const { return shape_; }
  int rows() const { return shape_.rows; }
  int cols() const { return shape_.cols; }
  int order() const { return static_cast<int>(layers_.size()) - 1; }

  const Matrix& value(int layer, int node) const {
    check_layer(layer);
    return layers_[static_cast<size_t>(layer)][static_cast<size_t>(node)];
  }

  /// Interpolates layer `layer` at t with a cubic through the four nearest
  /// nodes (one-sided near the endpoints); exact at nodes.
  Matrix eval(int layer, double t) const {
    check_layer(layer);
    const double slack = 1e-12 * grid_.length();
    if (t < grid_.a - slack || t > grid_.b + slack)
      throw DomainError("eval: point outside the interval");
    t = std::clamp(t, grid_.a, grid_.b);

    const int num_nodes = grid_.num_nodes();
    const int window = std::min(4, num_nodes);
    const double h = grid_.spacing();
    int i0 = static_cast<int>(std::floor((t - grid_.a) / h)) - 1;
    i0 = std::clamp(i0, 0, num_nodes - window);

    Matrix acc = Matrix::Zero(shape_.rows, shape_.cols);
    for (int k = 0; k < window; ++k) {
      double w = 1.0;
      for (int l = 0; l < window; ++l) {
        if (l == k) continue;
        w *= (t - grid_.node(i0 + l)) / (grid_.node(i0 + k) - grid_.node(i0 + l));
      }
      acc += w * value(layer, i0 + k);
    }
    return acc;
  }

  double max_abs(int layer) const {
    check_layer(layer);
    double m = 0.0;
    for (const Matrix& v : layers_[static_cast<size_t>(layer)])
      m = std::max(m, v.cwiseAbs().maxCoeff());
    return m;
  }

  /// Checks every adjacent layer pair per component:
  ///   |x^(j)(b) - x^(j)(a) - Simpson(x^(j+1))| <= tol * (1 + max node magnitude).
  void verify_consistency(double tol = kDefaultConsistencyTol) const {
    for (int j = 0; j + 1 <= order(); ++j) {
      for (int rr = 0; rr < shape_.rows; ++rr) {
        for (int cc = 0; cc < shape_.cols; ++cc) {
          const complexd integral = simpson_integrate<complexd>(
              grid_, [&](int i) { return value(j + 1, i)(rr, cc); }, complexd(0.0));
          const complexd jump =
              value(j, grid_.num_intervals)(rr, cc) - value(j, 0)(rr, cc);
          double scale = 1.0;
          for (int i = 0; i <= grid_.num_intervals; ++i)
            scale = std::max({scale, 1.0 + std::abs(value(j, i)(rr, cc)),
                              1.0 + std::abs(value(j + 1, i)(rr, cc))});
          if (std::abs(jump - integral) > tol * scale)
            throw StackConsistencyError(
                "derivative stack inconsistent at layer " + std::to_string(j + 1) +
                    ", component (" + std::to_string(rr) + "," + std::to_string(cc) +
                    "): residual " + std::to_string(std::abs(jump - integral)),
                j + 1);
        }
      }
    }
  }

  bool same_layout(const GridFunction& o) const {
    return grid_.same_as(o.grid_) && shape_ == o.shape_;
  }

 private:
  GridFunction(const Grid& grid, Shape shape, std::vector<std::vector<Matrix>> layers)
      : grid_(grid), shape_(shape), layers_(std::move(layers)) {
    grid_.validate();
    if (layers_.empty()) throw DimensionError("grid function: needs at least layer 0");
    for (const auto& layer : layers_) {
      if (static_cast<int>(layer.size()) != grid_.num_nodes())
        throw DimensionError("grid function: layer node count does not match grid");
      for (const Matrix& v : layer)
        if (v.rows() != shape.rows || v.cols() != shape.cols)
          throw DimensionError("grid function: node value shape mismatch");
    }
  }

  void check_layer(int layer) const {
    if (layer < 0 || layer > order())
      throw InsufficientOrderError("grid function: derivative layer " +
                                   std::to_string(layer) + " not stored (order " +
                                   std::to_string(order()) + ")");
  }

  Grid grid_;
  Shape shape_;
  std::vector<std::vector<Matrix>> layers_;  // layers_[j][i], j = derivative order
};

/// Samples a closed-form derivative stack onto the grid and verifies stack
/// consistency; rejects inconsistent samplers naming the offending layer.
inline GridFunction make_grid_function(const Grid& grid, Shape shape, int order,
                                       const Sampler& sampler,
                                       double tol = kDefaultConsistencyTol) {
  if (order < 0) throw DomainError("make_grid_function: order must be >= 0");
  std::vector<std::vector<Matrix>> layers(static_cast<size_t>(order) + 1);
  for (int j = 0; j <= order; ++j) {
    layers[static_cast<size_t>(j)].reserve(static_cast<size_t>(grid.num_nodes()));
    for (int i = 0; i < grid.num_nodes(); ++i) {
      Matrix v = sampler(j, grid.node(i));
      if (v.rows() != shape.rows || v.cols() != shape.cols)
        throw DimensionError("make_grid_function: sampler shape mismatch at layer " +
                             std::to_string(j));
      layers[static_cast<size_t>(j)].push_back(std::move(v));
    }
  }
  GridFunction g = GridFunction::from_layers(grid, shape, std::move(layers));
  g.verify_consistency(tol);
  return g;
}

inline GridFunction make_scalar_grid_function(const Grid& grid, int order,
                                              const ScalarSampler& sampler,
                                              double tol = kDefaultConsistencyTol) {
  return make_grid_function(
      grid, Shape::scalar(), order,
      [&](int j, double t) {
        Matrix v(1, 1);
        v(0, 0) = sampler(j, t);
        return v;
      },
      tol);
}

namespace detail {

template <typename Op>
GridFunction combine(const GridFunction& a, const GridFunction& b, Op op) {
  if (!a.same_layout(b))
    throw DimensionError("grid function arithmetic: layout mismatch");
  const int order = std::min(a.order(), b.order());
  std::vector<std::vector<Matrix>> layers(static_cast<size_t>(order) + 1);
  for (int j = 0; j <= order; ++j)
    for (int i = 0; i < a.grid().num_nodes(); ++i)
      layers[static_cast<size_t>(j)].push_back(op(a.value(j, i), b.value(j, i)));
  return GridFunction::from_layers(a.grid(), a.shape(), std::move(layers));
}

}  // namespace detail

inline GridFunction operator+(const GridFunction& a, const GridFunction& b) {
  return detail::combine(a, b, [](const Matrix& x, const Matrix& y) -> Matrix { return x + y; });
}

inline GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  return detail::combine(a, b, [](const Matrix& x, const Matrix& y) -> Matrix { return x - y; });
}

inline GridFunction operator*(complexd scalar, const GridFunction& g) {
  std::vector<std::vector<Matrix>> layers(static_cast<size_t>(g.order()) + 1);
  for (int j = 0; j <= g.order(); ++j)
    for (int i = 0; i < g.grid().num_nodes(); ++i)
      layers[static_cast<size_t>(j)].push_back(scalar * g.value(j, i));
  return GridFunction::from_layers(g.grid(), g.shape(), std::move(layers));
}

}  // namespace sbvp

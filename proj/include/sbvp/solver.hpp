#pragma once

#include <utility>
#include <vector>

#include "sbvp/system.hpp"

namespace sbvp {

struct SolveOptions {
  double singular_tol = 1e-8;          // sigma_min <= tol * sigma_max fails Condition (0)
  double fundamental_rank_tol = 1e-12; // nodewise rank guard on the fundamental matrix
};

/// Matrix solution of X' + A(t) X = 0 with X(a) = I, together with nodewise
/// inverses. The stack carries layers 0..n+1 filled from the differential
/// identity, which the lifted boundary operators consume.
struct FundamentalMatrix {
  GridFunction X;
  std::vector<Matrix> inverses;
};

namespace detail {

/// Derivative layers of the state matrix itself, via Leibniz on the stack:
/// given layers 0..s of X and 0..s of A, layer s+1 of X is -(A X)^(s).
inline Matrix leibniz_next_layer(const GridFunction& state_matrix,
                                 const std::vector<std::vector<Matrix>>& x_layers,
                                 int s, int node) {
  Matrix v = Matrix::Zero(x_layers[0][static_cast<size_t>(node)].rows(),
                          x_layers[0][static_cast<size_t>(node)].cols());
  for (int d = 0; d <= s; ++d)
    v -= binomial(s, d) * (state_matrix.value(d, node) *
                           x_layers[static_cast<size_t>(s - d)][static_cast<size_t>(node)]);
  return v;
}

}  // namespace detail

/// Integrates the homogeneous matrix equation X' = -A(t) X with fixed-step
/// RK4, reading A at half steps through cubic interpolation; the derivative
/// layers are filled from the equation, never by differencing.
inline FundamentalMatrix fundamental_matrix(const GridFunction& state_matrix,
                                            double rank_tol = 1e-12) {
  const Grid& grid = state_matrix.grid();
  if (state_matrix.rows() != state_matrix.cols())
    throw DimensionError("fundamental matrix: state matrix must be square");
  const int dim = state_matrix.rows();
  const int nodes = grid.num_nodes();
  const double h = grid.spacing();

  std::vector<std::vector<Matrix>> layers(static_cast<size_t>(state_matrix.order()) + 2);
  layers[0].reserve(static_cast<size_t>(nodes));
  layers[0].push_back(Matrix::Identity(dim, dim));
  for (int i = 0; i + 1 < nodes; ++i) {
    const Matrix& a0 = state_matrix.value(0, i);
    const Matrix am = state_matrix.eval(0, grid.node(i) + 0.5 * h);
    const Matrix& a1 = state_matrix.value(0, i + 1);
    const Matrix& x = layers[0].back();
    const Matrix k1 = -(a0 * x);
    const Matrix k2 = -(am * (x + (0.5 * h) * k1));
    const Matrix k3 = -(am * (x + (0.5 * h) * k2));
    const Matrix k4 = -(a1 * (x + h * k3));
    layers[0].push_back(x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  }
  for (int s = 0; s <= state_matrix.order(); ++s) {
    layers[static_cast<size_t>(s) + 1].reserve(static_cast<size_t>(nodes));
    for (int i = 0; i < nodes; ++i)
      layers[static_cast<size_t>(s) + 1].push_back(
          detail::leibniz_next_layer(state_matrix, layers, s, i));
  }

  FundamentalMatrix fund{
      GridFunction::from_layers(grid, Shape::matrix(dim, dim), std::move(layers)), {}};
  fund.inverses.reserve(static_cast<size_t>(nodes));
  for (int i = 0; i < nodes; ++i) {
    const Matrix& x = fund.X.value(0, i);
    const Eigen::JacobiSVD<Matrix> svd(x);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    if (!(smin > rank_tol * smax))
      throw SingularFundamentalMatrixError(
          "fundamental matrix numerically singular at node " + std::to_string(i),
          smin, smax);
    fund.inverses.push_back(x.partialPivLu().inverse());
  }
  return fund;
}

/// The rm x rm matrix whose invertibility realizes unique solvability: the
/// lifted boundary operator applied to the columns of the fundamental matrix.
struct CharacteristicMatrix {
  Matrix M;
  double sigma_min = 0.0;
  double sigma_max = 0.0;

  double sigma_ratio() const { return sigma_max > 0.0 ? sigma_min / sigma_max : 0.0; }
};

inline CharacteristicMatrix characteristic_matrix(const FundamentalMatrix& fund,
                                                  const LiftedBoundaryOperator& boundary) {
  CharacteristicMatrix cm;
  cm.M = boundary.apply(fund.X);
  const Eigen::JacobiSVD<Matrix> svd(cm.M);
  cm.sigma_max = svd.singularValues()(0);
  cm.sigma_min = svd.singularValues()(svd.singularValues().size() - 1);
  return cm;
}

enum class Solvability { nonsingular, singular };

/// Condition (0): the homogeneous problem has only the trivial solution,
/// decided by the relative singular-value gap of the characteristic matrix.
inline Solvability condition0_check(const CharacteristicMatrix& cm,
                                    double singular_tol = 1e-8) {
  return cm.sigma_min > singular_tol * cm.sigma_max ? Solvability::nonsingular
                                                    : Solvability::singular;
}

struct SolveReport {
  GridFunction y;         // m-vector, order n+r
  double residual_l = 0;  // ||L y - f||_{n,p}
  double residual_b = 0;  // ||B y - c|| on C^rm
  double sigma_min = 0;   // characteristic matrix spectrum edges
  double sigma_max = 0;
};

/// Solves one problem by variation of parameters around the fundamental
/// matrix: x_p(t) = X(t) * int_a^t X^{-1} f, then a boundary correction
/// through the characteristic matrix. The solution stack reaches order n+r,
/// with upper layers reconstructed from the differential identity.
inline SolveReport solve_bvp(const ProblemInstance& prob, const SolveOptions& opts = {}) {
  const FirstOrderProblem red = companion_reduce(prob);
  const SobolevParams& P = red.params;
  const Grid& grid = red.state_matrix.grid();
  const int rm = P.system_size();
  const int nodes = grid.num_nodes();

  const FundamentalMatrix fund =
      fundamental_matrix(red.state_matrix, opts.fundamental_rank_tol);
  const CharacteristicMatrix cm = characteristic_matrix(fund, red.boundary);
  if (condition0_check(cm, opts.singular_tol) == Solvability::singular)
    throw NoUniqueSolutionError(
        "Condition (0) fails: characteristic matrix numerically singular",
        cm.sigma_min, cm.sigma_max);

  bool forcing_vanishes = true;
  for (int s = 0; s <= red.forcing.order() && forcing_vanishes; ++s)
    forcing_vanishes = red.forcing.max_abs(s) == 0.0;

  // particular solution with x_p(a) = 0
  std::vector<std::vector<Matrix>> xp(static_cast<size_t>(P.n) + 2,
                                      std::vector<Matrix>());
  if (forcing_vanishes) {
    for (auto& layer : xp)
      layer.assign(static_cast<size_t>(nodes), Matrix::Zero(rm, 1));
  } else {
    const std::vector<Matrix> prefix = cumulative_integrate<Matrix>(
        grid,
        [&](int i) -> Matrix {
          return fund.inverses[static_cast<size_t>(i)] * red.forcing.value(0, i);
        },
        Matrix::Zero(rm, 1));
    xp[0].reserve(static_cast<size_t>(nodes));
    for (int i = 0; i < nodes; ++i)
      xp[0].push_back(fund.X.value(0, i) * prefix[static_cast<size_t>(i)]);
    for (int s = 0; s <= P.n; ++s) {
      xp[static_cast<size_t>(s) + 1].reserve(static_cast<size_t>(nodes));
      for (int i = 0; i < nodes; ++i)
        xp[static_cast<size_t>(s) + 1].push_back(
            detail::leibniz_next_layer(red.state_matrix, xp, s, i) +
            red.forcing.value(s, i));
    }
  }
  GridFunction particular =
      GridFunction::from_layers(grid, Shape::vector(rm), std::move(xp));

  const Vector correction =
      cm.M.partialPivLu().solve(red.c - red.boundary.apply_vector(particular));

  // assemble y layers 0..n+r from the blocks of x = x_p + X * correction
  const int m = P.m;
  std::vector<std::vector<Matrix>> y_layers(static_cast<size_t>(P.stack_order()) + 1);
  for (auto& layer : y_layers) layer.reserve(static_cast<size_t>(nodes));
  for (int i = 0; i < nodes; ++i) {
    for (int s = 0; s <= P.n + 1; ++s) {
      const Matrix xs = particular.value(s, i) + fund.X.value(s, i) * correction;
      if (s == 0)
        for (int l = 0; l <= P.r - 1; ++l)
          y_layers[static_cast<size_t>(l)].push_back(xs.middleRows(l * m, m));
      else
        y_layers[static_cast<size_t>(P.r - 1 + s)].push_back(
            xs.middleRows((P.r - 1) * m, m));
    }
  }
  GridFunction y =
      GridFunction::from_layers(grid, Shape::vector(P.m), std::move(y_layers));

  SolveReport report{std::move(y), 0.0, 0.0, cm.sigma_min, cm.sigma_max};
  report.residual_l = sobolev_norm(
      apply_differential_operator(prob.system, report.y) - prob.system.rhs, P.n, P.p);
  report.residual_b = (apply_boundary_operator(prob.boundary, report.y) - prob.c).norm();
  return report;
}

/// Defect of a candidate solution in the given problem:
///   ||L y - f||_{n,p} + ||B y - c||.
/// Evaluating the base solution in a perturbed problem measures how far the
/// perturbation has moved the data.
inline double discrepancy(const ProblemInstance& prob, const GridFunction& candidate) {
  const SobolevParams& P = prob.system.params;
  if (candidate.order() < P.stack_order())
    throw InsufficientOrderError("discrepancy: candidate stack order must reach n+r");
  const double defect_l = sobolev_norm(
      apply_differential_operator(prob.system, candidate) - prob.system.rhs, P.n, P.p);
  const double defect_b =
      (apply_boundary_operator(prob.boundary, candidate) - prob.c).norm();
  return defect_l + defect_b;
}

}  // namespace sbvp

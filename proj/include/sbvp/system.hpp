#pragma once

#include <utility>
#include <vector>

#include "sbvp/boundary.hpp"
#include "sbvp/norms.hpp"

namespace sbvp {

/// Left-hand side and right-hand side of the differential system
///   y^(r) + sum_{j=1}^{r} A_{r-j}(t) y^(r-j) = f(t).
/// coeffs[k] is the matrix attached to y^(k), k = 0..r-1.
struct DifferentialSystem {
  SobolevParams params;
  std::vector<GridFunction> coeffs;  // m x m, order >= n each
  GridFunction rhs;                  // m-vector, order >= n

  const Grid& grid() const { return rhs.grid(); }

  void validate() const {
    params.validate();
    if (static_cast<int>(coeffs.size()) != params.r)
      throw DimensionError("system: expected " + std::to_string(params.r) +
                           " coefficient matrices");
    for (const GridFunction& a : coeffs) {
      if (a.shape() != Shape::matrix(params.m, params.m))
        throw DimensionError("system: coefficient must be m x m");
      if (a.order() < params.n)
        throw InsufficientOrderError("system: coefficient stack order below n");
      if (!a.grid().same_as(rhs.grid()))
        throw DimensionError("system: coefficient grid mismatch");
    }
    if (rhs.shape() != Shape::vector(params.m))
      throw DimensionError("system: right-hand side must be an m-vector");
    if (rhs.order() < params.n)
      throw InsufficientOrderError("system: right-hand side stack order below n");
  }
};

/// One boundary-value problem: system, boundary operator, boundary data.
struct ProblemInstance {
  DifferentialSystem system;
  BoundaryOperator boundary;
  Vector c;  // rm

  void validate() const {
    system.validate();
    validate_boundary(boundary, system.params, system.grid());
    if (c.size() != system.params.system_size())
      throw DimensionError("problem: boundary data must have rm entries");
  }
};

/// Applies L to a candidate solution whose stack reaches order n+r. Products
/// are differentiated with the Leibniz rule on the stored stacks, so the
/// result is an exact order-n stack given exact inputs.
inline GridFunction apply_differential_operator(const DifferentialSystem& sys,
                                                const GridFunction& y) {
  const SobolevParams& P = sys.params;
  if (y.shape() != Shape::vector(P.m))
    throw DimensionError("apply L: candidate must be an m-vector");
  if (y.order() < P.stack_order())
    throw InsufficientOrderError("apply L: candidate stack order must reach n+r");
  if (!y.grid().same_as(sys.grid())) throw DimensionError("apply L: grid mismatch");

  const int nodes = sys.grid().num_nodes();
  std::vector<std::vector<Matrix>> layers(static_cast<size_t>(P.n) + 1);
  for (int s = 0; s <= P.n; ++s) {
    layers[static_cast<size_t>(s)].reserve(static_cast<size_t>(nodes));
    for (int i = 0; i < nodes; ++i) {
      Matrix v = y.value(P.r + s, i);
      for (int k = 0; k < P.r; ++k)
        for (int d = 0; d <= s; ++d)
          v += detail::binomial(s, d) *
               (sys.coeffs[static_cast<size_t>(k)].value(d, i) * y.value(k + s - d, i));
      layers[static_cast<size_t>(s)].push_back(std::move(v));
    }
  }
  return GridFunction::from_layers(sys.grid(), Shape::vector(P.m), std::move(layers));
}

/// Applies a boundary operator to a candidate solution. Canonical forms need
/// a stack of order n+r (the integral term reads the top layer), multipoint
/// forms need n+r-1.
inline Vector apply_boundary_operator(const BoundaryOperator& op, const GridFunction& y) {
  if (const auto* form = std::get_if<CanonicalBoundaryForm>(&op)) {
    const int top = static_cast<int>(form->alphas.size());  // n+r
    if (y.order() < top)
      throw InsufficientOrderError("apply B: canonical form needs stack order n+r");
    Matrix out = Matrix::Zero(form->alphas.front().rows(), y.cols());
    for (int k = 1; k <= top; ++k)
      out += form->alphas[static_cast<size_t>(k - 1)] * y.value(k - 1, 0);
    if (form->kernel) {
      out = simpson_integrate<Matrix>(
          y.grid(),
          [&](int i) -> Matrix { return form->kernel->value(0, i) * y.value(top, i); },
          std::move(out));
    }
    return out.col(0);
  }
  const auto& form = std::get<MultipointBoundaryForm>(op);
  Matrix out;
  bool init = false;
  for (const auto& group : form.groups) {
    for (const auto& term : group.terms) {
      const int count = static_cast<int>(term.alphas.size());  // n+r
      if (y.order() < count - 1)
        throw InsufficientOrderError("apply B: multipoint form needs stack order n+r-1");
      for (int l = 0; l < count; ++l) {
        Matrix contrib = term.alphas[static_cast<size_t>(l)] * y.eval(l, term.point);
        if (!init) {
          out = std::move(contrib);
          init = true;
        } else {
          out += contrib;
        }
      }
    }
  }
  if (!init) throw DimensionError("apply B: multipoint form has no terms");
  return out.col(0);
}

/// Boundary operator acting on first-order (rm-sized) candidates, obtained by
/// rewriting traces of y through the blocks of x = col(y, y', ..., y^(r-1)).
/// Accepts any rm x d stack, so the same code serves vector candidates and
/// the columns of a fundamental matrix.
class LiftedBoundaryOperator {
 public:
  LiftedBoundaryOperator(BoundaryOperator op, const SobolevParams& params)
      : op_(std::move(op)), params_(params) {}

  const BoundaryOperator& source() const { return op_; }
  const SobolevParams& params() const { return params_; }

  /// Minimum stack order the operand must carry.
  int required_order() const {
    return is_canonical(op_) ? params_.n + 1 : params_.n;
  }

  Matrix apply(const GridFunction& x) const {
    const int m = params_.m;
    const int r = params_.r;
    if (x.rows() != params_.system_size())
      throw DimensionError("lifted boundary operator: operand must have rm rows");
    if (x.order() < required_order())
      throw InsufficientOrderError("lifted boundary operator: operand stack too short");

    if (const auto* form = std::get_if<CanonicalBoundaryForm>(&op_)) {
      Matrix out = Matrix::Zero(params_.system_size(), x.cols());
      // traces of the lower blocks at a, then derivatives of the top block
      for (int k = 1; k <= r - 1; ++k)
        out += form->alphas[static_cast<size_t>(k - 1)] *
               x.value(0, 0).middleRows((k - 1) * m, m);
      for (int k = r; k <= params_.n + r; ++k)
        out += form->alphas[static_cast<size_t>(k - 1)] *
               x.value(k - r, 0).middleRows((r - 1) * m, m);
      if (form->kernel) {
        out = simpson_integrate<Matrix>(
            x.grid(),
            [&](int i) -> Matrix {
              return form->kernel->value(0, i) *
                     x.value(params_.n + 1, i).middleRows((r - 1) * m, m);
            },
            std::move(out));
      }
      return out;
    }

    const auto& form = std::get<MultipointBoundaryForm>(op_);
    Matrix out = Matrix::Zero(params_.system_size(), x.cols());
    for (const auto& group : form.groups) {
      for (const auto& term : group.terms) {
        for (int l = 0; l < static_cast<int>(term.alphas.size()); ++l) {
          // y^(l) = x_{l+1} for l < r, and the (l-r+1)-th derivative of the
          // top block otherwise
          const Matrix block =
              (l <= r - 2) ? Matrix(x.eval(0, term.point).middleRows(l * m, m))
                           : Matrix(x.eval(l - (r - 1), term.point)
                                        .middleRows((r - 1) * m, m));
          out += term.alphas[static_cast<size_t>(l)] * block;
        }
      }
    }
    return out;
  }

  Vector apply_vector(const GridFunction& x) const { return apply(x).col(0); }

 private:
  BoundaryOperator op_;
  SobolevParams params_;
};

inline LiftedBoundaryOperator lift_boundary_form(const BoundaryOperator& op,
                                                 const SobolevParams& params) {
  return LiftedBoundaryOperator(op, params);
}

/// The order-r problem rewritten for x = col(y, y', ..., y^(r-1)):
///   x' + state_matrix(t) x = forcing(t),  boundary(x) = c.
struct FirstOrderProblem {
  SobolevParams params;
  GridFunction state_matrix;  // rm x rm, order n
  GridFunction forcing;       // rm-vector, order n
  LiftedBoundaryOperator boundary;
  Vector c;
};

/// Reduces an order-r problem to first order. The superdiagonal blocks carry
/// -I_m in the x' + A x convention, so the component identities x_k' = x_{k+1}
/// hold and x solves the reduced problem exactly when y solves the original.
/// For r = 1 every field maps through unchanged.
inline FirstOrderProblem companion_reduce(const ProblemInstance& prob) {
  prob.validate();
  const SobolevParams& P = prob.system.params;
  const Grid& grid = prob.system.grid();

  if (P.r == 1) {
    return FirstOrderProblem{P, prob.system.coeffs.front(), prob.system.rhs,
                             lift_boundary_form(prob.boundary, P), prob.c};
  }

  const int m = P.m;
  const int rm = P.system_size();
  const int nodes = grid.num_nodes();

  std::vector<std::vector<Matrix>> a_layers(static_cast<size_t>(P.n) + 1);
  std::vector<std::vector<Matrix>> f_layers(static_cast<size_t>(P.n) + 1);
  for (int s = 0; s <= P.n; ++s) {
    a_layers[static_cast<size_t>(s)].reserve(static_cast<size_t>(nodes));
    f_layers[static_cast<size_t>(s)].reserve(static_cast<size_t>(nodes));
    for (int i = 0; i < nodes; ++i) {
      Matrix a = Matrix::Zero(rm, rm);
      if (s == 0)
        for (int k = 0; k + 1 < P.r; ++k)
          a.block(k * m, (k + 1) * m, m, m) = -Matrix::Identity(m, m);
      for (int k = 0; k < P.r; ++k)
        a.block((P.r - 1) * m, k * m, m, m) =
            prob.system.coeffs[static_cast<size_t>(k)].value(s, i);
      a_layers[static_cast<size_t>(s)].push_back(std::move(a));

      Matrix f = Matrix::Zero(rm, 1);
      f.block((P.r - 1) * m, 0, m, 1) = prob.system.rhs.value(s, i);
      f_layers[static_cast<size_t>(s)].push_back(std::move(f));
    }
  }
  return FirstOrderProblem{
      P,
      GridFunction::from_layers(grid, Shape::matrix(rm, rm), std::move(a_layers)),
      GridFunction::from_layers(grid, Shape::vector(rm), std::move(f_layers)),
      lift_boundary_form(prob.boundary, P), prob.c};
}

}  // namespace sbvp

#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sbvp/grid_function.hpp"

namespace sbvp {

/// Boundary operator in canonical form,
///   B y = sum_{k=1}^{n+r} alpha_k y^(k-1)(a) + int_a^b kernel(t) y^(n+r)(t) dt,
/// with rm x m trace matrices alpha_k and an rm x m L_q kernel. An absent
/// kernel means the zero kernel.
struct CanonicalBoundaryForm {
  std::vector<Matrix> alphas;          // n+r matrices, each rm x m
  std::optional<GridFunction> kernel;  // order-0 stack on the problem grid
};

/// One evaluation point with its coefficient matrices per derivative order.
struct MultipointTerm {
  double point = 0.0;
  std::vector<Matrix> alphas;  // index l = derivative order, 0..n+r-1; each rm x m
};

/// A group of evaluation points. Groups carrying a limit point are expected
/// to cluster there as the parameter vanishes; the single free group (no
/// limit) may wander, its coefficients must vanish instead.
struct MultipointGroup {
  std::optional<double> limit;
  std::vector<MultipointTerm> terms;
};

/// Boundary operator as a finite sum of derivative traces,
///   B y = sum_{l,i,j} alpha_{i,j}^(l) y^(l)(t_{i,j}).
struct MultipointBoundaryForm {
  std::vector<MultipointGroup> groups;

  int limit_group_count() const {
    int k = 0;
    for (const auto& g : groups) k += g.limit.has_value() ? 1 : 0;
    return k;
  }
};

using BoundaryOperator = std::variant<CanonicalBoundaryForm, MultipointBoundaryForm>;

inline bool is_canonical(const BoundaryOperator& op) {
  return std::holds_alternative<CanonicalBoundaryForm>(op);
}

inline void validate_canonical(const CanonicalBoundaryForm& form,
                               const SobolevParams& params, const Grid& grid) {
  if (static_cast<int>(form.alphas.size()) != params.boundary_count())
    throw DimensionError("canonical boundary form: expected " +
                         std::to_string(params.boundary_count()) + " trace matrices, got " +
                         std::to_string(form.alphas.size()));
  for (const Matrix& a : form.alphas)
    if (a.rows() != params.system_size() || a.cols() != params.m)
      throw DimensionError("canonical boundary form: trace matrix must be rm x m");
  if (form.kernel) {
    if (form.kernel->rows() != params.system_size() || form.kernel->cols() != params.m)
      throw DimensionError("canonical boundary form: kernel must be rm x m");
    if (!form.kernel->grid().same_as(grid))
      throw DimensionError("canonical boundary form: kernel grid mismatch");
  }
}

inline void validate_multipoint(const MultipointBoundaryForm& form,
                                const SobolevParams& params, const Grid& grid) {
  if (form.limit_group_count() < 1)
    throw DimensionError("multipoint boundary form: needs at least one limit group");
  int free_groups = 0;
  std::vector<double> limits;
  for (const auto& group : form.groups) {
    if (group.limit) {
      for (double other : limits)
        if (*group.limit == other)
          throw DomainError("multipoint boundary form: duplicate limit points");
      limits.push_back(*group.limit);
      if (*group.limit < grid.a || *group.limit > grid.b)
        throw DomainError("multipoint boundary form: limit point outside the interval");
    } else if (++free_groups > 1) {
      throw DimensionError("multipoint boundary form: at most one free group");
    }
    for (const auto& term : group.terms) {
      if (term.point < grid.a || term.point > grid.b)
        throw DomainError("multipoint boundary form: evaluation point outside the interval");
      if (static_cast<int>(term.alphas.size()) != params.boundary_count())
        throw DimensionError("multipoint boundary form: expected coefficients for orders 0.." +
                             std::to_string(params.boundary_count() - 1));
      for (const Matrix& a : term.alphas)
        if (a.rows() != params.system_size() || a.cols() != params.m)
          throw DimensionError("multipoint boundary form: coefficient must be rm x m");
    }
  }
}

inline void validate_boundary(const BoundaryOperator& op, const SobolevParams& params,
                              const Grid& grid) {
  if (const auto* c = std::get_if<CanonicalBoundaryForm>(&op))
    validate_canonical(*c, params, grid);
  else
    validate_multipoint(std::get<MultipointBoundaryForm>(op), params, grid);
}

}  // namespace sbvp

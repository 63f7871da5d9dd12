#pragma once

// Umbrella header: linear boundary-value problems for systems of complex
// ODEs in Sobolev norms, with parameter-continuity diagnostics.

#include "sbvp/config.hpp"
#include "sbvp/continuity.hpp"
#include "sbvp/expr.hpp"
#include "sbvp/grid.hpp"
#include "sbvp/grid_function.hpp"
#include "sbvp/multipoint.hpp"
#include "sbvp/norms.hpp"
#include "sbvp/quadrature.hpp"
#include "sbvp/runner.hpp"
#include "sbvp/solver.hpp"
#include "sbvp/system.hpp"
#include "sbvp/trend.hpp"
#include "sbvp/types.hpp"

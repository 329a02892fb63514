#pragma once

#include "hivp/hessian/operator.hpp"
#include "hivp/pipeline/pipeline.hpp"

// Dense reference Hessians for verification at small sizes.
namespace hivp {

inline constexpr Index kDenseGuard = 2000;

// Column i is hvp(e_i). Throws SizeGuardExceeded above `guard` parameters.
DenseBlock dense_hessian(const HessianOperator& h, Index guard = kDenseGuard);

// Central differences of the analytic gradient along each coordinate.
DenseBlock finite_diff_hessian(const Pipeline& p, const EvaluationPoint& pt, double step = 1e-4);

// The four-term closed form evaluated with dense operator matrices and dense
// solves against M. Shares the assembled blocks with hvp but none of its
// matrix-free code.
DenseBlock closed_form_hessian(const HessianOperator& h, Index guard = kDenseGuard);

// ||H - H^T||_inf / ||H||_inf, or 0 for H = 0.
double symmetry_error(const DenseBlock& h);

}  // namespace hivp

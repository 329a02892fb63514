#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "hivp/blockmat/tridiagonal.hpp"
#include "hivp/hessian/operator.hpp"
#include "hivp/pipeline/pipeline.hpp"

namespace hivp {

struct SolveOptions {
  double pivot_tolerance = kDefaultPivotTolerance;
  // One correction step through the existing factorization.
  bool refine = false;
  // Pivot blocks whose condition estimate exceeds this attach a warning.
  double condition_warning = 1e10;
};

struct SolveReport {
  std::string method;
  Vector x;
  // ||(H + eps I) x - b||, always recomputed with the matrix-free hvp.
  double residual = 0.0;
  double eps = 0.0;
  std::size_t iterations = 0;
  std::vector<double> condition_estimates;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;
  // Work and peak block storage of the solve itself, excluding the residual
  // check.
  std::uint64_t flops = 0;
  std::int64_t peak_bytes = 0;

  nlohmann::json to_json() const;
};

// ||hvp(x) + eps x - b||
double damped_residual(const HessianOperator& h, const Vector& x, const Vector& b, double eps);

// (H + eps I) x = b: lift, pivot to block-tridiagonal form, block-LDU solve,
// un-pivot. Throws SingularPivotBlock when a Schur complement is singular to
// the pivot tolerance; indefinite but nonsingular systems are solved as is.
SolveReport hivp_solve(const HessianOperator& h, const Vector& b, double eps,
                       const SolveOptions& options = {});
// As above, including assembly of the operator in the counted work.
SolveReport hivp_solve(const Pipeline& p, const EvaluationPoint& pt, const Vector& b, double eps,
                       const SolveOptions& options = {});

// Unpreconditioned conjugate gradients on v -> hvp(v) + eps v. Stops when
// the recurrence residual falls to tol ||b||. Throws NoConvergence after
// max_iter iterations or on a non-positive curvature direction.
SolveReport cg_solve(const HessianOperator& h, const Vector& b, double eps, double tol,
                     std::size_t max_iter);

// Baseline: forms H from its closed form with every operator held as a dense
// matrix, then LU-solves. Flops count the dense formation and factorization.
// Throws SizeGuardExceeded when the parameter count or the activation count
// exceeds `guard`.
SolveReport dense_solve(const HessianOperator& h, const Vector& b, double eps,
                        Index guard = 2000);
SolveReport dense_solve(const Pipeline& p, const EvaluationPoint& pt, const Vector& b, double eps,
                        Index guard = 2000);

}  // namespace hivp

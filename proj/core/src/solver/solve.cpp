#include "hivp/solver/solve.hpp"

#include <Eigen/LU>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <stdexcept>

#include "hivp/hessian/dense.hpp"
#include "hivp/pipeline/json_values.hpp"
#include "hivp/solver/lift.hpp"

namespace hivp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_eps(double eps) {
  if (!std::isfinite(eps) || eps < 0.0) throw std::invalid_argument("eps must be finite and >= 0");
}

void solve_lifted(const HessianOperator& h, const Vector& b, double eps, const SolveOptions& opt,
                  SolveReport& r) {
  const LiftedSystem system = lift(h, eps, b);
  const CommutationPermutation pi = system.permutation();
  const LDUFactorization f =
      block_ldu_factorize(pivot_to_tridiagonal(system.blocks, pi), opt.pivot_tolerance);
  r.x = unpivot_extract(ldu_solve(f, pi.apply(system.rhs)), pi, system.x_size());
  r.condition_estimates = f.pivot_condition_estimates();
  if (opt.refine) {
    Vector correction_rhs = Vector::Zero(system.size());
    correction_rhs.head(b.size()) = b - hvp(h, r.x) - eps * r.x;
    r.x += unpivot_extract(ldu_solve(f, pi.apply(correction_rhs)), pi, system.x_size());
    r.iterations = 1;
  }
}

// Counted dense product; every operator is treated as a full matrix.
DenseBlock counted_product(const DenseBlock& a, const DenseBlock& b) {
  instrument::add_flops(static_cast<std::uint64_t>(2 * a.rows() * a.cols() * b.cols()));
  return a * b;
}

std::uint64_t lu_flops(Index n) {
  const auto m = static_cast<std::uint64_t>(n);
  return 2 * m * m * m / 3;
}

// Forms H from the closed form with dense operator matrices and dense solves
// against M, then LU-solves H + eps I. No layer structure is exploited.
void solve_dense(const HessianOperator& h, const Vector& b, double eps, Index guard,
                 SolveReport& r) {
  const Index n = h.size();
  if (n > guard) throw SizeGuardExceeded(n, guard);
  if (h.M().rows() > guard) throw SizeGuardExceeded(h.M().rows(), guard);
  const DenseBlock m = h.M().dense();
  const DenseBlock p = h.P().dense();
  const DenseBlock dx = h.D_x().dense();
  const DenseBlock dd = h.D_D().dense();
  const DenseBlock dm = h.D_M().dense();
  const DenseBlock dxx = h.D_xx().dense();
  const DenseBlock dzx = h.D_zx().dense();
  const DenseBlock dxz = h.D_xz().dense();
  const DenseBlock dzz = h.D_zz().dense();
  std::int64_t held = 0;
  for (const DenseBlock* x : {&m, &p, &dx, &dd, &dm, &dxx, &dzx, &dxz, &dzz}) held += x->size();

  const Index k = m.rows();
  const Eigen::PartialPivLU<DenseBlock> lu_m(m);
  instrument::add_flops(lu_flops(k) + 2 * static_cast<std::uint64_t>(k * k * n));
  const DenseBlock forward = counted_product(p, lu_m.solve(dx));  // P M^-1 D_x
  const DenseBlock adjoint_t = counted_product(dm.transpose(), p);  // (P^T D_M)^T
  const Eigen::PartialPivLU<DenseBlock> lu_mt(DenseBlock(m.transpose()));
  instrument::add_flops(lu_flops(k) + 2 * static_cast<std::uint64_t>(k * k * adjoint_t.rows()));
  // M^-T P^T D_M, then D_x^T times it.
  const DenseBlock adjoint = lu_mt.solve(DenseBlock(adjoint_t.transpose()));
  const DenseBlock left = counted_product(dx.transpose(), adjoint);

  DenseBlock hess = counted_product(dd, dxx);
  hess += counted_product(counted_product(dd, dzx), forward);
  hess += counted_product(left, dxz);
  hess += counted_product(counted_product(left, dzz), forward);
  hess.diagonal().array() += eps;
  held += 4 * k * k + 2 * n * n;
  const instrument::TrackedBytes tracked(static_cast<std::int64_t>(sizeof(double)) * held);

  const Eigen::PartialPivLU<DenseBlock> lu(hess);
  r.x = lu.solve(b);
  // LU plus two triangular solves.
  instrument::add_flops(lu_flops(n) + 2 * static_cast<std::uint64_t>(n * n));
  r.condition_estimates = {1.0 / lu.rcond()};
}

void attach_condition_warnings(SolveReport& r, double threshold) {
  for (std::size_t i = 0; i < r.condition_estimates.size(); ++i) {
    if (r.condition_estimates[i] > threshold) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "pivot block %zu condition estimate %.3g exceeds %.3g", i,
                    r.condition_estimates[i], threshold);
      r.warnings.emplace_back(buf);
    }
  }
}

// Timing and instrumentation around `body`; the residual is checked after
// the counters stop.
template <typename Body>
SolveReport measured(const char* method, double eps, Body body) {
  check_eps(eps);
  SolveReport r;
  r.method = method;
  r.eps = eps;
  const auto start = Clock::now();
  {
    instrument::FlopScope flops;
    instrument::PeakScope peak;
    body(r);
    r.flops = flops.count();
    r.peak_bytes = peak.peak();
  }
  r.wall_seconds = seconds_since(start);
  return r;
}

}  // namespace

nlohmann::json SolveReport::to_json() const {
  return {{"version", 1},
          {"method", method},
          {"eps", eps},
          {"residual", residual},
          {"iterations", iterations},
          {"condition_estimates", condition_estimates},
          {"warnings", warnings},
          {"wall_seconds", wall_seconds},
          {"flops", flops},
          {"peak_bytes", peak_bytes},
          {"solution", json_values::encode(x)}};
}

double damped_residual(const HessianOperator& h, const Vector& x, const Vector& b, double eps) {
  require_dims(b.size(), h.size(), "right-hand side");
  return (hvp(h, x) + eps * x - b).norm();
}

SolveReport hivp_solve(const HessianOperator& h, const Vector& b, double eps,
                       const SolveOptions& options) {
  SolveReport r = measured("hivp", eps, [&](SolveReport& out) {
    solve_lifted(h, b, eps, options, out);
  });
  attach_condition_warnings(r, options.condition_warning);
  r.residual = damped_residual(h, r.x, b, eps);
  return r;
}

SolveReport hivp_solve(const Pipeline& p, const EvaluationPoint& pt, const Vector& b, double eps,
                       const SolveOptions& options) {
  std::optional<HessianOperator> h;
  SolveReport r = measured("hivp", eps, [&](SolveReport& out) {
    h.emplace(assemble(p, pt));
    solve_lifted(*h, b, eps, options, out);
  });
  attach_condition_warnings(r, options.condition_warning);
  r.residual = damped_residual(*h, r.x, b, eps);
  return r;
}

SolveReport cg_solve(const HessianOperator& h, const Vector& b, double eps, double tol,
                     std::size_t max_iter) {
  require_dims(b.size(), h.size(), "right-hand side");
  require_finite(b, "right-hand side");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  SolveReport r = measured("cg", eps, [&](SolveReport& out) {
    const Index n = b.size();
    out.x = Vector::Zero(n);
    const double target = tol * b.norm();
    Vector res = b;
    double rs = res.squaredNorm();
    if (std::sqrt(rs) <= target) return;
    Vector dir = res;
    Vector a_dir;
    HvpWorkspace ws;
    for (std::size_t k = 1; k <= max_iter; ++k) {
      hvp(h, dir, a_dir, ws);
      a_dir += eps * dir;
      const double curvature = dir.dot(a_dir);
      if (!(curvature > 0.0)) throw NoConvergence(k, std::sqrt(rs));
      const double alpha = rs / curvature;
      out.x += alpha * dir;
      res -= alpha * a_dir;
      const double rs_next = res.squaredNorm();
      instrument::add_flops(static_cast<std::uint64_t>(12 * n));
      out.iterations = k;
      if (std::sqrt(rs_next) <= target) return;
      dir = res + (rs_next / rs) * dir;
      rs = rs_next;
    }
    throw NoConvergence(max_iter, std::sqrt(rs));
  });
  r.residual = damped_residual(h, r.x, b, eps);
  return r;
}

SolveReport dense_solve(const HessianOperator& h, const Vector& b, double eps, Index guard) {
  require_dims(b.size(), h.size(), "right-hand side");
  SolveReport r = measured("dense", eps, [&](SolveReport& out) {
    solve_dense(h, b, eps, guard, out);
  });
  r.residual = damped_residual(h, r.x, b, eps);
  return r;
}

SolveReport dense_solve(const Pipeline& p, const EvaluationPoint& pt, const Vector& b, double eps,
                        Index guard) {
  std::optional<HessianOperator> h;
  SolveReport r = measured("dense", eps, [&](SolveReport& out) {
    h.emplace(assemble(p, pt));
    require_dims(b.size(), h->size(), "right-hand side");
    solve_dense(*h, b, eps, guard, out);
  });
  r.residual = damped_residual(*h, r.x, b, eps);
  return r;
}

}  // namespace hivp

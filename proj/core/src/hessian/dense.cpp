#include "hivp/hessian/dense.hpp"

#include <Eigen/LU>

#include <stdexcept>

namespace hivp {

namespace {

void guard_size(Index n, Index guard) {
  if (n > guard) throw SizeGuardExceeded(n, guard);
}

double inf_norm(const DenseBlock& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace

DenseBlock dense_hessian(const HessianOperator& h, Index guard) {
  const Index n = h.size();
  guard_size(n, guard);
  DenseBlock out(n, n);
  HvpWorkspace ws;
  Vector e = Vector::Zero(n);
  Vector col;
  for (Index i = 0; i < n; ++i) {
    e[i] = 1.0;
    hvp(h, e, col, ws);
    out.col(i) = col;
    e[i] = 0.0;
  }
  return out;
}

DenseBlock finite_diff_hessian(const Pipeline& p, const EvaluationPoint& pt, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  Vector flat = p.join_params(pt.params);
  const Index n = flat.size();
  DenseBlock out(n, n);
  for (Index k = 0; k < n; ++k) {
    const double orig = flat[k];
    flat[k] = orig + step;
    const Vector up = gradient(p, forward(p, pt.z0, flat));
    flat[k] = orig - step;
    const Vector down = gradient(p, forward(p, pt.z0, flat));
    flat[k] = orig;
    out.col(k) = (up - down) / (2.0 * step);
  }
  return out;
}

DenseBlock closed_form_hessian(const HessianOperator& h, Index guard) {
  guard_size(h.size(), guard);
  guard_size(h.M().rows(), guard);
  const DenseBlock m = h.M().dense();
  const DenseBlock p = h.P().dense();
  const DenseBlock dx = h.D_x().dense();
  const DenseBlock dd = h.D_D().dense();
  const DenseBlock dm = h.D_M().dense();
  const Eigen::PartialPivLU<DenseBlock> lu(m);
  const Eigen::PartialPivLU<DenseBlock> lu_t(DenseBlock(m.transpose()));
  const DenseBlock forward = p * lu.solve(dx);                      // P M^-1 D_x
  const DenseBlock adjoint = lu_t.solve(DenseBlock(p.transpose() * dm));  // M^-T P^T D_M
  return dd * h.D_xx().dense() + dd * h.D_zx().dense() * forward +
         dx.transpose() * adjoint * h.D_xz().dense() +
         dx.transpose() * adjoint * h.D_zz().dense() * forward;
}

double symmetry_error(const DenseBlock& h) {
  const double scale = inf_norm(h);
  return scale == 0.0 ? 0.0 : inf_norm(h - h.transpose()) / scale;
}

}  // namespace hivp

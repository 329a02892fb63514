#include "hivp/pipeline/finite_diff.hpp"

#include <stdexcept>

namespace hivp {

namespace {

void require_step(double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
}

LayerJacobians fd_jacobians(const Layer& f, const Vector& z, const Vector& x, double h) {
  const Index a = f.output_dim();
  LayerJacobians j{DenseBlock(a, x.size()), DenseBlock(a, z.size())};
  Vector xp = x;
  for (Index q = 0; q < x.size(); ++q) {
    xp[q] = x[q] + h;
    const Vector up = f.eval(z, xp);
    xp[q] = x[q] - h;
    j.jac_x.col(q) = (up - f.eval(z, xp)) / (2.0 * h);
    xp[q] = x[q];
  }
  Vector zp = z;
  for (Index r = 0; r < z.size(); ++r) {
    zp[r] = z[r] + h;
    const Vector up = f.eval(zp, x);
    zp[r] = z[r] - h;
    j.jac_z.col(r) = (up - f.eval(zp, x)) / (2.0 * h);
    zp[r] = z[r];
  }
  return j;
}

// Column k of the result is the central difference of vec(jacobian) along
// coordinate k of the perturbed argument.
template <typename Pick>
DenseBlock differentiate(const Layer& f, const Vector& z, const Vector& x, bool along_x,
                         Index rows, const FiniteDiffSteps& s, Pick pick) {
  const Vector& base = along_x ? x : z;
  DenseBlock out(rows, base.size());
  Vector shifted = base;
  for (Index k = 0; k < base.size(); ++k) {
    shifted[k] = base[k] + s.second;
    const LayerJacobians plus =
        along_x ? fd_jacobians(f, z, shifted, s.first) : fd_jacobians(f, shifted, x, s.first);
    shifted[k] = base[k] - s.second;
    const LayerJacobians minus =
        along_x ? fd_jacobians(f, z, shifted, s.first) : fd_jacobians(f, shifted, x, s.first);
    shifted[k] = base[k];
    out.col(k) = (pick(plus).reshaped() - pick(minus).reshaped()) / (2.0 * s.second);
  }
  return out;
}

}  // namespace

LayerDerivatives finite_diff_layer_derivatives(const Layer& f, const Vector& z, const Vector& x,
                                               FiniteDiffSteps s) {
  require_step(s.first);
  require_step(s.second);
  require_dims(z.size(), f.input_dim(), "layer input");
  require_dims(x.size(), f.param_dim(), "layer parameters");
  const Index a = f.output_dim();
  const Index n = f.input_dim();
  const Index p = f.param_dim();
  const auto jx = [](const LayerJacobians& j) -> const DenseBlock& { return j.jac_x; };
  const auto jz = [](const LayerJacobians& j) -> const DenseBlock& { return j.jac_z; };

  LayerDerivatives d;
  LayerJacobians j = fd_jacobians(f, z, x, s.first);
  d.jac_x = std::move(j.jac_x);
  d.jac_z = std::move(j.jac_z);
  d.hess_xx = differentiate(f, z, x, true, a * p, s, jx);
  d.hess_zx = differentiate(f, z, x, false, a * p, s, jx);
  d.hess_xz = differentiate(f, z, x, true, a * n, s, jz);
  d.hess_zz = differentiate(f, z, x, false, a * n, s, jz);
  return d;
}

Vector finite_diff_gradient(const Pipeline& p, const EvaluationPoint& pt, double step) {
  require_step(step);
  Vector flat = p.join_params(pt.params);
  Vector g(flat.size());
  for (Index k = 0; k < flat.size(); ++k) {
    const double orig = flat[k];
    flat[k] = orig + step;
    const double up = forward(p, pt.z0, flat).loss();
    flat[k] = orig - step;
    const double down = forward(p, pt.z0, flat).loss();
    flat[k] = orig;
    g[k] = (up - down) / (2.0 * step);
  }
  return g;
}

}  // namespace hivp

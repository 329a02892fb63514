#include "hivp/hessian/pearlmutter.hpp"

#include <vector>

namespace hivp {

Vector hvp_pearlmutter(const Pipeline& p, const EvaluationPoint& pt, const Vector& v) {
  require_dims(v.size(), p.total_params(), "hvp operand");
  const std::size_t n = p.size();
  std::vector<LayerDerivatives> d;
  d.reserve(n);
  for (std::size_t l = 0; l < n; ++l) d.push_back(p.layer(l).derivatives(pt.input_to(l), pt.params[l]));
  const auto v_block = [&](std::size_t l) {
    return v.segment(p.param_offsets()[l], p.param_dims()[l]);
  };

  // Directional derivatives of the activations; g[l] pairs with layer l's input.
  std::vector<Vector> g(n + 1);
  g[0] = Vector::Zero(p.input_dim());
  for (std::size_t l = 0; l < n; ++l) g[l + 1] = d[l].jac_z * g[l] + d[l].jac_x * v_block(l);

  // Directional derivative of the layer Jacobians, reshaped from their vec form.
  const auto d_jac_z = [&](std::size_t l) -> DenseBlock {
    const Index a = d[l].jac_z.rows();
    const Vector flat = d[l].hess_zz * g[l] + d[l].hess_xz * v_block(l);
    return Eigen::Map<const DenseBlock>(flat.data(), a, d[l].jac_z.cols());
  };
  const auto d_jac_x = [&](std::size_t l) -> DenseBlock {
    const Index a = d[l].jac_x.rows();
    const Vector flat = d[l].hess_xx * v_block(l) + d[l].hess_zx * g[l];
    return Eigen::Map<const DenseBlock>(flat.data(), a, d[l].jac_x.cols());
  };

  std::vector<Vector> b(n);
  std::vector<Vector> db(n);
  b[n - 1] = Vector::Ones(1);
  db[n - 1] = Vector::Zero(1);
  for (std::size_t l = n - 1; l-- > 0;) {
    b[l] = d[l + 1].jac_z.transpose() * b[l + 1];
    db[l] = d[l + 1].jac_z.transpose() * db[l + 1] + d_jac_z(l + 1).transpose() * b[l + 1];
  }

  Vector out(v.size());
  for (std::size_t l = 0; l < n; ++l) {
    out.segment(p.param_offsets()[l], p.param_dims()[l]) =
        d[l].jac_x.transpose() * db[l] + d_jac_x(l).transpose() * b[l];
  }
  return out;
}

}  // namespace hivp

#include "hivp/pipeline/layer.hpp"

#include <string>

namespace hivp {

namespace {

void check_block(const DenseBlock& m, Index rows, Index cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionMismatch(std::string(what) + ": expected " + std::to_string(rows) + "x" +
                            std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()));
  }
}

}  // namespace

LayerDerivatives LayerDerivatives::zero(Index n, Index a, Index p) {
  LayerDerivatives d;
  d.jac_x = DenseBlock::Zero(a, p);
  d.jac_z = DenseBlock::Zero(a, n);
  d.hess_xx = DenseBlock::Zero(a * p, p);
  d.hess_zx = DenseBlock::Zero(a * p, n);
  d.hess_xz = DenseBlock::Zero(a * n, p);
  d.hess_zz = DenseBlock::Zero(a * n, n);
  return d;
}

void LayerDerivatives::check_shapes(Index n, Index a, Index p) const {
  check_block(jac_x, a, p, "jac_x");
  check_block(jac_z, a, n, "jac_z");
  check_block(hess_xx, a * p, p, "hess_xx");
  check_block(hess_zx, a * p, n, "hess_zx");
  check_block(hess_xz, a * n, p, "hess_xz");
  check_block(hess_zz, a * n, n, "hess_zz");
}

DenseBlock reindex_zx_to_xz(const DenseBlock& hess_zx, Index a, Index n, Index p) {
  check_block(hess_zx, a * p, n, "hess_zx");
  DenseBlock out(a * n, p);
  for (Index q = 0; q < p; ++q) {
    for (Index r = 0; r < n; ++r) {
      for (Index i = 0; i < a; ++i) out(i + a * r, q) = hess_zx(i + a * q, r);
    }
  }
  return out;
}

LayerJacobians Layer::jacobians(const Vector& z, const Vector& x) const {
  LayerDerivatives d = derivatives(z, x);
  return {std::move(d.jac_x), std::move(d.jac_z)};
}

void Layer::check_arguments(const Vector& z, const Vector& x) const {
  require_dims(z.size(), input_dim(), "layer input");
  require_dims(x.size(), param_dim(), "layer parameters");
}

}  // namespace hivp

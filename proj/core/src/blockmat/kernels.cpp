#include "hivp/blockmat/kernels.hpp"

#include <cstdio>

#include "hivp/instrument.hpp"

namespace hivp::kernels {

using instrument::add_flops;

Vector matvec(const DenseBlock& a, const Eigen::Ref<const Vector>& x) {
  require_dims(x.size(), a.cols(), "matvec");
  add_flops(2 * a.rows() * a.cols());
  return a * x;
}

Vector matvec_transpose(const DenseBlock& a, const Eigen::Ref<const Vector>& x) {
  require_dims(x.size(), a.rows(), "matvec_transpose");
  add_flops(2 * a.rows() * a.cols());
  return a.transpose() * x;
}

void matvec_add(const DenseBlock& a, const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> y,
                double alpha) {
  require_dims(x.size(), a.cols(), "matvec_add");
  require_dims(y.size(), a.rows(), "matvec_add");
  add_flops(2 * a.rows() * a.cols() + a.rows());
  y.noalias() += alpha * (a * x);
}

void matvec_transpose_add(const DenseBlock& a, const Eigen::Ref<const Vector>& x,
                          Eigen::Ref<Vector> y, double alpha) {
  require_dims(x.size(), a.rows(), "matvec_transpose_add");
  require_dims(y.size(), a.cols(), "matvec_transpose_add");
  add_flops(2 * a.rows() * a.cols() + a.cols());
  y.noalias() += alpha * (a.transpose() * x);
}

DenseBlock matmul(const DenseBlock& a, const DenseBlock& b) {
  require_dims(b.rows(), a.cols(), "matmul");
  add_flops(2 * a.rows() * a.cols() * b.cols());
  return a * b;
}

Vector kron_identity_apply(const Vector& row, const Eigen::Ref<const Vector>& u, Index n) {
  const Index m = row.size();
  require_dims(u.size(), m * n, "kron_identity_apply");
  add_flops(2 * m * n);
  Eigen::Map<const DenseBlock> reshaped(u.data(), m, n);
  return reshaped.transpose() * row;
}

DenseBlock kron_identity_contract(const Vector& row, const DenseBlock& a, Index n) {
  const Index m = row.size();
  require_dims(a.rows(), m * n, "kron_identity_contract");
  DenseBlock out(n, a.cols());
  for (Index j = 0; j < a.cols(); ++j) out.col(j) = kron_identity_apply(row, a.col(j), n);
  return out;
}

DenseBlock kron_identity_dense(const Vector& row, Index n) {
  const Index m = row.size();
  DenseBlock out = DenseBlock::Zero(n, m * n);
  for (Index k = 0; k < n; ++k) out.block(k, k * m, 1, m) = row.transpose();
  return out;
}

std::string to_text_grid(const DenseBlock& m) {
  std::string out;
  char buf[32];
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      if (j > 0) out += ' ';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace hivp::kernels

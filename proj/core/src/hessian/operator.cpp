#include "hivp/hessian/operator.hpp"

#include "hivp/blockmat/kernels.hpp"

namespace hivp {

KronIdentityDiagonal::KronIdentityDiagonal(std::vector<Vector> rows, std::vector<Index> repeats)
    : rows_(std::move(rows)), repeats_(std::move(repeats)) {
  require_dims(static_cast<Index>(repeats_.size()), static_cast<Index>(rows_.size()),
               "kron identity repeats");
  for (std::size_t l = 0; l < rows_.size(); ++l) {
    in_offsets_.push_back(in_offsets_.back() + rows_[l].size() * repeats_[l]);
    out_offsets_.push_back(out_offsets_.back() + repeats_[l]);
  }
}

void KronIdentityDiagonal::apply(const Vector& v, Vector& out) const {
  require_dims(v.size(), cols(), "kron identity operand");
  out.resize(rows());
  for (std::size_t l = 0; l < rows_.size(); ++l) {
    const Index n = repeats_[l];
    out.segment(out_offsets_[l], n) = kernels::kron_identity_apply(
        rows_[l], v.segment(in_offsets_[l], in_offsets_[l + 1] - in_offsets_[l]), n);
  }
}

DenseBlock KronIdentityDiagonal::dense() const {
  DenseBlock d = DenseBlock::Zero(rows(), cols());
  for (std::size_t l = 0; l < rows_.size(); ++l) {
    const DenseBlock k = kernels::kron_identity_dense(rows_[l], repeats_[l]);
    d.block(out_offsets_[l], in_offsets_[l], k.rows(), k.cols()) = k;
  }
  return d;
}

HessianOperator assemble(const Pipeline& p, const EvaluationPoint& pt) {
  const std::size_t n = p.size();
  require_dims(static_cast<Index>(pt.activations.size()), static_cast<Index>(n), "activations");
  require_dims(static_cast<Index>(pt.params.size()), static_cast<Index>(n), "parameter blocks");

  std::vector<DenseBlock> jx, sub, xx, zx, xz, zz;
  for (std::size_t l = 0; l < n; ++l) {
    const Layer& f = p.layer(l);
    LayerDerivatives d = f.derivatives(pt.input_to(l), pt.params[l]);
    d.check_shapes(f.input_dim(), f.output_dim(), f.param_dim());
    require_finite(d.jac_x, "jac_x");
    require_finite(d.jac_z, "jac_z");
    require_finite(d.hess_xx, "hess_xx");
    require_finite(d.hess_zx, "hess_zx");
    require_finite(d.hess_xz, "hess_xz");
    require_finite(d.hess_zz, "hess_zz");
    // z_1 depends on the fixed input only, so its z-Jacobian never enters M.
    if (l > 0) sub.emplace_back(-d.jac_z);
    jx.push_back(std::move(d.jac_x));
    xx.push_back(std::move(d.hess_xx));
    zx.push_back(std::move(d.hess_zx));
    xz.push_back(std::move(d.hess_xz));
    zz.push_back(std::move(d.hess_zz));
  }

  HessianOperator h;
  h.activation_dims_ = p.activation_dims();
  h.param_dims_ = p.param_dims();
  h.param_offsets_ = p.param_offsets();
  const std::vector<Index> outputs(h.activation_dims_.begin() + 1, h.activation_dims_.end());
  h.m_ = BlockLowerBidiagonal::unit(outputs, std::move(sub));
  h.p_ = ShiftOperator(h.activation_dims_);

  Vector e = Vector::Zero(total(outputs));
  e[e.size() - 1] = 1.0;
  const Vector stacked = lower_bidiag_solve_transpose(h.m_, e);
  const std::vector<Index> out_offsets = offsets(outputs);
  for (std::size_t l = 0; l < n; ++l) h.b_.emplace_back(stacked.segment(out_offsets[l], outputs[l]));

  h.d_x_ = BlockDiagonal(std::move(jx));
  h.d_xx_ = BlockDiagonal(std::move(xx));
  h.d_zx_ = BlockDiagonal(std::move(zx));
  h.d_xz_ = BlockDiagonal(std::move(xz));
  h.d_zz_ = BlockDiagonal(std::move(zz));
  const std::vector<Index> inputs(h.activation_dims_.begin(), h.activation_dims_.end() - 1);
  h.d_d_ = KronIdentityDiagonal(h.b_, h.param_dims_);
  h.d_m_ = KronIdentityDiagonal(h.b_, inputs);

  std::int64_t bytes = h.m_.storage_bytes() + h.d_x_.storage_bytes() + h.d_xx_.storage_bytes() +
                       h.d_zx_.storage_bytes() + h.d_xz_.storage_bytes() +
                       h.d_zz_.storage_bytes();
  bytes += static_cast<std::int64_t>(sizeof(double)) * stacked.size();
  h.tracked_.reset(bytes);
  return h;
}

Vector HessianOperator::gradient() const {
  Vector stacked(d_x_.rows());
  const std::vector<Index> out_offsets = hivp::offsets(m_.dims());
  for (std::size_t l = 0; l < b_.size(); ++l) stacked.segment(out_offsets[l], b_[l].size()) = b_[l];
  Vector g;
  d_x_.apply_transpose(stacked, g);
  return g;
}

void hvp(const HessianOperator& h, const Vector& v, Vector& out, HvpWorkspace& ws) {
  require_dims(v.size(), h.size(), "hvp operand");
  // Every read of v happens before out is written, so out may alias v.
  h.D_x().apply(v, ws.dx_v);
  h.D_xx().apply(v, ws.xx);
  h.D_xz().apply(v, ws.xz);

  // y = M^-1 D_x v, s = P y
  h.M().solve(ws.dx_v, ws.y);
  h.P().apply(ws.y, ws.s);

  // D_x^T M^-T P^T D_M (D_xz v + D_zz s)
  h.D_zz().apply(ws.s, ws.zz);
  ws.xz += ws.zz;
  h.D_M().apply(ws.xz, ws.w);
  h.P().apply_transpose(ws.w, ws.pw);
  h.M().solve_transpose(ws.pw, ws.adj);
  h.D_x().apply_transpose(ws.adj, ws.back);

  // D_D (D_xx v + D_zx s)
  h.D_zx().apply(ws.s, ws.zx);
  ws.xx += ws.zx;
  h.D_D().apply(ws.xx, out);
  out += ws.back;
  instrument::add_flops(static_cast<std::uint64_t>(ws.xx.size() + ws.xz.size() + out.size()));
}

Vector hvp(const HessianOperator& h, const Vector& v) {
  HvpWorkspace ws;
  Vector out;
  hvp(h, v, out, ws);
  return out;
}

}  // namespace hivp

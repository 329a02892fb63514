#include "hivp/solver/lift.hpp"

#include <Eigen/LU>

#include <cmath>
#include <stdexcept>

#include "hivp/blockmat/kernels.hpp"

namespace hivp {

LiftedSystem lift(const HessianOperator& h, double eps, const Vector& g) {
  if (!std::isfinite(eps) || eps < 0.0) throw std::invalid_argument("eps must be finite and >= 0");
  require_dims(g.size(), h.size(), "lifted right-hand side");
  require_finite(g, "lifted right-hand side");

  const std::size_t n = h.layers();
  const auto& a = h.activation_dims();
  const auto& p = h.param_dims();
  const std::vector<Index> out(a.begin() + 1, a.end());

  LiftedSystem s;
  s.eps = eps;
  s.inner_dims = {p, out, out};
  s.blocks.assign(3, std::vector<LayeredBlockMatrix>(3));
  for (std::size_t u = 0; u < 3; ++u) {
    for (std::size_t v = 0; v < 3; ++v) s.blocks[u][v] = LayeredBlockMatrix(s.inner_dims[u], s.inner_dims[v]);
  }
  auto& k11 = s.blocks[0][0];
  auto& k12 = s.blocks[0][1];
  auto& k13 = s.blocks[0][2];
  auto& k21 = s.blocks[1][0];
  auto& k22 = s.blocks[1][1];
  auto& k31 = s.blocks[2][0];
  auto& k32 = s.blocks[2][1];
  auto& k33 = s.blocks[2][2];
  const auto& sub = h.M().subdiagonal_blocks();

  for (std::size_t l = 0; l < n; ++l) {
    const Vector& b = h.b()[l];
    const DenseBlock& jx = h.D_x().block(l);

    DenseBlock xx = kernels::kron_identity_contract(b, h.D_xx().block(l), p[l]);
    xx.diagonal().array() += eps;
    k11.set(l, l, std::move(xx));
    // D_zx acts on P y, whose block l is y_{l-1}.
    if (l > 0) k12.set(l, l - 1, kernels::kron_identity_contract(b, h.D_zx().block(l), p[l]));
    k13.set(l, l, jx.transpose());

    k21.set(l, l, -jx);
    k22.set(l, l, DenseBlock::Identity(out[l], out[l]));
    if (l > 0) k22.set(l, l - 1, sub[l - 1]);

    // P^T lifts layer l + 1's contribution into row l.
    k33.set(l, l, DenseBlock::Identity(out[l], out[l]));
    if (l + 1 < n) {
      const Vector& b_next = h.b()[l + 1];
      k31.set(l, l + 1, -kernels::kron_identity_contract(b_next, h.D_xz().block(l + 1), a[l + 1]));
      k32.set(l, l, -kernels::kron_identity_contract(b_next, h.D_zz().block(l + 1), a[l + 1]));
      k33.set(l, l + 1, sub[l].transpose());
    }
  }

  s.rhs = Vector::Zero(total(p) + 2 * total(out));
  s.rhs.head(g.size()) = g;

  std::int64_t bytes = 0;
  for (const auto& row : s.blocks) {
    for (const auto& m : row) bytes += m.storage_bytes();
  }
  s.tracked.reset(bytes);
  return s;
}

DenseBlock dense_schur_complement(const LiftedSystem& s, Index guard) {
  if (s.size() > guard) throw SizeGuardExceeded(s.size(), guard);
  const DenseBlock k = s.dense();
  const Index nx = s.x_size();
  const Index ny = k.rows() - nx;
  const DenseBlock kyy = k.bottomRightCorner(ny, ny);
  const DenseBlock kyx = k.bottomLeftCorner(ny, nx);
  return k.topLeftCorner(nx, nx) - k.topRightCorner(nx, ny) * kyy.partialPivLu().solve(kyx);
}

Vector unpivot_extract(const Vector& x_prime, const CommutationPermutation& pi, Index x_size) {
  require_dims(x_prime.size(), pi.size(), "pivoted solution");
  if (x_size > pi.size()) throw DimensionMismatch("x block larger than the lifted system");
  return pi.apply_inverse(x_prime).head(x_size);
}

}  // namespace hivp

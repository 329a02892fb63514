#pragma once

#include <cstdint>
#include <vector>

#include "hivp/blockmat/structured.hpp"
#include "hivp/common.hpp"
#include "hivp/instrument.hpp"
#include "hivp/pipeline/pipeline.hpp"

namespace hivp {

// Block diagonal whose l-th block is I_{n_l} kron b_l^T for a column vector
// b_l of length m_l, i.e. an n_l x (m_l n_l) contraction. Blocks act by
// reshaping the operand to m_l x n_l and multiplying by b_l; the Kronecker
// product is only formed by dense().
class KronIdentityDiagonal {
 public:
  KronIdentityDiagonal() = default;
  KronIdentityDiagonal(std::vector<Vector> rows, std::vector<Index> repeats);

  std::size_t size() const { return rows_.size(); }
  const std::vector<Vector>& row_vectors() const { return rows_; }
  const std::vector<Index>& repeats() const { return repeats_; }
  Index rows() const { return out_offsets_.back(); }
  Index cols() const { return in_offsets_.back(); }

  void apply(const Vector& v, Vector& out) const;
  DenseBlock dense() const;

 private:
  std::vector<Vector> rows_;
  std::vector<Index> repeats_;
  std::vector<Index> in_offsets_{0};
  std::vector<Index> out_offsets_{0};
};

// The operators of
//   H = D_D D_xx + D_D D_zx P M^-1 D_x + D_x^T M^-T P^T D_M D_xz
//       + D_x^T M^-T P^T D_M D_zz P M^-1 D_x
// at one evaluation point. Immutable once assembled.
//
// Shapes, with layer l mapping a_{l-1} -> a_l under p_l parameters:
//   M     unit lower block-bidiagonal over (a_1..a_L), subdiagonal -df_{l+1}/dz
//   P     (a_1..a_L) -> (a_0..a_{L-1})
//   D_x   blocks a_l x p_l               D_xx  blocks a_l p_l x p_l
//   D_zx  blocks a_l p_l x a_{l-1}       D_xz  blocks a_l a_{l-1} x p_l
//   D_zz  blocks a_l a_{l-1} x a_{l-1}
//   D_D   blocks I_{p_l} kron b_l        D_M   blocks I_{a_{l-1}} kron b_l
class HessianOperator {
 public:
  Index size() const { return param_offsets_.back(); }
  const std::vector<Index>& param_dims() const { return param_dims_; }
  const std::vector<Index>& param_offsets() const { return param_offsets_; }
  const std::vector<Index>& activation_dims() const { return activation_dims_; }
  std::size_t layers() const { return param_dims_.size(); }

  // b_1 .. b_L as column vectors; b_L = 1.
  const std::vector<Vector>& b() const { return b_; }
  const BlockLowerBidiagonal& M() const { return m_; }
  const ShiftOperator& P() const { return p_; }
  const BlockDiagonal& D_x() const { return d_x_; }
  const BlockDiagonal& D_xx() const { return d_xx_; }
  const BlockDiagonal& D_zx() const { return d_zx_; }
  const BlockDiagonal& D_xz() const { return d_xz_; }
  const BlockDiagonal& D_zz() const { return d_zz_; }
  const KronIdentityDiagonal& D_D() const { return d_d_; }
  const KronIdentityDiagonal& D_M() const { return d_m_; }

  // Gradient of the loss, D_x^T M^-T e_L.
  Vector gradient() const;

  std::int64_t storage_bytes() const { return tracked_.bytes(); }

 private:
  friend HessianOperator assemble(const Pipeline& p, const EvaluationPoint& pt);

  std::vector<Index> param_dims_;
  std::vector<Index> param_offsets_{0};
  std::vector<Index> activation_dims_;
  std::vector<Vector> b_;
  BlockLowerBidiagonal m_;
  ShiftOperator p_;
  BlockDiagonal d_x_;
  BlockDiagonal d_xx_;
  BlockDiagonal d_zx_;
  BlockDiagonal d_xz_;
  BlockDiagonal d_zz_;
  KronIdentityDiagonal d_d_;
  KronIdentityDiagonal d_m_;
  instrument::TrackedBytes tracked_;
};

// Builds every operator from the layers' derivatives at pt. b comes from a
// transposed solve against M.
HessianOperator assemble(const Pipeline& p, const EvaluationPoint& pt);

// Scratch space for hvp. Reusable across calls on operators of one shape;
// concurrent calls need distinct workspaces.
struct HvpWorkspace {
  Vector dx_v;   // D_x v
  Vector y;      // M^-1 D_x v
  Vector s;      // P y
  Vector xx;     // D_xx v
  Vector zx;     // D_zx s
  Vector xz;     // D_xz v
  Vector zz;     // D_zz s
  Vector w;      // D_M (D_xz v + D_zz s)
  Vector pw;     // P^T w
  Vector adj;    // M^-T P^T w
  Vector back;   // D_x^T adj
};

// out = H v using only block products, the shift, and two bidiagonal solves.
void hvp(const HessianOperator& h, const Vector& v, Vector& out, HvpWorkspace& ws);
Vector hvp(const HessianOperator& h, const Vector& v);

}  // namespace hivp

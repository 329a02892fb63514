#pragma once

#include <cstdint>
#include <vector>

#include "hivp/common.hpp"

namespace hivp {

// Block-diagonal matrix with heterogeneous (possibly rectangular) blocks.
class BlockDiagonal {
 public:
  BlockDiagonal() = default;
  explicit BlockDiagonal(std::vector<DenseBlock> blocks);

  const std::vector<DenseBlock>& blocks() const { return blocks_; }
  const DenseBlock& block(std::size_t i) const { return blocks_.at(i); }
  std::size_t size() const { return blocks_.size(); }

  Index rows() const { return row_offsets_.back(); }
  Index cols() const { return col_offsets_.back(); }
  const std::vector<Index>& row_offsets() const { return row_offsets_; }
  const std::vector<Index>& col_offsets() const { return col_offsets_; }
  std::vector<Index> row_dims() const;
  std::vector<Index> col_dims() const;

  // out is resized as needed.
  void apply(const Vector& v, Vector& out) const;
  void apply_transpose(const Vector& v, Vector& out) const;

  BlockDiagonal transpose() const;
  DenseBlock dense() const;
  std::int64_t storage_bytes() const;

 private:
  std::vector<DenseBlock> blocks_;
  std::vector<Index> row_offsets_{0};
  std::vector<Index> col_offsets_{0};
};

Vector block_diag_matvec(const BlockDiagonal& a, const Vector& v);

// Block lower-bidiagonal matrix: square diagonal blocks of side d_l and
// subdiagonal blocks of shape d_{l+1} x d_l.
class BlockLowerBidiagonal {
 public:
  BlockLowerBidiagonal() = default;
  BlockLowerBidiagonal(std::vector<DenseBlock> diagonal, std::vector<DenseBlock> subdiagonal);

  // Identity diagonal blocks of the given sides.
  static BlockLowerBidiagonal unit(const std::vector<Index>& dims,
                                   std::vector<DenseBlock> subdiagonal);

  const std::vector<DenseBlock>& diagonal_blocks() const { return diagonal_; }
  const std::vector<DenseBlock>& subdiagonal_blocks() const { return subdiagonal_; }
  std::size_t size() const { return diagonal_.size(); }
  const std::vector<Index>& dims() const { return dims_; }
  Index rows() const { return offsets_.back(); }
  bool has_unit_diagonal() const { return unit_diagonal_; }

  Vector apply(const Vector& v) const;
  DenseBlock dense() const;
  std::int64_t storage_bytes() const;

  // Forward substitution for M u = rhs. Requires a unit diagonal.
  void solve(const Vector& rhs, Vector& out) const;
  // Backward substitution for M^T u = rhs. Requires a unit diagonal.
  void solve_transpose(const Vector& rhs, Vector& out) const;

 private:
  std::vector<DenseBlock> diagonal_;
  std::vector<DenseBlock> subdiagonal_;
  std::vector<Index> dims_;
  std::vector<Index> offsets_{0};
  bool unit_diagonal_ = true;
};

Vector lower_bidiag_solve(const BlockLowerBidiagonal& m, const Vector& rhs);
Vector lower_bidiag_solve_transpose(const BlockLowerBidiagonal& m, const Vector& rhs);

// Downshift over stacked per-layer vectors. Built from the activation dims
// a_0..a_L: it maps (v_1..v_L), with v_l of length a_l, to (0, v_1, .., v_{L-1}),
// whose blocks have lengths a_0..a_{L-1}. The transpose maps back
// (w_1..w_L) -> (w_2, .., w_L, 0).
class ShiftOperator {
 public:
  ShiftOperator() = default;
  explicit ShiftOperator(std::vector<Index> activation_dims);

  const std::vector<Index>& activation_dims() const { return dims_; }
  std::size_t layers() const { return dims_.empty() ? 0 : dims_.size() - 1; }
  Index input_size() const;
  Index output_size() const;

  void apply(const Vector& v, Vector& out) const;
  void apply_transpose(const Vector& v, Vector& out) const;
  DenseBlock dense() const;

 private:
  std::vector<Index> dims_;
};

Vector shift_apply(const ShiftOperator& p, const Vector& v);
Vector shift_apply_transpose(const ShiftOperator& p, const Vector& v);

}  // namespace hivp

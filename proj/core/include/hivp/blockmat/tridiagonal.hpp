#pragma once

#include <Eigen/LU>

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "hivp/blockmat/commutation.hpp"
#include "hivp/blockmat/structured.hpp"
#include "hivp/common.hpp"
#include "hivp/instrument.hpp"

namespace hivp {

// A matrix partitioned over the layer index into row blocks r_i and column
// blocks c_j, storing only the (i, j) sub-blocks that are present. Used for
// the blocks of a lifted system before pivoting.
class LayeredBlockMatrix {
 public:
  using Key = std::pair<std::size_t, std::size_t>;

  LayeredBlockMatrix() = default;
  LayeredBlockMatrix(std::vector<Index> row_dims, std::vector<Index> col_dims);

  static LayeredBlockMatrix from(const BlockDiagonal& d);
  static LayeredBlockMatrix from(const BlockLowerBidiagonal& m);

  const std::vector<Index>& row_dims() const { return row_dims_; }
  const std::vector<Index>& col_dims() const { return col_dims_; }
  Index rows() const { return row_offsets_.back(); }
  Index cols() const { return col_offsets_.back(); }

  void set(std::size_t i, std::size_t j, DenseBlock block);
  const DenseBlock* find(std::size_t i, std::size_t j) const;
  const std::map<Key, DenseBlock>& blocks() const { return blocks_; }

  Vector apply(const Vector& v) const;
  LayeredBlockMatrix transpose() const;
  DenseBlock dense() const;
  std::int64_t storage_bytes() const;

 private:
  std::vector<Index> row_dims_;
  std::vector<Index> col_dims_;
  std::vector<Index> row_offsets_{0};
  std::vector<Index> col_offsets_{0};
  std::map<Key, DenseBlock> blocks_;
};

// Square grid of layered blocks; grid[u][v] couples variable group v into
// equation group u.
using BlockGrid = std::vector<std::vector<LayeredBlockMatrix>>;

DenseBlock dense(const BlockGrid& grid);
Vector apply(const BlockGrid& grid, const Vector& v);

class BlockTridiagonal {
 public:
  BlockTridiagonal() = default;
  // diag[i] is d_i x d_i, lower[i] is d_{i+1} x d_i, upper[i] is d_i x d_{i+1}.
  BlockTridiagonal(std::vector<DenseBlock> diag, std::vector<DenseBlock> lower,
                   std::vector<DenseBlock> upper);

  std::size_t size() const { return diag_.size(); }
  const std::vector<DenseBlock>& diag() const { return diag_; }
  const std::vector<DenseBlock>& lower() const { return lower_; }
  const std::vector<DenseBlock>& upper() const { return upper_; }
  const std::vector<Index>& dims() const { return dims_; }
  Index rows() const { return offsets_.back(); }
  const std::vector<Index>& offsets() const { return offsets_; }

  Vector apply(const Vector& v) const;
  DenseBlock dense() const;
  std::int64_t storage_bytes() const { return tracked_.bytes(); }

 private:
  std::vector<DenseBlock> diag_;
  std::vector<DenseBlock> lower_;
  std::vector<DenseBlock> upper_;
  std::vector<Index> dims_;
  std::vector<Index> offsets_{0};
  instrument::TrackedBytes tracked_;
};

// Gathers B_ij (u, v) = grid[u][v] sub-block (i, j) into a block-tridiagonal
// matrix ordered by pi. Throws StructureError if a present sub-block with
// |i - j| > 1 has a nonzero entry.
BlockTridiagonal pivot_to_tridiagonal(const BlockGrid& grid, const CommutationPermutation& pi);

// T = L D U with L unit lower block-bidiagonal (blocks lower_subdiag), D the
// block diagonal of Schur complements S_i, and U unit upper block-bidiagonal
// with blocks S_i^{-1} B_{i,i+1}. D U is stored as (S_i, B_{i,i+1}).
class LDUFactorization {
 public:
  using PivotLU = Eigen::PartialPivLU<DenseBlock>;

  std::size_t size() const { return pivots_.size(); }
  const std::vector<DenseBlock>& lower_subdiag() const { return lower_; }
  const std::vector<PivotLU>& pivot_blocks() const { return pivots_; }
  const std::vector<DenseBlock>& upper_superdiag() const { return upper_; }
  const std::vector<Index>& dims() const { return dims_; }

  // Reciprocal-condition based estimate of cond_1(S_i) per pivot block.
  std::vector<double> pivot_condition_estimates() const;

  Vector solve(const Vector& rhs) const;

  DenseBlock dense_lower() const;
  DenseBlock dense_diagonal() const;
  DenseBlock dense_upper() const;
  std::int64_t storage_bytes() const { return tracked_.bytes(); }

 private:
  friend LDUFactorization block_ldu_factorize(const BlockTridiagonal&, double);

  std::vector<DenseBlock> lower_;
  std::vector<PivotLU> pivots_;
  std::vector<DenseBlock> upper_;
  std::vector<Index> dims_;
  std::vector<Index> offsets_{0};
  instrument::TrackedBytes tracked_;
};

inline constexpr double kDefaultPivotTolerance = 1e-12;

// Throws SingularPivotBlock(i) when a pivot of S_i falls below
// pivot_tolerance times the largest absolute entry of S_i.
LDUFactorization block_ldu_factorize(const BlockTridiagonal& t,
                                     double pivot_tolerance = kDefaultPivotTolerance);

Vector ldu_solve(const LDUFactorization& f, const Vector& rhs);

}  // namespace hivp

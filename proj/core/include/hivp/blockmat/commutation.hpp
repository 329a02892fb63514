#pragma once

#include <vector>

#include "hivp/common.hpp"

namespace hivp {

// Reorders a vector partitioned as a grid of sub-blocks from group-major
// (g_1..g_L of group 1, then group 2, ...) to layer-major
// (layer 1's sub-block from every group, then layer 2, ...).
//
// inner_dims[u][l] is the length of sub-block l of group u; every group has
// the same number of sub-blocks. The inverse is the same construction on the
// transposed grid, so the permutation is its own inverse exactly when the
// grid of dims is square and symmetric. Stored as an index map.
class CommutationPermutation {
 public:
  CommutationPermutation() = default;
  explicit CommutationPermutation(std::vector<std::vector<Index>> inner_dims);

  std::size_t outer_count() const { return inner_dims_.size(); }
  std::size_t inner_count() const { return inner_dims_.empty() ? 0 : inner_dims_.front().size(); }
  const std::vector<std::vector<Index>>& inner_dims() const { return inner_dims_; }
  Index size() const { return static_cast<Index>(source_.size()); }

  // Target position k reads source position source_index(k).
  const std::vector<Index>& source_indices() const { return source_; }

  // Offset of layer l's interleaved block in layer-major order, and its length.
  Index layer_offset(std::size_t l) const { return layer_offsets_.at(l); }
  Index layer_size(std::size_t l) const { return layer_offsets_.at(l + 1) - layer_offsets_.at(l); }
  // Offset of group u's sub-block inside layer l's interleaved block.
  Index offset_in_layer(std::size_t u, std::size_t l) const;
  // Offset of sub-block (u, l) in group-major order.
  Index group_major_offset(std::size_t u, std::size_t l) const;

  Vector apply(const Vector& v) const;
  Vector apply_inverse(const Vector& v) const;
  CommutationPermutation inverse() const;
  bool is_involutory() const;
  DenseBlock dense() const;

 private:
  std::vector<std::vector<Index>> inner_dims_;
  std::vector<std::vector<Index>> group_major_offsets_;
  std::vector<Index> layer_offsets_{0};
  std::vector<Index> source_;
};

Vector commutation_apply(const CommutationPermutation& pi, const Vector& v);

}  // namespace hivp

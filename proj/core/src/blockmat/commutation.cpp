#include "hivp/blockmat/commutation.hpp"

#include <string>

namespace hivp {

CommutationPermutation::CommutationPermutation(std::vector<std::vector<Index>> inner_dims)
    : inner_dims_(std::move(inner_dims)) {
  const std::size_t groups = inner_dims_.size();
  const std::size_t layers = inner_count();
  for (const auto& g : inner_dims_) {
    if (g.size() != layers) throw StructureError("commutation: ragged grid of sub-block dims");
    for (Index d : g) {
      if (d < 0) throw StructureError("commutation: negative sub-block dim");
    }
  }

  Index offset = 0;
  group_major_offsets_.assign(groups, std::vector<Index>(layers, 0));
  for (std::size_t u = 0; u < groups; ++u) {
    for (std::size_t l = 0; l < layers; ++l) {
      group_major_offsets_[u][l] = offset;
      offset += inner_dims_[u][l];
    }
  }

  source_.reserve(static_cast<std::size_t>(offset));
  for (std::size_t l = 0; l < layers; ++l) {
    for (std::size_t u = 0; u < groups; ++u) {
      for (Index k = 0; k < inner_dims_[u][l]; ++k) source_.push_back(group_major_offsets_[u][l] + k);
    }
    layer_offsets_.push_back(static_cast<Index>(source_.size()));
  }
}

Index CommutationPermutation::offset_in_layer(std::size_t u, std::size_t l) const {
  Index off = 0;
  for (std::size_t w = 0; w < u; ++w) off += inner_dims_.at(w).at(l);
  return off;
}

Index CommutationPermutation::group_major_offset(std::size_t u, std::size_t l) const {
  return group_major_offsets_.at(u).at(l);
}

Vector CommutationPermutation::apply(const Vector& v) const {
  require_dims(v.size(), size(), "commutation_apply");
  Vector out(v.size());
  for (std::size_t k = 0; k < source_.size(); ++k) out[static_cast<Index>(k)] = v[source_[k]];
  return out;
}

Vector CommutationPermutation::apply_inverse(const Vector& v) const {
  require_dims(v.size(), size(), "commutation_apply_inverse");
  Vector out(v.size());
  for (std::size_t k = 0; k < source_.size(); ++k) out[source_[k]] = v[static_cast<Index>(k)];
  return out;
}

CommutationPermutation CommutationPermutation::inverse() const {
  std::vector<std::vector<Index>> t(inner_count(), std::vector<Index>(outer_count()));
  for (std::size_t u = 0; u < outer_count(); ++u) {
    for (std::size_t l = 0; l < inner_count(); ++l) t[l][u] = inner_dims_[u][l];
  }
  return CommutationPermutation(std::move(t));
}

bool CommutationPermutation::is_involutory() const {
  if (outer_count() != inner_count()) return false;
  for (std::size_t u = 0; u < outer_count(); ++u) {
    for (std::size_t l = 0; l < inner_count(); ++l) {
      if (inner_dims_[u][l] != inner_dims_[l][u]) return false;
    }
  }
  return true;
}

DenseBlock CommutationPermutation::dense() const {
  DenseBlock d = DenseBlock::Zero(size(), size());
  for (std::size_t k = 0; k < source_.size(); ++k) d(static_cast<Index>(k), source_[k]) = 1.0;
  return d;
}

Vector commutation_apply(const CommutationPermutation& pi, const Vector& v) { return pi.apply(v); }

}  // namespace hivp

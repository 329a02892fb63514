#pragma once

#include <cstddef>
#include <vector>

#include "hivp/common.hpp"
#include "hivp/pipeline/layer.hpp"

namespace hivp {

// A chain z_l = f_l(z_{l-1}; x_l), l = 1..L, ending in a scalar loss z_L.
// Layers are indexed from 0 in code, so layers()[l] computes z_{l+1}.
class Pipeline {
 public:
  // Throws DimensionMismatch if adjacent dims disagree or the last output is
  // not scalar, and StructureError if there are no layers.
  explicit Pipeline(std::vector<LayerPtr> layers);

  std::size_t size() const { return layers_.size(); }
  const std::vector<LayerPtr>& layers() const { return layers_; }
  const Layer& layer(std::size_t l) const { return *layers_[l]; }

  Index input_dim() const { return activation_dims_.front(); }
  // a_0 .. a_L
  const std::vector<Index>& activation_dims() const { return activation_dims_; }
  // p_1 .. p_L
  const std::vector<Index>& param_dims() const { return param_dims_; }
  Index total_params() const { return param_offsets_.back(); }
  const std::vector<Index>& param_offsets() const { return param_offsets_; }

  std::vector<Vector> split_params(const Vector& flat) const;
  Vector join_params(const std::vector<Vector>& params) const;

 private:
  std::vector<LayerPtr> layers_;
  std::vector<Index> activation_dims_;
  std::vector<Index> param_dims_;
  std::vector<Index> param_offsets_;
};

struct EvaluationPoint {
  Vector z0;
  std::vector<Vector> params;       // x_1 .. x_L
  std::vector<Vector> activations;  // z_1 .. z_L

  double loss() const { return activations.back()[0]; }
  // Input to layers()[l], i.e. z_l in 1-based terms.
  const Vector& input_to(std::size_t l) const { return l == 0 ? z0 : activations[l - 1]; }
};

// Throws DimensionMismatch on wrong sizes and NonFiniteValue if the inputs or
// any intermediate activation is not finite.
EvaluationPoint forward(const Pipeline& p, const Vector& z0, std::vector<Vector> params);
EvaluationPoint forward(const Pipeline& p, const Vector& z0, const Vector& flat_params);

// b_L = 1 and b_l = b_{l+1} df_{l+1}/dz, stored as column vectors b_1 .. b_L.
std::vector<Vector> backprop_vectors(const Pipeline& p, const EvaluationPoint& pt);

// dz_L/dx flattened as (x_1, .., x_L).
Vector gradient(const Pipeline& p, const EvaluationPoint& pt);

}  // namespace hivp

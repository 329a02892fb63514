#include "hivp/pipeline/pipeline.hpp"

#include <string>

#include "hivp/blockmat/kernels.hpp"

namespace hivp {

Pipeline::Pipeline(std::vector<LayerPtr> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw StructureError("pipeline needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (!layers_[l]) throw StructureError("layer " + std::to_string(l) + " is null");
    const Layer& f = *layers_[l];
    if (l == 0) {
      activation_dims_.push_back(f.input_dim());
    } else if (f.input_dim() != activation_dims_.back()) {
      throw DimensionMismatch("layer " + std::to_string(l) + " expects input of size " +
                              std::to_string(f.input_dim()) + " but the previous layer emits " +
                              std::to_string(activation_dims_.back()));
    }
    activation_dims_.push_back(f.output_dim());
    param_dims_.push_back(f.param_dim());
  }
  if (activation_dims_.back() != 1) {
    throw DimensionMismatch("last layer must be scalar, got output size " +
                            std::to_string(activation_dims_.back()));
  }
  param_offsets_ = offsets(param_dims_);
}

std::vector<Vector> Pipeline::split_params(const Vector& flat) const {
  require_dims(flat.size(), total_params(), "flat parameters");
  std::vector<Vector> out;
  out.reserve(size());
  for (std::size_t l = 0; l < size(); ++l) {
    out.emplace_back(flat.segment(param_offsets_[l], param_dims_[l]));
  }
  return out;
}

Vector Pipeline::join_params(const std::vector<Vector>& params) const {
  require_dims(static_cast<Index>(params.size()), static_cast<Index>(size()), "parameter blocks");
  Vector flat(total_params());
  for (std::size_t l = 0; l < size(); ++l) {
    require_dims(params[l].size(), param_dims_[l], "parameter block");
    flat.segment(param_offsets_[l], param_dims_[l]) = params[l];
  }
  return flat;
}

EvaluationPoint forward(const Pipeline& p, const Vector& z0, std::vector<Vector> params) {
  require_dims(z0.size(), p.input_dim(), "pipeline input");
  require_dims(static_cast<Index>(params.size()), static_cast<Index>(p.size()),
               "parameter blocks");
  require_finite(z0, "pipeline input");
  EvaluationPoint pt{z0, std::move(params), {}};
  pt.activations.reserve(p.size());
  for (std::size_t l = 0; l < p.size(); ++l) {
    require_finite(pt.params[l], "parameters");
    Vector z = p.layer(l).eval(pt.input_to(l), pt.params[l]);
    require_finite(z, "activation");
    pt.activations.push_back(std::move(z));
  }
  return pt;
}

EvaluationPoint forward(const Pipeline& p, const Vector& z0, const Vector& flat_params) {
  return forward(p, z0, p.split_params(flat_params));
}

std::vector<Vector> backprop_vectors(const Pipeline& p, const EvaluationPoint& pt) {
  const std::size_t n = p.size();
  std::vector<Vector> b(n);
  b[n - 1] = Vector::Ones(1);
  for (std::size_t l = n - 1; l-- > 0;) {
    const LayerJacobians j = p.layer(l + 1).jacobians(pt.input_to(l + 1), pt.params[l + 1]);
    b[l] = kernels::matvec_transpose(j.jac_z, b[l + 1]);
  }
  return b;
}

Vector gradient(const Pipeline& p, const EvaluationPoint& pt) {
  const std::vector<Vector> b = backprop_vectors(p, pt);
  Vector g(p.total_params());
  for (std::size_t l = 0; l < p.size(); ++l) {
    const LayerJacobians j = p.layer(l).jacobians(pt.input_to(l), pt.params[l]);
    g.segment(p.param_offsets()[l], p.param_dims()[l]) = kernels::matvec_transpose(j.jac_x, b[l]);
  }
  return g;
}

}  // namespace hivp

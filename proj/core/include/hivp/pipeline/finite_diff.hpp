#pragma once

#include "hivp/pipeline/layer.hpp"
#include "hivp/pipeline/pipeline.hpp"

// Central-difference reference oracles. Slow and approximate by design; they
// exist to check the analytic code paths.
namespace hivp {

struct FiniteDiffSteps {
  double first = 1e-4;
  // Outer step of the nested differences used for second-order blocks.
  double second = 1e-3;
};

// All six blocks, in the same shapes and vec layout as Layer::derivatives.
LayerDerivatives finite_diff_layer_derivatives(const Layer& layer, const Vector& z, const Vector& x,
                                               FiniteDiffSteps steps = {});

// Central differences of the loss z_L along each parameter coordinate.
Vector finite_diff_gradient(const Pipeline& p, const EvaluationPoint& pt, double step = 1e-4);

}  // namespace hivp

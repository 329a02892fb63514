#pragma once

#include "hivp/pipeline/pipeline.hpp"

namespace hivp {

// H v by forward-over-reverse differentiation, layer by layer, without the
// block operators. Forward: g_l = dz_l along v, g_l = J_z,l g_{l-1} + J_x,l v_l
// with g_0 = 0. Backward: b'_l = d b_l along v, with b'_L = 0 and
//   b'_l = J_z,{l+1}^T b'_{l+1} + (d J_z,{l+1})^T b_{l+1}.
// Output block l is J_x,l^T b'_l + (d J_x,l)^T b_l.
Vector hvp_pearlmutter(const Pipeline& p, const EvaluationPoint& pt, const Vector& v);

}  // namespace hivp

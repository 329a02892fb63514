#pragma once

#include <cstdint>
#include <vector>

#include "hivp/blockmat/commutation.hpp"
#include "hivp/blockmat/tridiagonal.hpp"
#include "hivp/hessian/operator.hpp"
#include "hivp/instrument.hpp"

namespace hivp {

// The sparse augmented system over (x, y, z):
//
//   [ D_D D_xx + eps I      D_D D_zx P          D_x^T ] [x]   [g]
//   [ -D_x                  M                   0     ] [y] = [0]
//   [ -P^T D_M D_xz         -P^T D_M D_zz P     M^T   ] [z]   [0]
//
// Eliminating y and z leaves (H + eps I) x = g. Every block is banded over
// the layer index with bandwidth one.
struct LiftedSystem {
  BlockGrid blocks;
  Vector rhs;  // group-major (g, 0, 0)
  double eps = 0.0;
  // Sub-block sizes per group: (p_l), (a_l), (a_l) for l = 1..L.
  std::vector<std::vector<Index>> inner_dims;
  instrument::TrackedBytes tracked;

  Index x_size() const { return total(inner_dims[0]); }
  Index size() const { return rhs.size(); }
  CommutationPermutation permutation() const { return CommutationPermutation(inner_dims); }
  DenseBlock dense() const { return hivp::dense(blocks); }
};

// Throws DimensionMismatch if g does not match the parameter count and
// std::invalid_argument if eps is negative or not finite.
LiftedSystem lift(const HessianOperator& h, double eps, const Vector& g);

// K_xx - K_x(yz) K_(yz)(yz)^-1 K_(yz)x from the dense assembly. Oracle only.
DenseBlock dense_schur_complement(const LiftedSystem& system, Index guard = 2000);

// Maps a layer-major solution of the pivoted system back to group-major
// order and returns the leading x block.
Vector unpivot_extract(const Vector& x_prime, const CommutationPermutation& pi, Index x_size);

}  // namespace hivp

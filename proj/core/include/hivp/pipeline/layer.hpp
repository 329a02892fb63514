#pragma once

#include <nlohmann/json.hpp>

#include <memory>
#include <string>

#include "hivp/common.hpp"

namespace hivp {

// First and second derivatives of a layer z_out = f(z_in; x) at a point.
// With a = output dim, n = input dim, p = parameter dim, and vec(.) the
// column-stacking flattening:
//
//   jac_x    a x p       df/dx
//   jac_z    a x n       df/dz
//   hess_xx  a*p x p     d vec(jac_x) / dx
//   hess_zx  a*p x n     d vec(jac_x) / dz
//   hess_xz  a*n x p     d vec(jac_z) / dx
//   hess_zz  a*n x n     d vec(jac_z) / dz
//
// so hess_zx[i + a*q, r] = d^2 f_i / dx_q dz_r = hess_xz[i + a*r, q].
struct LayerDerivatives {
  DenseBlock jac_x;
  DenseBlock jac_z;
  DenseBlock hess_xx;
  DenseBlock hess_zx;
  DenseBlock hess_xz;
  DenseBlock hess_zz;

  static LayerDerivatives zero(Index input_dim, Index output_dim, Index param_dim);

  // Throws DimensionMismatch naming the first block with the wrong shape.
  void check_shapes(Index input_dim, Index output_dim, Index param_dim) const;
};

struct LayerJacobians {
  DenseBlock jac_x;
  DenseBlock jac_z;
};

// Re-indexes a hess_zx block (a*p x n) into hess_xz layout (a*n x p).
DenseBlock reindex_zx_to_xz(const DenseBlock& hess_zx, Index output_dim, Index input_dim,
                            Index param_dim);

// One differentiable stage of a pipeline. Implementations are immutable and
// must be twice continuously differentiable in (z, x).
class Layer {
 public:
  virtual ~Layer() = default;

  virtual std::string kind() const = 0;
  virtual Index input_dim() const = 0;
  virtual Index output_dim() const = 0;
  virtual Index param_dim() const = 0;

  virtual Vector eval(const Vector& z, const Vector& x) const = 0;
  virtual LayerDerivatives derivatives(const Vector& z, const Vector& x) const = 0;
  // Defaults to the first-order part of derivatives().
  virtual LayerJacobians jacobians(const Vector& z, const Vector& x) const;

  // Fixed configuration (dims and constant coefficients); excludes x.
  virtual nlohmann::json config() const = 0;

 protected:
  void check_arguments(const Vector& z, const Vector& x) const;
};

using LayerPtr = std::shared_ptr<const Layer>;

}  // namespace hivp

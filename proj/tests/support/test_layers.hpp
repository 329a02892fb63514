#pragma once

#include <cmath>
#include <memory>

#include "hivp/pipeline/layer.hpp"

// Small layers with hand-derived derivatives, used as oracles.
namespace hivp::testing {

// Scalar f(z; x) = x * z.
class ProductLayer final : public Layer {
 public:
  std::string kind() const override { return "test_product"; }
  Index input_dim() const override { return 1; }
  Index output_dim() const override { return 1; }
  Index param_dim() const override { return 1; }

  Vector eval(const Vector& z, const Vector& x) const override {
    check_arguments(z, x);
    return Vector::Constant(1, x[0] * z[0]);
  }
  LayerDerivatives derivatives(const Vector& z, const Vector& x) const override {
    check_arguments(z, x);
    LayerDerivatives d = LayerDerivatives::zero(1, 1, 1);
    d.jac_x(0, 0) = z[0];
    d.jac_z(0, 0) = x[0];
    d.hess_zx(0, 0) = 1.0;
    d.hess_xz(0, 0) = 1.0;
    return d;
  }
  nlohmann::json config() const override { return {{"kind", kind()}}; }
};

// Scalar f(z; x) = (x^T z)^2 with |x| = |z| = n. With s = x^T z:
//   hess_xx = 2 z z^T, hess_zz = 2 x x^T, hess_zx = 2 z x^T + 2 s I,
//   hess_xz = hess_zx^T.
class SquaredDotLayer final : public Layer {
 public:
  explicit SquaredDotLayer(Index n) : n_(n) {}

  std::string kind() const override { return "test_squared_dot"; }
  Index input_dim() const override { return n_; }
  Index output_dim() const override { return 1; }
  Index param_dim() const override { return n_; }

  Vector eval(const Vector& z, const Vector& x) const override {
    check_arguments(z, x);
    const double s = x.dot(z);
    return Vector::Constant(1, s * s);
  }
  LayerDerivatives derivatives(const Vector& z, const Vector& x) const override {
    check_arguments(z, x);
    const double s = x.dot(z);
    const DenseBlock eye = DenseBlock::Identity(n_, n_);
    LayerDerivatives d;
    d.jac_x = 2.0 * s * z.transpose();
    d.jac_z = 2.0 * s * x.transpose();
    d.hess_xx = 2.0 * z * z.transpose();
    d.hess_zz = 2.0 * x * x.transpose();
    d.hess_zx = 2.0 * z * x.transpose() + 2.0 * s * eye;
    d.hess_xz = d.hess_zx.transpose();
    return d;
  }
  nlohmann::json config() const override { return {{"kind", kind()}, {"n", n_}}; }

 private:
  Index n_;
};

// Scalar f(z; x) = x * sin(z), a curved all-scalar layer.
class SineProductLayer final : public Layer {
 public:
  std::string kind() const override { return "test_sine_product"; }
  Index input_dim() const override { return 1; }
  Index output_dim() const override { return 1; }
  Index param_dim() const override { return 1; }

  Vector eval(const Vector& z, const Vector& x) const override {
    check_arguments(z, x);
    return Vector::Constant(1, x[0] * std::sin(z[0]));
  }
  LayerDerivatives derivatives(const Vector& z, const Vector& x) const override {
    check_arguments(z, x);
    LayerDerivatives d = LayerDerivatives::zero(1, 1, 1);
    d.jac_x(0, 0) = std::sin(z[0]);
    d.jac_z(0, 0) = x[0] * std::cos(z[0]);
    d.hess_zx(0, 0) = std::cos(z[0]);
    d.hess_xz(0, 0) = std::cos(z[0]);
    d.hess_zz(0, 0) = -x[0] * std::sin(z[0]);
    return d;
  }
  nlohmann::json config() const override { return {{"kind", kind()}}; }
};

}  // namespace hivp::testing

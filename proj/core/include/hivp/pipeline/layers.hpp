#pragma once

#include "hivp/pipeline/layer.hpp"

namespace hivp {

enum class Activation { Tanh, Softplus };

// z = (features u in R^n, labels in R^k)  ->  (act(W u + c), labels),
// with W of shape m x n and x = vec(W) followed by c. Labels pass through
// unchanged so the final loss layer can read them.
class DenseActivation final : public Layer {
 public:
  DenseActivation(Activation act, Index in_features, Index out_features, Index labels);

  std::string kind() const override;
  Index input_dim() const override { return in_ + labels_; }
  Index output_dim() const override { return out_ + labels_; }
  Index param_dim() const override { return out_ * (in_ + 1); }

  Vector eval(const Vector& z, const Vector& x) const override;
  LayerDerivatives derivatives(const Vector& z, const Vector& x) const override;
  LayerJacobians jacobians(const Vector& z, const Vector& x) const override;
  nlohmann::json config() const override;

  Activation activation() const { return act_; }
  Index in_features() const { return in_; }
  Index out_features() const { return out_; }
  Index labels() const { return labels_; }

 private:
  Activation act_;
  Index in_;
  Index out_;
  Index labels_;
};

// Final layer fusing a linear readout with a squared loss:
// z = (u in R^n, y in R^k), f = 1/2 ||W u + c - y||^2, x = vec(W) followed by c.
class FusedSquaredLoss final : public Layer {
 public:
  FusedSquaredLoss(Index in_features, Index labels);

  std::string kind() const override { return "fused_squared_loss"; }
  Index input_dim() const override { return in_ + labels_; }
  Index output_dim() const override { return 1; }
  Index param_dim() const override { return labels_ * (in_ + 1); }

  Vector eval(const Vector& z, const Vector& x) const override;
  LayerDerivatives derivatives(const Vector& z, const Vector& x) const override;
  nlohmann::json config() const override;

 private:
  Index in_;
  Index labels_;
};

// f = A z + B x + c with constant A, B, c. No curvature.
class Affine final : public Layer {
 public:
  Affine(DenseBlock a, DenseBlock b, Vector c);

  std::string kind() const override { return "affine"; }
  Index input_dim() const override { return a_.cols(); }
  Index output_dim() const override { return a_.rows(); }
  Index param_dim() const override { return b_.cols(); }

  Vector eval(const Vector& z, const Vector& x) const override;
  LayerDerivatives derivatives(const Vector& z, const Vector& x) const override;
  nlohmann::json config() const override;

 private:
  DenseBlock a_;
  DenseBlock b_;
  Vector c_;
};

// Scalar f = 1/2 (x - c)^T A (x - c); the input is ignored.
class QuadraticLoss final : public Layer {
 public:
  QuadraticLoss(Index input_dim, DenseBlock a, Vector c);

  std::string kind() const override { return "quadratic"; }
  Index input_dim() const override { return input_dim_; }
  Index output_dim() const override { return 1; }
  Index param_dim() const override { return a_.rows(); }

  Vector eval(const Vector& z, const Vector& x) const override;
  LayerDerivatives derivatives(const Vector& z, const Vector& x) const override;
  nlohmann::json config() const override;

  const DenseBlock& a() const { return a_; }
  const Vector& c() const { return c_; }

 private:
  Index input_dim_;
  DenseBlock a_;
  Vector c_;
};

// f = tanh(A z + B x + c) with constant A, B, c. The parameter count is
// independent of the width, which the scaling sweeps rely on.
class MixedTanh final : public Layer {
 public:
  MixedTanh(DenseBlock a, DenseBlock b, Vector c);

  std::string kind() const override { return "mixed_tanh"; }
  Index input_dim() const override { return a_.cols(); }
  Index output_dim() const override { return a_.rows(); }
  Index param_dim() const override { return b_.cols(); }

  Vector eval(const Vector& z, const Vector& x) const override;
  LayerDerivatives derivatives(const Vector& z, const Vector& x) const override;
  LayerJacobians jacobians(const Vector& z, const Vector& x) const override;
  nlohmann::json config() const override;

 private:
  DenseBlock a_;
  DenseBlock b_;
  Vector c_;
};

// Scalar f = 1/2 ||A z + B x + c||^2 with constant A, B, c.
class MixedSquaredLoss final : public Layer {
 public:
  MixedSquaredLoss(DenseBlock a, DenseBlock b, Vector c);

  std::string kind() const override { return "mixed_squared_loss"; }
  Index input_dim() const override { return a_.cols(); }
  Index output_dim() const override { return 1; }
  Index param_dim() const override { return b_.cols(); }

  Vector eval(const Vector& z, const Vector& x) const override;
  LayerDerivatives derivatives(const Vector& z, const Vector& x) const override;
  nlohmann::json config() const override;

 private:
  DenseBlock a_;
  DenseBlock b_;
  Vector c_;
};

// Builds a layer from its config(); throws ParseError on unknown kinds or
// malformed fields.
LayerPtr layer_from_config(const nlohmann::json& config);

}  // namespace hivp

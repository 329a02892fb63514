#include "hivp/pipeline/layers.hpp"

#include <cmath>
#include <string>

#include "hivp/pipeline/json_values.hpp"

namespace hivp {

namespace {

struct ActivationValue {
  double value;
  double d1;
  double d2;
};

ActivationValue activate(Activation act, double s) {
  if (act == Activation::Tanh) {
    const double t = std::tanh(s);
    const double d1 = 1.0 - t * t;
    return {t, d1, -2.0 * t * d1};
  }
  const double value = s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
  const double sig = s >= 0.0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s));
  return {value, sig, sig * (1.0 - sig)};
}

void require_positive(Index v, const char* what) {
  if (v < 1) throw DimensionMismatch(std::string(what) + " must be at least 1");
}

// Rank-one curvature of an elementwise map o_i = act(s_i) where s_i is
// linear in (z, x) with gradients ds_dx and ds_dz. Cross terms from a
// bilinear s_i are added by the caller.
void add_elementwise(LayerDerivatives& d, Index i, Index a, const ActivationValue& act,
                     const Vector& ds_dx, const Vector& ds_dz) {
  const Index p = ds_dx.size();
  const Index n = ds_dz.size();
  d.jac_x.row(i) = act.d1 * ds_dx.transpose();
  d.jac_z.row(i) = act.d1 * ds_dz.transpose();
  for (Index q = 0; q < p; ++q) {
    if (ds_dx[q] == 0.0) continue;
    const double w = act.d2 * ds_dx[q];
    for (Index q2 = 0; q2 < p; ++q2) d.hess_xx(i + a * q, q2) = w * ds_dx[q2];
    for (Index r = 0; r < n; ++r) {
      d.hess_zx(i + a * q, r) = w * ds_dz[r];
      d.hess_xz(i + a * r, q) = w * ds_dz[r];
    }
  }
  for (Index r = 0; r < n; ++r) {
    const double w = act.d2 * ds_dz[r];
    for (Index r2 = 0; r2 < n; ++r2) d.hess_zz(i + a * r, r2) = w * ds_dz[r2];
  }
}

void check_coefficients(const DenseBlock& a, const DenseBlock& b, const Vector& c, Index out) {
  require_dims(b.rows(), a.rows(), "B rows");
  require_dims(c.size(), out, "c");
  require_finite(a, "A");
  require_finite(b, "B");
  require_finite(c, "c");
}

nlohmann::json mixed_config(const std::string& kind, const DenseBlock& a, const DenseBlock& b,
                            const Vector& c) {
  return {{"kind", kind},
          {"input_dim", a.cols()},
          {"output_dim", a.rows()},
          {"param_dim", b.cols()},
          {"A", json_values::encode(a)},
          {"B", json_values::encode(b)},
          {"c", json_values::encode(c)}};
}

}  // namespace

// ---- DenseActivation

DenseActivation::DenseActivation(Activation act, Index in_features, Index out_features,
                                 Index labels)
    : act_(act), in_(in_features), out_(out_features), labels_(labels) {
  require_positive(in_features, "in_features");
  require_positive(out_features, "out_features");
  if (labels < 0) throw DimensionMismatch("labels must be non-negative");
}

std::string DenseActivation::kind() const {
  return act_ == Activation::Tanh ? "dense_tanh" : "dense_softplus";
}

Vector DenseActivation::eval(const Vector& z, const Vector& x) const {
  check_arguments(z, x);
  const auto w = x.head(out_ * in_).reshaped(out_, in_);
  const Vector s = w * z.head(in_) + x.tail(out_);
  Vector out(output_dim());
  for (Index i = 0; i < out_; ++i) out[i] = activate(act_, s[i]).value;
  out.tail(labels_) = z.tail(labels_);
  return out;
}

LayerJacobians DenseActivation::jacobians(const Vector& z, const Vector& x) const {
  check_arguments(z, x);
  const Index a = output_dim();
  const auto w = x.head(out_ * in_).reshaped(out_, in_);
  const auto u = z.head(in_);
  const Vector s = w * u + x.tail(out_);
  LayerJacobians j{DenseBlock::Zero(a, param_dim()), DenseBlock::Zero(a, input_dim())};
  for (Index i = 0; i < out_; ++i) {
    const double d1 = activate(act_, s[i]).d1;
    for (Index k = 0; k < in_; ++k) {
      j.jac_x(i, k * out_ + i) = d1 * u[k];
      j.jac_z(i, k) = d1 * w(i, k);
    }
    j.jac_x(i, out_ * in_ + i) = d1;
  }
  for (Index t = 0; t < labels_; ++t) j.jac_z(out_ + t, in_ + t) = 1.0;
  return j;
}

LayerDerivatives DenseActivation::derivatives(const Vector& z, const Vector& x) const {
  check_arguments(z, x);
  const Index a = output_dim();
  const Index n = input_dim();
  const Index p = param_dim();
  const auto w = x.head(out_ * in_).reshaped(out_, in_);
  const auto u = z.head(in_);
  const Vector s = w * u + x.tail(out_);
  LayerDerivatives d = LayerDerivatives::zero(n, a, p);
  Vector ds_dx(p);
  Vector ds_dz(n);
  for (Index i = 0; i < out_; ++i) {
    const ActivationValue act = activate(act_, s[i]);
    ds_dx.setZero();
    ds_dz.setZero();
    for (Index k = 0; k < in_; ++k) {
      ds_dx[k * out_ + i] = u[k];
      ds_dz[k] = w(i, k);
    }
    ds_dx[out_ * in_ + i] = 1.0;
    add_elementwise(d, i, a, act, ds_dx, ds_dz);
    // d^2 s_i / dW(i,k) du_k = 1
    for (Index k = 0; k < in_; ++k) {
      const Index q = k * out_ + i;
      d.hess_zx(i + a * q, k) += act.d1;
      d.hess_xz(i + a * k, q) += act.d1;
    }
  }
  for (Index t = 0; t < labels_; ++t) d.jac_z(out_ + t, in_ + t) = 1.0;
  return d;
}

nlohmann::json DenseActivation::config() const {
  return {{"kind", kind()}, {"in_features", in_}, {"out_features", out_}, {"labels", labels_}};
}

// ---- FusedSquaredLoss

FusedSquaredLoss::FusedSquaredLoss(Index in_features, Index labels)
    : in_(in_features), labels_(labels) {
  require_positive(in_features, "in_features");
  require_positive(labels, "labels");
}

Vector FusedSquaredLoss::eval(const Vector& z, const Vector& x) const {
  check_arguments(z, x);
  const auto w = x.head(labels_ * in_).reshaped(labels_, in_);
  const Vector r = w * z.head(in_) + x.tail(labels_) - z.tail(labels_);
  return Vector::Constant(1, 0.5 * r.squaredNorm());
}

LayerDerivatives FusedSquaredLoss::derivatives(const Vector& z, const Vector& x) const {
  check_arguments(z, x);
  const Index k = labels_;
  const Index n = input_dim();
  const Index p = param_dim();
  const auto w = x.head(k * in_).reshaped(k, in_);
  const auto u = z.head(in_);
  const Vector r = w * u + x.tail(k) - z.tail(k);

  DenseBlock jr_x = DenseBlock::Zero(k, p);
  DenseBlock jr_z = DenseBlock::Zero(k, n);
  for (Index t = 0; t < k; ++t) {
    for (Index j = 0; j < in_; ++j) {
      jr_x(t, j * k + t) = u[j];
      jr_z(t, j) = w(t, j);
    }
    jr_x(t, k * in_ + t) = 1.0;
    jr_z(t, in_ + t) = -1.0;
  }

  LayerDerivatives d;
  d.jac_x = r.transpose() * jr_x;
  d.jac_z = r.transpose() * jr_z;
  d.hess_xx = jr_x.transpose() * jr_x;
  d.hess_zz = jr_z.transpose() * jr_z;
  d.hess_zx = jr_x.transpose() * jr_z;
  // d^2 r_t / dW(t,j) du_j = 1
  for (Index t = 0; t < k; ++t) {
    for (Index j = 0; j < in_; ++j) d.hess_zx(j * k + t, j) += r[t];
  }
  d.hess_xz = d.hess_zx.transpose();
  return d;
}

nlohmann::json FusedSquaredLoss::config() const {
  return {{"kind", kind()}, {"in_features", in_}, {"labels", labels_}};
}

// ---- Affine

Affine::Affine(DenseBlock a, DenseBlock b, Vector c)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
  require_positive(a_.rows(), "output_dim");
  check_coefficients(a_, b_, c_, a_.rows());
}

Vector Affine::eval(const Vector& z, const Vector& x) const {
  check_arguments(z, x);
  return a_ * z + b_ * x + c_;
}

LayerDerivatives Affine::derivatives(const Vector& z, const Vector& x) const {
  check_arguments(z, x);
  LayerDerivatives d = LayerDerivatives::zero(input_dim(), output_dim(), param_dim());
  d.jac_x = b_;
  d.jac_z = a_;
  return d;
}

nlohmann::json Affine::config() const { return mixed_config(kind(), a_, b_, c_); }

// ---- QuadraticLoss

QuadraticLoss::QuadraticLoss(Index input_dim, DenseBlock a, Vector c)
    : input_dim_(input_dim), a_(std::move(a)), c_(std::move(c)) {
  if (input_dim < 0) throw DimensionMismatch("input_dim must be non-negative");
  require_dims(a_.cols(), a_.rows(), "A columns");
  require_dims(c_.size(), a_.rows(), "c");
  require_finite(a_, "A");
  require_finite(c_, "c");
}

Vector QuadraticLoss::eval(const Vector& z, const Vector& x) const {
  check_arguments(z, x);
  const Vector d = x - c_;
  return Vector::Constant(1, 0.5 * d.dot(a_ * d));
}

LayerDerivatives QuadraticLoss::derivatives(const Vector& z, const Vector& x) const {
  check_arguments(z, x);
  LayerDerivatives d = LayerDerivatives::zero(input_dim(), 1, param_dim());
  const DenseBlock sym = 0.5 * (a_ + a_.transpose());
  d.jac_x = (sym * (x - c_)).transpose();
  d.hess_xx = sym;
  return d;
}

nlohmann::json QuadraticLoss::config() const {
  return {{"kind", kind()},
          {"input_dim", input_dim_},
          {"param_dim", a_.rows()},
          {"A", json_values::encode(a_)},
          {"c", json_values::encode(c_)}};
}

// ---- MixedTanh

MixedTanh::MixedTanh(DenseBlock a, DenseBlock b, Vector c)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
  require_positive(a_.rows(), "output_dim");
  check_coefficients(a_, b_, c_, a_.rows());
}

Vector MixedTanh::eval(const Vector& z, const Vector& x) const {
  check_arguments(z, x);
  return (a_ * z + b_ * x + c_).array().tanh().matrix();
}

LayerJacobians MixedTanh::jacobians(const Vector& z, const Vector& x) const {
  check_arguments(z, x);
  const Vector t = (a_ * z + b_ * x + c_).array().tanh().matrix();
  const Vector d1 = (1.0 - t.array().square()).matrix();
  return {d1.asDiagonal() * b_, d1.asDiagonal() * a_};
}

LayerDerivatives MixedTanh::derivatives(const Vector& z, const Vector& x) const {
  check_arguments(z, x);
  const Index a = output_dim();
  const Vector s = a_ * z + b_ * x + c_;
  LayerDerivatives d = LayerDerivatives::zero(input_dim(), a, param_dim());
  for (Index i = 0; i < a; ++i) {
    add_elementwise(d, i, a, activate(Activation::Tanh, s[i]), b_.row(i).transpose(),
                    a_.row(i).transpose());
  }
  return d;
}

nlohmann::json MixedTanh::config() const { return mixed_config(kind(), a_, b_, c_); }

// ---- MixedSquaredLoss

MixedSquaredLoss::MixedSquaredLoss(DenseBlock a, DenseBlock b, Vector c)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
  check_coefficients(a_, b_, c_, a_.rows());
}

Vector MixedSquaredLoss::eval(const Vector& z, const Vector& x) const {
  check_arguments(z, x);
  return Vector::Constant(1, 0.5 * (a_ * z + b_ * x + c_).squaredNorm());
}

LayerDerivatives MixedSquaredLoss::derivatives(const Vector& z, const Vector& x) const {
  check_arguments(z, x);
  const Vector r = a_ * z + b_ * x + c_;
  LayerDerivatives d;
  d.jac_x = r.transpose() * b_;
  d.jac_z = r.transpose() * a_;
  d.hess_xx = b_.transpose() * b_;
  d.hess_zx = b_.transpose() * a_;
  d.hess_xz = a_.transpose() * b_;
  d.hess_zz = a_.transpose() * a_;
  return d;
}

nlohmann::json MixedSquaredLoss::config() const {
  nlohmann::json j = mixed_config(kind(), a_, b_, c_);
  j["residual_dim"] = j["output_dim"];
  j.erase("output_dim");
  return j;
}

// ---- factory

LayerPtr layer_from_config(const nlohmann::json& j) {
  using json_values::decode_dim;
  using json_values::decode_matrix;
  using json_values::decode_vector;
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw ParseError("layer: missing string field 'kind'");
  }
  const std::string kind = j.at("kind").get<std::string>();
  auto field = [&](const char* key) -> const nlohmann::json& {
    if (!j.contains(key)) throw ParseError(kind + ": missing field '" + key + "'");
    return j.at(key);
  };
  try {
    if (kind == "dense_tanh" || kind == "dense_softplus") {
      return std::make_shared<DenseActivation>(
          kind == "dense_tanh" ? Activation::Tanh : Activation::Softplus,
          decode_dim(j, "in_features"), decode_dim(j, "out_features"), decode_dim(j, "labels"));
    }
    if (kind == "fused_squared_loss") {
      return std::make_shared<FusedSquaredLoss>(decode_dim(j, "in_features"),
                                                decode_dim(j, "labels"));
    }
    if (kind == "quadratic") {
      const Index p = decode_dim(j, "param_dim");
      return std::make_shared<QuadraticLoss>(decode_dim(j, "input_dim"),
                                             decode_matrix(field("A"), p, p, "A"),
                                             decode_vector(field("c"), p, "c"));
    }
    if (kind == "affine" || kind == "mixed_tanh" || kind == "mixed_squared_loss") {
      const Index n = decode_dim(j, "input_dim");
      const Index p = decode_dim(j, "param_dim");
      const Index m = decode_dim(j, kind == "mixed_squared_loss" ? "residual_dim" : "output_dim");
      DenseBlock a = decode_matrix(field("A"), m, n, "A");
      DenseBlock b = decode_matrix(field("B"), m, p, "B");
      Vector c = decode_vector(field("c"), m, "c");
      if (kind == "affine") return std::make_shared<Affine>(std::move(a), std::move(b), std::move(c));
      if (kind == "mixed_tanh") {
        return std::make_shared<MixedTanh>(std::move(a), std::move(b), std::move(c));
      }
      return std::make_shared<MixedSquaredLoss>(std::move(a), std::move(b), std::move(c));
    }
  } catch (const DimensionMismatch& e) {
    throw ParseError(kind + ": " + e.what());
  } catch (const NonFiniteValue& e) {
    throw ParseError(kind + ": " + e.what());
  }
  throw ParseError("unknown layer kind '" + kind + "'");
}

}  // namespace hivp

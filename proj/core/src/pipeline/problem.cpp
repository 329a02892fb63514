#include "hivp/pipeline/problem.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "hivp/pipeline/layers.hpp"

namespace hivp {

namespace {

double fan_in_scale(Index fan_in) {
  return 1.0 / std::sqrt(static_cast<double>(std::max<Index>(fan_in, 1)));
}

LayerPtr mixed_layer(SeededUniform& u, bool loss, Index in, Index out, Index p) {
  const double s = fan_in_scale(in + p);
  DenseBlock a = u.matrix(out, in, s);
  DenseBlock b = u.matrix(out, p, s);
  Vector c = u.vector(out, s);
  if (loss) return std::make_shared<MixedSquaredLoss>(std::move(a), std::move(b), std::move(c));
  return std::make_shared<MixedTanh>(std::move(a), std::move(b), std::move(c));
}

Problem finish(std::vector<LayerPtr> layers, SeededUniform& u) {
  Pipeline pipeline(std::move(layers));
  Vector z0 = u.vector(pipeline.input_dim(), 1.0);
  std::vector<Vector> params;
  for (const LayerPtr& f : pipeline.layers()) {
    params.push_back(u.vector(f->param_dim(), fan_in_scale(f->input_dim())));
  }
  return {std::move(pipeline), std::move(z0), std::move(params)};
}

Problem random_mixed(SeededUniform& u, const RandomBounds& b) {
  const Index count = u.next_int(1, b.max_layers);
  Index in = u.next_int(1, b.max_width);
  std::vector<LayerPtr> layers;
  for (Index l = 0; l < count; ++l) {
    const bool last = l + 1 == count;
    const Index out = u.next_int(1, b.max_width);
    const Index p = u.next_int(1, b.max_params);
    if (!last && u.next(0.0, 1.0) < 0.2) {
      const double s = fan_in_scale(in + p);
      layers.push_back(std::make_shared<Affine>(u.matrix(out, in, s), u.matrix(out, p, s),
                                                u.vector(out, s)));
    } else {
      layers.push_back(mixed_layer(u, last, in, out, p));
    }
    in = out;
  }
  return finish(std::move(layers), u);
}

Problem random_dense(SeededUniform& u, const RandomBounds& b) {
  constexpr Index kLabels = 1;
  const Index count = u.next_int(1, b.max_layers);
  Index n = u.next_int(1, std::min(b.max_width - kLabels, b.max_params - 1));
  std::vector<LayerPtr> layers;
  for (Index l = 0; l + 1 < count; ++l) {
    const Index m = u.next_int(1, std::min(b.max_width - kLabels, b.max_params / (n + 1)));
    const Activation act = u.next(0.0, 1.0) < 0.5 ? Activation::Tanh : Activation::Softplus;
    layers.push_back(std::make_shared<DenseActivation>(act, n, m, kLabels));
    n = m;
  }
  layers.push_back(std::make_shared<FusedSquaredLoss>(n, kLabels));
  return finish(std::move(layers), u);
}

}  // namespace

double SeededUniform::next(double lo, double hi) {
  const double unit = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

Index SeededUniform::next_int(Index lo, Index hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<Index>(engine_() % span);
}

Vector SeededUniform::vector(Index n, double scale) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = scale * next();
  return v;
}

DenseBlock SeededUniform::matrix(Index rows, Index cols, double scale) {
  DenseBlock m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = scale * next();
  }
  return m;
}

Vector seeded_params(const Layer& layer, std::uint64_t seed) {
  SeededUniform u(seed);
  return u.vector(layer.param_dim(), fan_in_scale(layer.input_dim()));
}

Problem generated_problem(Index layers, Index width, Index params, std::uint64_t seed) {
  if (layers < 1 || width < 1 || params < 1) {
    throw DimensionMismatch("layers, width and params must all be at least 1");
  }
  SeededUniform u(seed);
  std::vector<LayerPtr> chain;
  for (Index l = 0; l < layers; ++l) {
    chain.push_back(mixed_layer(u, l + 1 == layers, width, width, params));
  }
  return finish(std::move(chain), u);
}

Problem random_problem(std::uint64_t seed, RandomBounds b) {
  if (b.max_layers < 1 || b.max_width < 1 || b.max_params < 1) {
    throw DimensionMismatch("random bounds must all be at least 1");
  }
  SeededUniform u(seed);
  const bool dense_fits = b.max_width >= 2 && b.max_params >= 2;
  if (dense_fits && u.next(0.0, 1.0) < 0.5) return random_dense(u, b);
  return random_mixed(u, b);
}

}  // namespace hivp

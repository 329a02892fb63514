#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "hivp/pipeline/pipeline.hpp"

namespace hivp {

// A pipeline together with the point it is evaluated at.
struct Problem {
  Pipeline pipeline;
  Vector z0;
  std::vector<Vector> params;

  EvaluationPoint evaluate() const { return forward(pipeline, z0, params); }
};

// Uniform draws that are bit-identical across standard libraries:
// mt19937_64 is fully specified, the distribution is built by hand.
class SeededUniform {
 public:
  explicit SeededUniform(std::uint64_t seed) : engine_(seed) {}

  // U(lo, hi)
  double next(double lo = -1.0, double hi = 1.0);
  // Integer in [lo, hi].
  Index next_int(Index lo, Index hi);
  Vector vector(Index n, double scale);
  DenseBlock matrix(Index rows, Index cols, double scale);

 private:
  std::mt19937_64 engine_;
};

// Parameters drawn from U(-1, 1) / sqrt(fan-in) for one layer.
Vector seeded_params(const Layer& layer, std::uint64_t seed);

// Uniform-width problem used by the CLI and the benchmarks: L - 1 MixedTanh
// layers of width a with p parameters each, then a MixedSquaredLoss with a
// residuals and p parameters. Coefficients and parameters are drawn from
// U(-1, 1) / sqrt(fan-in). Identical arguments give identical problems.
Problem generated_problem(Index layers, Index width, Index params, std::uint64_t seed);

struct RandomBounds {
  Index max_layers = 5;
  Index max_width = 4;
  Index max_params = 6;
};

// Random problem with heterogeneous per-layer dims within the bounds. Draws
// either from the mixed family or from the dense family (DenseActivation
// layers carrying labels into a FusedSquaredLoss), whichever fits.
Problem random_problem(std::uint64_t seed, RandomBounds bounds = {});

}  // namespace hivp

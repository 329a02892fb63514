#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "commands.hpp"
#include "hivp/blockmat/commutation.hpp"
#include "hivp/blockmat/tridiagonal.hpp"
#include "hivp/hessian/dense.hpp"
#include "hivp/hessian/operator.hpp"
#include "hivp/hessian/pearlmutter.hpp"
#include "hivp/pipeline/finite_diff.hpp"
#include "hivp/solver/lift.hpp"

namespace hivp::cli {

namespace {

// ||a - ref|| / max(1, ||ref||): relative for large references, absolute
// near zero where finite differences only carry noise.
double floored_error(const DenseBlock& a, const DenseBlock& ref) {
  return (a - ref).norm() / std::max(1.0, ref.norm());
}

double floored_error(const Vector& a, const Vector& ref) {
  return (a - ref).norm() / std::max(1.0, ref.norm());
}

double column_error(const DenseBlock& h, const DenseBlock& fd) {
  return (h - fd).cwiseAbs().maxCoeff() / (1.0 + fd.cwiseAbs().maxCoeff());
}

class FaultyLayer final : public Layer {
 public:
  explicit FaultyLayer(LayerPtr inner) : inner_(std::move(inner)) {}

  std::string kind() const override { return inner_->kind(); }
  Index input_dim() const override { return inner_->input_dim(); }
  Index output_dim() const override { return inner_->output_dim(); }
  Index param_dim() const override { return inner_->param_dim(); }
  Vector eval(const Vector& z, const Vector& x) const override { return inner_->eval(z, x); }

  LayerDerivatives derivatives(const Vector& z, const Vector& x) const override {
    LayerDerivatives d = inner_->derivatives(z, x);
    corrupt(d.jac_x);
    return d;
  }
  LayerJacobians jacobians(const Vector& z, const Vector& x) const override {
    LayerJacobians j = inner_->jacobians(z, x);
    corrupt(j.jac_x);
    return j;
  }
  nlohmann::json config() const override { return inner_->config(); }

 private:
  static void corrupt(DenseBlock& jac_x) {
    if (jac_x.size() > 0) jac_x(0, 0) += 0.5;
  }
  LayerPtr inner_;
};

// Two-group, two-layer grids with scalar sub-blocks, as in the worked
// pivoting examples.
BlockGrid scalar_grid(const std::array<std::array<DenseBlock, 2>, 2>& k) {
  BlockGrid grid(2, std::vector<LayeredBlockMatrix>(2, LayeredBlockMatrix({1, 1}, {1, 1})));
  for (std::size_t u = 0; u < 2; ++u)
    for (std::size_t v = 0; v < 2; ++v)
      for (Index i = 0; i < 2; ++i)
        for (Index j = 0; j < 2; ++j)
          if (k[u][v](i, j) != 0.0)
            grid[u][v].set(static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                           DenseBlock::Constant(1, 1, k[u][v](i, j)));
  return grid;
}

DenseBlock m2(double a, double b, double c, double d) {
  DenseBlock m(2, 2);
  m << a, b, c, d;
  return m;
}

// Largest entry deviation of the pivoted grid from its hand-worked result.
double golden_error(const BlockGrid& grid, const DenseBlock& expected) {
  const CommutationPermutation pi({{1, 1}, {1, 1}});
  const DenseBlock kp = pivot_to_tridiagonal(grid, pi).dense();
  const DenseBlock conj = pi.dense() * dense(grid) * pi.dense().transpose();
  return std::max((kp - expected).cwiseAbs().maxCoeff(), (conj - expected).cwiseAbs().maxCoeff());
}

double golden_block_diagonal() {
  const double a = 1, b = 2, c = 3, d = 4, e = 5, f = 6, g = 7, h = 8;
  DenseBlock expected(4, 4);
  expected << a, c, 0, 0, e, g, 0, 0, 0, 0, b, d, 0, 0, f, h;
  return golden_error(scalar_grid({{{m2(a, 0, 0, b), m2(c, 0, 0, d)},
                                    {m2(e, 0, 0, f), m2(g, 0, 0, h)}}}),
                      expected);
}

double golden_upper_band() {
  const double a = 1, b = 2, c = 3, d = 4, e = 5, f = 6, g = 7, h = 8;
  const double alpha = 11, beta = 12, delta = 13, gamma = 14;
  DenseBlock expected(4, 4);
  expected << a, c, alpha, beta, e, g, delta, gamma, 0, 0, b, d, 0, 0, f, h;
  return golden_error(scalar_grid({{{m2(a, alpha, 0, b), m2(c, beta, 0, d)},
                                    {m2(e, delta, 0, f), m2(g, gamma, 0, h)}}}),
                      expected);
}

// Pi(Pi v) = v on a square grid with symmetric dims built from the
// problem's parameter counts, and Pi^-1(Pi v) = v on the lifted grid.
double commutation_error(const std::vector<Index>& param_dims, const CommutationPermutation& lifted,
                         std::uint64_t seed) {
  const std::size_t n = param_dims.size();
  std::vector<std::vector<Index>> dims(n, std::vector<Index>(n));
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t l = 0; l < n; ++l) dims[u][l] = param_dims[std::min(u, l)];
  const CommutationPermutation square(dims);

  SeededUniform rng(seed);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Vector v = rng.vector(square.size(), 1.0);
    worst = std::max(worst, (square.apply(square.apply(v)) - v).cwiseAbs().maxCoeff());
    const Vector w = rng.vector(lifted.size(), 1.0);
    worst = std::max(worst, (lifted.apply_inverse(lifted.apply(w)) - w).cwiseAbs().maxCoeff());
  }
  return worst;
}

// Largest |entry| of Pi K Pi^T outside the layer-wise block-tridiagonal
// envelope, plus any disagreement with the structured pivot.
double bandwidth_error(const LiftedSystem& system) {
  const CommutationPermutation pi = system.permutation();
  const DenseBlock pd = pi.dense();
  const DenseBlock conj = pd * system.dense() * pd.transpose();
  const std::size_t layers = pi.inner_count();
  double worst = (pivot_to_tridiagonal(system.blocks, pi).dense() - conj).cwiseAbs().maxCoeff();
  for (std::size_t i = 0; i < layers; ++i) {
    for (std::size_t j = 0; j < layers; ++j) {
      if (i + 1 >= j && j + 1 >= i) continue;
      const auto block = conj.block(pi.layer_offset(i), pi.layer_offset(j), pi.layer_size(i),
                                    pi.layer_size(j));
      if (block.size() > 0) worst = std::max(worst, block.cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

std::string eps_label(double eps) {
  std::ostringstream s;
  s << "schur_eps_" << eps;
  return s.str();
}

}  // namespace

Problem with_injected_fault(const Problem& problem) {
  std::vector<LayerPtr> layers;
  for (std::size_t l = 0; l < problem.pipeline.size(); ++l)
    layers.push_back(std::make_shared<FaultyLayer>(problem.pipeline.layers()[l]));
  return {Pipeline(std::move(layers)), problem.z0, problem.params};
}

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed(); });
}

nlohmann::json VerifyReport::to_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& c : checks) {
    list.push_back({{"name", c.name},
                    {"error", c.error},
                    {"tolerance", c.tolerance},
                    {"passed", c.passed()}});
  }
  return {{"version", kReportVersion}, {"passed", passed()}, {"checks", list}};
}

std::string VerifyReport::to_csv() const {
  std::string s = "name,error,tolerance,passed\n";
  for (const auto& c : checks) {
    s += c.name + ',' + format_number(c.error) + ',' + format_number(c.tolerance) + ',' +
         (c.passed() ? "true" : "false") + '\n';
  }
  return s;
}

VerifyReport run_verify(const RunConfig& cfg) {
  Problem problem = config_problem(cfg);
  if (cfg.inject_fault) problem = with_injected_fault(problem);
  const Pipeline& p = problem.pipeline;
  const EvaluationPoint pt = problem.evaluate();
  const HessianOperator h = assemble(p, pt);
  const DenseBlock dense_h = dense_hessian(h);

  VerifyReport r;
  auto add = [&r](std::string name, double error, double tol) {
    r.checks.push_back({std::move(name), std::isnan(error) ? std::numeric_limits<double>::infinity()
                                                           : error,
                        tol});
  };

  add("gradient_fd", floored_error(gradient(p, pt), finite_diff_gradient(p, pt)), 1e-5);
  add("hessian_fd", column_error(dense_h, finite_diff_hessian(p, pt)), 1e-4);

  SeededUniform rng(cfg.seed + 1);
  double pearlmutter = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Vector v = rng.vector(h.size(), 1.0);
    pearlmutter = std::max(pearlmutter, floored_error(hvp_pearlmutter(p, pt, v), hvp(h, v)));
  }
  add("pearlmutter", pearlmutter, 1e-10);
  add("symmetry", symmetry_error(dense_h), 1e-8);

  const Vector g = rng.vector(h.size(), 1.0);
  const LiftedSystem base = lift(h, cfg.eps, g);
  add("commutation_involution", commutation_error(h.param_dims(), base.permutation(), cfg.seed),
      0.0);
  for (const double eps : {0.0, 1e-3, 1e-1}) {
    const LiftedSystem s = lift(h, eps, g);
    DenseBlock target = dense_h;
    target.diagonal().array() += eps;
    add(eps_label(eps), floored_error(dense_schur_complement(s), target), 1e-10);
  }
  add("pivot_bandwidth", bandwidth_error(base), 0.0);
  add("golden_block_diagonal", golden_block_diagonal(), 0.0);
  add("golden_upper_band", golden_upper_band(), 0.0);
  return r;
}

}  // namespace hivp::cli

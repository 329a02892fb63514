#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "hivp/hessian/dense.hpp"
#include "hivp/hessian/operator.hpp"
#include "hivp/pipeline/layers.hpp"
#include "hivp/pipeline/problem.hpp"
#include "hivp/solver/lift.hpp"
#include "hivp/solver/solve.hpp"
#include "random_instances.hpp"

namespace hivp {
namespace {

using testing::random_matrix;
using testing::random_vector;
using testing::relative_error;
using testing::Rng;

Problem quadratic_problem(const DenseBlock& a, const Vector& c, const Vector& x) {
  Pipeline p({std::make_shared<QuadraticLoss>(1, a, c)});
  return {std::move(p), Vector::Zero(1), {x}};
}

DenseBlock random_spd(Rng& rng, Index n) {
  const DenseBlock g = random_matrix(rng, n, n);
  return g * g.transpose() + DenseBlock::Identity(n, n);
}

double log_log_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  Vector x(static_cast<Index>(xs.size()));
  Vector y(static_cast<Index>(ys.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    x[static_cast<Index>(i)] = std::log(xs[i]);
    y[static_cast<Index>(i)] = std::log(ys[i]);
  }
  const Vector xc = x.array() - x.mean();
  return xc.dot(Vector(y.array() - y.mean())) / xc.squaredNorm();
}

// -------------------------------------------------------------------- lift

TEST(Lift, ZeroRightHandSide) {
  const Problem prob = random_problem(1);
  const HessianOperator h = assemble(prob.pipeline, prob.evaluate());
  const LiftedSystem s = lift(h, 1e-2, Vector::Zero(h.size()));
  EXPECT_TRUE(s.rhs.isZero(0.0));
  EXPECT_EQ(s.size(), h.size() + 2 * h.M().rows());
  EXPECT_EQ(hivp_solve(h, Vector::Zero(h.size()), 1e-2).x, Vector::Zero(h.size()));
}

TEST(Lift, QuadraticSchurComplementIsSymmetricPart) {
  Rng rng(2);
  const DenseBlock a = random_matrix(rng, 3, 3);
  const Problem prob = quadratic_problem(a, random_vector(rng, 3), random_vector(rng, 3));
  const HessianOperator h = assemble(prob.pipeline, prob.evaluate());
  const DenseBlock schur = dense_schur_complement(lift(h, 0.0, Vector::Zero(3)));
  EXPECT_LE(relative_error(schur, DenseBlock(0.5 * (a + a.transpose()))), 1e-15);
}

TEST(Lift, SchurComplementIsDampedHessian) {
  for (double eps : {0.0, 1e-3, 1e-1}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Problem prob = random_problem(seed);
      const HessianOperator h = assemble(prob.pipeline, prob.evaluate());
      DenseBlock expected = dense_hessian(h);
      expected.diagonal().array() += eps;
      const DenseBlock schur = dense_schur_complement(lift(h, eps, Vector::Zero(h.size())));
      EXPECT_LE(relative_error(schur, expected), 1e-10) << "seed " << seed << " eps " << eps;
    }
  }
}

TEST(Lift, RowsEncodeTheAuxiliaryVariables) {
  Rng rng(3);
  const Problem prob = random_problem(4, {4, 3, 4});
  const HessianOperator h = assemble(prob.pipeline, prob.evaluate());
  const double eps = 0.25;
  const LiftedSystem s = lift(h, eps, Vector::Zero(h.size()));
  const Vector x = random_vector(rng, h.size());

  const DenseBlock m = h.M().dense();
  const DenseBlock p = h.P().dense();
  const Vector y = m.partialPivLu().solve(h.D_x().dense() * x);
  const Vector z = m.transpose().partialPivLu().solve(
      p.transpose() * h.D_M().dense() *
      (h.D_xz().dense() * x + h.D_zz().dense() * p * y));
  Vector stacked(s.size());
  stacked << x, y, z;
  const Vector lhs = s.dense() * stacked;
  const Vector hx = hvp(h, x) + eps * x;
  EXPECT_LE(relative_error(Vector(lhs.head(x.size())), hx), 1e-12);
  EXPECT_LE(lhs.tail(s.size() - x.size()).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + hx.norm()));
}

TEST(Lift, PivotedSystemIsBlockTridiagonal) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Problem prob = random_problem(seed);
    const HessianOperator h = assemble(prob.pipeline, prob.evaluate());
    const LiftedSystem s = lift(h, 1e-3, Vector::Zero(h.size()));
    const CommutationPermutation pi = s.permutation();
    const DenseBlock pd = pi.dense();
    const DenseBlock permuted = pd * s.dense() * pd.transpose();
    const BlockTridiagonal t = pivot_to_tridiagonal(s.blocks, pi);
    EXPECT_EQ(t.dense(), permuted);
    for (std::size_t i = 0; i < pi.inner_count(); ++i) {
      for (std::size_t j = 0; j < pi.inner_count(); ++j) {
        if (i + 1 >= j && j + 1 >= i) continue;
        EXPECT_TRUE(permuted
                        .block(pi.layer_offset(i), pi.layer_offset(j), pi.layer_size(i),
                               pi.layer_size(j))
                        .isZero(0.0));
      }
    }
  }
}

TEST(Lift, RejectsBadArguments) {
  const Problem prob = random_problem(5);
  const HessianOperator h = assemble(prob.pipeline, prob.evaluate());
  EXPECT_THROW(lift(h, -1.0, Vector::Zero(h.size())), std::invalid_argument);
  EXPECT_THROW(lift(h, 0.0, Vector::Zero(h.size() + 1)), DimensionMismatch);
}

// ---------------------------------------------------------- unpivot_extract

TEST(UnpivotExtract, SingleLayerIsIdentityExtraction) {
  const CommutationPermutation pi({{2}, {3}, {3}});
  Vector v(8);
  v << 1, 2, 3, 4, 5, 6, 7, 8;
  EXPECT_EQ(unpivot_extract(v, pi, 2), v.head(2));
}

TEST(UnpivotExtract, PicksXBlocksFromLayerMajorOrder) {
  // L = 2 with p = (1, 2), a = (2, 1): layer-major is x1 y1 z1 x2 y2 z2.
  const CommutationPermutation pi({{1, 2}, {2, 1}, {2, 1}});
  Vector v(9);
  v << 10, 0, 0, 0, 0, 20, 21, 0, 0;
  Vector expected(3);
  expected << 10, 20, 21;
  EXPECT_EQ(unpivot_extract(v, pi, 3), expected);
}

TEST(UnpivotExtract, RoundTrip) {
  Rng rng(6);
  const CommutationPermutation pi({{3, 1, 2}, {2, 2, 1}, {2, 2, 1}});
  for (int i = 0; i < 100; ++i) {
    const Vector v = random_vector(rng, pi.size());
    EXPECT_EQ(pi.apply_inverse(pi.apply(v)), v);
    EXPECT_EQ(unpivot_extract(pi.apply(v), pi, 6), v.head(6));
  }
}

// -------------------------------------------------------------- hivp_solve

TEST(HivpSolve, QuadraticWithoutDamping) {
  Rng rng(7);
  const DenseBlock a = random_spd(rng, 4);
  const Problem prob = quadratic_problem(a, random_vector(rng, 4), random_vector(rng, 4));
  const Vector b = random_vector(rng, 4);
  const SolveReport r = hivp_solve(prob.pipeline, prob.evaluate(), b, 0.0);
  EXPECT_LE(relative_error(r.x, Vector(a.partialPivLu().solve(b))), 1e-12);
  EXPECT_EQ(r.method, "hivp");
}

TEST(HivpSolve, MatchesDenseSolveOnUniformPipeline) {
  Rng rng(8);
  const Problem prob = generated_problem(4, 3, 3, 8);
  const EvaluationPoint pt = prob.evaluate();
  const Vector b = random_vector(rng, prob.pipeline.total_params());
  const SolveReport fast = hivp_solve(prob.pipeline, pt, b, 1e-2);
  const SolveReport dense = dense_solve(prob.pipeline, pt, b, 1e-2);
  EXPECT_LE(relative_error(fast.x, dense.x), 1e-6);
}

TEST(HivpSolve, RandomDampedInstances) {
  Rng rng(9);
  int compared = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const double eps = std::array<double, 3>{1e-1, 1e-2, 1e-3}[seed % 3];
    const Problem prob = random_problem(seed);
    const EvaluationPoint pt = prob.evaluate();
    const HessianOperator h = assemble(prob.pipeline, pt);
    const Vector b = random_vector(rng, h.size());
    const SolveReport r = hivp_solve(h, b, eps);
    EXPECT_LE(r.residual, 1e-6 * (1.0 + b.norm())) << "seed " << seed;
    const SolveReport d = dense_solve(h, b, eps);
    if (d.condition_estimates[0] <= 1e8) {
      EXPECT_LE(relative_error(r.x, d.x), 1e-6) << "seed " << seed;
      ++compared;
    }
  }
  EXPECT_GE(compared, 40);
}

TEST(HivpSolve, RefinementKeepsOrImprovesResidual) {
  Rng rng(10);
  const Problem prob = generated_problem(6, 3, 3, 2);
  const HessianOperator h = assemble(prob.pipeline, prob.evaluate());
  const Vector b = random_vector(rng, h.size());
  const SolveReport plain = hivp_solve(h, b, 1e-3);
  SolveOptions opt;
  opt.refine = true;
  const SolveReport refined = hivp_solve(h, b, 1e-3, opt);
  EXPECT_EQ(refined.iterations, 1u);
  EXPECT_LE(refined.residual, 2.0 * plain.residual + 1e-15);
}

TEST(HivpSolve, ConditionWarningsAreAttached) {
  const Problem prob = generated_problem(3, 2, 2, 3);
  const HessianOperator h = assemble(prob.pipeline, prob.evaluate());
  SolveOptions opt;
  opt.condition_warning = 0.5;
  const SolveReport r = hivp_solve(h, Vector::Ones(h.size()), 1e-2, opt);
  EXPECT_EQ(r.condition_estimates.size(), 3u);
  EXPECT_EQ(r.warnings.size(), 3u);
  EXPECT_TRUE(hivp_solve(h, Vector::Ones(h.size()), 1e-2).warnings.empty());
}

TEST(HivpSolve, SingularSystemRaisesWithPivotIndex) {
  // Zero curvature and zero gradient: the only pivot block is singular.
  const Problem prob = quadratic_problem(DenseBlock::Zero(2, 2), Vector::Zero(2), Vector::Zero(2));
  const HessianOperator h = assemble(prob.pipeline, prob.evaluate());
  try {
    hivp_solve(h, Vector::Ones(2), 0.0);
    FAIL() << "expected SingularPivotBlock";
  } catch (const SingularPivotBlock& e) {
    EXPECT_EQ(e.block_index(), 0u);
  }
}

TEST(HivpSolve, ReportSerializes) {
  const Problem prob = generated_problem(2, 2, 2, 1);
  const HessianOperator h = assemble(prob.pipeline, prob.evaluate());
  const SolveReport r = hivp_solve(h, Vector::Ones(h.size()), 1e-3);
  const nlohmann::json j = r.to_json();
  EXPECT_EQ(j.at("version"), 1);
  EXPECT_EQ(j.at("method"), "hivp");
  EXPECT_EQ(j.at("solution").size(), static_cast<std::size_t>(h.size()));
  EXPECT_EQ(j.at("residual").get<double>(), r.residual);
  EXPECT_GT(j.at("flops").get<std::uint64_t>(), 0u);
}

TEST(HivpSolve, FlopsAndStorageAreLinearInDepth) {
  std::vector<double> ls, flops, bytes;
  for (Index layers : {8, 16, 32, 64, 128, 256}) {
    const Problem prob = generated_problem(layers, 4, 4, 0);
    const EvaluationPoint pt = prob.evaluate();
    const SolveReport r =
        hivp_solve(prob.pipeline, pt, Vector::Ones(prob.pipeline.total_params()), 1e-3);
    ls.push_back(static_cast<double>(layers));
    flops.push_back(static_cast<double>(r.flops));
    bytes.push_back(static_cast<double>(r.peak_bytes));
  }
  const double flop_slope = log_log_slope(ls, flops);
  const double byte_slope = log_log_slope(ls, bytes);
  EXPECT_GE(flop_slope, 0.85);
  EXPECT_LE(flop_slope, 1.15);
  EXPECT_GE(byte_slope, 0.85);
  EXPECT_LE(byte_slope, 1.15);
}

TEST(DenseSolve, FlopsAreCubicInDepth) {
  std::vector<double> ls, flops;
  for (Index layers : {8, 16, 32}) {
    const Problem prob = generated_problem(layers, 4, 4, 0);
    const SolveReport r = dense_solve(prob.pipeline, prob.evaluate(),
                                      Vector::Ones(prob.pipeline.total_params()), 1e-3);
    ls.push_back(static_cast<double>(layers));
    flops.push_back(static_cast<double>(r.flops));
  }
  const double slope = log_log_slope(ls, flops);
  EXPECT_GE(slope, 2.5);
  EXPECT_LE(slope, 3.5);
}

TEST(DenseSolve, GuardApplies) {
  const Problem prob = generated_problem(3, 2, 2, 0);
  const HessianOperator h = assemble(prob.pipeline, prob.evaluate());
  EXPECT_THROW(dense_solve(h, Vector::Ones(h.size()), 1e-3, 4), SizeGuardExceeded);
}

// ---------------------------------------------------------------------- cg

TEST(CgSolve, ZeroRightHandSide) {
  const Problem prob = random_problem(3);
  const HessianOperator h = assemble(prob.pipeline, prob.evaluate());
  const SolveReport r = cg_solve(h, Vector::Zero(h.size()), 1.0, 1e-10, 10);
  EXPECT_EQ(r.iterations, 0u);
  EXPECT_EQ(r.x, Vector::Zero(h.size()));
}

TEST(CgSolve, IdentityConvergesInOneIteration) {
  Rng rng(11);
  const Problem prob = quadratic_problem(DenseBlock::Identity(5, 5), random_vector(rng, 5),
                                         random_vector(rng, 5));
  const HessianOperator h = assemble(prob.pipeline, prob.evaluate());
  const Vector b = random_vector(rng, 5);
  const SolveReport r = cg_solve(h, b, 0.0, 1e-12, 10);
  EXPECT_EQ(r.iterations, 1u);
  EXPECT_LE(relative_error(r.x, b), 1e-15);
}

TEST(CgSolve, AgreesWithHivpOnPositiveDefiniteInstances) {
  Rng rng(12);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Problem prob = random_problem(seed);
    const HessianOperator h = assemble(prob.pipeline, prob.evaluate());
    const Eigen::SelfAdjointEigenSolver<DenseBlock> eig(dense_hessian(h));
    const double eps = std::max(0.0, -eig.eigenvalues().minCoeff()) + 0.1;
    const Vector b = random_vector(rng, h.size());
    const SolveReport cg = cg_solve(h, b, eps, 1e-12, static_cast<std::size_t>(20 * h.size()));
    const SolveReport direct = hivp_solve(h, b, eps);
    EXPECT_LE(relative_error(cg.x, direct.x), 1e-5) << "seed " << seed;
  }
}

TEST(CgSolve, ReportsNonConvergence) {
  const Problem prob = generated_problem(4, 3, 3, 1);
  const HessianOperator h = assemble(prob.pipeline, prob.evaluate());
  try {
    cg_solve(h, Vector::Ones(h.size()), 1.0, 1e-14, 1);
    FAIL() << "expected NoConvergence";
  } catch (const NoConvergence& e) {
    EXPECT_EQ(e.iterations(), 1u);
    EXPECT_GT(e.residual(), 0.0);
  }
}

}  // namespace
}  // namespace hivp

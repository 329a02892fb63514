#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/LU>

#include "hivp/blockmat/kernels.hpp"
#include "hivp/hessian/dense.hpp"
#include "hivp/hessian/operator.hpp"
#include "hivp/hessian/pearlmutter.hpp"
#include "hivp/instrument.hpp"
#include "hivp/pipeline/layers.hpp"
#include "hivp/pipeline/problem.hpp"
#include "random_instances.hpp"
#include "test_layers.hpp"

namespace hivp {
namespace {

using testing::random_matrix;
using testing::random_vector;
using testing::relative_error;
using testing::Rng;

// max_i |H e_i - FD_i|_inf / (1 + |FD|_inf) over columns.
double column_error(const DenseBlock& h, const DenseBlock& fd) {
  return (h - fd).cwiseAbs().maxCoeff() / (1.0 + fd.cwiseAbs().maxCoeff());
}

Problem quadratic_problem(const DenseBlock& a, const Vector& c, const Vector& x) {
  Pipeline p({std::make_shared<QuadraticLoss>(1, a, c)});
  return {std::move(p), Vector::Zero(1), {x}};
}

// Affine hidden layers feeding a quadratic loss on the last layer's params
// and a squared loss on the activations.
Problem affine_problem(Rng& rng) {
  std::vector<LayerPtr> layers{
      std::make_shared<Affine>(random_matrix(rng, 3, 2), random_matrix(rng, 3, 2),
                               random_vector(rng, 3)),
      std::make_shared<Affine>(random_matrix(rng, 2, 3), random_matrix(rng, 2, 3),
                               random_vector(rng, 2)),
      std::make_shared<MixedSquaredLoss>(random_matrix(rng, 2, 2), random_matrix(rng, 2, 2),
                                         random_vector(rng, 2))};
  Pipeline p(std::move(layers));
  std::vector<Vector> params{random_vector(rng, 2), random_vector(rng, 3), random_vector(rng, 2)};
  return {std::move(p), random_vector(rng, 2), std::move(params)};
}

// ------------------------------------------------------------------ assemble

TEST(Assemble, SingleLayerIsDegenerate) {
  const Problem prob = generated_problem(1, 3, 2, 4);
  const EvaluationPoint pt = prob.evaluate();
  const HessianOperator h = assemble(prob.pipeline, pt);
  EXPECT_EQ(h.M().dense(), DenseBlock::Identity(1, 1));
  EXPECT_EQ(h.P().dense(), DenseBlock::Zero(3, 1));
  const LayerDerivatives d = prob.pipeline.layer(0).derivatives(pt.z0, pt.params[0]);
  EXPECT_EQ(h.D_x().dense(), d.jac_x);
  EXPECT_EQ(h.b().size(), 1u);
  EXPECT_EQ(h.b()[0], Vector::Ones(1));
}

TEST(Assemble, AffineLayersHaveNoCurvatureBlocks) {
  Rng rng(1);
  const Problem prob = affine_problem(rng);
  const HessianOperator h = assemble(prob.pipeline, prob.evaluate());
  for (std::size_t l = 0; l + 1 < prob.pipeline.size(); ++l) {
    EXPECT_TRUE(h.D_xx().block(l).isZero(0.0));
    EXPECT_TRUE(h.D_zx().block(l).isZero(0.0));
    EXPECT_TRUE(h.D_xz().block(l).isZero(0.0));
    EXPECT_TRUE(h.D_zz().block(l).isZero(0.0));
  }
}

TEST(Assemble, BackpropVectorsAndGradientAgreeWithRecursion) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Problem prob = random_problem(seed);
    const EvaluationPoint pt = prob.evaluate();
    const HessianOperator h = assemble(prob.pipeline, pt);
    const auto b = backprop_vectors(prob.pipeline, pt);
    ASSERT_EQ(h.b().size(), b.size());
    for (std::size_t l = 0; l < b.size(); ++l) EXPECT_LE(relative_error(h.b()[l], b[l]), 1e-14);
    EXPECT_EQ(h.b().back(), Vector::Ones(1));
    EXPECT_LE(relative_error(h.gradient(), gradient(prob.pipeline, pt)), 1e-14);
  }
}

TEST(Assemble, OperatorsMatchBlockwiseDenseAssembly) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Problem prob = random_problem(seed, {4, 3, 4});
    const EvaluationPoint pt = prob.evaluate();
    const HessianOperator h = assemble(prob.pipeline, pt);
    const auto& a = prob.pipeline.activation_dims();
    const auto& p = prob.pipeline.param_dims();
    const std::size_t L = prob.pipeline.size();

    // Offsets for each stacked space.
    std::vector<Index> ap, aa, ain;
    for (std::size_t l = 0; l < L; ++l) {
      ap.push_back(a[l + 1] * p[l]);
      aa.push_back(a[l + 1] * a[l]);
      ain.push_back(a[l]);
    }
    const std::vector<Index> out(a.begin() + 1, a.end());
    const auto o_out = offsets(out), o_p = offsets(p), o_ap = offsets(ap), o_aa = offsets(aa),
               o_in = offsets(ain);

    DenseBlock dd = DenseBlock::Zero(total(p), total(ap));
    DenseBlock dm = DenseBlock::Zero(total(ain), total(aa));
    DenseBlock dx = DenseBlock::Zero(total(out), total(p));
    DenseBlock dzz = DenseBlock::Zero(total(aa), total(ain));
    DenseBlock m = DenseBlock::Identity(total(out), total(out));
    for (std::size_t l = 0; l < L; ++l) {
      const LayerDerivatives d = prob.pipeline.layer(l).derivatives(pt.input_to(l), pt.params[l]);
      const Vector& b = h.b()[l];
      // I kron b^T written out entrywise: row q picks the q-th length-a_l chunk.
      for (Index q = 0; q < p[l]; ++q) {
        for (Index i = 0; i < a[l + 1]; ++i) dd(o_p[l] + q, o_ap[l] + i + a[l + 1] * q) = b[i];
      }
      for (Index r = 0; r < a[l]; ++r) {
        for (Index i = 0; i < a[l + 1]; ++i) dm(o_in[l] + r, o_aa[l] + i + a[l + 1] * r) = b[i];
      }
      dx.block(o_out[l], o_p[l], a[l + 1], p[l]) = d.jac_x;
      dzz.block(o_aa[l], o_in[l], aa[l], a[l]) = d.hess_zz;
      if (l > 0) m.block(o_out[l], o_out[l - 1], a[l + 1], a[l]) = -d.jac_z;
    }
    EXPECT_EQ(h.D_D().dense(), dd);
    EXPECT_EQ(h.D_M().dense(), dm);
    EXPECT_EQ(h.D_x().dense(), dx);
    EXPECT_EQ(h.D_zz().dense(), dzz);
    EXPECT_EQ(h.M().dense(), m);
    EXPECT_EQ(h.D_xx().rows(), total(ap));
    EXPECT_EQ(h.D_zx().cols(), total(ain));
    EXPECT_EQ(h.D_xz().rows(), total(aa));
  }
}

TEST(Assemble, TracksStorage) {
  instrument::PeakScope scope;
  const Problem prob = generated_problem(8, 4, 4, 0);
  const HessianOperator h = assemble(prob.pipeline, prob.evaluate());
  EXPECT_GT(h.storage_bytes(), 0);
  EXPECT_GE(scope.peak(), h.storage_bytes());
}

// ----------------------------------------------------------------------- hvp

TEST(Hvp, ZeroVector) {
  const Problem prob = random_problem(3);
  const HessianOperator h = assemble(prob.pipeline, prob.evaluate());
  EXPECT_EQ(hvp(h, Vector::Zero(h.size())), Vector::Zero(h.size()));
}

TEST(Hvp, QuadraticLossGivesSymmetricPart) {
  Rng rng(5);
  const DenseBlock a = random_matrix(rng, 4, 4);
  const Problem prob = quadratic_problem(a, random_vector(rng, 4), random_vector(rng, 4));
  const HessianOperator h = assemble(prob.pipeline, prob.evaluate());
  const Vector v = random_vector(rng, 4);
  const DenseBlock sym = 0.5 * (a + a.transpose());
  EXPECT_LE(relative_error(hvp(h, v), Vector(sym * v)), 1e-15);
  EXPECT_LE(relative_error(dense_hessian(h), sym), 1e-15);
}

TEST(Hvp, MatchesFiniteDifferenceHessian) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Problem prob = random_problem(seed, {4, 3, 4});
    const EvaluationPoint pt = prob.evaluate();
    const HessianOperator h = assemble(prob.pipeline, pt);
    const DenseBlock fd = finite_diff_hessian(prob.pipeline, pt);
    EXPECT_LE(column_error(dense_hessian(h), fd), 1e-4) << "seed " << seed;
  }
}

TEST(Hvp, MatchesClosedForm) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Problem prob = random_problem(seed);
    const HessianOperator h = assemble(prob.pipeline, prob.evaluate());
    EXPECT_LE(relative_error(dense_hessian(h), closed_form_hessian(h)), 1e-12) << "seed " << seed;
  }
}

TEST(Hvp, IsSymmetric) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Problem prob = random_problem(seed);
    const HessianOperator h = assemble(prob.pipeline, prob.evaluate());
    EXPECT_LE(symmetry_error(dense_hessian(h)), 1e-8) << "seed " << seed;
  }
}

TEST(Hvp, IsLinear) {
  Rng rng(6);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Problem prob = random_problem(seed);
    const HessianOperator h = assemble(prob.pipeline, prob.evaluate());
    const Vector u = random_vector(rng, h.size());
    const Vector v = random_vector(rng, h.size());
    const double alpha = 1.7;
    const double beta = -0.3;
    const Vector combined = hvp(h, Vector(alpha * u + beta * v));
    const Vector separate = alpha * hvp(h, u) + beta * hvp(h, v);
    EXPECT_LE(relative_error(combined, separate), 1e-12);
  }
}

TEST(Hvp, WorkspaceReuseAndAliasing) {
  Rng rng(7);
  const Problem prob = random_problem(9);
  const HessianOperator h = assemble(prob.pipeline, prob.evaluate());
  HvpWorkspace ws;
  const Vector v = random_vector(rng, h.size());
  Vector first;
  Vector second;
  hvp(h, v, first, ws);
  hvp(h, v, second, ws);
  EXPECT_EQ(first, second);
  Vector inplace = v;
  hvp(h, inplace, inplace, ws);
  EXPECT_EQ(inplace, first);
  EXPECT_THROW(hvp(h, Vector::Zero(h.size() + 1)), DimensionMismatch);
}

TEST(Hvp, FlopsGrowLinearlyWithDepth) {
  std::vector<double> log_l;
  std::vector<double> log_f;
  for (Index layers : {8, 16, 32, 64, 128}) {
    const Problem prob = generated_problem(layers, 4, 4, 1);
    const HessianOperator h = assemble(prob.pipeline, prob.evaluate());
    const Vector v = Vector::Ones(h.size());
    instrument::FlopScope scope;
    hvp(h, v);
    log_l.push_back(std::log(static_cast<double>(layers)));
    log_f.push_back(std::log(static_cast<double>(scope.count())));
  }
  const Eigen::Map<const Vector> x(log_l.data(), static_cast<Index>(log_l.size()));
  const Eigen::Map<const Vector> y(log_f.data(), static_cast<Index>(log_f.size()));
  const Vector xc = x.array() - x.mean();
  const double slope = xc.dot(y.array().matrix() - Vector::Constant(y.size(), y.mean())) /
                       xc.squaredNorm();
  EXPECT_GE(slope, 0.9);
  EXPECT_LE(slope, 1.1);
}

// ---------------------------------------------------------------- pearlmutter

TEST(Pearlmutter, ZeroVector) {
  const Problem prob = random_problem(2);
  const EvaluationPoint pt = prob.evaluate();
  EXPECT_EQ(hvp_pearlmutter(prob.pipeline, pt, Vector::Zero(prob.pipeline.total_params())),
            Vector::Zero(prob.pipeline.total_params()));
}

TEST(Pearlmutter, AgreesOnAffinePipeline) {
  Rng rng(8);
  const Problem prob = affine_problem(rng);
  const EvaluationPoint pt = prob.evaluate();
  const HessianOperator h = assemble(prob.pipeline, pt);
  const Vector v = random_vector(rng, h.size());
  EXPECT_LE(relative_error(hvp_pearlmutter(prob.pipeline, pt, v), hvp(h, v)), 1e-14);
}

TEST(Pearlmutter, EquivalentToStructuredHvp) {
  Rng rng(9);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Problem prob = random_problem(seed);
    const EvaluationPoint pt = prob.evaluate();
    const HessianOperator h = assemble(prob.pipeline, pt);
    const Vector v = random_vector(rng, h.size());
    const Vector structured = hvp(h, v);
    const double diff = (structured - hvp_pearlmutter(prob.pipeline, pt, v)).norm();
    EXPECT_LE(diff, 1e-10 * (1.0 + structured.norm())) << "seed " << seed;
  }
}

// ------------------------------------------------------------ dense oracles

TEST(FiniteDiffHessian, ExactOnQuadratic) {
  Rng rng(10);
  const DenseBlock a = random_matrix(rng, 3, 3);
  const Problem prob = quadratic_problem(a, random_vector(rng, 3), random_vector(rng, 3));
  const DenseBlock fd = finite_diff_hessian(prob.pipeline, prob.evaluate());
  EXPECT_LE((fd - 0.5 * (a + a.transpose())).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(FiniteDiffHessian, ZeroForLinearPipeline) {
  Rng rng(11);
  Pipeline p({std::make_shared<Affine>(random_matrix(rng, 2, 2), random_matrix(rng, 2, 2),
                                       random_vector(rng, 2)),
              std::make_shared<Affine>(random_matrix(rng, 1, 2), random_matrix(rng, 1, 3),
                                       random_vector(rng, 1))});
  const Problem prob{std::move(p), random_vector(rng, 2), {random_vector(rng, 2), random_vector(rng, 3)}};
  const EvaluationPoint pt = prob.evaluate();
  EXPECT_LE(finite_diff_hessian(prob.pipeline, pt).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_TRUE(dense_hessian(assemble(prob.pipeline, pt)).isZero(0.0));
}

TEST(DenseHessian, GuardRejectsLargeProblems) {
  const Problem prob = generated_problem(2, 2, 3, 0);
  const HessianOperator h = assemble(prob.pipeline, prob.evaluate());
  EXPECT_THROW(dense_hessian(h, 5), SizeGuardExceeded);
  EXPECT_THROW(closed_form_hessian(h, 5), SizeGuardExceeded);
  EXPECT_NO_THROW(dense_hessian(h, 6));
}

TEST(DenseHessian, SymmetryErrorOfZeroIsZero) {
  EXPECT_EQ(symmetry_error(DenseBlock::Zero(3, 3)), 0.0);
  DenseBlock skew = DenseBlock::Zero(2, 2);
  skew(0, 1) = 1.0;
  EXPECT_EQ(symmetry_error(skew), 1.0);
}

// The adjoint term can be written with P^T (as in the closed form used here)
// or with P and without the shift ahead of D_zz, as the equivalence argument
// for the forward-over-reverse recursion states it. The two only typecheck
// when every block is scalar, so compare them there against finite
// differences.
TEST(ShiftOrientation, OnlyTransposedShiftMatchesFiniteDifferences) {
  std::vector<LayerPtr> layers;
  for (int l = 0; l < 4; ++l) layers.push_back(std::make_shared<testing::SineProductLayer>());
  const Problem prob{Pipeline(layers), Vector::Constant(1, 0.7),
                     {Vector::Constant(1, 1.3), Vector::Constant(1, -0.8), Vector::Constant(1, 1.1),
                      Vector::Constant(1, 0.9)}};
  const EvaluationPoint pt = prob.evaluate();
  const HessianOperator h = assemble(prob.pipeline, pt);

  const DenseBlock m = h.M().dense();
  const DenseBlock p = h.P().dense();
  ASSERT_EQ(p.rows(), p.cols());
  const DenseBlock dx = h.D_x().dense();
  const DenseBlock m_inv_dx = m.partialPivLu().solve(dx);
  const DenseBlock m_inv_t = m.transpose().partialPivLu().inverse();
  const DenseBlock dd = h.D_D().dense();
  const DenseBlock dm = h.D_M().dense();
  const DenseBlock lead = dd * (h.D_xx().dense() + h.D_zx().dense() * p * m_inv_dx);
  const auto adjoint_term = [&](const DenseBlock& shift, const DenseBlock& inner_shift) {
    return DenseBlock(dx.transpose() * m_inv_t * shift * dm *
                      (h.D_xz().dense() + h.D_zz().dense() * inner_shift * m_inv_dx));
  };
  const DenseBlock transposed = lead + adjoint_term(p.transpose(), p);
  const DenseBlock as_written = lead + adjoint_term(p, DenseBlock::Identity(p.rows(), p.cols()));
  const DenseBlock plain_shift = lead + adjoint_term(p, p);

  const DenseBlock fd = finite_diff_hessian(prob.pipeline, pt);
  EXPECT_LE(column_error(transposed, fd), 1e-6);
  EXPECT_GT(column_error(as_written, fd), 1e-2);
  EXPECT_GT(column_error(plain_shift, fd), 1e-2);
  EXPECT_LE(relative_error(dense_hessian(h), transposed), 1e-13);
}

}  // namespace
}  // namespace hivp

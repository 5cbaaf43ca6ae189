#include <seqlab/rnn.hpp>
#include <seqlab/sequences.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace seqlab;

namespace {

RnnParams manual_params(Mat W, Mat A, Mat B) {
  RnnParams p;
  p.m = static_cast<std::size_t>(W.rows());
  p.d = static_cast<std::size_t>(A.cols());
  p.d_out = static_cast<std::size_t>(B.rows());
  p.W = WeightMatrix(std::move(W));
  p.A = std::move(A);
  p.B = std::move(B);
  return p;
}

Mat random_tokens(std::uint64_t seed, std::size_t L, std::size_t d, double eps = 0.1) {
  RngStream r(seed);
  return normalize(sample_true_sequence(r, L, d), eps).tokens;
}

Mat dense_mask(const SignMask& D) { return D.as_vector().asDiagonal(); }

}  // namespace

TEST(Init, WeightVariance) {
  const RnnParams p = init_params(RngStream(1), 4096, 4, 1);
  const Mat& W = p.W.dense();
  const double var = W.squaredNorm() / static_cast<double>(W.size());
  EXPECT_NEAR(var / (2.0 / 4096.0), 1.0, 0.05);
  EXPECT_TRUE(W.allFinite());
}

TEST(Init, InputMatrixOperatorNorm) {
  int ok = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const RnnParams p = init_params(RngStream(s).split("small"), 4096, 8, 1, BVariance::one_over_dout,
                                    WeightStorage::streamed);
    ok += operator_norm(p.A) <= 5.0;
  }
  EXPECT_GE(ok, 99);
}

TEST(Init, ReadoutVariance) {
  const RnnParams p = init_params(RngStream(3), 4096, 4, 1);
  EXPECT_NEAR(p.B.squaredNorm() / 4096.0, 1.0, 0.05);
  const RnnParams q = init_params(RngStream(3), 4096, 4, 1, BVariance::two_over_dout);
  EXPECT_NEAR(q.B.squaredNorm() / 4096.0, 2.0, 0.1);
}

TEST(Init, StreamedAndDenseAgree) {
  const RnnParams a = init_params(RngStream(5), 200, 4, 2);
  const RnnParams b = init_params(RngStream(5), 200, 4, 2, BVariance::one_over_dout, WeightStorage::streamed);
  EXPECT_EQ(a.W.dense(), b.W.to_dense());
  EXPECT_EQ(a.A, b.A);
  EXPECT_EQ(a.B, b.B);
  const Mat x = random_tokens(2, 5, 4);
  EXPECT_LT((rnn_output(a, x) - rnn_output(b, x)).norm(), 1e-12);
}

TEST(Init, ParsesBVariance) {
  EXPECT_EQ(parse_b_variance("one_over_dout"), BVariance::one_over_dout);
  EXPECT_THROW(parse_b_variance("bogus"), std::invalid_argument);
}

TEST(Forward, ScalarCase) {
  const RnnParams p = manual_params(Mat::Zero(1, 1), Mat::Constant(1, 1, 2.0), Mat::Ones(1, 1));
  const ForwardTrace t = forward(p, Mat::Ones(1, 1));
  EXPECT_EQ(t.h[0][0], 0.0);
  EXPECT_EQ(t.h[1][0], 2.0);
}

TEST(Forward, AllNegativePreactivationIsZero) {
  const RnnParams p = manual_params(Mat::Zero(3, 3), Mat::Constant(3, 1, -1.0), Mat::Ones(1, 3));
  const ForwardTrace t = forward(p, Mat::Ones(2, 1));
  EXPECT_TRUE(t.h[1].isZero(0.0));
  EXPECT_TRUE(t.h[2].isZero(0.0));
}

TEST(Forward, MaskConsistency) {
  const RnnParams p = init_params(RngStream(7), 64, 4, 1);
  const ForwardTrace t = forward(p, random_tokens(8, 6, 4));
  ASSERT_EQ(t.L(), 6u);
  EXPECT_TRUE(t.h[0].isZero(0.0));
  for (std::size_t l = 1; l <= 6; ++l) {
    EXPECT_EQ(t.h[l], t.D[l - 1].apply(t.g[l - 1]));
    for (std::size_t r = 0; r < 64; ++r) EXPECT_EQ(t.D[l - 1][r], t.g[l - 1][r] >= 0.0);
  }
}

TEST(Forward, PositiveHomogeneityAtOneStep) {
  const RnnParams p = init_params(RngStream(7), 32, 3, 1);
  Mat x(1, 3);
  x << 0.3, -0.2, 0.9;
  const ForwardTrace a = forward(p, x);
  const ForwardTrace b = forward(p, Mat(2.5 * x));
  EXPECT_LT((b.h[1] - 2.5 * a.h[1]).norm(), 1e-12);
}

TEST(Forward, BatchMatchesSingle) {
  const RnnParams p = init_params(RngStream(9), 48, 4, 1);
  std::vector<Mat> seqs{random_tokens(1, 5, 4), random_tokens(2, 5, 4), random_tokens(3, 5, 4)};
  std::vector<Mat> inputs(5, Mat(4, 3));
  for (int l = 0; l < 5; ++l) {
    for (int n = 0; n < 3; ++n) inputs[l].col(n) = seqs[n].row(l).transpose();
  }
  const std::vector<std::size_t> steps{2, 5};
  const auto H = hidden_states_batch(p, inputs, steps);
  ASSERT_EQ(H.size(), 2u);
  for (int n = 0; n < 3; ++n) {
    const ForwardTrace t = forward(p, seqs[n]);
    EXPECT_LT((H[0].col(n) - t.h[2]).norm(), 1e-12);
    EXPECT_LT((H[1].col(n) - t.h[5]).norm(), 1e-12);
  }
}

TEST(BackMatrix, DiagonalIsReadout) {
  const RnnParams p = init_params(RngStream(4), 32, 4, 3);
  const ForwardTrace t = forward(p, random_tokens(5, 4, 4));
  EXPECT_EQ(back_matrix(p, t, 2, 2), p.B);
}

TEST(BackMatrix, MatchesDenseProducts) {
  const RnnParams p = init_params(RngStream(4), 40, 4, 2);
  const ForwardTrace t = forward(p, random_tokens(5, 5, 4));
  const Mat& W = p.W.dense();
  const Mat one_step = p.B * dense_mask(t.D[2]) * W;
  EXPECT_LT((back_matrix(p, t, 2, 3) - one_step).norm(), 1e-12 * one_step.norm());
  for (std::size_t i = 1; i < 5; ++i) {
    const Mat lhs = back_matrix(p, t, i, 5);
    const Mat rhs = back_matrix(p, t, i + 1, 5) * dense_mask(t.D[i]) * W;
    EXPECT_LT((lhs - rhs).norm(), 1e-10 * std::max(1.0, rhs.norm()));
  }
}

TEST(PseudoForward, LinearInOffsets) {
  const RnnParams p = init_params(RngStream(11), 50, 4, 2);
  const Mat x = random_tokens(12, 5, 4);
  const ForwardTrace t = forward(p, x);
  RngStream r(13);
  const WeightOffsets o1 = random_offsets(r, 50, 4, 1.0);
  const WeightOffsets o2 = random_offsets(r, 50, 4, 1.0);
  EXPECT_TRUE(pseudo_forward(p, t, WeightOffsets{std::nullopt, Mat::Zero(50, 4)}, x).isZero(0.0));
  const Vec f1 = pseudo_forward(p, t, o1, x);
  const Vec f2 = pseudo_forward(p, t, o2, x);
  const WeightOffsets scaled{Mat(3.0 * *o1.W), 3.0 * o1.A};
  EXPECT_LT((pseudo_forward(p, t, scaled, x) - 3.0 * f1).norm(), 1e-12 * f1.norm() * 3.0);
  const WeightOffsets sum{Mat(*o1.W + *o2.W), o1.A + o2.A};
  EXPECT_LT((pseudo_forward(p, t, sum, x) - f1 - f2).norm(), 1e-12 * (f1.norm() + f2.norm()));
}

TEST(PseudoForward, MatchesDirectionalDerivative) {
  const RnnParams p = init_params(RngStream(21), 40, 4, 1);
  const Mat x = random_tokens(22, 4, 4);
  const ForwardTrace tr = forward(p, x);
  for (const auto& g : tr.g) ASSERT_GT(g.cwiseAbs().minCoeff(), 1e-6);
  RngStream r(23);
  const WeightOffsets o = random_offsets(r, 40, 4, 1.0);
  const Vec pseudo = pseudo_forward(p, tr, o, x);
  const double t = 1e-4;
  RnnParams moved = manual_params(p.W.dense() + t * *o.W, p.A + t * o.A, p.B);
  const Vec fd = (rnn_output(moved, x) - rnn_output(p, x)) / t;
  EXPECT_LT((fd - pseudo).norm(), 1e-3 * pseudo.norm());
}

TEST(PseudoForward, BatchMatchesSingle) {
  const RnnParams p = init_params(RngStream(31), 36, 4, 2);
  std::vector<Mat> seqs{random_tokens(1, 4, 4), random_tokens(2, 4, 4)};
  std::vector<Mat> inputs(4, Mat(4, 2));
  for (int l = 0; l < 4; ++l) {
    for (int n = 0; n < 2; ++n) inputs[l].col(n) = seqs[n].row(l).transpose();
  }
  RngStream r(5);
  const WeightOffsets o = random_offsets(r, 36, 4, 1.0);
  const Mat batch = pseudo_forward_batch(p, inputs, o);
  for (int n = 0; n < 2; ++n) {
    const Vec single = pseudo_forward(p, forward(p, seqs[n]), o, seqs[n]);
    EXPECT_LT((batch.col(n) - single).norm(), 1e-12 * std::max(1.0, single.norm()));
  }
  const WeightOffsets a_only{std::nullopt, o.A};
  const Mat b2 = pseudo_forward_batch(p, inputs, a_only);
  const Vec s2 = pseudo_forward(p, forward(p, seqs[0]), a_only, seqs[0]);
  EXPECT_LT((b2.col(0) - s2).norm(), 1e-12 * std::max(1.0, s2.norm()));
}

TEST(Coupling, ZeroScaleAndGrowth) {
  const RnnParams p = init_params(RngStream(41), 256, 4, 10);
  const Mat x = random_tokens(42, 5, 4, 0.05);
  RngStream r(43);
  const WeightOffsets o = random_offsets(r, 256, 4, 1.0);
  EXPECT_EQ(coupling_residual(p, x, o, 0.0), 0.0);
  const double a = coupling_residual(p, x, o, 0.25);
  const double b = coupling_residual(p, x, o, 1.0);
  const double c = coupling_residual(p, x, o, 4.0);
  EXPECT_LT(a, b);
  EXPECT_LT(b, c);
}

TEST(Coupling, RandomOffsetScale) {
  RngStream r(44);
  const WeightOffsets o = random_offsets(r, 400, 4, 2.0);
  EXPECT_NEAR(operator_norm(*o.W), 2.0 / std::sqrt(400.0), 0.2 / std::sqrt(400.0));
  EXPECT_NEAR(operator_norm(o.A), 2.0 / std::sqrt(400.0), 0.3 / std::sqrt(400.0));
}

TEST(Norms, TargetFormula) {
  EXPECT_DOUBLE_EQ(hidden_norm_target(2, 0.3), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(hidden_norm_target(3, 0.1), std::sqrt(2.01));
  EXPECT_DOUBLE_EQ(hidden_norm_target(1, 0.1), std::sqrt(1.99));
}

TEST(Norms, FinalStateMatchesTargetAndEarlierStatesDoNot) {
  // The final state carries the unit end marker on top of the middle tokens,
  // so ||h(L)|| tracks sqrt(2 + (L - 2) eps^2). Earlier states carry only the
  // start marker and are near sqrt(1 + (l - 1) eps^2).
  const std::size_t m = 4096, L = 5;
  const double eps = 0.1;
  std::vector<double> last, third;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const RnnParams p = init_params(RngStream(s).split("norm"), m, 4, 1);
    RngStream r = RngStream(s).split("seq");
    const NormDiagnostics nd = norm_diagnostics(p, normalize(sample_true_sequence(r, L, 4), eps));
    ASSERT_EQ(nd.norms.size(), L);
    EXPECT_EQ(nd.targets[L - 1], hidden_norm_target(L, eps));
    last.push_back(nd.residuals[L - 1]);
    third.push_back(std::abs(nd.norms[2] - std::sqrt(1.0 + 2.0 * eps * eps)));
    EXPECT_LE(nd.base_distance.back(), 3.0 * nd.base_bound);
  }
  EXPECT_LT(median(last), 10.0 / std::sqrt(static_cast<double>(m)));
  EXPECT_LT(median(third), 10.0 / std::sqrt(static_cast<double>(m)));
}

TEST(Bounds, DiagnosticFormulas) {
  const DiagnosticBounds b = diagnostic_bounds(4, 2, 1000);
  EXPECT_NEAR(b.rho, 100.0 * 4 * 2 * std::log(1000.0), 1e-9);
  EXPECT_FALSE(b.varrho.has_value());
}

#include <seqlab/sequences.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace seqlab;

TEST(TrueSequence, TokensLieOnTheHalfSphere) {
  RngStream rng(2);
  for (std::size_t d : {3, 4, 7}) {
    const TrueSequence s = sample_true_sequence(rng, 6, d);
    ASSERT_EQ(s.tokens.rows(), 4);
    ASSERT_EQ(static_cast<std::size_t>(s.tokens.cols()), d - 1);
    for (Eigen::Index t = 0; t < s.tokens.rows(); ++t) {
      EXPECT_NEAR(s.tokens.row(t).norm(), 1.0, 1e-12);
      EXPECT_EQ(s.tokens(t, static_cast<Eigen::Index>(d) - 2), 0.5);
      EXPECT_NEAR(s.tokens.row(t).head(d - 2).norm(), std::sqrt(3.0) / 2.0, 1e-12);
    }
  }
}

TEST(TrueSequence, FirstCoordinateIsCentered) {
  RngStream rng(3);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += sample_true_sequence(rng, 3, 4).tokens(0, 0);
  EXPECT_NEAR(sum / n, 0.0, 0.01);
}

TEST(TrueSequence, RejectsTinyShapes) {
  RngStream rng(1);
  EXPECT_THROW(sample_true_sequence(rng, 2, 4), std::invalid_argument);
  EXPECT_THROW(sample_true_sequence(rng, 4, 2), std::invalid_argument);
}

TEST(Normalize, DirectSubstitution) {
  TrueSequence s{4, 3, Mat::Zero(2, 2)};
  s.tokens << std::sqrt(3.0) / 2.0, 0.5, -std::sqrt(3.0) / 2.0, 0.5;
  const NormalizedSequence n = normalize(s, 0.1);
  ASSERT_EQ(n.tokens.rows(), 4);
  EXPECT_NEAR(n.tokens(1, 0), 0.0866025403784, 1e-12);
  EXPECT_NEAR(n.tokens(1, 1), 0.05, 1e-15);
  EXPECT_EQ(n.tokens(1, 2), 0.0);
  for (Eigen::Index r : {0, 3}) {
    EXPECT_EQ(n.tokens(r, 0), 0.0);
    EXPECT_EQ(n.tokens(r, 1), 0.0);
    EXPECT_EQ(n.tokens(r, 2), 1.0);
  }
}

TEST(Normalize, RejectsBadEps) {
  TrueSequence s{4, 3, Mat::Zero(2, 2)};
  EXPECT_THROW(normalize(s, 0.0), std::invalid_argument);
  EXPECT_THROW(normalize(s, 1.5), std::invalid_argument);
}

TEST(BaseSequence, SmallCases) {
  const NormalizedSequence b = base_sequence(3, 2, 0.1);
  Mat expected(3, 2);
  expected << 0, 1, 0, 0.1, 0, 1;
  EXPECT_TRUE(b.tokens.isApprox(expected, 1e-15));
  const NormalizedSequence b2 = base_sequence(2, 2, 0.1);
  Mat e2(2, 2);
  e2 << 0, 1, 0, 1;
  EXPECT_EQ(b2.tokens, e2);
}

TEST(BaseSequence, TokenNorms) {
  const NormalizedSequence b = base_sequence(6, 4, 0.05);
  EXPECT_DOUBLE_EQ(b.tokens.row(0).norm(), 1.0);
  for (Eigen::Index l = 1; l < 5; ++l) EXPECT_NEAR(b.tokens.row(l).norm(), 0.05, 1e-15);
  EXPECT_DOUBLE_EQ(b.tokens.row(5).norm(), 1.0);
}

TEST(EncodeBits, Schemes) {
  const Mat z = encode_bits("0010", {BitEncoding::zero_one});
  const Mat p = encode_bits("0010", {BitEncoding::pm_one});
  ASSERT_EQ(z.rows(), 4);
  const double ez[] = {0, 0, 1, 0}, ep[] = {-1, -1, 1, -1};
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(z(i, 0), ez[i]);
    EXPECT_EQ(p(i, 0), ep[i]);
  }
  EXPECT_THROW(encode_bits("", {BitEncoding::zero_one}), std::invalid_argument);
  EXPECT_THROW(encode_bits("012", {BitEncoding::zero_one}), std::invalid_argument);
}

TEST(EncodeBits, TrueSequenceEncoding) {
  const TrueSequence s = encode_bits_as_true_sequence("0110", 4);
  EXPECT_EQ(s.L, 6u);
  ASSERT_EQ(s.tokens.rows(), 4);
  for (Eigen::Index t = 0; t < 4; ++t) {
    EXPECT_NEAR(s.tokens.row(t).norm(), 1.0, 1e-12);
    EXPECT_EQ(s.tokens(t, 2), 0.5);
  }
  EXPECT_NE(s.tokens.row(0), s.tokens.row(1));
  EXPECT_EQ(s.tokens.row(1), s.tokens.row(2));
}

TEST(Csv, RoundTrip) {
  RngStream rng(4);
  const NormalizedSequence n = normalize(sample_true_sequence(rng, 5, 4), 0.05);
  const NormalizedSequence back = parse_csv_row(to_csv_row(n));
  EXPECT_EQ(back.L, 5u);
  EXPECT_EQ(back.d, 4u);
  EXPECT_EQ(back.eps_x, 0.05);
  EXPECT_EQ(back.tokens, n.tokens);
  EXPECT_THROW(parse_csv_row("3,2,0.1,1,2"), std::invalid_argument);
}

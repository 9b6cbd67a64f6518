#include <gtest/gtest.h>

#include "csmpc/sampling.hpp"
#include "csmpc_props/props.hpp"

using namespace csmpc;

TEST(Sampling, ZeroSigmaGivesNominal) {
  SamplerConfig sc;
  sc.sigma = 0.0;
  for (const auto& w : draw(sc, 4, 20)) EXPECT_EQ(w, nominal_parameters());
}

TEST(Sampling, Deterministic) {
  SamplerConfig sc;
  sc.seed = 31;
  EXPECT_EQ(draw(sc, 2, 50), draw(sc, 2, 50));
}

TEST(Sampling, IndexedNotOrderedByCall) {
  SamplerConfig sc;
  sc.seed = 31;
  const auto all = draw(sc, 9, 40);
  const auto tail = draw(sc, 9, 15, 25);
  for (std::size_t i = 0; i < 15; ++i) EXPECT_EQ(tail[i], all[25 + i]);
}

TEST(Sampling, StreamsAndSeedsDiffer) {
  SamplerConfig sc;
  sc.seed = 31;
  EXPECT_NE(draw(sc, 1, 1), draw(sc, 2, 1));
  SamplerConfig other = sc;
  other.seed = 32;
  EXPECT_NE(draw(sc, 1, 1), draw(other, 1, 1));
}

TEST(Sampling, MomentsAndIndependence) {
  const auto c = props::check_sampler_moments();
  EXPECT_TRUE(c.passed) << c.detail;
}

TEST(Sampling, AlwaysPositiveAndFloored) {
  SamplerConfig sc;
  sc.sigma = 2.0;
  sc.seed = 5;
  const auto m = draw_multipliers(sc, 0, 2000);
  const auto w = draw(sc, 0, 2000);
  for (std::size_t i = 0; i < m.size(); ++i) {
    EXPECT_TRUE(w[i].all_positive());
    for (std::size_t j = 0; j < kNumUncertain; ++j) {
      EXPECT_GE(m[i][j], sc.floor);
      EXPECT_DOUBLE_EQ(w[i][j], m[i][j] * nominal_parameters()[j]);
    }
  }
}

TEST(Sampling, ConfigValidation) {
  SamplerConfig sc;
  sc.sigma = -0.1;
  EXPECT_THROW(sc.validate(), std::invalid_argument);
  sc = {};
  sc.floor = 1.0;
  EXPECT_THROW(sc.validate(), std::invalid_argument);
}

TEST(Sampling, EvaluationAndBufferStreamsDisjoint) {
  EXPECT_NE(kEvaluationStream, kBufferStreamBase);
  EXPECT_GT(kBufferStreamBase, std::uint64_t{1} << 31);
}

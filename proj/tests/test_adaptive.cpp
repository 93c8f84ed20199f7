#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cssp/adaptive.hpp"
#include "cssp/data_io.hpp"
#include "cssp/errors.hpp"

using namespace cssp;

namespace {

Matrix gaussian(Index m, Index n, RngStream& rng) {
  std::normal_distribution<double> normal;
  Matrix G(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) G(i, j) = normal(rng.engine());
  return G;
}

Matrix with_spectrum(Index m, Index n, std::vector<double> sigma, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.m = m;
  spec.n = n;
  spec.spectrum = ExplicitSpectrum{std::move(sigma)};
  spec.seed = seed;
  return generate_synthetic(spec);
}

AdaptiveConfig config(Index k, Index rounds, Index c, SamplerSpec sampler,
                      ResidualMode mode = ResidualMode::TruncatedRank) {
  AdaptiveConfig cfg;
  cfg.k = k;
  cfg.rounds = rounds;
  cfg.columns_per_round = c;
  cfg.sampler = sampler;
  cfg.mode = mode;
  return cfg;
}

}  // namespace

TEST(Adaptive, SingleRoundEqualsOneSamplerCall) {
  RngStream data(1);
  const Matrix A = gaussian(15, 40, data);
  for (auto sampler : {SamplerSpec::near_optimal(), SamplerSpec::leverage_score(),
                       SamplerSpec::additive_error()}) {
    RngStream a(5);
    RngStream b(5);
    RngStream c(5);
    const auto res = adaptive_select(A, config(3, 1, 8, sampler), a);
    const Selection direct = sample_columns(sampler, A, 3, 8, b, RankPolicy::ClampToRank);
    EXPECT_EQ(res.columns.indices(), direct.indices);
    // The full-projection driver and continued sampling agree at t = 1 too.
    RngStream d(5);
    EXPECT_EQ(dv06_adaptive_select(A, config(3, 1, 8, sampler, ResidualMode::FullProjection), c)
                  .columns.indices(),
              direct.indices);
    EXPECT_EQ(continued_select(A, 3, 8, sampler, d).indices, direct.indices);
  }
}

TEST(Adaptive, Rank2kCapturedInTwoRounds) {
  const Index k = 3;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Matrix A = with_spectrum(20, 60, {6, 5, 4, 3, 2, 1}, seed);
    RngStream rng(seed);
    const auto res = adaptive_select(A, config(k, 2, 12, SamplerSpec::near_optimal()), rng);
    EXPECT_LE(std::sqrt(res.final_error_sq()) / A.norm(), 1e-6);
  }
}

TEST(Adaptive, DeterministicForFixedSeed) {
  RngStream data(2);
  const Matrix A = gaussian(20, 50, data);
  RngStream a(42);
  RngStream b(42);
  const auto cfg = config(2, 4, 6, SamplerSpec::near_optimal());
  const auto ra = adaptive_select(A, cfg, a);
  const auto rb = adaptive_select(A, cfg, b);
  EXPECT_EQ(ra.columns, rb.columns);
  EXPECT_EQ(ra.final_error_sq(), rb.final_error_sq());
}

TEST(Adaptive, TracesAreConsistent) {
  RngStream data(3);
  const Matrix A = gaussian(25, 60, data);
  RngStream rng(8);
  const auto res = adaptive_select(A, config(2, 4, 5, SamplerSpec::leverage_score()), rng);
  ASSERT_EQ(res.traces.size(), 4u);
  Index total = 0;
  for (const auto& tr : res.traces) {
    total += static_cast<Index>(tr.selected.size());
    EXPECT_EQ(tr.total_columns, total);
    // i.i.d. draws may repeat within a round as well as hit earlier rounds.
    EXPECT_LE(static_cast<Index>(tr.selected.size()) + tr.collisions, tr.requested);
    EXPECT_GE(tr.selected.size(), 1u);
    EXPECT_GE(tr.error_ratio, 1.0 - 1e-8);
    EXPECT_GE(tr.rank_lk_error_sq, tr.projection_error_sq - 1e-12);
    EXPECT_DOUBLE_EQ(tr.residual_norm_sq, tr.rank_lk_error_sq);
  }
  EXPECT_EQ(res.columns.size(), static_cast<std::size_t>(total));
}

TEST(Adaptive, RejectsInvalidRanks) {
  const Matrix A = with_spectrum(10, 20, {3, 2, 1}, 0);
  RngStream rng(0);
  EXPECT_THROW(adaptive_select(A, config(3, 1, 5, SamplerSpec::near_optimal()), rng), ParameterError);
  EXPECT_THROW(adaptive_select(A, config(2, 2, 5, SamplerSpec::near_optimal()), rng), ParameterError);
  EXPECT_THROW(adaptive_select(A, config(2, 1, 2, SamplerSpec::near_optimal()), rng), ParameterError);
  EXPECT_THROW(adaptive_select(A, config(1, 1, 4, SamplerSpec::near_optimal(),
                                         ResidualMode::FullProjection), rng),
               ParameterError);
}

TEST(Adaptive, FullProjectionStopsWhenRowSpaceIsCaptured) {
  // 4 x 30: once rank(C) = 4 the full residual vanishes.
  RngStream data(4);
  const Matrix A = gaussian(4, 30, data);
  RngStream rng(1);
  const auto res = dv06_adaptive_select(
      A, config(1, 4, 6, SamplerSpec::additive_error(), ResidualMode::FullProjection), rng);
  ASSERT_TRUE(res.exact_capture);
  ASSERT_EQ(res.traces.size(), 4u);
  for (const auto& tr : res.traces) {
    if (tr.round > res.capture_round) {
      EXPECT_FALSE(tr.sampled);
      EXPECT_TRUE(tr.selected.empty());
    }
  }
  EXPECT_LE(res.traces.back().projection_error_sq, 1e-16 * A.squaredNorm());
}

TEST(Adaptive, InitialColumnsReplaceFirstRound) {
  RngStream data(6);
  const Matrix A = gaussian(15, 30, data);
  auto cfg = config(2, 2, 5, SamplerSpec::near_optimal());
  cfg.initial_columns = {4, 9, 4};
  RngStream rng(3);
  const auto res = adaptive_select(A, cfg, rng);
  EXPECT_EQ(res.traces[0].selected, (std::vector<Index>{4, 9}));
  EXPECT_EQ(res.traces[0].collisions, 1);
}

TEST(Adaptive, FullProjectionNoBetterThanTruncatedOnAverage) {
  SyntheticSpec spec;
  spec.m = 80;
  spec.n = 400;
  spec.spectrum = Exponential{0.1};
  spec.seed = 1;
  const Matrix A = generate_synthetic(spec);
  double ours = 0.0;
  double full = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    RngStream a(seed);
    RngStream b(seed);
    ours += adaptive_select(A, config(5, 3, 10, SamplerSpec::near_optimal()), a).traces.back().error_ratio;
    full += dv06_adaptive_select(A, config(5, 3, 10, SamplerSpec::near_optimal(), ResidualMode::FullProjection), b)
                .traces.back()
                .error_ratio;
  }
  EXPECT_LE(ours, full + 5 * 0.01);
}

TEST(Continued, AllColumnsWhenRequestExceedsWidth) {
  RngStream data(7);
  const Matrix A = gaussian(6, 10, data);
  RngStream rng(0);
  const Selection s = continued_select(A, 2, 12, SamplerSpec::near_optimal(), rng);
  EXPECT_EQ(s.indices.size(), 10u);
  EXPECT_NEAR(relative_error_ratio(A, gather_columns(A, s.indices), 2), 1.0, 1e-10);
}

TEST(Boost, RepeatCount) {
  EXPECT_EQ(BoostConfig{0.25}.repeats(), 2);
  EXPECT_EQ(BoostConfig{0.5}.repeats(), 1);
  EXPECT_EQ(BoostConfig{0.9}.repeats(), 1);
  EXPECT_EQ(BoostConfig{1.0 / 256}.repeats(), 8);
  EXPECT_THROW(BoostConfig{0.0}.repeats(), ParameterError);
  EXPECT_THROW(BoostConfig{1.0}.repeats(), ParameterError);
}

TEST(Boost, SingleRepeatEqualsOneRun) {
  RngStream data(9);
  const Matrix A = gaussian(15, 40, data);
  const auto cfg = config(2, 3, 5, SamplerSpec::near_optimal());
  RngStream a(17);
  RngStream b(17);
  EXPECT_EQ(boost_best_of(A, cfg, BoostConfig{0.5}, a).columns, adaptive_select(A, cfg, b).columns);
}

TEST(Boost, BestOfEightNeverWorse) {
  RngStream data(10);
  const Matrix A = gaussian(20, 50, data);
  const auto cfg = config(2, 3, 5, SamplerSpec::leverage_score());
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    RngStream a(seed);
    RngStream b(seed);
    EXPECT_LE(boost_best_of(A, cfg, BoostConfig{1.0 / 256}, a).final_error_sq(),
              adaptive_select(A, cfg, b).final_error_sq());
  }
}

TEST(Theorem1Bound, Examples) {
  const Vector s = (Vector(2) << 2, 1).finished();
  EXPECT_DOUBLE_EQ(theorem1_bound(s, 1, 2, 0.5), 0.75);
  const Vector e = (Vector(4) << 4, 3, 2, 1).finished();
  EXPECT_DOUBLE_EQ(theorem1_bound(e, 1, 1, 0.3), 1.3 * 14.0);
  // Rank tk: the first term vanishes.
  EXPECT_DOUBLE_EQ(theorem1_bound(e, 2, 2, 0.5), 0.5 * 1.5 * 5.0);
  EXPECT_DOUBLE_EQ(theorem1_bound(e, 3, 3, 0.5), 0.5 * (2.25 * 1.0 + 1.5 * 0.0));
}

TEST(Theorem1Bound, RejectsBadInput) {
  const Vector s = (Vector(2) << 1, 2).finished();
  EXPECT_THROW(theorem1_bound(s, 1, 1, 0.5), ParameterError);
  const Vector ok = (Vector(2) << 2, 1).finished();
  EXPECT_THROW(theorem1_bound(ok, 1, 1, 1.0), ParameterError);
  EXPECT_THROW(theorem1_bound(ok, 0, 1, 0.5), ParameterError);
}

/*
 * Copyright 2026 The bbcf Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bbcf/errors.hpp"
#include "bbcf/inference.hpp"
#include "oracles.hpp"

namespace bbcf {
namespace {

TEST(PopulationEstimate, Examples) {
  EXPECT_EQ(population_estimate(LatentModel::bb({{1, 1, 1, 1}})),
            (CounterfactualProbs{0.25, 0.25, 0.25, 0.25}));
  const CounterfactualProbs p = population_estimate(LatentModel::bb({{1, 2, 3, 4}}));
  EXPECT_NEAR(p.p00, 0.1, 1e-15);
  EXPECT_NEAR(p.p11, 0.4, 1e-15);
  const CounterfactualProbs g =
      population_estimate(LatentModel::gbb(gd_from_dirichlet({{1, 2, 3, 4}})));
  EXPECT_NEAR(g.p00, 0.1, 1e-9);
  EXPECT_NEAR(g.p10, 0.2, 1e-9);
  EXPECT_NEAR(g.p01, 0.3, 1e-9);
  EXPECT_NEAR(g.p11, 0.4, 1e-9);
}

TEST(PosteriorLogDensity, ShapeAndErrors) {
  const LatentModel flat = LatentModel::bb({{1, 1, 1, 1}});
  const Scores s{0.6, 0.3};
  EXPECT_NEAR(posterior_log_density_p11(flat, s, 0.05),
              posterior_log_density_p11(flat, s, 0.25), 1e-14);
  const LatentModel tilted = LatentModel::bb({{2, 1, 1, 1}});
  double prev = -1e300;
  for (int i = 1; i < 30; ++i) {
    const double v = posterior_log_density_p11(tilted, s, i * 0.01);
    EXPECT_GT(v, prev);
    prev = v;
  }
  try {
    posterior_log_density_p11(flat, s, 0.31);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDomainError);
  }
  try {
    posterior_log_density_p11(flat, {0.0, 0.5}, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateSegment);
  }
}

TEST(PosteriorMean, FlatPriorIsMidpoint) {
  const LatentModel flat = LatentModel::bb({{1, 1, 1, 1}});
  EXPECT_NEAR(posterior_mean(flat, {0.6, 0.3}).mean.p11, 0.15, 1e-12);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const Scores s{u(rng), u(rng)};
    EXPECT_NEAR(posterior_mean(flat, s).mean.p11, midpoint_estimate(s).p11, 1e-6);
  }
}

TEST(PosteriorMean, DegenerateSegment) {
  const PosteriorResult r = posterior_mean(LatentModel::bb({{1, 2, 3, 4}}), {0.0, 0.5});
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.mean, (CounterfactualProbs{0.5, 0.0, 0.5, 0.0}));
}

// References from adaptive quadrature (scipy.integrate.quad) of the
// normalized Dirichlet density along the segment.
TEST(PosteriorMean, MatchesAdaptiveQuadratureReference) {
  PosteriorResult r = posterior_mean(LatentModel::bb({{1, 2, 3, 4}}), {0.6, 0.3});
  EXPECT_NEAR(r.mean.p11, 0.165, 1e-9);
  EXPECT_NEAR(r.log_evidence, -1.8485584182714523, 1e-9);
  r = posterior_mean(LatentModel::bb({{0.5, 0.7, 0.6, 0.8}}), {0.55, 0.65});
  EXPECT_NEAR(r.mean.p11, 0.35973960689532564, 1e-7);
  EXPECT_NEAR(r.log_evidence, 0.42749565007979773, 1e-7);
}

TEST(PosteriorMean, MatchesRejectionOracle) {
  const BBParams m{{1, 2, 3, 4}};
  const Scores s{0.6, 0.3};
  const auto a = oracle::rejection_oracle(m, s, 20000, 7);
  const CounterfactualProbs q = posterior_mean(LatentModel::bb(m), s).mean;
  const auto b = q.to_array();
  for (int c = 0; c < 4; ++c) EXPECT_NEAR(a[c], b[c], 2e-3) << c;
}

TEST(PosteriorMean, MarginalIdentitiesAndBounds) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0), shape(0.3, 6.0);
  for (int i = 0; i < 200; ++i) {
    const LatentModel model =
        i % 2 == 0 ? LatentModel::bb({{shape(rng), shape(rng), shape(rng), shape(rng)}})
                   : LatentModel::gbb({{shape(rng), shape(rng), shape(rng)},
                                       {shape(rng), shape(rng), shape(rng)}});
    const Scores s{u(rng), u(rng)};
    const PosteriorResult r = posterior_mean(model, s);
    EXPECT_NEAR(r.mean.p10 + r.mean.p11, s.z0, 1e-9);
    EXPECT_NEAR(r.mean.p01 + r.mean.p11, s.z1, 1e-9);
    EXPECT_NEAR(r.mean.sum(), 1.0, 1e-9);
    const FrechetInterval b = frechet_bounds(s);
    EXPECT_GT(r.mean.p11, b.lower);
    EXPECT_LT(r.mean.p11, b.upper);
  }
}

TEST(PosteriorMean, DoublingNodesStaysWithinErrorEstimate) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0), shape(0.3, 6.0);
  QuadratureConfig q2;
  q2.nodes = 402;
  for (int i = 0; i < 100; ++i) {
    const LatentModel model =
        LatentModel::bb({{shape(rng), shape(rng), shape(rng), shape(rng)}});
    const Scores s{u(rng), u(rng)};
    const PosteriorResult a = posterior_mean(model, s);
    const PosteriorResult b = posterior_mean(model, s, q2);
    EXPECT_LE(std::abs(a.mean.p11 - b.mean.p11), a.error_estimate + 1e-14);
  }
}

TEST(PosteriorMean, GaussLegendreAgreesOnSmoothCase) {
  QuadratureConfig gl;
  gl.rule = QuadratureRule::kGaussLegendre;
  gl.nodes = 240;
  const LatentModel model = LatentModel::bb({{2, 3, 2.5, 4}});
  const PosteriorResult a = posterior_mean(model, {0.45, 0.7});
  const PosteriorResult b = posterior_mean(model, {0.45, 0.7}, gl);
  EXPECT_NEAR(a.mean.p11, b.mean.p11, 1e-10);
}

TEST(PosteriorMean, RejectsNoisyFamily) {
  try {
    posterior_mean(LatentModel::nbb({{1, 1, 1, 1}}, {10}), {0.5, 0.5});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFamilyMismatch);
  }
}

TEST(QuadratureFailure, TooFewNodesForTolerance) {
  QuadratureConfig q;
  q.nodes = 5;
  q.tolerance = 1e-14;
  try {
    posterior_mean(LatentModel::bb({{0.3, 4, 0.4, 5}}), {0.6, 0.5}, q);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kQuadratureFailure);
  }
}

TEST(NoisyPosterior, NearNoiselessLimit) {
  const BBParams m{{1, 2, 3, 4}};
  const PosteriorResult exact = posterior_mean(LatentModel::bb(m), {0.6, 0.3});
  for (NoisyProposal p : {NoisyProposal::kAuto, NoisyProposal::kScore}) {
    QuadratureConfig q;
    q.proposal = p;
    const PosteriorResult r =
        posterior_mean_noisy(LatentModel::nbb(m, {1e8}), {0.6, 0.3}, q);
    const auto a = exact.mean.to_array();
    const auto b = r.mean.to_array();
    for (int c = 0; c < 4; ++c) EXPECT_NEAR(a[c], b[c], 5e-3);
    EXPECT_GE(r.ess, 100.0);
  }
}

TEST(NoisyPosterior, PriorAndScoreProposalsAgreeAtModerateNoise) {
  const LatentModel model = LatentModel::nbb({{1, 2, 3, 4}}, {20.0});
  QuadratureConfig prior, score;
  prior.proposal = NoisyProposal::kPrior;
  score.proposal = NoisyProposal::kScore;
  score.score_draws = 20000;
  const PosteriorResult a = posterior_mean_noisy(model, {0.6, 0.3}, prior);
  const PosteriorResult b = posterior_mean_noisy(model, {0.6, 0.3}, score);
  const auto x = a.mean.to_array();
  const auto y = b.mean.to_array();
  for (int c = 0; c < 4; ++c) EXPECT_NEAR(x[c], y[c], 5e-3);
  EXPECT_NEAR(a.mean.sum(), 1.0, 1e-9);
}

TEST(NoisyPosterior, ExchangeableModelGivesEqualOffDiagonals) {
  const LatentModel model = LatentModel::nbb({{2, 2, 2, 2}}, {30.0});
  const PosteriorResult r = posterior_mean_noisy(model, {0.4, 0.4});
  EXPECT_NEAR(r.mean.p10, r.mean.p01, 4.0 * r.error_estimate + 2e-3);
}

TEST(NoisyPosterior, NeedNotStayOnObservedSegment) {
  const LatentModel model = LatentModel::nbb({{1, 1, 1, 1}}, {5.0});
  const PosteriorResult r = posterior_mean_noisy(model, {0.02, 0.9});
  EXPECT_GT(r.mean.p11, frechet_bounds({0.02, 0.9}).upper);
}

TEST(NoisyPosterior, ReportsLowEffectiveSampleSize) {
  QuadratureConfig q;
  q.proposal = NoisyProposal::kPrior;
  q.mc_draws = 1000;
  q.min_ess = 5000;
  try {
    posterior_mean_noisy(LatentModel::nbb({{1, 1, 1, 1}}, {50.0}), {0.3, 0.4}, q);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEffectiveSampleSizeTooLow);
  }
}

TEST(NoisyPosterior, CachedEvaluatorMatchesFreshCalls) {
  const LatentModel model = LatentModel::nbb({{1, 2, 3, 4}}, {40.0});
  const NoisyPosterior post(model, {});
  for (const Scores& s : {Scores{0.3, 0.6}, Scores{0.7, 0.2}}) {
    EXPECT_EQ(post(s).mean, posterior_mean_noisy(model, s).mean);
  }
}

}  // namespace
}  // namespace bbcf

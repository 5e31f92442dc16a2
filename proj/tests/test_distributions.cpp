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

#include "bbcf/distributions.hpp"
#include "bbcf/errors.hpp"

namespace bbcf {
namespace {

// Generalized Dirichlet density through the stick-breaking change of
// variables, written independently of the library kernel.
double StickBreakingLogDensity(const GDParams& g, const CounterfactualProbs& p) {
  const double u1 = p.p00;
  const double r1 = 1.0 - p.p00;
  const double u2 = p.p10 / r1;
  const double r2 = r1 - p.p10;
  const double u3 = p.p01 / r2;
  auto log_beta_pdf = [](double x, double a, double b) {
    return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) -
           (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
  };
  return log_beta_pdf(u1, g.a[0], g.b[0]) + log_beta_pdf(u2, g.a[1], g.b[1]) +
         log_beta_pdf(u3, g.a[2], g.b[2]) - std::log(r1) - std::log(r2);
}

CounterfactualProbs RandomInterior(std::mt19937_64& rng) {
  std::gamma_distribution<double> g(1.0, 1.0);
  std::array<double, 4> v{};
  double s = 0.0;
  for (double& x : v) s += (x = g(rng) + 1e-3);
  for (double& x : v) x /= s;
  return CounterfactualProbs::from_array(v);
}

TEST(DirichletDensity, UniformAndHandValues) {
  EXPECT_NEAR(dirichlet_log_density({{1, 1, 1, 1}}, {0.1, 0.2, 0.3, 0.4}),
              std::log(6.0), 1e-14);
  EXPECT_NEAR(dirichlet_log_density({{2, 1, 1, 1}}, {0.25, 0.25, 0.25, 0.25}),
              std::log(6.0), 1e-14);
  EXPECT_NEAR(dirichlet_log_density({{1, 1, 1, 1}}, {0.0, 0.5, 0.25, 0.25}),
              std::log(6.0), 1e-14);
}

// scipy.stats.dirichlet.logpdf
TEST(DirichletDensity, MatchesReference) {
  EXPECT_NEAR(dirichlet_log_density({{1, 2, 3, 4}}, {0.1, 0.2, 0.3, 0.4}),
              3.5506651135850316, 1e-12);
  EXPECT_NEAR(
      dirichlet_log_density({{0.5, 0.7, 2, 3}}, {0.4, 0.3, 0.2, 0.1}),
      -1.78935147336635, 1e-12);
}

TEST(DirichletDensity, SingularZeroIsDomainError) {
  try {
    dirichlet_log_density({{0.5, 1, 1, 1}}, {0.0, 0.5, 0.25, 0.25});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDomainError);
  }
}

TEST(DirichletSample, MeansAndDeterminism) {
  Rng rng(1);
  const int n = 100000;
  std::array<double, 4> s{}, s2{};
  for (int i = 0; i < n; ++i) {
    const auto p = dirichlet_sample({{1, 1, 1, 1}}, rng).to_array();
    for (int c = 0; c < 4; ++c) {
      s[c] += p[c];
      s2[c] += p[c] * p[c];
    }
  }
  // Dir(1,1,1,1) marginal variance: 0.25 * 0.75 / 5.
  const double se = std::sqrt(0.25 * 0.75 / 5.0 / n);
  for (int c = 0; c < 4; ++c) EXPECT_NEAR(s[c] / n, 0.25, 3.0 * se);

  Rng a(42), b(42);
  EXPECT_EQ(dirichlet_sample({{1, 2, 3, 4}}, a), dirichlet_sample({{1, 2, 3, 4}}, b));

  double m00 = 0.0;
  for (int i = 0; i < 10000; ++i) m00 += dirichlet_sample({{1000, 1, 1, 1}}, rng).p00;
  EXPECT_NEAR(m00 / 10000, 1000.0 / 1003.0, 1e-3);
}

TEST(GeneralizedDirichlet, DensityMatchesStickBreakingOracle) {
  std::mt19937_64 rng(8);
  const GDParams g{{0.7, 1.3, 2.5}, {3.1, 0.9, 1.7}};
  for (int i = 0; i < 100; ++i) {
    const CounterfactualProbs p = RandomInterior(rng);
    EXPECT_NEAR(gd_log_density(g, p), StickBreakingLogDensity(g, p), 1e-10);
  }
}

TEST(GeneralizedDirichlet, ReductionMatchesDirichlet) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.5, 10.0);
  for (int i = 0; i < 100; ++i) {
    const BBParams m{{u(rng), u(rng), u(rng), u(rng)}};
    const CounterfactualProbs p = RandomInterior(rng);
    const double d = dirichlet_log_density(m, p);
    const double g = gd_log_density(gd_from_dirichlet(m), p);
    EXPECT_LE(std::abs(g - d), 1e-9 * std::max(1.0, std::abs(d)));
  }
}

TEST(GeneralizedDirichlet, SamplerMatchesMeans) {
  const BBParams m{{1, 2, 3, 4}};
  const GDParams g = gd_from_dirichlet(m);
  Rng rng(10);
  const int n = 100000;
  std::array<double, 4> s{};
  for (int i = 0; i < n; ++i) {
    const auto p = gd_sample(g, rng).to_array();
    for (int c = 0; c < 4; ++c) s[c] += p[c];
  }
  const std::array<double, 4> mean{0.1, 0.2, 0.3, 0.4};
  for (int c = 0; c < 4; ++c) {
    const double se = std::sqrt(mean[c] * (1 - mean[c]) / 11.0 / n);
    EXPECT_NEAR(s[c] / n, mean[c], 3.0 * se);
  }
  const auto gm = gd_mean(g).to_array();
  for (int c = 0; c < 4; ++c) EXPECT_NEAR(gm[c], mean[c], 1e-12);
  Rng a(5), b(5);
  EXPECT_EQ(gd_sample(g, a), gd_sample(g, b));
}

TEST(ScoresFromProbs, Examples) {
  EXPECT_EQ(scores_from_probs({0.25, 0.25, 0.25, 0.25}), (Scores{0.5, 0.5}));
  EXPECT_EQ(scores_from_probs({1, 0, 0, 0}), (Scores{0, 0}));
  const Scores s = scores_from_probs({0.2, 0.5, 0.2, 0.1});
  EXPECT_NEAR(s.z0, 0.6, 1e-15);
  EXPECT_NEAR(s.z1, 0.3, 1e-15);
}

TEST(ScoresFromProbs, InvertsProbsFromP11) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Scores s{u(rng), u(rng)};
    const FrechetInterval b = frechet_bounds(s);
    const Scores back =
        scores_from_probs(probs_from_p11(s, b.lower + u(rng) * b.width()));
    EXPECT_NEAR(back.z0, s.z0, 1e-12);
    EXPECT_NEAR(back.z1, s.z1, 1e-12);
  }
}

TEST(BBSample, MomentsMatchClosedForm) {
  const LatentModel model = LatentModel::bb({{1, 2, 3, 4}});
  const ScoreMoments mo = bb_moments(model.bb_params());
  Rng rng(13);
  const int n = 200000;
  double s0 = 0, s1 = 0, s00 = 0, s11 = 0, s01 = 0;
  for (int i = 0; i < n; ++i) {
    const Scores s = bb_sample(model, rng);
    ASSERT_GE(s.z0, 0.0);
    ASSERT_LE(s.z1, 1.0);
    s0 += s.z0;
    s1 += s.z1;
    s00 += s.z0 * s.z0;
    s11 += s.z1 * s.z1;
    s01 += s.z0 * s.z1;
  }
  const double m0 = s0 / n, m1 = s1 / n;
  EXPECT_NEAR(m0, mo.mean0, 3.0 * std::sqrt(mo.var0 / n));
  EXPECT_NEAR(m1, mo.mean1, 3.0 * std::sqrt(mo.var1 / n));
  EXPECT_NEAR(s00 / n - m0 * m0, mo.var0, 1e-3);
  EXPECT_NEAR(s11 / n - m1 * m1, mo.var1, 1e-3);
  EXPECT_NEAR(s01 / n - m0 * m1, mo.cov, 1e-3);
  EXPECT_THROW(bb_sample(LatentModel::nbb({{1, 1, 1, 1}}, {10}), rng), Error);
}

TEST(BBMoments, ClosedFormExamples) {
  ScoreMoments m = bb_moments({{1, 1, 1, 1}});
  EXPECT_DOUBLE_EQ(m.mean0, 0.5);
  EXPECT_DOUBLE_EQ(m.var0, 0.05);
  EXPECT_DOUBLE_EQ(m.cov, 0.0);
  m = bb_moments({{1, 2, 3, 4}});
  EXPECT_NEAR(m.mean0, 0.6, 1e-15);
  EXPECT_NEAR(m.mean1, 0.7, 1e-15);
  EXPECT_NEAR(m.var0, 0.6 * 0.4 / 11.0, 1e-15);
  EXPECT_NEAR(m.cov, -2.0 / 1100.0, 1e-15);
  EXPECT_NEAR(bb_moments({{3.7, 3.7, 3.7, 3.7}}).cov, 0.0, 1e-16);
}

TEST(NoisySample, NoiseVarianceAndLimits) {
  Rng rng(14);
  const NoiseParams n10{10.0};
  const int count = 100000;
  double s = 0, s2 = 0;
  for (int i = 0; i < count; ++i) {
    const double o = noisy_score(n10, 0.5, rng);
    s += o;
    s2 += o * o;
  }
  const double mean = s / count;
  EXPECT_NEAR(s2 / count - mean * mean, 0.25 / 11.0, 5e-4);

  const LatentModel near = LatentModel::nbb({{1, 2, 3, 4}}, {1e8});
  for (int i = 0; i < 100; ++i) {
    const NoisyDraw d = noisy_sample(near, rng);
    EXPECT_NEAR(d.observed.z0, d.latent.z0, 1e-3);
    EXPECT_NEAR(d.observed.z1, d.latent.z1, 1e-3);
  }
  EXPECT_EQ(noisy_score(n10, 0.0, rng), 0.0);
  EXPECT_EQ(noisy_score(n10, 1.0, rng), 1.0);
  EXPECT_THROW(noisy_sample(LatentModel::bb({{1, 1, 1, 1}}), rng), Error);
}

TEST(NoiseDensity, UniformSymmetricNormalized) {
  EXPECT_NEAR(noise_log_density({2.0}, 0.37, 0.5), 0.0, 1e-14);
  EXPECT_NEAR(noise_log_density({7.0}, 0.2, 0.35),
              noise_log_density({7.0}, 0.8, 0.65), 1e-12);
  // x = t^2 removes the sqrt singularity of Beta(1.5, 3.5) at 0.
  const int k = 200000;
  double s = 0.0;
  for (int i = 0; i < k; ++i) {
    const double t = (i + 0.5) / k;
    s += std::exp(noise_log_density({5.0}, t * t, 0.3)) * 2.0 * t / k;
  }
  EXPECT_NEAR(s, 1.0, 1e-8);
  EXPECT_THROW(noise_log_density({5.0}, 0.0, 0.3), Error);
}

TEST(LatentModel, FamilyAccessors) {
  const LatentModel g = LatentModel::gbb({});
  EXPECT_THROW(g.bb_params(), Error);
  EXPECT_THROW(g.noise(), Error);
  EXPECT_EQ(LatentModel::ngbb({}, {3.0}).latent(), g);
  EXPECT_THROW(LatentModel::bb({{1, -1, 1, 1}}), Error);
  EXPECT_THROW(LatentModel::nbb({{1, 1, 1, 1}}, {0.0}), Error);
}

}  // namespace
}  // namespace bbcf

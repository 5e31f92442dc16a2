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
#include <numbers>

#include "bbcf/quadrature.hpp"
#include "bbcf/special.hpp"

namespace bbcf {
namespace {

// Reference values from scipy: norm.ppf, and one-dimensional adaptive
// integration of phi(x) Phi((k - rho x) / sqrt(1 - rho^2)).
TEST(NormalQuantile, MatchesReference) {
  EXPECT_NEAR(normal_quantile(0.01), -2.3263478740408408, 1e-12);
  EXPECT_NEAR(normal_quantile(0.3), -0.5244005127080409, 1e-12);
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
  EXPECT_NEAR(normal_cdf(normal_quantile(0.42)), 0.42, 1e-14);
}

TEST(BivariateNormalCdf, MatchesReference) {
  struct Case {
    double h, k, rho, expected;
  };
  const Case cases[] = {
      {0.0, 0.0, 0.5, 1.0 / 3.0},
      {0.3, -0.4, 0.5, 0.28303484448756594},
      {-1.2, 0.7, -0.8, 0.019676583805697926},
      {1.5, 1.5, 0.95, 0.9169398022579286},
      {-2.0, -2.0, 0.3, 0.0020412673624812163},
  };
  for (const Case& c : cases) {
    EXPECT_NEAR(bivariate_normal_cdf(c.h, c.k, c.rho), c.expected, 1e-12)
        << c.h << " " << c.k << " " << c.rho;
  }
}

TEST(BivariateNormalCdf, LimitingCorrelations) {
  EXPECT_NEAR(bivariate_normal_cdf(0.3, -0.2, 0.0),
              normal_cdf(0.3) * normal_cdf(-0.2), 1e-14);
  EXPECT_NEAR(bivariate_normal_cdf(0.3, -0.2, 1.0), normal_cdf(-0.2), 1e-12);
  EXPECT_NEAR(bivariate_normal_cdf(0.3, -0.2, -1.0),
              std::max(0.0, normal_cdf(0.3) + normal_cdf(-0.2) - 1.0), 1e-12);
}

TEST(GaussLegendre, FivePointRuleClosedForm) {
  const GaussLegendreRule r = gauss_legendre(5);
  const double x1 = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
  const double x2 = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
  const double w1 = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
  const double w2 = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
  ASSERT_EQ(r.nodes.size(), 5u);
  EXPECT_NEAR(r.nodes[0], -x2, 1e-15);
  EXPECT_NEAR(r.nodes[1], -x1, 1e-15);
  EXPECT_NEAR(r.nodes[2], 0.0, 1e-15);
  EXPECT_NEAR(r.nodes[4], x2, 1e-15);
  EXPECT_NEAR(r.weights[0], w2, 1e-14);
  EXPECT_NEAR(r.weights[1], w1, 1e-14);
  EXPECT_NEAR(r.weights[2], 128.0 / 225.0, 1e-14);
}

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  const GaussLegendreRule r = gauss_legendre(8);
  double s = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    s += r.weights[i] * std::pow(r.nodes[i], 14);
  }
  EXPECT_NEAR(s, 2.0 / 15.0, 1e-14);
}

// Beta function B(0.5, 0.3) = 4.554443087962173 (scipy.special.beta).
TEST(TanhSinh, EndpointSingularities) {
  const UnitNodes q =
      make_unit_nodes(QuadratureRule::kTanhSinh, 201, tanh_sinh_range(0.3));
  const LogIntegral r = integrate_log(q, [](double lx, double l1mx) {
    return -0.5 * lx - 0.7 * l1mx;
  });
  EXPECT_NEAR(std::exp(r.log_value), 4.554443087962173, 1e-9);
  EXPECT_LT(r.relative_error(), 1e-8);
}

TEST(TanhSinh, SmoothIntegrand) {
  const UnitNodes q = make_unit_nodes(QuadratureRule::kTanhSinh, 41, 3.5);
  const LogIntegral r =
      integrate_log(q, [](double lx, double) { return std::exp(lx); });
  EXPECT_NEAR(std::exp(r.log_value), std::numbers::e - 1.0, 1e-12);
}

TEST(CompositeGaussLegendre, SmoothIntegrand) {
  const UnitNodes q = make_unit_nodes(QuadratureRule::kGaussLegendre, 48, 0.0);
  const LogIntegral r = integrate_log(q, [](double lx, double l1mx) {
    return 2.0 * lx + l1mx;  // x^2 (1 - x), integral 1/12
  });
  EXPECT_NEAR(std::exp(r.log_value), 1.0 / 12.0, 1e-14);
}

TEST(LogSumExp, HandlesLargeMagnitudes) {
  const double v[] = {1000.0, 1000.0};
  EXPECT_NEAR(log_sum_exp(v), 1000.0 + std::log(2.0), 1e-12);
  const double w[] = {kNegInf, kNegInf};
  EXPECT_EQ(log_sum_exp(w), kNegInf);
  EXPECT_NEAR(log_add_exp(-1000.0, 0.0), 0.0, 1e-15);
}

TEST(Seeds, MixSeedSeparatesStreams) {
  EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
  EXPECT_NE(mix_seed(1, 0), mix_seed(2, 0));
  EXPECT_EQ(mix_seed(9, 4), mix_seed(9, 4));
}

TEST(BetaVariate, MomentsAndLogsAgree) {
  Rng rng(11);
  double s = 0.0, s2 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const BetaDraw d = beta_variate(0.3, 0.6, rng);
    ASSERT_NEAR(d.value + d.complement, 1.0, 1e-12);
    if (d.value > 1e-300) {
      ASSERT_NEAR(std::log(d.value), d.log_value, 1e-9);
    }
    s += d.value;
    s2 += d.value * d.value;
  }
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  // Beta(0.3, 0.6): mean 1/3, variance a b / ((a + b)^2 (a + b + 1)).
  const double ev = 0.3 * 0.6 / (0.81 * 1.9);
  EXPECT_NEAR(mean, 1.0 / 3.0, 3.0 * std::sqrt(ev / n));
  EXPECT_NEAR(var, ev, 0.01);
}

}  // namespace
}  // namespace bbcf

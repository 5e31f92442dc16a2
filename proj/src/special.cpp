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

#include "bbcf/special.hpp"

#include <algorithm>
#include <numbers>

#include <boost/math/distributions/normal.hpp>

#include "bbcf/quadrature.hpp"

namespace bbcf {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double log_sum_exp(std::span<const double> values) {
  double max_value = kNegInf;
  for (double v : values) max_value = std::max(max_value, v);
  if (max_value == kNegInf) return kNegInf;
  double total = 0.0;
  for (double v : values) total += std::exp(v - max_value);
  return max_value + std::log(total);
}

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double log_gamma_variate(double shape, Rng& rng) {
  if (shape >= 1.0) {
    std::gamma_distribution<double> gamma(shape, 1.0);
    return std::log(gamma(rng));
  }
  // G(a) = G(a + 1) * U^(1/a).
  std::gamma_distribution<double> gamma(shape + 1.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double g = gamma(rng);
  double u = uniform(rng);
  while (u <= 0.0) u = uniform(rng);
  return std::log(g) + std::log(u) / shape;
}

BetaDraw beta_variate(double a, double b, Rng& rng) {
  const double la = log_gamma_variate(a, rng);
  const double lb = log_gamma_variate(b, rng);
  const double total = log_add_exp(la, lb);
  const double lv = la - total;
  const double lc = lb - total;
  return {std::exp(lv), std::exp(lc), lv, lc};
}

double log_beta_density(double x, double a, double b) {
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta(a, b);
}

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_quantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  static const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, p);
}

// Genz (2004) hybrid algorithm for the bivariate normal upper orthant,
// evaluated with 20-point Gauss-Legendre throughout.
double bivariate_normal_cdf(double x, double y, double rho) {
  rho = std::clamp(rho, -1.0, 1.0);
  if (x == -std::numeric_limits<double>::infinity() ||
      y == -std::numeric_limits<double>::infinity()) {
    return 0.0;
  }
  if (x == std::numeric_limits<double>::infinity()) return normal_cdf(y);
  if (y == std::numeric_limits<double>::infinity()) return normal_cdf(x);

  static const GaussLegendreRule rule = gauss_legendre(20);
  constexpr double kTwoPi = 2.0 * std::numbers::pi;

  double h = -x;
  double k = -y;
  double hk = h * k;
  double bvn = 0.0;

  if (std::abs(rho) < 0.925) {
    const double hs = (h * h + k * k) / 2.0;
    const double asr = std::asin(rho);
    if (rho != 0.0) {
      double sum = 0.0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double sn = std::sin(asr * (1.0 - rule.nodes[i]) * 0.5);
        sum += rule.weights[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      }
      bvn = sum * asr * (0.25 / std::numbers::pi);
    }
    return std::clamp(bvn + normal_cdf(-h) * normal_cdf(-k), 0.0, 1.0);
  }

  if (rho < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (std::abs(rho) < 1.0) {
    const double ass = (1.0 - rho) * (1.0 + rho);
    double a = std::sqrt(ass);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    const double asr = -(bs / ass + hk) / 2.0;
    if (asr > -100.0) {
      bvn = a * std::exp(asr) *
            (1.0 - c * (bs - ass) * (1.0 - d * bs / 5.0) / 3.0 +
             c * d * ass * ass / 5.0);
    }
    if (-hk < 100.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-hk / 2.0) * std::sqrt(kTwoPi) * normal_cdf(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      double xs = a * (1.0 - rule.nodes[i]);
      xs *= xs;
      const double rs = std::sqrt(1.0 - xs);
      const double asr2 = -(bs / xs + hk) / 2.0;
      if (asr2 > -100.0) {
        sum += rule.weights[i] * a * std::exp(asr2) *
               (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs -
                (1.0 + c * xs * (1.0 + d * xs)));
      }
    }
    bvn = (bvn + sum) / (-kTwoPi);
  }
  if (rho > 0.0) {
    bvn += normal_cdf(-std::max(h, k));
  } else {
    bvn = -bvn;
    if (k > h) {
      if (h >= 0.0) {
        bvn += normal_cdf(-h) - normal_cdf(-k);
      } else {
        bvn += normal_cdf(k) - normal_cdf(h);
      }
    }
  }
  return std::clamp(bvn, 0.0, 1.0);
}

}  // namespace bbcf

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

// Numerical helpers: log-space arithmetic, random variates and a few
// special functions.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>

namespace bbcf {

using Rng = std::mt19937_64;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

inline double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (a == kNegInf) return kNegInf;
  return a + std::log1p(std::exp(b - a));
}

double log_sum_exp(std::span<const double> values);

double log_beta(double a, double b);

// Log of a Gamma(shape, 1) variate. Stays finite for shapes far below one,
// where the variate itself underflows.
double log_gamma_variate(double shape, Rng& rng);

// Beta(a, b) variate returned as (u, 1 - u), each computed without
// cancellation.
struct BetaDraw {
  double value;
  double complement;
  double log_value;
  double log_complement;
};
BetaDraw beta_variate(double a, double b, Rng& rng);

double log_beta_density(double x, double a, double b);

double normal_cdf(double x);
double normal_quantile(double p);

// P(X <= h, Y <= k) for a standard bivariate normal with correlation rho.
double bivariate_normal_cdf(double h, double k, double rho);

inline double sigmoid(double v) {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

}  // namespace bbcf

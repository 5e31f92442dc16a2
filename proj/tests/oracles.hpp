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

// Independent reference for the posterior given exact scores.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <utility>

#include "bbcf/core.hpp"
#include "bbcf/distributions.hpp"

namespace bbcf::oracle {

// Dirichlet draws kept when both scores fall within delta of the target,
// followed by a local quadratic regression adjustment on the score offsets.
inline std::array<double, 4> rejection_oracle(const BBParams& m, const Scores& s,
                                             int accepted_target,
                                             std::uint64_t seed) {
  const double delta = 0.06;
  constexpr int kTerms = 6;
  std::mt19937_64 rng(seed);
  std::array<std::gamma_distribution<double>, 4> g{
      std::gamma_distribution<double>(m.m[0]), std::gamma_distribution<double>(m.m[1]),
      std::gamma_distribution<double>(m.m[2]), std::gamma_distribution<double>(m.m[3])};
  // Augmented normal equations, one right-hand side per component.
  double a[kTerms][kTerms + 4] = {};
  int accepted = 0;
  while (accepted < accepted_target) {
    std::array<double, 4> v{};
    double total = 0.0;
    for (int c = 0; c < 4; ++c) total += (v[c] = g[c](rng));
    for (double& x : v) x /= total;
    const double d0 = (v[1] + v[3] - s.z0) / delta;
    const double d1 = (v[2] + v[3] - s.z1) / delta;
    if (std::abs(d0) >= 1.0 || std::abs(d1) >= 1.0) continue;
    ++accepted;
    const double x[kTerms] = {1.0, d0, d1, d0 * d0, d1 * d1, d0 * d1};
    for (int i = 0; i < kTerms; ++i) {
      for (int j = 0; j < kTerms; ++j) a[i][j] += x[i] * x[j];
      for (int c = 0; c < 4; ++c) a[i][kTerms + c] += x[i] * v[c];
    }
  }
  // Gauss-Jordan elimination with partial pivoting.
  for (int col = 0; col < kTerms; ++col) {
    int piv = col;
    for (int r = col + 1; r < kTerms; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    std::swap(a[col], a[piv]);
    for (int r = 0; r < kTerms; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (int j = col; j < kTerms + 4; ++j) a[r][j] -= f * a[col][j];
    }
  }
  std::array<double, 4> out{};
  for (int c = 0; c < 4; ++c) out[c] = a[0][kTerms + c] / a[0][0];
  return out;
}

}  // namespace bbcf::oracle

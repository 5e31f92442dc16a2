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

#include "bbcf/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "bbcf/errors.hpp"

namespace bbcf {

OptimizeResult nelder_mead(
    const std::function<double(std::span<const double>)>& f,
    std::vector<double> x0, const NelderMeadOptions& options) {
  if (options.max_evaluations < 0 || !(options.rel_tol > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "optimizer budget must be >= 0 and tolerance positive");
  }
  const std::size_t n = x0.size();
  const double inf = std::numeric_limits<double>::infinity();
  OptimizeResult result;
  auto eval = [&](const std::vector<double>& x) {
    ++result.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : inf;
  };
  if (options.max_evaluations == 0) {
    result.x = std::move(x0);
    result.value = std::numeric_limits<double>::quiet_NaN();
    return result;
  }
  if (n == 0) {
    result.value = eval(x0);
    result.x = std::move(x0);
    result.converged = true;
    return result;
  }

  std::vector<std::vector<double>> simplex(n + 1, x0);
  std::vector<double> values(n + 1, inf);
  values[0] = eval(x0);
  for (std::size_t i = 0; i < n; ++i) {
    simplex[i + 1][i] += options.initial_step;
    if (result.evaluations < options.max_evaluations) {
      values[i + 1] = eval(simplex[i + 1]);
    }
  }

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  auto along = [&](double t, std::vector<double>& out) {
    // out = centroid + t (centroid - worst)
    const std::vector<double>& worst = simplex[order[n]];
    for (std::size_t j = 0; j < n; ++j) {
      out[j] = centroid[j] + t * (centroid[j] - worst[j]);
    }
  };

  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
      return values[a] < values[b];
    });
    const double best = values[order[0]];
    const double worst = values[order[n]];
    if (std::isfinite(worst) &&
        worst - best <= options.rel_tol * (std::abs(best) + options.rel_tol)) {
      result.converged = true;
      break;
    }
    if (result.evaluations >= options.max_evaluations) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[order[i]][j];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    const double second = values[order[n - 1]];
    along(1.0, trial);
    const double fr = eval(trial);
    if (fr < best) {
      if (result.evaluations < options.max_evaluations) {
        along(2.0, trial2);
        const double fe = eval(trial2);
        if (fe < fr) {
          simplex[order[n]] = trial2;
          values[order[n]] = fe;
          continue;
        }
      }
      simplex[order[n]] = trial;
      values[order[n]] = fr;
      continue;
    }
    if (fr < second) {
      simplex[order[n]] = trial;
      values[order[n]] = fr;
      continue;
    }
    if (result.evaluations >= options.max_evaluations) break;
    // Contraction, outside when the reflection improved on the worst point.
    const bool outside = fr < worst;
    along(outside ? 0.5 : -0.5, trial2);
    const double fc = eval(trial2);
    if (fc < (outside ? fr : worst)) {
      simplex[order[n]] = trial2;
      values[order[n]] = fc;
      continue;
    }
    // Shrink toward the best vertex.
    const std::vector<double> anchor = simplex[order[0]];
    for (std::size_t i = 1; i <= n; ++i) {
      if (result.evaluations >= options.max_evaluations) break;
      std::vector<double>& v = simplex[order[i]];
      for (std::size_t j = 0; j < n; ++j) v[j] = anchor[j] + 0.5 * (v[j] - anchor[j]);
      values[order[i]] = eval(v);
    }
  }

  const auto best_it = std::min_element(values.begin(), values.end());
  const std::size_t bi = static_cast<std::size_t>(best_it - values.begin());
  result.x = simplex[bi];
  result.value = *best_it;
  return result;
}

}  // namespace bbcf

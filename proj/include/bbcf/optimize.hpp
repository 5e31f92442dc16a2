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

// Derivative-free minimization by the Nelder-Mead simplex method.

#pragma once

#include <functional>
#include <span>
#include <vector>

namespace bbcf {

struct NelderMeadOptions {
  // Function evaluations, including the initial simplex. 0 returns x0.
  int max_evaluations = 400;
  // Stop once the spread of simplex values falls below
  // rel_tol * (|best| + rel_tol).
  double rel_tol = 1e-6;
  // Offset added to each coordinate to build the initial simplex.
  double initial_step = 0.5;
};

struct OptimizeResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Minimizes f. Non-finite values of f are treated as +inf, so the search
// backs away from them. The returned value never exceeds f(x0). With a zero
// budget f is not called: x = x0 and value is NaN.
OptimizeResult nelder_mead(
    const std::function<double(std::span<const double>)>& f,
    std::vector<double> x0, const NelderMeadOptions& options = {});

}  // namespace bbcf

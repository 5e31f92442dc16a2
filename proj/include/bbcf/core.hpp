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

// Domain types shared by every module: potential-outcome scores, the joint
// counterfactual composition, and the closed-form baseline estimators.
//
// Component order is fixed everywhere as (p00, p10, p01, p11), where
// p_ij = P(y0 = i, y1 = j).

#pragma once

#include <array>

namespace bbcf {

// Values outside [0, 1] by at most this much are clamped; larger violations
// are errors.
inline constexpr double kProbabilityClampTolerance = 1e-9;
inline constexpr double kSimplexTolerance = 1e-12;

// Potential-outcome probabilities z0 = P(y0 = 1 | x), z1 = P(y1 = 1 | x).
struct Scores {
  double z0 = 0.0;
  double z1 = 0.0;

  friend bool operator==(const Scores&, const Scores&) = default;
};

struct CounterfactualProbs {
  double p00 = 0.0;
  double p10 = 0.0;
  double p01 = 0.0;
  double p11 = 0.0;

  std::array<double, 4> to_array() const { return {p00, p10, p01, p11}; }
  static CounterfactualProbs from_array(const std::array<double, 4>& a) {
    return {a[0], a[1], a[2], a[3]};
  }
  double sum() const { return p00 + p10 + p01 + p11; }

  friend bool operator==(const CounterfactualProbs&,
                         const CounterfactualProbs&) = default;
};

// Feasible range of p11 given the two marginals.
struct FrechetInterval {
  double lower = 0.0;
  double upper = 0.0;

  double width() const { return upper - lower; }
  bool degenerate() const { return !(upper > lower); }
};

// Validates a probability, clamping drift up to kProbabilityClampTolerance.
// Throws kInvalidArgument otherwise. `what` names the value in the message.
double checked_probability(double value, const char* what = "probability");

// Builds validated scores (clamping tiny drift).
Scores make_scores(double z0, double z1);

// Validates a composition: finite components in [0, 1] (with clamping) that
// sum to one within kSimplexTolerance.
CounterfactualProbs make_probs(double p00, double p10, double p01, double p11);

bool is_valid_probs(const CounterfactualProbs& p,
                    double tolerance = kSimplexTolerance);

// U(x) = z0 - z1.
double uplift(const Scores& s);

FrechetInterval frechet_bounds(const Scores& s);

// Inverts z0 = p10 + p11, z1 = p01 + p11 for a given p11.
// Throws kOutOfBounds if p11 leaves the Frechet interval by more than 1e-12.
CounterfactualProbs probs_from_p11(const Scores& s, double p11);

// Baseline: potential outcomes independent given x, p11 = z0 * z1.
CounterfactualProbs independence_estimate(const Scores& s);

// Baseline: p11 at the midpoint of the Frechet interval.
CounterfactualProbs midpoint_estimate(const Scores& s);

}  // namespace bbcf

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

#include "bbcf/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bbcf/errors.hpp"

namespace bbcf {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kOutOfBounds: return "OutOfBounds";
    case ErrorCode::kDomainError: return "DomainError";
    case ErrorCode::kFamilyMismatch: return "FamilyMismatch";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kDegenerateVariance: return "DegenerateVariance";
    case ErrorCode::kOptimizerFailure: return "OptimizerFailure";
    case ErrorCode::kDegenerateSegment: return "DegenerateSegment";
    case ErrorCode::kQuadratureFailure: return "QuadratureFailure";
    case ErrorCode::kEffectiveSampleSizeTooLow:
      return "EffectiveSampleSizeTooLow";
    case ErrorCode::kMissingArm: return "MissingArm";
    case ErrorCode::kSingleClassArm: return "SingleClassArm";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

double checked_probability(double value, const char* what) {
  if (!std::isfinite(value) || value < -kProbabilityClampTolerance ||
      value > 1.0 + kProbabilityClampTolerance) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " must lie in [0, 1], got " +
                    std::to_string(value));
  }
  return std::clamp(value, 0.0, 1.0);
}

Scores make_scores(double z0, double z1) {
  return {checked_probability(z0, "z0"), checked_probability(z1, "z1")};
}

CounterfactualProbs make_probs(double p00, double p10, double p01,
                               double p11) {
  CounterfactualProbs p{checked_probability(p00, "p00"),
                        checked_probability(p10, "p10"),
                        checked_probability(p01, "p01"),
                        checked_probability(p11, "p11")};
  if (std::abs(p.sum() - 1.0) > kSimplexTolerance) {
    throw Error(ErrorCode::kInvalidArgument,
                "counterfactual probabilities must sum to 1");
  }
  return p;
}

bool is_valid_probs(const CounterfactualProbs& p, double tolerance) {
  for (double v : p.to_array()) {
    if (!std::isfinite(v) || v < -tolerance || v > 1.0 + tolerance) {
      return false;
    }
  }
  return std::abs(p.sum() - 1.0) <= tolerance;
}

double uplift(const Scores& s) { return s.z0 - s.z1; }

FrechetInterval frechet_bounds(const Scores& s) {
  return {std::max(0.0, s.z0 + s.z1 - 1.0), std::min(s.z0, s.z1)};
}

CounterfactualProbs probs_from_p11(const Scores& s, double p11) {
  const FrechetInterval b = frechet_bounds(s);
  if (!std::isfinite(p11) || p11 < b.lower - kSimplexTolerance ||
      p11 > b.upper + kSimplexTolerance) {
    throw Error(ErrorCode::kOutOfBounds,
                "p11 = " + std::to_string(p11) + " outside [" +
                    std::to_string(b.lower) + ", " + std::to_string(b.upper) +
                    "]");
  }
  p11 = std::clamp(p11, b.lower, b.upper);
  // Written so that each component is a non-negative difference from its
  // bound, keeping results exactly inside [0, 1].
  const double p10 = s.z0 - p11;
  const double p01 = s.z1 - p11;
  const double p00 = (1.0 - s.z0 - s.z1) + p11;
  return {std::max(0.0, p00), std::max(0.0, p10), std::max(0.0, p01), p11};
}

CounterfactualProbs independence_estimate(const Scores& s) {
  return probs_from_p11(s, s.z0 * s.z1);
}

CounterfactualProbs midpoint_estimate(const Scores& s) {
  const FrechetInterval b = frechet_bounds(s);
  return probs_from_p11(s, 0.5 * (b.lower + b.upper));
}

}  // namespace bbcf

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

// Population- and individual-level counterfactual estimates.
//
// Given exact scores (z0, z1), the latent composition is confined to the
// Frechet segment p11 in [L, U]; the map (p10, p01, p11) -> (z0, z1, p11)
// has unit Jacobian, so the posterior over p11 is the latent density
// restricted to the segment. Its mean is computed by quadrature after the
// affine map p11 = L + (U - L) x, x in (0, 1).
//
// For the noisy families the latent scores are unknown and the posterior is
// estimated by self-normalized importance sampling.

#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "bbcf/core.hpp"
#include "bbcf/distributions.hpp"
#include "bbcf/quadrature.hpp"

namespace bbcf {

enum class NoisyProposal {
  // Prior draws; when their ESS is below QuadratureConfig::auto_switch_ess,
  // also runs kScore and keeps the result with the larger ESS.
  kAuto,
  // Latent composition drawn from the prior, weighted by the noise density.
  kPrior,
  // Latent scores drawn near the observation (mixed with prior draws),
  // composition integrated out along each segment by quadrature.
  kScore,
};

std::string_view noisy_proposal_name(NoisyProposal p);
NoisyProposal parse_noisy_proposal(std::string_view name);

struct QuadratureConfig {
  QuadratureRule rule = QuadratureRule::kTanhSinh;
  int nodes = 201;
  // Absolute tolerance on the posterior mean of p11.
  double tolerance = 1e-6;

  NoisyProposal proposal = NoisyProposal::kAuto;
  int mc_draws = 100000;
  int score_draws = 2000;
  int inner_nodes = 61;
  double min_ess = 100.0;
  double auto_switch_ess = 1000.0;
  std::uint64_t seed = 20240611;
};

void validate(const QuadratureConfig& q);

struct PosteriorResult {
  CounterfactualProbs mean;
  // Log density of the conditioning scores (NaN on a degenerate segment).
  double log_evidence = std::numeric_limits<double>::quiet_NaN();
  // Absolute error estimate on mean.p11 (quadrature) or Monte Carlo
  // standard error of mean.p11 (noisy families).
  double error_estimate = 0.0;
  int nodes = 0;
  int draws = 0;
  double ess = std::numeric_limits<double>::quiet_NaN();
  bool degenerate = false;
};

// E[pi] under the fitted latent composition: m / M, or the stick-breaking
// mean for the generalized families.
CounterfactualProbs population_estimate(const LatentModel& model);

// Segment geometry for given scores:
//   p11 = lower + width x,   p00 = off00 + width x,
//   p10 = off10 + width (1 - x),   p01 = off01 + width (1 - x).
struct Segment {
  double lower = 0.0;
  double width = 0.0;
  double off00 = 0.0;
  double off10 = 0.0;
  double off01 = 0.0;
  double z1 = 0.0;
};

Segment make_segment(const Scores& s);

// Log latent density at probs_from_p11(s, p11), unnormalized in p11.
// Noiseless families only; kDegenerateSegment when L == U, kDomainError
// unless L < p11 < U.
double posterior_log_density_p11(const LatentModel& model, const Scores& s,
                                 double p11);

// Posterior mean given exact scores (BB, GBB). The latent layer of a noisy
// model is not accepted here; use posterior_mean_noisy.
PosteriorResult posterior_mean(const LatentModel& model, const Scores& s,
                               const QuadratureConfig& q = {});

// Reusable evaluator for many score pairs under one noiseless model.
class SegmentPosterior {
 public:
  SegmentPosterior(const LatentModel& model, const QuadratureConfig& q);
  SegmentPosterior(const CompositionKernel& kernel, QuadratureRule rule,
                   int nodes, double tolerance);

  PosteriorResult operator()(const Scores& s) const;
  // Like operator() but never throws on tolerance; used inside samplers.
  PosteriorResult evaluate_unchecked(const Scores& s) const;

 private:
  CompositionKernel kernel_;
  UnitNodes nodes_;
  double tolerance_;
};

// Posterior mean given noisy observed scores (NBB, NGBB). Observed values
// are clamped into [1e-9, 1 - 1e-9]. The result need not lie on the Frechet
// segment of the observation.
PosteriorResult posterior_mean_noisy(const LatentModel& model,
                                     const Scores& observed,
                                     const QuadratureConfig& q = {});

// Reusable noisy evaluator. Caches the prior draws so that every call sees
// the same draws as a fresh posterior_mean_noisy call with the same seed.
class NoisyPosterior {
 public:
  NoisyPosterior(const LatentModel& model, const QuadratureConfig& q);

  PosteriorResult operator()(const Scores& observed) const;

 private:
  PosteriorResult prior_is(double lo0, double l1o0, double lo1,
                           double l1o1) const;
  PosteriorResult score_is(const Scores& observed) const;
  void ensure_prior_draws() const;

  LatentModel model_;
  QuadratureConfig q_;
  double kappa_;
  SegmentPosterior inner_;

  // Per prior draw, structure-of-arrays: noise log-density coefficients
  //   log N(o | zeta) = ca * log(o) + cb * log(1 - o) - cc
  // and the drawn composition.
  mutable bool have_draws_ = false;
  mutable std::vector<double> ca0_, cb0_, cc0_, ca1_, cb1_, cc1_;
  mutable std::vector<CounterfactualProbs> draws_;
};

// Sum over points of the log score density, using precomputed logs of the
// segment components at fixed nodes. The table depends only on the sample,
// so repeated likelihood evaluations (as in an optimizer) only cost one
// exponential per node.
class SegmentLogTable {
 public:
  // Scores are clamped into [edge, 1 - edge] so every segment is proper.
  SegmentLogTable(std::span<const Scores> sample, const UnitNodes& nodes,
                  double edge = 1e-9);

  double log_likelihood(const CompositionKernel& kernel) const;
  std::size_t size() const { return points_; }

 private:
  static constexpr int kStride = 6;  // lp00 lp10 lp01 lp11 lS1 lw
  std::size_t points_ = 0;
  std::size_t nodes_ = 0;
  std::vector<double> table_;
  std::vector<double> log_width_;
  std::vector<double> log_z1_;
};

}  // namespace bbcf

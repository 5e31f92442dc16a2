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

// Parameter estimation from a sample of score pairs.
//
// BB: method of moments. GBB: integrated maximum likelihood by simplex
// search, started from the moment fit. Noisy families: moments are first
// deconvolved for the beta observation noise.

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "bbcf/core.hpp"
#include "bbcf/distributions.hpp"
#include "bbcf/quadrature.hpp"

namespace bbcf {

using ScoreSample = std::vector<Scores>;
using SampleMoments = ScoreMoments;

// How the two per-arm estimates of M are merged.
enum class MCombination { kArithmetic, kGeometric };

std::string_view m_combination_name(MCombination c);
MCombination parse_m_combination(std::string_view name);

struct FitConfig {
  // Floor applied to every fitted concentration.
  double epsilon = 1e-3;
  MCombination combination = MCombination::kArithmetic;
  // GBB simplex search budget; 0 returns the initialization.
  int max_evaluations = 400;
  double rel_tol = 1e-6;
  // Tanh-sinh nodes per segment in the GBB likelihood.
  int quadrature_nodes = 41;
  // Noise concentration for NBB/NGBB. Unset: default_kappa(n_arm).
  std::optional<double> kappa;
  // Correct the moments for noise before fitting NBB/NGBB.
  bool deconvolve = true;
};

void validate(const FitConfig& cfg);

// Unbiased means, variances and covariance (N - 1 denominators).
// kTooFewSamples when N < 4.
SampleMoments sample_moments(std::span<const Scores> sample);

struct MomentFit {
  BBParams params;
  SampleMoments moments;
  // Set when any component hit the epsilon floor.
  bool clamped = false;
};

MomentFit fit_bb_mom_from_moments(const SampleMoments& moments,
                                  const FitConfig& cfg = {});
MomentFit fit_bb_mom(std::span<const Scores> sample,
                     const FitConfig& cfg = {});

struct GBBFit {
  GDParams params;
  // Dirichlet reduction of the moment fit.
  GDParams initial;
  double log_likelihood = 0.0;
  double initial_log_likelihood = 0.0;
  int evaluations = 0;
  bool converged = false;
  bool clamped = false;
};

GBBFit fit_gbb(std::span<const Scores> sample, const FitConfig& cfg = {});

struct DeconvolvedMoments {
  SampleMoments moments;
  // Set when a latent variance (or the covariance bound) had to be floored.
  bool floored = false;
};

// Latent-score moments implied by raw moments under
// observed ~ Beta(kappa z, kappa (1 - z)). Identity when kappa is infinite.
DeconvolvedMoments deconvolve_moments(const SampleMoments& raw,
                                      const NoiseParams& noise);

// Affine transform of the centred sample whose sample moments equal the
// deconvolved moments exactly. Values are clamped into [1e-9, 1 - 1e-9].
struct DeconvolvedSample {
  ScoreSample sample;
  bool floored = false;
};

DeconvolvedSample deconvolve_sample(std::span<const Scores> sample,
                                    const NoiseParams& noise);

// kappa = n_arm / 10, n_arm being the smaller per-treatment training count.
double default_kappa(std::size_t n_arm);

struct FitResult {
  LatentModel model = LatentModel::bb({});
  std::size_t sample_size = 0;
  bool clamped = false;
  bool variance_floored = false;
  std::optional<GBBFit> gbb;
};

// Fits any family. n_arm is only used when the family is noisy and
// cfg.kappa is unset.
FitResult fit_model(Family family, std::span<const Scores> sample,
                    const FitConfig& cfg = {}, std::size_t n_arm = 0);

// Sum of log score densities under a noiseless model, by quadrature along
// each segment. Scores are clamped into [1e-9, 1 - 1e-9].
double score_log_likelihood(const LatentModel& model,
                            std::span<const Scores> sample,
                            const UnitNodes& nodes);
double score_log_likelihood(const LatentModel& model,
                            std::span<const Scores> sample, int nodes = 201);

}  // namespace bbcf

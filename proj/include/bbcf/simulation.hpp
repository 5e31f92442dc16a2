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

// Data-generating processes with ground truth, and the repeated experiment
// that scores the six estimators at population and individual level.

#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bbcf/core.hpp"
#include "bbcf/distributions.hpp"
#include "bbcf/fitting.hpp"
#include "bbcf/inference.hpp"
#include "bbcf/uplift.hpp"

namespace bbcf {

enum class Dgp { kGaussian, kBivariateBeta };
enum class Copula { kIndependent, kComonotone, kGaussian };

std::string_view dgp_name(Dgp d);
// Also accepts "bb" and "dirichlet" for the bivariate-beta process.
Dgp parse_dgp(std::string_view name);
std::string_view copula_name(Copula c);
Copula parse_copula(std::string_view name);

enum class Estimator { kIndependence, kMidpoint, kBB, kNBB, kGBB, kNGBB };
inline constexpr int kEstimatorCount = 6;
inline constexpr std::array<Estimator, kEstimatorCount> kAllEstimators{
    Estimator::kIndependence, Estimator::kMidpoint, Estimator::kBB,
    Estimator::kNBB, Estimator::kGBB, Estimator::kNGBB};
std::string_view estimator_name(Estimator e);
Estimator parse_estimator(std::string_view name);

enum class Level { kPopulation, kIndividual };
std::string_view level_name(Level l);

struct SimConfig {
  Dgp dgp = Dgp::kBivariateBeta;
  int n = 5000;
  int repetitions = 30;
  std::uint64_t seed = 1;

  // Gaussian process.
  int dim = 10;
  Copula copula = Copula::kGaussian;
  double rho = 0.5;
  // Per-arm outcome rates are drawn uniformly from this range each
  // repetition; offsets are calibrated to hit them.
  double rate_low = 0.2;
  double rate_high = 0.5;

  // Bivariate-beta process. Unset m: components drawn uniformly from
  // [m_low, m_high] each repetition.
  std::optional<BBParams> m;
  double m_low = 0.5;
  double m_high = 5.0;
  // Observation noise; +inf for none.
  double kappa = 250.0;

  UpliftConfig uplift;
  FitConfig fit;
  QuadratureConfig quadrature;

  // Cells whose estimated cost over all repetitions exceeds this are
  // skipped.
  double cell_budget_seconds = 60.0;
  // 0 uses the hardware concurrency.
  int threads = 0;
  bool individual = true;
  std::array<bool, kEstimatorCount> estimators{true, true, true,
                                               true, true, true};
};

void validate(const SimConfig& cfg);

struct RecordTruth {
  Scores scores;
  CounterfactualProbs probs;
};

struct SimulatedDataset {
  std::vector<CampaignRecord> records;
  std::vector<RecordTruth> truth;
  CounterfactualProbs population;
  // Bivariate-beta process: noisy observed scores, one per record.
  std::vector<Scores> observed;
  // Parameters drawn for this repetition.
  std::optional<BBParams> m;
  std::array<double, 2> offsets{};
  std::array<double, 2> target_rates{};
};

std::uint64_t repetition_seed(const SimConfig& cfg, int repetition);

SimulatedDataset gen_gaussian(const SimConfig& cfg, std::uint64_t rep_seed);
SimulatedDataset gen_bb(const SimConfig& cfg, std::uint64_t rep_seed);
SimulatedDataset generate(const SimConfig& cfg, int repetition);

// Score pairs the estimators are applied to.
struct PredictedScores {
  // One per record.
  std::vector<Scores> all;
  // Records the latent model is fitted on (all records, or the holdout part).
  std::vector<std::size_t> fit_rows;
  // Smaller per-treatment count among the training rows.
  std::size_t n_arm = 0;
};

// Gaussian: trains the T-learner and predicts every record. Bivariate-beta:
// the observed scores.
PredictedScores predict_dataset(const SimConfig& cfg,
                                const SimulatedDataset& data,
                                std::uint64_t rep_seed);

// Mean over the four components of the squared difference.
double squared_error(const CounterfactualProbs& est,
                     const CounterfactualProbs& truth);

enum class CellStatus { kOk, kSkipped, kFailed, kDisabled };
std::string_view cell_status_name(CellStatus s);

struct CellResult {
  CellStatus status = CellStatus::kOk;
  // Per-repetition squared errors, in repetition order.
  std::vector<double> values;
  double mean = std::numeric_limits<double>::quiet_NaN();
  double sd = std::numeric_limits<double>::quiet_NaN();
  std::string reason;
  // Deterministic cost estimate used against the budget.
  double estimated_seconds = 0.0;
  // Wall time actually spent, summed over repetitions.
  double measured_seconds = 0.0;
};

struct ExperimentReport {
  Dgp dgp = Dgp::kBivariateBeta;
  int n = 0;
  int repetitions = 0;
  std::uint64_t seed = 0;
  // cells[estimator][level]
  std::array<std::array<CellResult, 2>, kEstimatorCount> cells;
  double measured_seconds = 0.0;

  const CellResult& cell(Estimator e, Level l) const {
    return cells[static_cast<int>(e)][static_cast<int>(l)];
  }
};

// Estimated seconds for one estimator cell over all repetitions.
double estimated_cell_seconds(const SimConfig& cfg, Estimator e, Level l);

ExperimentReport run_experiment(const SimConfig& cfg);

}  // namespace bbcf

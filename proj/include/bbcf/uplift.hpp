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

// T-learner producing score pairs from randomized campaign data: one
// logistic ensemble per treatment arm, each member trained on a balanced
// undersample (EasyEnsemble), with the probabilities recalibrated for the
// undersampling ratio.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "bbcf/core.hpp"

namespace bbcf {

struct CampaignRecord {
  std::vector<double> x;
  int t = 0;
  int y = 0;
};

struct LogisticModel {
  std::vector<double> weights;
  double intercept = 0.0;

  double predict(std::span<const double> x) const;
};

struct UpliftConfig {
  int ensemble_size = 5;
  int epochs = 500;
  double step_size = 0.1;
  double l2 = 1e-4;
  bool calibrate = true;
  // Standardize features with the training means and deviations.
  bool standardize = false;
  // Fraction of records held out from training; the scores used for fitting
  // then come from the held-out part. 0 trains and predicts on the same set.
  double holdout_fraction = 0.0;
  std::uint64_t seed = 1;
};

void validate(const UpliftConfig& cfg);

struct ArmModel {
  std::vector<LogisticModel> members;
  // minority count / majority count, in (0, 1].
  double beta = 1.0;
  // True when y = 1 is the majority class; calibration then applies to the
  // complement probability.
  bool positive_majority = false;
};

struct UpliftModel {
  std::array<ArmModel, 2> arms;
  std::size_t dim = 0;
  bool calibrated = true;
  std::vector<double> feature_mean;
  std::vector<double> feature_scale;
};

// Errors: kMissingArm when a treatment value has no rows, kSingleClassArm
// when an arm has one outcome only, kDimensionMismatch on ragged features.
UpliftModel train_tlearner(std::span<const CampaignRecord> data,
                           const UpliftConfig& cfg = {});

// Undersampling correction p = beta p_s / (beta p_s - p_s + 1).
double calibrate(double p_s, double beta);

// Mean member probability per arm, recalibrated. kDimensionMismatch when the
// feature length differs from training.
Scores predict_scores(const UpliftModel& model, std::span<const double> x);

// Area under the ROC curve with ties counted as one half.
double auc(std::span<const double> scores, std::span<const int> labels);

}  // namespace bbcf

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

#include "bbcf/uplift.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "bbcf/errors.hpp"
#include "bbcf/special.hpp"

namespace bbcf {
namespace {

// Full-batch gradient descent on mean log-loss plus (l2 / 2) |w|^2.
LogisticModel train_logistic(const std::vector<const double*>& rows,
                             const std::vector<int>& labels, std::size_t dim,
                             const UpliftConfig& cfg) {
  LogisticModel m;
  m.weights.assign(dim, 0.0);
  const double n = static_cast<double>(rows.size());
  std::vector<double> grad(dim);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_b = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double* x = rows[i];
      double z = m.intercept;
      for (std::size_t j = 0; j < dim; ++j) z += m.weights[j] * x[j];
      const double r = sigmoid(z) - labels[i];
      for (std::size_t j = 0; j < dim; ++j) grad[j] += r * x[j];
      grad_b += r;
    }
    for (std::size_t j = 0; j < dim; ++j) {
      m.weights[j] -= cfg.step_size * (grad[j] / n + cfg.l2 * m.weights[j]);
    }
    m.intercept -= cfg.step_size * grad_b / n;
  }
  return m;
}

}  // namespace

double LogisticModel::predict(std::span<const double> x) const {
  double z = intercept;
  for (std::size_t j = 0; j < weights.size(); ++j) z += weights[j] * x[j];
  return sigmoid(z);
}

void validate(const UpliftConfig& cfg) {
  if (cfg.ensemble_size < 1 || cfg.epochs < 0 || !(cfg.step_size > 0.0) ||
      !(cfg.l2 >= 0.0) ||
      !(cfg.holdout_fraction >= 0.0 && cfg.holdout_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "uplift config needs k >= 1, epochs >= 0, step > 0, l2 >= 0 "
                "and holdout in [0, 1)");
  }
}

UpliftModel train_tlearner(std::span<const CampaignRecord> data,
                           const UpliftConfig& cfg) {
  validate(cfg);
  if (data.empty()) {
    throw Error(ErrorCode::kMissingArm, "campaign data is empty");
  }
  UpliftModel model;
  model.dim = data.front().x.size();
  model.calibrated = cfg.calibrate;
  for (const CampaignRecord& r : data) {
    if (r.x.size() != model.dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "records have different feature lengths");
    }
    if ((r.t != 0 && r.t != 1) || (r.y != 0 && r.y != 1)) {
      throw Error(ErrorCode::kInvalidArgument, "t and y must be 0 or 1");
    }
  }

  const std::size_t dim = model.dim;
  model.feature_mean.assign(dim, 0.0);
  model.feature_scale.assign(dim, 1.0);
  if (cfg.standardize) {
    const double n = static_cast<double>(data.size());
    for (const CampaignRecord& r : data) {
      for (std::size_t j = 0; j < dim; ++j) model.feature_mean[j] += r.x[j] / n;
    }
    std::vector<double> var(dim, 0.0);
    for (const CampaignRecord& r : data) {
      for (std::size_t j = 0; j < dim; ++j) {
        const double d = r.x[j] - model.feature_mean[j];
        var[j] += d * d / n;
      }
    }
    for (std::size_t j = 0; j < dim; ++j) {
      model.feature_scale[j] = var[j] > 0.0 ? std::sqrt(var[j]) : 1.0;
    }
  }
  std::vector<double> features(data.size() * dim);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      features[i * dim + j] =
          (data[i].x[j] - model.feature_mean[j]) / model.feature_scale[j];
    }
  }

  for (int t = 0; t < 2; ++t) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data[i].t != t) continue;
      (data[i].y == 1 ? pos : neg).push_back(i);
    }
    if (pos.empty() && neg.empty()) {
      throw Error(ErrorCode::kMissingArm,
                  "no records with t = " + std::to_string(t));
    }
    if (pos.empty() || neg.empty()) {
      throw Error(ErrorCode::kSingleClassArm,
                  "arm t = " + std::to_string(t) + " has a single outcome");
    }
    ArmModel& arm = model.arms[t];
    arm.positive_majority = pos.size() > neg.size();
    const std::vector<std::size_t>& minority = arm.positive_majority ? neg : pos;
    const std::vector<std::size_t>& majority = arm.positive_majority ? pos : neg;
    arm.beta = static_cast<double>(minority.size()) /
               static_cast<double>(majority.size());

    for (int k = 0; k < cfg.ensemble_size; ++k) {
      Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(t * 1000 + k)));
      std::vector<std::size_t> drawn = majority;
      std::shuffle(drawn.begin(), drawn.end(), rng);
      drawn.resize(minority.size());
      std::vector<std::size_t> rows_idx = minority;
      rows_idx.insert(rows_idx.end(), drawn.begin(), drawn.end());
      std::sort(rows_idx.begin(), rows_idx.end());
      std::vector<const double*> rows;
      std::vector<int> labels;
      rows.reserve(rows_idx.size());
      labels.reserve(rows_idx.size());
      for (std::size_t i : rows_idx) {
        rows.push_back(&features[i * dim]);
        labels.push_back(data[i].y);
      }
      arm.members.push_back(train_logistic(rows, labels, dim, cfg));
    }
  }
  return model;
}

double calibrate(double p_s, double beta) {
  p_s = checked_probability(p_s, "p_s");
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "beta must lie in (0, 1]");
  }
  return beta * p_s / (beta * p_s - p_s + 1.0);
}

Scores predict_scores(const UpliftModel& model, std::span<const double> x) {
  if (x.size() != model.dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "expected " + std::to_string(model.dim) + " features, got " +
                    std::to_string(x.size()));
  }
  std::vector<double> xs(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    xs[j] = (x[j] - model.feature_mean[j]) / model.feature_scale[j];
  }
  std::array<double, 2> z{};
  for (int t = 0; t < 2; ++t) {
    const ArmModel& arm = model.arms[t];
    double p = 0.0;
    for (const LogisticModel& m : arm.members) p += m.predict(xs);
    p /= static_cast<double>(arm.members.size());
    if (model.calibrated) {
      p = arm.positive_majority ? 1.0 - calibrate(1.0 - p, arm.beta)
                                : calibrate(p, arm.beta);
    }
    z[t] = std::clamp(p, 0.0, 1.0);
  }
  return {z[0], z[1]};
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "scores and labels differ");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](auto a, auto b) { return scores[a] < scores[b]; });
  // Mann-Whitney statistic from mid-ranks.
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + j + 1);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        rank_sum += mid_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw Error(ErrorCode::kSingleClassArm, "AUC needs both classes");
  }
  const double np = static_cast<double>(n_pos);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

}  // namespace bbcf

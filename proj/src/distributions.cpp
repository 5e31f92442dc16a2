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

#include "bbcf/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bbcf/errors.hpp"

namespace bbcf {
namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

// e * log(v), with the conventions 0 * log(0) = 0 and e > 0 at v = 0 giving
// a zero density. A negative exponent at v = 0 is a singularity.
double power_term(double exponent, double value, const char* what) {
  if (exponent == 0.0) return 0.0;
  if (value > 0.0) return exponent * std::log(value);
  if (exponent > 0.0) return kNegInf;
  throw Error(ErrorCode::kDomainError,
              std::string(what) + " is zero where the density is singular");
}

double kernel_log_density(const CompositionKernel& k,
                          const CounterfactualProbs& p) {
  if (!is_valid_probs(p, 1e-9)) {
    throw Error(ErrorCode::kDomainError, "not a point of the simplex");
  }
  static constexpr const char* kNames[4] = {"p00", "p10", "p01", "p11"};
  const std::array<double, 4> c = p.to_array();
  double out = k.log_norm;
  for (int i = 0; i < 4; ++i) {
    out += power_term(k.exponent[i], std::max(0.0, c[i]), kNames[i]);
  }
  out += power_term(k.exponent_s1, std::max(0.0, c[1] + c[2] + c[3]),
                    "1 - p00");
  out += power_term(k.exponent_s2, std::max(0.0, c[2] + c[3]), "p01 + p11");
  return out;
}

}  // namespace

std::string_view family_name(Family f) {
  switch (f) {
    case Family::kBB: return "bb";
    case Family::kGBB: return "gbb";
    case Family::kNBB: return "nbb";
    case Family::kNGBB: return "ngbb";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  if (name == "bb" || name == "BB") return Family::kBB;
  if (name == "gbb" || name == "GBB") return Family::kGBB;
  if (name == "nbb" || name == "NBB") return Family::kNBB;
  if (name == "ngbb" || name == "NGBB") return Family::kNGBB;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown family '" + std::string(name) + "'");
}

bool is_noisy(Family f) { return f == Family::kNBB || f == Family::kNGBB; }
bool is_generalized(Family f) {
  return f == Family::kGBB || f == Family::kNGBB;
}

void validate(const BBParams& p) {
  for (double v : p.m) {
    if (!positive_finite(v)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "Dirichlet concentrations must be positive and finite");
    }
  }
}

void validate(const GDParams& p) {
  for (int j = 0; j < 3; ++j) {
    if (!positive_finite(p.a[j]) || !positive_finite(p.b[j])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "generalized Dirichlet shapes must be positive and finite");
    }
  }
}

void validate(const NoiseParams& n) {
  if (std::isnan(n.kappa) || !(n.kappa > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "kappa must be positive");
  }
}

LatentModel LatentModel::bb(const BBParams& p) {
  validate(p);
  return LatentModel(Family::kBB, p, std::nullopt);
}
LatentModel LatentModel::gbb(const GDParams& p) {
  validate(p);
  return LatentModel(Family::kGBB, p, std::nullopt);
}
LatentModel LatentModel::nbb(const BBParams& p, const NoiseParams& n) {
  validate(p);
  validate(n);
  return LatentModel(Family::kNBB, p, n);
}
LatentModel LatentModel::ngbb(const GDParams& p, const NoiseParams& n) {
  validate(p);
  validate(n);
  return LatentModel(Family::kNGBB, p, n);
}

const BBParams& LatentModel::bb_params() const {
  if (const auto* p = std::get_if<BBParams>(&params_)) return *p;
  throw Error(ErrorCode::kFamilyMismatch, "model has no Dirichlet parameters");
}

const GDParams& LatentModel::gd_params() const {
  if (const auto* p = std::get_if<GDParams>(&params_)) return *p;
  throw Error(ErrorCode::kFamilyMismatch,
              "model has no generalized Dirichlet parameters");
}

const NoiseParams& LatentModel::noise() const {
  if (noise_) return *noise_;
  throw Error(ErrorCode::kFamilyMismatch, "model has no noise layer");
}

LatentModel LatentModel::latent() const {
  if (generalized()) return gbb(gd_params());
  return bb(bb_params());
}

CompositionKernel dirichlet_kernel(const BBParams& m) {
  validate(m);
  CompositionKernel k;
  double log_norm = std::lgamma(m.total());
  for (int i = 0; i < 4; ++i) {
    log_norm -= std::lgamma(m.m[i]);
    k.exponent[i] = m.m[i] - 1.0;
  }
  k.log_norm = log_norm;
  k.min_shape = *std::min_element(m.m.begin(), m.m.end());
  return k;
}

CompositionKernel gd_kernel(const GDParams& g) {
  validate(g);
  CompositionKernel k;
  k.log_norm = -(log_beta(g.a[0], g.b[0]) + log_beta(g.a[1], g.b[1]) +
                 log_beta(g.a[2], g.b[2]));
  k.exponent = {g.a[0] - 1.0, g.a[1] - 1.0, g.a[2] - 1.0, g.b[2] - 1.0};
  k.exponent_s1 = g.b[0] - g.a[1] - g.b[1];
  k.exponent_s2 = g.b[1] - g.a[2] - g.b[2];
  k.min_shape = std::min({g.a[0], g.a[1], g.a[2], g.b[2]});
  return k;
}

CompositionKernel composition_kernel(const LatentModel& model) {
  return model.generalized() ? gd_kernel(model.gd_params())
                             : dirichlet_kernel(model.bb_params());
}

double dirichlet_log_density(const BBParams& m, const CounterfactualProbs& p) {
  return kernel_log_density(dirichlet_kernel(m), p);
}

double gd_log_density(const GDParams& g, const CounterfactualProbs& p) {
  return kernel_log_density(gd_kernel(g), p);
}

CounterfactualProbs dirichlet_sample(const BBParams& m, Rng& rng) {
  validate(m);
  std::array<double, 4> logs{};
  for (int i = 0; i < 4; ++i) logs[i] = log_gamma_variate(m.m[i], rng);
  const double total = log_sum_exp(logs);
  std::array<double, 4> p{};
  for (int i = 0; i < 4; ++i) p[i] = std::exp(logs[i] - total);
  return CounterfactualProbs::from_array(p);
}

CounterfactualProbs gd_sample(const GDParams& g, Rng& rng) {
  validate(g);
  const BetaDraw u1 = beta_variate(g.a[0], g.b[0], rng);
  const BetaDraw u2 = beta_variate(g.a[1], g.b[1], rng);
  const BetaDraw u3 = beta_variate(g.a[2], g.b[2], rng);
  CounterfactualProbs p;
  p.p00 = u1.value;
  p.p10 = std::exp(u2.log_value + u1.log_complement);
  p.p01 = std::exp(u3.log_value + u1.log_complement + u2.log_complement);
  p.p11 = std::exp(u1.log_complement + u2.log_complement + u3.log_complement);
  return p;
}

GDParams gd_from_dirichlet(const BBParams& m) {
  validate(m);
  GDParams g;
  g.a = {m.m[0], m.m[1], m.m[2]};
  g.b = {m.m[1] + m.m[2] + m.m[3], m.m[2] + m.m[3], m.m[3]};
  return g;
}

CounterfactualProbs dirichlet_mean(const BBParams& m) {
  validate(m);
  const double total = m.total();
  return {m.m[0] / total, m.m[1] / total, m.m[2] / total, m.m[3] / total};
}

CounterfactualProbs gd_mean(const GDParams& g) {
  validate(g);
  std::array<double, 3> mu{};
  std::array<double, 3> nu{};
  for (int j = 0; j < 3; ++j) {
    mu[j] = g.a[j] / (g.a[j] + g.b[j]);
    nu[j] = g.b[j] / (g.a[j] + g.b[j]);
  }
  return {mu[0], mu[1] * nu[0], mu[2] * nu[0] * nu[1], nu[0] * nu[1] * nu[2]};
}

Scores scores_from_probs(const CounterfactualProbs& p) {
  return {std::clamp(p.p10 + p.p11, 0.0, 1.0),
          std::clamp(p.p01 + p.p11, 0.0, 1.0)};
}

CounterfactualProbs latent_sample(const LatentModel& model, Rng& rng) {
  return model.generalized() ? gd_sample(model.gd_params(), rng)
                             : dirichlet_sample(model.bb_params(), rng);
}

Scores bb_sample(const LatentModel& model, Rng& rng) {
  if (model.noisy()) {
    throw Error(ErrorCode::kFamilyMismatch,
                "bb_sample needs a noiseless family; use noisy_sample");
  }
  return scores_from_probs(latent_sample(model, rng));
}

double noisy_score(const NoiseParams& n, double latent, Rng& rng) {
  if (n.noiseless() || latent <= 0.0 || latent >= 1.0) return latent;
  return beta_variate(n.kappa * latent, n.kappa * (1.0 - latent), rng).value;
}

NoisyDraw noisy_sample(const LatentModel& model, Rng& rng) {
  if (!model.noisy()) {
    throw Error(ErrorCode::kFamilyMismatch,
                "noisy_sample needs a noisy family; use bb_sample");
  }
  NoisyDraw d;
  d.composition = latent_sample(model, rng);
  d.latent = scores_from_probs(d.composition);
  d.observed.z0 = noisy_score(model.noise(), d.latent.z0, rng);
  d.observed.z1 = noisy_score(model.noise(), d.latent.z1, rng);
  return d;
}

ScoreMoments bb_moments(const BBParams& m) {
  validate(m);
  const double total = m.total();
  const double a = m.m[1] + m.m[3];
  const double b = m.m[2] + m.m[3];
  ScoreMoments out;
  out.mean0 = a / total;
  out.mean1 = b / total;
  out.var0 = out.mean0 * (1.0 - out.mean0) / (total + 1.0);
  out.var1 = out.mean1 * (1.0 - out.mean1) / (total + 1.0);
  out.cov = (m.m[3] * total - a * b) / (total * total * (total + 1.0));
  return out;
}

double noise_log_density(const NoiseParams& n, double observed, double latent) {
  validate(n);
  if (!(observed > 0.0 && observed < 1.0) || !(latent > 0.0 && latent < 1.0)) {
    throw Error(ErrorCode::kDomainError,
                "noise density needs observed and latent inside (0, 1)");
  }
  if (n.noiseless()) {
    throw Error(ErrorCode::kDomainError,
                "noise density is a point mass when kappa is infinite");
  }
  return log_beta_density(observed, n.kappa * latent,
                          n.kappa * (1.0 - latent));
}

}  // namespace bbcf

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

// Latent composition families and the score distributions they induce.
//
// A latent composition pi = (p00, p10, p01, p11) is drawn from a Dirichlet
// (BB) or a stick-breaking generalized Dirichlet (GBB). Scores follow from
// zeta0 = p10 + p11 and zeta1 = p01 + p11. The noisy families (NBB, NGBB)
// add independent mean-preserving beta noise to each score:
//   observed_t ~ Beta(kappa * zeta_t, kappa * (1 - zeta_t)).

#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <variant>

#include "bbcf/core.hpp"
#include "bbcf/special.hpp"

namespace bbcf {

// Dirichlet concentrations (m00, m10, m01, m11).
struct BBParams {
  std::array<double, 4> m{1.0, 1.0, 1.0, 1.0};

  double total() const { return m[0] + m[1] + m[2] + m[3]; }
  friend bool operator==(const BBParams&, const BBParams&) = default;
};

// Stick-breaking shapes in the order p00, p10, p01 (p11 is the remainder):
//   u_j ~ Beta(a_j, b_j), p00 = u1, p10 = u2 (1 - u1),
//   p01 = u3 (1 - u1)(1 - u2), p11 = (1 - u1)(1 - u2)(1 - u3).
struct GDParams {
  std::array<double, 3> a{1.0, 1.0, 1.0};
  std::array<double, 3> b{3.0, 2.0, 1.0};

  friend bool operator==(const GDParams&, const GDParams&) = default;
};

// kappa = +inf is accepted as the "no noise" sentinel.
struct NoiseParams {
  double kappa = 1.0;

  bool noiseless() const { return std::isinf(kappa); }
  friend bool operator==(const NoiseParams&, const NoiseParams&) = default;
};

enum class Family { kBB, kGBB, kNBB, kNGBB };

std::string_view family_name(Family f);
Family parse_family(std::string_view name);
bool is_noisy(Family f);
bool is_generalized(Family f);

class LatentModel {
 public:
  static LatentModel bb(const BBParams& p);
  static LatentModel gbb(const GDParams& p);
  static LatentModel nbb(const BBParams& p, const NoiseParams& n);
  static LatentModel ngbb(const GDParams& p, const NoiseParams& n);

  Family family() const { return family_; }
  bool noisy() const { return is_noisy(family_); }
  bool generalized() const { return is_generalized(family_); }

  // Throws kFamilyMismatch when the model holds the other parameter kind.
  const BBParams& bb_params() const;
  const GDParams& gd_params() const;
  const NoiseParams& noise() const;

  // Same latent composition without the noise layer (NBB -> BB, NGBB -> GBB).
  LatentModel latent() const;

  friend bool operator==(const LatentModel&, const LatentModel&) = default;

 private:
  LatentModel(Family f, std::variant<BBParams, GDParams> p,
              std::optional<NoiseParams> n)
      : family_(f), params_(p), noise_(n) {}

  Family family_;
  std::variant<BBParams, GDParams> params_;
  std::optional<NoiseParams> noise_;
};

void validate(const BBParams& p);
void validate(const GDParams& p);
void validate(const NoiseParams& n);

// Log-density kernel shared by both families along the simplex:
//   log f(p) = log_norm + sum_k e[k] log p_k + e_s1 log(1 - p00)
//              + e_s2 log(p01 + p11).
struct CompositionKernel {
  double log_norm = 0.0;
  std::array<double, 4> exponent{};
  double exponent_s1 = 0.0;
  double exponent_s2 = 0.0;
  // Smallest shape parameter; controls endpoint singularities.
  double min_shape = 1.0;
};

CompositionKernel dirichlet_kernel(const BBParams& m);
CompositionKernel gd_kernel(const GDParams& g);
CompositionKernel composition_kernel(const LatentModel& model);

double dirichlet_log_density(const BBParams& m, const CounterfactualProbs& p);
CounterfactualProbs dirichlet_sample(const BBParams& m, Rng& rng);

double gd_log_density(const GDParams& g, const CounterfactualProbs& p);
CounterfactualProbs gd_sample(const GDParams& g, Rng& rng);

// Generalized Dirichlet that coincides with Dirichlet(m):
// a = (m00, m10, m01), b = (m10 + m01 + m11, m01 + m11, m11).
GDParams gd_from_dirichlet(const BBParams& m);

// E[pi] under either family.
CounterfactualProbs dirichlet_mean(const BBParams& m);
CounterfactualProbs gd_mean(const GDParams& g);

Scores scores_from_probs(const CounterfactualProbs& p);

CounterfactualProbs latent_sample(const LatentModel& model, Rng& rng);

// BB/GBB only; kFamilyMismatch otherwise.
Scores bb_sample(const LatentModel& model, Rng& rng);

struct NoisyDraw {
  Scores observed;
  Scores latent;
  CounterfactualProbs composition;
};

// NBB/NGBB only; kFamilyMismatch otherwise. Latent scores at exactly 0 or 1
// are reported unchanged.
NoisyDraw noisy_sample(const LatentModel& model, Rng& rng);

// One arm of beta noise around `latent`.
double noisy_score(const NoiseParams& n, double latent, Rng& rng);

// First and second moments of the score pair.
struct ScoreMoments {
  double mean0 = 0.0;
  double mean1 = 0.0;
  double var0 = 0.0;
  double var1 = 0.0;
  double cov = 0.0;
};

ScoreMoments bb_moments(const BBParams& m);

// log Beta(kappa * latent, kappa * (1 - latent)) density at `observed`.
// Both arguments must lie strictly inside (0, 1).
double noise_log_density(const NoiseParams& n, double observed, double latent);

}  // namespace bbcf

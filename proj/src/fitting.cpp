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

#include "bbcf/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bbcf/errors.hpp"
#include "bbcf/inference.hpp"
#include "bbcf/optimize.hpp"

namespace bbcf {
namespace {

constexpr double kScoreEdge = 1e-9;
constexpr double kLatentVarianceFloor = 1e-8;
// Largest |correlation| allowed in deconvolved moments.
constexpr double kMaxCorrelation = 0.999;
// Log-parameters are kept within this bound during the simplex search.
constexpr double kMaxLogShape = 30.0;

double arm_total(double mean, double var, const char* which) {
  if (!(mean > 0.0 && mean < 1.0)) {
    throw Error(ErrorCode::kDegenerateVariance,
                std::string("mean") + which + " must lie strictly inside (0, 1)");
  }
  if (!(var > 0.0) || !std::isfinite(var)) {
    throw Error(ErrorCode::kDegenerateVariance,
                std::string("var") + which + " is zero");
  }
  const double total = mean * (1.0 - mean) / var - 1.0;
  if (!(total > 0.0)) {
    throw Error(ErrorCode::kDegenerateVariance,
                std::string("var") + which +
                    " exceeds the Bernoulli bound mean (1 - mean)");
  }
  return total;
}

struct Cholesky2 {
  double l00, l10, l11;
};

Cholesky2 cholesky(double v0, double v1, double c) {
  const double l00 = std::sqrt(v0);
  const double l10 = c / l00;
  const double rest = v1 - l10 * l10;
  if (!(rest > 0.0)) {
    throw Error(ErrorCode::kDegenerateVariance,
                "score covariance matrix is singular");
  }
  return {l00, l10, std::sqrt(rest)};
}

double min_shape(const GDParams& g) {
  return std::min({g.a[0], g.a[1], g.a[2], g.b[2]});
}

}  // namespace

std::string_view m_combination_name(MCombination c) {
  return c == MCombination::kArithmetic ? "arithmetic" : "geometric";
}

MCombination parse_m_combination(std::string_view name) {
  if (name == "arithmetic") return MCombination::kArithmetic;
  if (name == "geometric") return MCombination::kGeometric;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown M combination '" + std::string(name) + "'");
}

void validate(const FitConfig& cfg) {
  if (!(cfg.epsilon > 0.0) || cfg.max_evaluations < 0 ||
      cfg.quadrature_nodes < 3 || !(cfg.rel_tol > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "fit config needs epsilon > 0, budget >= 0, nodes >= 3");
  }
  if (cfg.kappa && (std::isnan(*cfg.kappa) || !(*cfg.kappa > 0.0))) {
    throw Error(ErrorCode::kInvalidArgument, "kappa must be positive");
  }
}

SampleMoments sample_moments(std::span<const Scores> sample) {
  const std::size_t n = sample.size();
  if (n < 4) {
    throw Error(ErrorCode::kTooFewSamples,
                "need at least 4 score pairs, got " + std::to_string(n));
  }
  SampleMoments m;
  for (const Scores& s : sample) {
    m.mean0 += s.z0;
    m.mean1 += s.z1;
  }
  m.mean0 /= static_cast<double>(n);
  m.mean1 /= static_cast<double>(n);
  for (const Scores& s : sample) {
    const double d0 = s.z0 - m.mean0;
    const double d1 = s.z1 - m.mean1;
    m.var0 += d0 * d0;
    m.var1 += d1 * d1;
    m.cov += d0 * d1;
  }
  const double denom = static_cast<double>(n - 1);
  m.var0 /= denom;
  m.var1 /= denom;
  m.cov /= denom;
  return m;
}

MomentFit fit_bb_mom_from_moments(const SampleMoments& mo,
                                  const FitConfig& cfg) {
  validate(cfg);
  const double t0 = arm_total(mo.mean0, mo.var0, "0");
  const double t1 = arm_total(mo.mean1, mo.var1, "1");
  const double total = cfg.combination == MCombination::kArithmetic
                           ? 0.5 * (t0 + t1)
                           : std::sqrt(t0 * t1);
  const double m11 = total * (mo.cov * (total + 1.0) + mo.mean0 * mo.mean1);
  const double m10 = mo.mean0 * total - m11;
  const double m01 = mo.mean1 * total - m11;
  const double m00 = total - m10 - m01 - m11;
  MomentFit fit;
  fit.moments = mo;
  const std::array<double, 4> raw{m00, m10, m01, m11};
  for (int i = 0; i < 4; ++i) {
    if (!(raw[i] >= cfg.epsilon)) {
      fit.params.m[i] = cfg.epsilon;
      fit.clamped = true;
    } else {
      fit.params.m[i] = raw[i];
    }
  }
  return fit;
}

MomentFit fit_bb_mom(std::span<const Scores> sample, const FitConfig& cfg) {
  return fit_bb_mom_from_moments(sample_moments(sample), cfg);
}

GBBFit fit_gbb(std::span<const Scores> sample, const FitConfig& cfg) {
  const MomentFit mom = fit_bb_mom(sample, cfg);
  GBBFit fit;
  fit.initial = gd_from_dirichlet(mom.params);
  fit.params = fit.initial;
  fit.clamped = mom.clamped;

  const UnitNodes nodes =
      make_unit_nodes(QuadratureRule::kTanhSinh, cfg.quadrature_nodes,
                      tanh_sinh_range(std::min(0.05, min_shape(fit.initial))));
  const SegmentLogTable table(sample, nodes, kScoreEdge);
  const double n = static_cast<double>(sample.size());
  const double log_eps = std::log(cfg.epsilon);

  auto unpack = [](std::span<const double> theta) {
    GDParams g;
    for (int j = 0; j < 3; ++j) {
      g.a[j] = std::exp(theta[j]);
      g.b[j] = std::exp(theta[3 + j]);
    }
    return g;
  };
  auto objective = [&](std::span<const double> theta) {
    for (double t : theta) {
      if (t < log_eps || t > kMaxLogShape) {
        return std::numeric_limits<double>::infinity();
      }
    }
    return -table.log_likelihood(gd_kernel(unpack(theta))) / n;
  };

  fit.initial_log_likelihood = table.log_likelihood(gd_kernel(fit.initial));
  fit.log_likelihood = fit.initial_log_likelihood;
  if (!std::isfinite(fit.initial_log_likelihood)) {
    throw Error(ErrorCode::kOptimizerFailure,
                "likelihood is not finite at the moment-based initialization");
  }
  if (cfg.max_evaluations == 0) return fit;

  std::vector<double> theta0(6);
  for (int j = 0; j < 3; ++j) {
    theta0[j] = std::log(fit.initial.a[j]);
    theta0[3 + j] = std::log(fit.initial.b[j]);
  }
  NelderMeadOptions options;
  options.max_evaluations = cfg.max_evaluations;
  options.rel_tol = cfg.rel_tol;
  const OptimizeResult r = nelder_mead(objective, theta0, options);
  fit.evaluations = r.evaluations;
  fit.converged = r.converged;
  const GDParams best = unpack(r.x);
  const double ll = table.log_likelihood(gd_kernel(best));
  if (ll > fit.initial_log_likelihood) {
    fit.params = best;
    fit.log_likelihood = ll;
  }
  return fit;
}

DeconvolvedMoments deconvolve_moments(const SampleMoments& raw,
                                      const NoiseParams& noise) {
  validate(noise);
  DeconvolvedMoments out{raw, false};
  if (noise.noiseless()) return out;
  const double k = noise.kappa;
  auto latent_var = [&](double mean, double var) {
    const double v = (var * (k + 1.0) - mean * (1.0 - mean)) / k;
    if (!(v >= kLatentVarianceFloor)) {
      out.floored = true;
      return kLatentVarianceFloor;
    }
    return v;
  };
  out.moments.var0 = latent_var(raw.mean0, raw.var0);
  out.moments.var1 = latent_var(raw.mean1, raw.var1);
  return out;
}

DeconvolvedSample deconvolve_sample(std::span<const Scores> sample,
                                    const NoiseParams& noise) {
  const SampleMoments raw = sample_moments(sample);
  DeconvolvedMoments lat = deconvolve_moments(raw, noise);
  DeconvolvedSample out;
  out.floored = lat.floored;
  SampleMoments& m = lat.moments;
  const double bound = kMaxCorrelation * std::sqrt(m.var0 * m.var1);
  if (std::abs(m.cov) > bound) {
    m.cov = std::copysign(bound, m.cov);
    out.floored = true;
  }
  const Cholesky2 r = cholesky(raw.var0, raw.var1, raw.cov);
  const Cholesky2 l = cholesky(m.var0, m.var1, m.cov);
  // A = L_latent L_raw^{-1}, both lower triangular.
  const double i00 = 1.0 / r.l00;
  const double i11 = 1.0 / r.l11;
  const double i10 = -r.l10 * i00 * i11;
  const double a00 = l.l00 * i00;
  const double a10 = l.l10 * i00 + l.l11 * i10;
  const double a11 = l.l11 * i11;
  out.sample.reserve(sample.size());
  for (const Scores& s : sample) {
    const double d0 = s.z0 - raw.mean0;
    const double d1 = s.z1 - raw.mean1;
    out.sample.push_back(
        {std::clamp(raw.mean0 + a00 * d0, kScoreEdge, 1.0 - kScoreEdge),
         std::clamp(raw.mean1 + a10 * d0 + a11 * d1, kScoreEdge,
                    1.0 - kScoreEdge)});
  }
  return out;
}

double default_kappa(std::size_t n_arm) {
  if (n_arm == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "default kappa needs a positive per-arm training count");
  }
  return static_cast<double>(n_arm) / 10.0;
}

FitResult fit_model(Family family, std::span<const Scores> sample,
                    const FitConfig& cfg, std::size_t n_arm) {
  validate(cfg);
  FitResult out;
  out.sample_size = sample.size();
  if (family == Family::kBB) {
    const MomentFit f = fit_bb_mom(sample, cfg);
    out.model = LatentModel::bb(f.params);
    out.clamped = f.clamped;
    return out;
  }
  if (family == Family::kGBB) {
    GBBFit g = fit_gbb(sample, cfg);
    out.model = LatentModel::gbb(g.params);
    out.clamped = g.clamped;
    out.gbb = std::move(g);
    return out;
  }
  const NoiseParams noise{cfg.kappa ? *cfg.kappa : default_kappa(n_arm)};
  validate(noise);
  if (family == Family::kNBB) {
    SampleMoments mo = sample_moments(sample);
    if (cfg.deconvolve) {
      const DeconvolvedMoments d = deconvolve_moments(mo, noise);
      mo = d.moments;
      out.variance_floored = d.floored;
    }
    const MomentFit f = fit_bb_mom_from_moments(mo, cfg);
    out.model = LatentModel::nbb(f.params, noise);
    out.clamped = f.clamped;
    return out;
  }
  GBBFit g;
  if (cfg.deconvolve) {
    const DeconvolvedSample d = deconvolve_sample(sample, noise);
    out.variance_floored = d.floored;
    g = fit_gbb(d.sample, cfg);
  } else {
    g = fit_gbb(sample, cfg);
  }
  out.model = LatentModel::ngbb(g.params, noise);
  out.clamped = g.clamped;
  out.gbb = std::move(g);
  return out;
}

double score_log_likelihood(const LatentModel& model,
                            std::span<const Scores> sample,
                            const UnitNodes& nodes) {
  if (model.noisy()) {
    throw Error(ErrorCode::kFamilyMismatch,
                "score likelihood is defined for noiseless families");
  }
  const SegmentLogTable table(sample, nodes, kScoreEdge);
  return table.log_likelihood(composition_kernel(model));
}

double score_log_likelihood(const LatentModel& model,
                            std::span<const Scores> sample, int nodes) {
  const CompositionKernel k = composition_kernel(model);
  return score_log_likelihood(
      model, sample,
      make_unit_nodes(QuadratureRule::kTanhSinh, nodes,
                      tanh_sinh_range(k.min_shape)));
}

}  // namespace bbcf

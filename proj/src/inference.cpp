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

#include "bbcf/inference.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "bbcf/errors.hpp"

namespace bbcf {
namespace {

constexpr double kObservedEdge = 1e-9;
// Weights more than this far below the maximum (in log) are dropped.
constexpr double kLogWeightCutoff = 46.0;

double safe_log(double v) { return v > 0.0 ? std::log(v) : kNegInf; }

// Logs of the four components and of 1 - p00 at one node.
struct NodeLogs {
  double lp00, lp10, lp01, lp11, ls1;
};

NodeLogs node_logs(double l_lower, double l00, double l10, double l01,
                   double l_width, double log_x, double log_1mx) {
  NodeLogs n;
  const double lx = l_width + log_x;
  const double lxc = l_width + log_1mx;
  n.lp11 = log_add_exp(l_lower, lx);
  n.lp00 = log_add_exp(l00, lx);
  n.lp10 = log_add_exp(l10, lxc);
  n.lp01 = log_add_exp(l01, lxc);
  n.ls1 = log_add_exp(log_add_exp(n.lp10, n.lp01), n.lp11);
  return n;
}

double kernel_at(const CompositionKernel& k, const NodeLogs& n,
                 double s2_term) {
  double v = k.log_norm + s2_term;
  if (k.exponent[0] != 0.0) v += k.exponent[0] * n.lp00;
  if (k.exponent[1] != 0.0) v += k.exponent[1] * n.lp10;
  if (k.exponent[2] != 0.0) v += k.exponent[2] * n.lp01;
  if (k.exponent[3] != 0.0) v += k.exponent[3] * n.lp11;
  if (k.exponent_s1 != 0.0) v += k.exponent_s1 * n.ls1;
  return v;
}

CompositionKernel noiseless_kernel(const LatentModel& model) {
  if (model.noisy()) {
    throw Error(ErrorCode::kFamilyMismatch,
                "exact-score posterior needs a noiseless family");
  }
  return composition_kernel(model);
}

CounterfactualProbs probs_on_segment(const Segment& seg, double ex,
                                     double e1mx) {
  return {seg.off00 + seg.width * ex, seg.off10 + seg.width * e1mx,
          seg.off01 + seg.width * e1mx, seg.lower + seg.width * ex};
}

}  // namespace

std::string_view noisy_proposal_name(NoisyProposal p) {
  switch (p) {
    case NoisyProposal::kAuto: return "auto";
    case NoisyProposal::kPrior: return "prior";
    case NoisyProposal::kScore: return "score";
  }
  return "?";
}

NoisyProposal parse_noisy_proposal(std::string_view name) {
  if (name == "auto") return NoisyProposal::kAuto;
  if (name == "prior") return NoisyProposal::kPrior;
  if (name == "score") return NoisyProposal::kScore;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown proposal '" + std::string(name) + "'");
}

void validate(const QuadratureConfig& q) {
  if (q.nodes < 3 || q.inner_nodes < 3 || q.mc_draws < 1 ||
      q.score_draws < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "quadrature and Monte Carlo budgets must be positive");
  }
  if (!(q.tolerance > 0.0) || !(q.min_ess > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "tolerance and minimum ESS must be positive");
  }
}

CounterfactualProbs population_estimate(const LatentModel& model) {
  return model.generalized() ? gd_mean(model.gd_params())
                             : dirichlet_mean(model.bb_params());
}

Segment make_segment(const Scores& s) {
  const FrechetInterval b = frechet_bounds(s);
  Segment seg;
  seg.lower = b.lower;
  seg.width = std::max(0.0, b.upper - b.lower);
  seg.off00 = std::max(0.0, 1.0 - s.z0 - s.z1);
  seg.off10 = s.z0 - b.upper;
  seg.off01 = s.z1 - b.upper;
  seg.z1 = s.z1;
  return seg;
}

double posterior_log_density_p11(const LatentModel& model, const Scores& s,
                                 double p11) {
  noiseless_kernel(model);
  const FrechetInterval b = frechet_bounds(s);
  if (b.degenerate()) {
    throw Error(ErrorCode::kDegenerateSegment,
                "Frechet interval is a single point");
  }
  if (!(p11 > b.lower && p11 < b.upper)) {
    throw Error(ErrorCode::kDomainError,
                "p11 must lie strictly inside the Frechet interval");
  }
  const CounterfactualProbs p = probs_from_p11(s, p11);
  return model.generalized() ? gd_log_density(model.gd_params(), p)
                             : dirichlet_log_density(model.bb_params(), p);
}

SegmentPosterior::SegmentPosterior(const LatentModel& model,
                                   const QuadratureConfig& q)
    : SegmentPosterior(noiseless_kernel(model), q.rule, q.nodes,
                       q.tolerance) {}

SegmentPosterior::SegmentPosterior(const CompositionKernel& kernel,
                                   QuadratureRule rule, int nodes,
                                   double tolerance)
    : kernel_(kernel),
      nodes_(make_unit_nodes(rule, nodes, tanh_sinh_range(kernel.min_shape))),
      tolerance_(tolerance) {}

PosteriorResult SegmentPosterior::evaluate_unchecked(const Scores& s) const {
  const Segment seg = make_segment(s);
  PosteriorResult r;
  if (!(seg.width > 0.0)) {
    r.mean = probs_from_p11(s, seg.lower);
    r.degenerate = true;
    return r;
  }
  const double l_width = std::log(seg.width);
  const double l_lower = safe_log(seg.lower);
  const double l00 = safe_log(seg.off00);
  const double l10 = safe_log(seg.off10);
  const double l01 = safe_log(seg.off01);
  const double s2_term =
      kernel_.exponent_s2 != 0.0 ? kernel_.exponent_s2 * std::log(seg.z1) : 0.0;

  const std::size_t n = nodes_.nodes.size();
  std::vector<double> fx, f1mx, cx, c1mx;
  fx.reserve(n);
  f1mx.reserve(n);
  cx.reserve(n);
  c1mx.reserve(n);
  for (const UnitNode& node : nodes_.nodes) {
    const NodeLogs logs = node_logs(l_lower, l00, l10, l01, l_width,
                                    node.log_x, node.log_1mx);
    const double v = kernel_at(kernel_, logs, s2_term);
    if (node.log_w_fine != kNegInf) {
      fx.push_back(v + node.log_w_fine + node.log_x);
      f1mx.push_back(v + node.log_w_fine + node.log_1mx);
    }
    if (node.log_w_coarse != kNegInf) {
      cx.push_back(v + node.log_w_coarse + node.log_x);
      c1mx.push_back(v + node.log_w_coarse + node.log_1mx);
    }
  }
  const double lix = log_sum_exp(fx);
  const double li1mx = log_sum_exp(f1mx);
  const double li = log_add_exp(lix, li1mx);
  if (!std::isfinite(li)) {
    throw Error(ErrorCode::kQuadratureFailure,
                "posterior normalizing integral is not finite");
  }
  const double ex = std::exp(lix - li);
  const double e1mx = std::exp(li1mx - li);

  const double clix = log_sum_exp(cx);
  const double cli1mx = log_sum_exp(c1mx);
  const double cli = log_add_exp(clix, cli1mx);
  const double cex = std::isfinite(cli) ? std::exp(clix - cli) : 0.5;

  r.mean = probs_on_segment(seg, ex, e1mx);
  r.log_evidence = li + l_width;
  r.error_estimate = seg.width * std::abs(ex - cex);
  r.nodes = static_cast<int>(n);
  return r;
}

PosteriorResult SegmentPosterior::operator()(const Scores& s) const {
  PosteriorResult r = evaluate_unchecked(s);
  if (r.error_estimate > tolerance_) {
    throw Error(ErrorCode::kQuadratureFailure,
                "error estimate " + std::to_string(r.error_estimate) +
                    " exceeds tolerance at the node budget");
  }
  return r;
}

PosteriorResult posterior_mean(const LatentModel& model, const Scores& s,
                               const QuadratureConfig& q) {
  validate(q);
  return SegmentPosterior(model, q)(s);
}

NoisyPosterior::NoisyPosterior(const LatentModel& model,
                               const QuadratureConfig& q)
    : model_(model),
      q_(q),
      kappa_(model.noise().kappa),
      inner_(composition_kernel(model.latent()), q.rule, q.inner_nodes,
             q.tolerance) {
  validate(q);
  if (!model.noisy()) {
    throw Error(ErrorCode::kFamilyMismatch,
                "noisy posterior needs NBB or NGBB");
  }
}

void NoisyPosterior::ensure_prior_draws() const {
  if (have_draws_) return;
  const std::size_t k = static_cast<std::size_t>(q_.mc_draws);
  ca0_.resize(k);
  cb0_.resize(k);
  cc0_.resize(k);
  ca1_.resize(k);
  cb1_.resize(k);
  cc1_.resize(k);
  draws_.resize(k);
  Rng rng(mix_seed(q_.seed, 0));
  const LatentModel latent = model_.latent();
  auto coefficients = [this](double zeta, double& ca, double& cb, double& cc) {
    if (zeta <= 0.0 || zeta >= 1.0) {
      ca = 0.0;
      cb = 0.0;
      cc = std::numeric_limits<double>::infinity();
      return;
    }
    const double a = kappa_ * zeta;
    const double b = kappa_ * (1.0 - zeta);
    ca = a - 1.0;
    cb = b - 1.0;
    cc = log_beta(a, b);
  };
  for (std::size_t i = 0; i < k; ++i) {
    draws_[i] = latent_sample(latent, rng);
    const Scores z = scores_from_probs(draws_[i]);
    coefficients(z.z0, ca0_[i], cb0_[i], cc0_[i]);
    coefficients(z.z1, ca1_[i], cb1_[i], cc1_[i]);
  }
  have_draws_ = true;
}

PosteriorResult NoisyPosterior::prior_is(double lo0, double l1o0, double lo1,
                                         double l1o1) const {
  ensure_prior_draws();
  const std::size_t k = draws_.size();
  std::vector<double> lw(k);
  double max_lw = kNegInf;
  for (std::size_t i = 0; i < k; ++i) {
    lw[i] = ca0_[i] * lo0 + cb0_[i] * l1o0 - cc0_[i] + ca1_[i] * lo1 +
            cb1_[i] * l1o1 - cc1_[i];
    max_lw = std::max(max_lw, lw[i]);
  }
  PosteriorResult r;
  r.draws = static_cast<int>(k);
  if (!std::isfinite(max_lw)) {
    r.ess = 0.0;
    return r;
  }
  double sw = 0.0, sw2 = 0.0;
  std::array<double, 4> acc{};
  std::array<double, 4> acc2{};
  for (std::size_t i = 0; i < k; ++i) {
    const double d = lw[i] - max_lw;
    if (d < -kLogWeightCutoff) continue;
    const double w = std::exp(d);
    sw += w;
    sw2 += w * w;
    const std::array<double, 4> p = draws_[i].to_array();
    for (int c = 0; c < 4; ++c) acc[c] += w * p[c];
    acc2[3] += w * w * p[3] * p[3];
  }
  for (int c = 0; c < 4; ++c) acc[c] /= sw;
  r.mean = CounterfactualProbs::from_array(acc);
  r.ess = sw * sw / sw2;
  r.log_evidence = max_lw + std::log(sw) - std::log(static_cast<double>(k));
  // Delta-method standard error of the self-normalized estimate of p11:
  // sum w^2 (p - mean)^2 / (sum w)^2.
  double var = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double d = lw[i] - max_lw;
    if (d < -kLogWeightCutoff) continue;
    const double w = std::exp(d);
    const double e = draws_[i].p11 - r.mean.p11;
    var += w * w * e * e;
  }
  r.error_estimate = std::sqrt(var) / sw;
  return r;
}

PosteriorResult NoisyPosterior::score_is(const Scores& observed) const {
  // Defensive mixture proposal. Even draws: per arm
  // Beta(k' o + 1, k' (1 - o) + 1) with k' = kappa / 2, a slightly wider
  // version of the noise likelihood seen as a function of the latent score.
  // Odd draws: latent scores from the prior. Weights use the mixture density,
  // so they stay bounded when the prior dominates the likelihood.
  const double kp = 0.5 * kappa_;
  const double a0 = kp * observed.z0 + 1.0, b0 = kp * (1.0 - observed.z0) + 1.0;
  const double a1 = kp * observed.z1 + 1.0, b1 = kp * (1.0 - observed.z1) + 1.0;
  const NoiseParams noise{kappa_};
  const LatentModel latent = model_.latent();
  const double log_half = -std::log(2.0);

  Rng rng(mix_seed(q_.seed, 1));
  const std::size_t k = static_cast<std::size_t>(q_.score_draws);
  std::vector<double> lw(k, kNegInf);
  std::vector<CounterfactualProbs> cond(k);
  double max_lw = kNegInf;
  for (std::size_t i = 0; i < k; ++i) {
    double zeta0 = 0.0, zeta1 = 0.0;
    if (i % 2 == 0) {
      zeta0 = beta_variate(a0, b0, rng).value;
      zeta1 = beta_variate(a1, b1, rng).value;
    } else {
      const Scores z = scores_from_probs(latent_sample(latent, rng));
      zeta0 = z.z0;
      zeta1 = z.z1;
    }
    if (!(zeta0 > 0.0 && zeta0 < 1.0 && zeta1 > 0.0 && zeta1 < 1.0)) continue;
    const PosteriorResult seg = inner_.evaluate_unchecked({zeta0, zeta1});
    if (seg.degenerate || !std::isfinite(seg.log_evidence)) continue;
    cond[i] = seg.mean;
    const double lq = log_beta_density(zeta0, a0, b0) +
                      log_beta_density(zeta1, a1, b1);
    const std::array<double, 2> mix{log_half + lq, log_half + seg.log_evidence};
    lw[i] = noise_log_density(noise, observed.z0, zeta0) +
            noise_log_density(noise, observed.z1, zeta1) + seg.log_evidence -
            log_sum_exp(mix);
    max_lw = std::max(max_lw, lw[i]);
  }
  PosteriorResult r;
  r.draws = static_cast<int>(k);
  r.nodes = q_.inner_nodes;
  if (!std::isfinite(max_lw)) {
    r.ess = 0.0;
    return r;
  }
  double sw = 0.0, sw2 = 0.0;
  std::array<double, 4> acc{};
  for (std::size_t i = 0; i < k; ++i) {
    const double d = lw[i] - max_lw;
    if (d < -kLogWeightCutoff) continue;
    const double w = std::exp(d);
    sw += w;
    sw2 += w * w;
    const std::array<double, 4> p = cond[i].to_array();
    for (int c = 0; c < 4; ++c) acc[c] += w * p[c];
  }
  for (int c = 0; c < 4; ++c) acc[c] /= sw;
  r.mean = CounterfactualProbs::from_array(acc);
  r.ess = sw * sw / sw2;
  r.log_evidence = max_lw + std::log(sw) - std::log(static_cast<double>(k));
  double var = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double d = lw[i] - max_lw;
    if (d < -kLogWeightCutoff) continue;
    const double w = std::exp(d);
    const double e = cond[i].p11 - r.mean.p11;
    var += w * w * e * e;
  }
  r.error_estimate = std::sqrt(var) / sw;
  return r;
}

PosteriorResult NoisyPosterior::operator()(const Scores& observed_in) const {
  Scores observed{std::clamp(observed_in.z0, kObservedEdge, 1.0 - kObservedEdge),
                  std::clamp(observed_in.z1, kObservedEdge, 1.0 - kObservedEdge)};
  if (std::isinf(kappa_)) {
    return inner_(observed_in);
  }
  PosteriorResult r;
  if (q_.proposal == NoisyProposal::kScore) {
    r = score_is(observed);
  } else {
    r = prior_is(std::log(observed.z0), std::log1p(-observed.z0),
                 std::log(observed.z1), std::log1p(-observed.z1));
    if (q_.proposal == NoisyProposal::kAuto && !(r.ess >= q_.auto_switch_ess)) {
      PosteriorResult s = score_is(observed);
      if (!(s.ess <= r.ess)) r = s;
    }
  }
  if (!(r.ess >= q_.min_ess)) {
    throw Error(ErrorCode::kEffectiveSampleSizeTooLow,
                "effective sample size " + std::to_string(r.ess) +
                    " below the minimum of " + std::to_string(q_.min_ess));
  }
  return r;
}

PosteriorResult posterior_mean_noisy(const LatentModel& model,
                                     const Scores& observed,
                                     const QuadratureConfig& q) {
  return NoisyPosterior(model, q)(observed);
}

SegmentLogTable::SegmentLogTable(std::span<const Scores> sample,
                                 const UnitNodes& nodes, double edge)
    : points_(sample.size()) {
  std::vector<const UnitNode*> fine;
  for (const UnitNode& n : nodes.nodes) {
    if (n.log_w_fine != kNegInf) fine.push_back(&n);
  }
  nodes_ = fine.size();
  table_.resize(points_ * nodes_ * kStride);
  log_width_.resize(points_);
  log_z1_.resize(points_);
  for (std::size_t i = 0; i < points_; ++i) {
    const Scores s{std::clamp(sample[i].z0, edge, 1.0 - edge),
                   std::clamp(sample[i].z1, edge, 1.0 - edge)};
    const Segment seg = make_segment(s);
    const double l_width = std::log(std::max(seg.width, 1e-300));
    log_width_[i] = l_width;
    log_z1_[i] = std::log(seg.z1);
    const double l_lower = safe_log(seg.lower);
    const double l00 = safe_log(seg.off00);
    const double l10 = safe_log(seg.off10);
    const double l01 = safe_log(seg.off01);
    double* row = &table_[i * nodes_ * kStride];
    for (std::size_t j = 0; j < nodes_; ++j) {
      const NodeLogs logs = node_logs(l_lower, l00, l10, l01, l_width,
                                      fine[j]->log_x, fine[j]->log_1mx);
      double* cell = row + j * kStride;
      cell[0] = logs.lp00;
      cell[1] = logs.lp10;
      cell[2] = logs.lp01;
      cell[3] = logs.lp11;
      cell[4] = logs.ls1;
      cell[5] = fine[j]->log_w_fine;
    }
  }
}

double SegmentLogTable::log_likelihood(const CompositionKernel& k) const {
  std::vector<double> v(nodes_);
  const double e0 = k.exponent[0], e1 = k.exponent[1], e2 = k.exponent[2],
               e3 = k.exponent[3], es1 = k.exponent_s1;
  double total = 0.0;
  for (std::size_t i = 0; i < points_; ++i) {
    const double* row = &table_[i * nodes_ * kStride];
    double max_v = kNegInf;
    for (std::size_t j = 0; j < nodes_; ++j) {
      const double* c = row + j * kStride;
      v[j] = e0 * c[0] + e1 * c[1] + e2 * c[2] + e3 * c[3] + es1 * c[4] + c[5];
      max_v = std::max(max_v, v[j]);
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < nodes_; ++j) sum += std::exp(v[j] - max_v);
    total += max_v + std::log(sum) + log_width_[i] +
             k.exponent_s2 * log_z1_[i];
  }
  return total + static_cast<double>(points_) * k.log_norm;
}

}  // namespace bbcf

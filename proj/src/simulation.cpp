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

#include "bbcf/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "bbcf/errors.hpp"
#include "bbcf/special.hpp"

namespace bbcf {
namespace {

// Nominal costs in seconds, used by the budget check so that skipping is a
// function of the configuration alone.
constexpr double kRecordCost = 2e-8;
constexpr double kTableNodeCost = 5e-9;
constexpr double kSegmentNodeCost = 6e-8;
constexpr double kPriorWeightCost = 3e-9;
constexpr double kDrawCost = 1e-6;

constexpr std::uint64_t kUpliftStream = 7;

double p11_from_copula(Copula c, double rho, const Scores& s) {
  const FrechetInterval b = frechet_bounds(s);
  if (b.degenerate()) return b.lower;
  double p11 = 0.0;
  switch (c) {
    case Copula::kIndependent: p11 = s.z0 * s.z1; break;
    case Copula::kComonotone: p11 = b.upper; break;
    case Copula::kGaussian:
      p11 = bivariate_normal_cdf(normal_quantile(s.z0), normal_quantile(s.z1),
                                 rho);
      break;
  }
  return std::clamp(p11, b.lower, b.upper);
}

// Draws (y0, y1) from the joint composition.
std::pair<int, int> draw_outcomes(const CounterfactualProbs& p, Rng& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (u < p.p00) return {0, 0};
  if (u < p.p00 + p.p10) return {1, 0};
  if (u < p.p00 + p.p10 + p.p01) return {0, 1};
  return {1, 1};
}

double mean_sigmoid(const std::vector<double>& eta, double c) {
  double s = 0.0;
  for (double e : eta) s += sigmoid(e + c);
  return s / static_cast<double>(eta.size());
}

// Offset c with mean sigmoid(eta + c) = rate, by bisection.
double calibrate_offset(const std::vector<double>& eta, double rate) {
  double lo = -40.0, hi = 40.0;
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_sigmoid(eta, mid) < rate ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

CounterfactualProbs average(const std::vector<CounterfactualProbs>& v) {
  std::array<double, 4> acc{};
  for (const CounterfactualProbs& p : v) {
    const std::array<double, 4> a = p.to_array();
    for (int c = 0; c < 4; ++c) acc[c] += a[c];
  }
  for (double& a : acc) a /= static_cast<double>(v.size());
  return CounterfactualProbs::from_array(acc);
}

Family family_of(Estimator e) {
  switch (e) {
    case Estimator::kBB: return Family::kBB;
    case Estimator::kNBB: return Family::kNBB;
    case Estimator::kGBB: return Family::kGBB;
    case Estimator::kNGBB: return Family::kNGBB;
    default: break;
  }
  throw Error(ErrorCode::kInvalidArgument, "baseline has no model family");
}

double noisy_inference_cost(const QuadratureConfig& q) {
  const double prior = q.mc_draws * kPriorWeightCost;
  const double score =
      q.score_draws * (q.inner_nodes * kSegmentNodeCost + 2.0 * kDrawCost);
  switch (q.proposal) {
    case NoisyProposal::kPrior: return prior;
    case NoisyProposal::kScore: return score;
    case NoisyProposal::kAuto: return prior + score;
  }
  return prior + score;
}

struct RepOutcome {
  std::array<std::array<double, 2>, kEstimatorCount> value{};
  std::array<std::array<bool, 2>, kEstimatorCount> failed{};
  std::array<std::array<std::string, 2>, kEstimatorCount> reason;
  std::array<std::array<double, 2>, kEstimatorCount> seconds{};
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

RepOutcome run_repetition(
    const SimConfig& cfg, int rep,
    const std::array<std::array<bool, 2>, kEstimatorCount>& active) {
  RepOutcome out;
  const std::uint64_t seed = repetition_seed(cfg, rep);
  const SimulatedDataset data = generate(cfg, rep);
  const PredictedScores pred = predict_dataset(cfg, data, seed);
  std::vector<Scores> fit_sample;
  fit_sample.reserve(pred.fit_rows.size());
  for (std::size_t i : pred.fit_rows) fit_sample.push_back(pred.all[i]);

  for (int e = 0; e < kEstimatorCount; ++e) {
    const bool want_pop = active[e][0];
    const bool want_ind = active[e][1];
    if (!want_pop && !want_ind) continue;
    const Estimator est = kAllEstimators[e];
    const Clock::time_point t0 = Clock::now();
    auto fail = [&](int level, const std::string& why) {
      out.failed[e][level] = true;
      out.reason[e][level] = why;
    };

    if (est == Estimator::kIndependence || est == Estimator::kMidpoint) {
      auto f = est == Estimator::kIndependence ? independence_estimate
                                               : midpoint_estimate;
      if (want_pop) {
        std::vector<CounterfactualProbs> v;
        v.reserve(fit_sample.size());
        for (const Scores& s : fit_sample) v.push_back(f(s));
        out.value[e][0] = squared_error(average(v), data.population);
        out.seconds[e][0] = seconds_since(t0);
      }
      if (want_ind) {
        const Clock::time_point t1 = Clock::now();
        double acc = 0.0;
        for (std::size_t i = 0; i < pred.all.size(); ++i) {
          acc += squared_error(f(pred.all[i]), data.truth[i].probs);
        }
        out.value[e][1] = acc / static_cast<double>(pred.all.size());
        out.seconds[e][1] = seconds_since(t1);
      }
      continue;
    }

    std::optional<FitResult> fit;
    try {
      fit = fit_model(family_of(est), fit_sample, cfg.fit, pred.n_arm);
    } catch (const Error& err) {
      fail(0, err.what());
      fail(1, err.what());
      continue;
    }
    const double fit_seconds = seconds_since(t0);
    if (want_pop) {
      out.value[e][0] = squared_error(population_estimate(fit->model),
                                      data.population);
      out.seconds[e][0] = fit_seconds;
    }
    if (want_ind) {
      const Clock::time_point t1 = Clock::now();
      try {
        double acc = 0.0;
        if (fit->model.noisy()) {
          const NoisyPosterior post(fit->model, cfg.quadrature);
          for (std::size_t i = 0; i < pred.all.size(); ++i) {
            acc += squared_error(post(pred.all[i]).mean, data.truth[i].probs);
          }
        } else {
          const SegmentPosterior post(fit->model, cfg.quadrature);
          for (std::size_t i = 0; i < pred.all.size(); ++i) {
            acc += squared_error(post(pred.all[i]).mean, data.truth[i].probs);
          }
        }
        out.value[e][1] = acc / static_cast<double>(pred.all.size());
      } catch (const Error& err) {
        fail(1, err.what());
      }
      out.seconds[e][1] = fit_seconds + seconds_since(t1);
    }
  }
  return out;
}

}  // namespace

std::string_view dgp_name(Dgp d) {
  return d == Dgp::kGaussian ? "gaussian" : "bivariate-beta";
}

Dgp parse_dgp(std::string_view name) {
  if (name == "gaussian") return Dgp::kGaussian;
  if (name == "bivariate-beta" || name == "bb" || name == "dirichlet") {
    return Dgp::kBivariateBeta;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown DGP '" + std::string(name) + "'");
}

std::string_view copula_name(Copula c) {
  switch (c) {
    case Copula::kIndependent: return "independent";
    case Copula::kComonotone: return "comonotone";
    case Copula::kGaussian: return "gaussian";
  }
  return "?";
}

Copula parse_copula(std::string_view name) {
  if (name == "independent") return Copula::kIndependent;
  if (name == "comonotone") return Copula::kComonotone;
  if (name == "gaussian" || name == "gaussian-copula") return Copula::kGaussian;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown copula '" + std::string(name) + "'");
}

std::string_view estimator_name(Estimator e) {
  switch (e) {
    case Estimator::kIndependence: return "independence";
    case Estimator::kMidpoint: return "midpoint";
    case Estimator::kBB: return "BB";
    case Estimator::kNBB: return "NBB";
    case Estimator::kGBB: return "GBB";
    case Estimator::kNGBB: return "NGBB";
  }
  return "?";
}

Estimator parse_estimator(std::string_view name) {
  std::string lower(name);
  for (char& c : lower) c = static_cast<char>(std::tolower(c));
  for (Estimator e : kAllEstimators) {
    std::string n(estimator_name(e));
    for (char& c : n) c = static_cast<char>(std::tolower(c));
    if (n == lower) return e;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown estimator '" + std::string(name) + "'");
}

std::string_view level_name(Level l) {
  return l == Level::kPopulation ? "population" : "individual";
}

std::string_view cell_status_name(CellStatus s) {
  switch (s) {
    case CellStatus::kOk: return "ok";
    case CellStatus::kSkipped: return "skipped";
    case CellStatus::kFailed: return "failed";
    case CellStatus::kDisabled: return "disabled";
  }
  return "?";
}

void validate(const SimConfig& cfg) {
  if (cfg.n <= 0 || cfg.repetitions <= 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "sample size and repetitions must be positive");
  }
  if (cfg.dgp == Dgp::kGaussian && cfg.dim <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "feature dimension must be > 0");
  }
  if (!(cfg.rho >= -1.0 && cfg.rho <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "rho must lie in [-1, 1]");
  }
  if (!(cfg.rate_low > 0.0 && cfg.rate_low <= cfg.rate_high &&
        cfg.rate_high < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "outcome rate range must satisfy 0 < low <= high < 1");
  }
  if (!(cfg.m_low > 0.0 && cfg.m_low <= cfg.m_high)) {
    throw Error(ErrorCode::kInvalidArgument,
                "m range must satisfy 0 < low <= high");
  }
  if (cfg.m) validate(*cfg.m);
  validate(NoiseParams{cfg.kappa});
  if (!(cfg.cell_budget_seconds > 0.0) || cfg.threads < 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "cell budget must be positive and threads >= 0");
  }
  validate(cfg.uplift);
  validate(cfg.fit);
  validate(cfg.quadrature);
}

std::uint64_t repetition_seed(const SimConfig& cfg, int repetition) {
  return mix_seed(cfg.seed, static_cast<std::uint64_t>(repetition));
}

SimulatedDataset gen_gaussian(const SimConfig& cfg, std::uint64_t rep_seed) {
  Rng rng(rep_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = static_cast<std::size_t>(cfg.n);
  const std::size_t dim = static_cast<std::size_t>(cfg.dim);
  const double w_sd = 1.0 / std::sqrt(static_cast<double>(dim));

  std::array<std::vector<double>, 2> w;
  for (auto& wt : w) {
    wt.resize(dim);
    for (double& v : wt) v = w_sd * normal(rng);
  }
  SimulatedDataset d;
  for (double& r : d.target_rates) {
    r = cfg.rate_low + (cfg.rate_high - cfg.rate_low) * unit(rng);
  }
  d.records.resize(n);
  std::array<std::vector<double>, 2> eta{std::vector<double>(n),
                                         std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double>& x = d.records[i].x;
    x.resize(dim);
    for (double& v : x) v = normal(rng);
    for (int t = 0; t < 2; ++t) {
      eta[t][i] = std::inner_product(x.begin(), x.end(), w[t].begin(), 0.0);
    }
  }
  for (int t = 0; t < 2; ++t) {
    d.offsets[t] = calibrate_offset(eta[t], d.target_rates[t]);
  }

  d.truth.resize(n);
  std::vector<CounterfactualProbs> probs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Scores s{sigmoid(eta[0][i] + d.offsets[0]),
                   sigmoid(eta[1][i] + d.offsets[1])};
    const double p11 = p11_from_copula(cfg.copula, cfg.rho, s);
    probs[i] = probs_from_p11(s, p11);
    d.truth[i] = {s, probs[i]};
    const auto [y0, y1] = draw_outcomes(probs[i], rng);
    CampaignRecord& r = d.records[i];
    r.t = unit(rng) < 0.5 ? 0 : 1;
    r.y = r.t == 0 ? y0 : y1;
  }
  d.population = average(probs);
  return d;
}

SimulatedDataset gen_bb(const SimConfig& cfg, std::uint64_t rep_seed) {
  Rng rng(rep_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SimulatedDataset d;
  BBParams m;
  if (cfg.m) {
    m = *cfg.m;
  } else {
    for (double& v : m.m) v = cfg.m_low + (cfg.m_high - cfg.m_low) * unit(rng);
  }
  d.m = m;
  const NoiseParams noise{cfg.kappa};
  const std::size_t n = static_cast<std::size_t>(cfg.n);
  d.records.resize(n);
  d.truth.resize(n);
  d.observed.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const CounterfactualProbs pi = dirichlet_sample(m, rng);
    const Scores latent = scores_from_probs(pi);
    d.truth[i] = {latent, pi};
    d.observed[i] = {noisy_score(noise, latent.z0, rng),
                     noisy_score(noise, latent.z1, rng)};
    const auto [y0, y1] = draw_outcomes(pi, rng);
    CampaignRecord& r = d.records[i];
    r.t = unit(rng) < 0.5 ? 0 : 1;
    r.y = r.t == 0 ? y0 : y1;
  }
  d.population = dirichlet_mean(m);
  return d;
}

SimulatedDataset generate(const SimConfig& cfg, int repetition) {
  validate(cfg);
  const std::uint64_t seed = repetition_seed(cfg, repetition);
  return cfg.dgp == Dgp::kGaussian ? gen_gaussian(cfg, seed)
                                   : gen_bb(cfg, seed);
}

PredictedScores predict_dataset(const SimConfig& cfg,
                                const SimulatedDataset& data,
                                std::uint64_t rep_seed) {
  PredictedScores out;
  const std::size_t n = data.records.size();
  std::size_t n_train = n;
  std::size_t first_fit = 0;
  if (cfg.dgp == Dgp::kGaussian && cfg.uplift.holdout_fraction > 0.0) {
    n_train = static_cast<std::size_t>(
        std::floor(static_cast<double>(n) * (1.0 - cfg.uplift.holdout_fraction)));
    first_fit = n_train;
  }
  std::array<std::size_t, 2> arm{};
  for (std::size_t i = 0; i < n_train; ++i) ++arm[data.records[i].t];
  out.n_arm = std::min(arm[0], arm[1]);
  for (std::size_t i = first_fit; i < n; ++i) out.fit_rows.push_back(i);

  if (cfg.dgp == Dgp::kBivariateBeta) {
    out.all = data.observed;
    return out;
  }
  UpliftConfig ucfg = cfg.uplift;
  ucfg.seed = mix_seed(rep_seed, kUpliftStream);
  const std::span<const CampaignRecord> train(data.records.data(), n_train);
  const UpliftModel model = train_tlearner(train, ucfg);
  out.all.reserve(n);
  for (const CampaignRecord& r : data.records) {
    out.all.push_back(predict_scores(model, r.x));
  }
  return out;
}

double squared_error(const CounterfactualProbs& est,
                     const CounterfactualProbs& truth) {
  const std::array<double, 4> a = est.to_array();
  const std::array<double, 4> b = truth.to_array();
  double s = 0.0;
  for (int c = 0; c < 4; ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
  return s / 4.0;
}

double estimated_cell_seconds(const SimConfig& cfg, Estimator e, Level l) {
  const double n = cfg.n;
  const bool individual = l == Level::kIndividual;
  double per_rep = n * kRecordCost;
  const bool generalized = e == Estimator::kGBB || e == Estimator::kNGBB;
  const bool noisy = e == Estimator::kNBB || e == Estimator::kNGBB;
  if (generalized) {
    per_rep += (cfg.fit.max_evaluations + 1.0) * n *
               cfg.fit.quadrature_nodes * kTableNodeCost;
  }
  if (individual && e != Estimator::kIndependence &&
      e != Estimator::kMidpoint) {
    per_rep += noisy ? cfg.quadrature.mc_draws * kDrawCost +
                           n * noisy_inference_cost(cfg.quadrature)
                     : n * cfg.quadrature.nodes * kSegmentNodeCost;
  }
  return per_rep * cfg.repetitions;
}

ExperimentReport run_experiment(const SimConfig& cfg) {
  validate(cfg);
  ExperimentReport report;
  report.dgp = cfg.dgp;
  report.n = cfg.n;
  report.repetitions = cfg.repetitions;
  report.seed = cfg.seed;

  std::array<std::array<bool, 2>, kEstimatorCount> active{};
  for (int e = 0; e < kEstimatorCount; ++e) {
    for (int l = 0; l < 2; ++l) {
      CellResult& cell = report.cells[e][l];
      const Level level = static_cast<Level>(l);
      cell.estimated_seconds =
          estimated_cell_seconds(cfg, kAllEstimators[e], level);
      if (!cfg.estimators[e] || (level == Level::kIndividual && !cfg.individual)) {
        cell.status = CellStatus::kDisabled;
      } else if (cell.estimated_seconds > cfg.cell_budget_seconds) {
        cell.status = CellStatus::kSkipped;
        cell.reason = "estimated cost exceeds the per-cell budget";
      } else {
        active[e][l] = true;
      }
    }
  }

  const Clock::time_point t0 = Clock::now();
  const int reps = cfg.repetitions;
  std::vector<RepOutcome> outcomes(reps);
  int threads = cfg.threads > 0
                    ? cfg.threads
                    : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, reps);
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&]() {
    while (true) {
      const int rep = next.fetch_add(1);
      if (rep >= reps) return;
      try {
        outcomes[rep] = run_repetition(cfg, rep, active);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  report.measured_seconds = seconds_since(t0);

  for (int e = 0; e < kEstimatorCount; ++e) {
    for (int l = 0; l < 2; ++l) {
      if (!active[e][l]) continue;
      CellResult& cell = report.cells[e][l];
      for (int rep = 0; rep < reps; ++rep) {
        const RepOutcome& o = outcomes[rep];
        cell.measured_seconds += o.seconds[e][l];
        if (o.failed[e][l]) {
          if (cell.status != CellStatus::kFailed) {
            cell.status = CellStatus::kFailed;
            cell.reason = "repetition " + std::to_string(rep) + ": " +
                          o.reason[e][l];
          }
          continue;
        }
        cell.values.push_back(o.value[e][l]);
      }
      if (cell.status == CellStatus::kFailed) continue;
      const double k = static_cast<double>(cell.values.size());
      double sum = 0.0;
      for (double v : cell.values) sum += v;
      cell.mean = sum / k;
      double ss = 0.0;
      for (double v : cell.values) ss += (v - cell.mean) * (v - cell.mean);
      cell.sd = cell.values.size() > 1 ? std::sqrt(ss / (k - 1.0)) : 0.0;
    }
  }
  return report;
}

}  // namespace bbcf

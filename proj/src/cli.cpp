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

#include "bbcf/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "bbcf/errors.hpp"
#include "bbcf/fitting.hpp"
#include "bbcf/inference.hpp"
#include "bbcf/io.hpp"
#include "bbcf/report.hpp"
#include "bbcf/simulation.hpp"

namespace bbcf {
namespace {

constexpr const char* kCategoryLabels[4] = {"Sure thing", "Persuadable",
                                            "Do-not-disturb", "Lost cause"};

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::kIoError: return kExitIo;
    case ErrorCode::kInvalidArgument: return kExitUsage;
    default: return kExitData;
  }
}

struct SimFlags {
  std::string dgp = "bivariate-beta";
  std::string copula = "gaussian";
  std::vector<double> m;
  double kappa = 250.0;
};

// Flags shared by simulate and experiment.
void add_sim_flags(CLI::App* app, SimConfig& cfg, SimFlags& f) {
  app->add_option("--n", cfg.n, "Samples per repetition")->capture_default_str();
  app->add_option("--reps", cfg.repetitions, "Repetitions")->capture_default_str();
  app->add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
  app->add_option("--dim", cfg.dim, "Feature dimension (gaussian)")
      ->capture_default_str();
  app->add_option("--copula", f.copula,
                  "Joint outcome copula: independent, comonotone, gaussian")
      ->check(CLI::IsMember({"independent", "comonotone", "gaussian"}))
      ->capture_default_str();
  app->add_option("--rho", cfg.rho, "Gaussian copula correlation")
      ->check(CLI::Range(-1.0, 1.0))
      ->capture_default_str();
  app->add_option("--rate-low", cfg.rate_low, "Lowest outcome rate")
      ->capture_default_str();
  app->add_option("--rate-high", cfg.rate_high, "Highest outcome rate")
      ->capture_default_str();
  app->add_option("--m", f.m, "Fixed Dirichlet parameters m00 m10 m01 m11")
      ->expected(4);
  app->add_option("--m-low", cfg.m_low, "Lower end of the m prior")
      ->capture_default_str();
  app->add_option("--m-high", cfg.m_high, "Upper end of the m prior")
      ->capture_default_str();
  app->add_option("--kappa", f.kappa,
                  "Observation noise of the bivariate-beta process (inf: none)")
      ->capture_default_str();
  app->add_option("--holdout", cfg.uplift.holdout_fraction,
                  "Fraction of records held out from uplift training")
      ->check(CLI::Range(0.0, 0.99))
      ->capture_default_str();
  app->add_option("--ensemble", cfg.uplift.ensemble_size, "EasyEnsemble size")
      ->capture_default_str();
  app->add_option("--epochs", cfg.uplift.epochs, "Gradient descent epochs")
      ->capture_default_str();
}

void finish_sim_flags(SimConfig& cfg, const SimFlags& f) {
  cfg.dgp = parse_dgp(f.dgp);
  cfg.copula = parse_copula(f.copula);
  cfg.kappa = f.kappa;
  if (!f.m.empty()) {
    BBParams m;
    std::copy(f.m.begin(), f.m.end(), m.m.begin());
    cfg.m = m;
  }
}

std::string fit_digest(Family family, const FitConfig& c) {
  std::ostringstream s;
  s << "family=" << family_name(family) << ";epsilon=" << format_double(c.epsilon)
    << ";combination=" << m_combination_name(c.combination)
    << ";max_evaluations=" << c.max_evaluations
    << ";rel_tol=" << format_double(c.rel_tol)
    << ";quadrature_nodes=" << c.quadrature_nodes
    << ";kappa=" << (c.kappa ? format_double(*c.kappa) : "default")
    << ";deconvolve=" << (c.deconvolve ? 1 : 0);
  return fnv1a_hex(s.str());
}

std::string describe_params(const LatentModel& m) {
  std::ostringstream s;
  if (m.generalized()) {
    const GDParams& g = m.gd_params();
    s << "a = [" << format_double(g.a[0]) << ", " << format_double(g.a[1])
      << ", " << format_double(g.a[2]) << "]\nb = [" << format_double(g.b[0])
      << ", " << format_double(g.b[1]) << ", " << format_double(g.b[2]) << "]";
  } else {
    const BBParams& b = m.bb_params();
    s << "m = [" << format_double(b.m[0]) << ", " << format_double(b.m[1])
      << ", " << format_double(b.m[2]) << ", " << format_double(b.m[3]) << "]";
  }
  if (m.noisy()) s << "\nkappa = " << format_double(m.noise().kappa);
  return s.str();
}

std::vector<Scores> load_scores(const std::string& path) {
  std::istringstream in(read_text_file(path));
  return read_scores(in);
}

int cmd_simulate(const SimConfig& cfg, const std::string& out_dir,
                 const std::string& prefix, std::ostream& out) {
  validate(cfg);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIoError, "cannot create '" + out_dir + "'");
  }
  for (int r = 0; r < cfg.repetitions; ++r) {
    const SimulatedDataset d = generate(cfg, r);
    const PredictedScores pred = predict_dataset(cfg, d, repetition_seed(cfg, r));
    const std::string stem =
        (std::filesystem::path(out_dir) / (prefix + "_" + std::to_string(r)))
            .string();
    std::ostringstream campaign, scores, truth;
    write_campaign(campaign, d.records);
    write_scores(scores, pred.all);
    write_truth(truth, d.truth);
    write_text_file(stem + "_campaign.csv", campaign.str());
    write_text_file(stem + "_scores.csv", scores.str());
    write_text_file(stem + "_truth.csv", truth.str());
    out << "wrote " << stem << "_{campaign,scores,truth}.csv (" << d.records.size()
        << " rows)\n";
  }
  return kExitOk;
}

int cmd_infer(const std::string& model_path, const std::string& scores_path,
              const std::string& out_path, const QuadratureConfig& q,
              std::ostream& out, std::ostream& err) {
  const ModelFile mf = model_from_json(read_text_file(model_path));
  const std::vector<Scores> scores = load_scores(scores_path);
  std::optional<SegmentPosterior> exact;
  std::optional<NoisyPosterior> noisy;
  if (mf.model.noisy()) {
    noisy.emplace(mf.model, q);
  } else {
    exact.emplace(mf.model, q);
  }
  std::ostringstream rows;
  rows << "z0,z1,p00_sure_thing,p10_persuadable,p01_do_not_disturb,"
          "p11_lost_cause,category,log_evidence,error_estimate,nodes,draws,"
          "ess,status\n";
  std::size_t failures = 0;
  for (const Scores& s : scores) {
    rows << format_double(s.z0) << ',' << format_double(s.z1) << ',';
    try {
      const PosteriorResult r = noisy ? (*noisy)(s) : (*exact)(s);
      const std::array<double, 4> p = r.mean.to_array();
      for (double v : p) rows << format_double(v) << ',';
      const auto best = std::max_element(p.begin(), p.end()) - p.begin();
      rows << kCategoryLabels[best] << ',' << format_double(r.log_evidence)
           << ',' << format_double(r.error_estimate) << ',' << r.nodes << ','
           << r.draws << ',' << format_double(r.ess) << ','
           << (r.degenerate ? "degenerate" : "ok") << '\n';
    } catch (const Error& e) {
      ++failures;
      rows << "nan,nan,nan,nan,,nan,nan,0,0,nan,\"error: " << e.what()
           << "\"\n";
    }
  }
  if (out_path.empty()) {
    out << rows.str();
  } else {
    write_text_file(out_path, rows.str());
  }
  if (failures > 0) {
    err << failures << " of " << scores.size() << " rows failed\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Joint counterfactual probabilities from uplift scores", "bbcf"};
  app.require_subcommand(1);

  // simulate
  SimConfig sim_cfg;
  SimFlags sim_flags;
  std::string sim_out_dir = ".";
  std::string sim_prefix = "sim";
  CLI::App* sim = app.add_subcommand("simulate", "Write simulated data files");
  sim->add_option("--dgp", sim_flags.dgp, "gaussian or bivariate-beta")
      ->check(CLI::IsMember({"gaussian", "bivariate-beta", "bb", "dirichlet"}))
      ->capture_default_str();
  add_sim_flags(sim, sim_cfg, sim_flags);
  sim->add_option("--out-dir", sim_out_dir, "Output directory")->capture_default_str();
  sim->add_option("--prefix", sim_prefix, "File name prefix")->capture_default_str();

  // fit
  std::string fit_scores, fit_family = "bb", fit_out = "model.json";
  std::string fit_combination = "arithmetic";
  FitConfig fit_cfg;
  std::optional<double> fit_kappa;
  std::size_t fit_n_arm = 0;
  bool fit_no_deconvolve = false;
  CLI::App* fit = app.add_subcommand("fit", "Fit a latent model to a score file");
  fit->add_option("--scores", fit_scores, "Score file (z0,z1)")->required();
  fit->add_option("--family", fit_family, "bb, gbb, nbb or ngbb")
      ->check(CLI::IsMember({"bb", "gbb", "nbb", "ngbb"}))
      ->capture_default_str();
  fit->add_option("--out", fit_out, "Model file to write")->capture_default_str();
  fit->add_option("--kappa", fit_kappa, "Noise concentration (noisy families)");
  fit->add_option("--n-arm", fit_n_arm,
                  "Smaller per-treatment training count, sets the default kappa");
  fit->add_option("--epsilon", fit_cfg.epsilon, "Parameter floor")
      ->capture_default_str();
  fit->add_option("--m-combination", fit_combination, "arithmetic or geometric")
      ->check(CLI::IsMember({"arithmetic", "geometric"}))
      ->capture_default_str();
  fit->add_option("--max-evals", fit_cfg.max_evaluations,
                  "Simplex search budget (generalized families)")
      ->capture_default_str();
  fit->add_option("--fit-nodes", fit_cfg.quadrature_nodes,
                  "Quadrature nodes in the generalized likelihood")
      ->capture_default_str();
  fit->add_flag("--no-deconvolve", fit_no_deconvolve,
                "Fit noisy families on the raw moments");

  // infer
  std::string inf_model, inf_scores, inf_out, inf_rule = "tanh-sinh",
                                              inf_proposal = "auto";
  QuadratureConfig inf_q;
  CLI::App* inf = app.add_subcommand("infer", "Posterior means per score row");
  inf->add_option("--model", inf_model, "Model file")->required();
  inf->add_option("--scores", inf_scores, "Score file (z0,z1)")->required();
  inf->add_option("--out", inf_out, "Output CSV (default: stdout)");
  inf->add_option("--rule", inf_rule, "tanh-sinh or gauss-legendre")
      ->check(CLI::IsMember({"tanh-sinh", "de", "gauss-legendre", "gl"}))
      ->capture_default_str();
  inf->add_option("--nodes", inf_q.nodes, "Quadrature node budget")
      ->capture_default_str();
  inf->add_option("--tolerance", inf_q.tolerance, "Absolute tolerance on p11")
      ->capture_default_str();
  inf->add_option("--proposal", inf_proposal, "Noisy families: auto, prior, score")
      ->check(CLI::IsMember({"auto", "prior", "score"}))
      ->capture_default_str();
  inf->add_option("--mc-draws", inf_q.mc_draws, "Prior draws (noisy families)")
      ->capture_default_str();
  inf->add_option("--score-draws", inf_q.score_draws,
                  "Score-space draws (noisy families)")
      ->capture_default_str();
  inf->add_option("--seed", inf_q.seed, "Monte Carlo seed")->capture_default_str();

  // experiment
  SimConfig exp_cfg;
  SimFlags exp_flags;
  std::string exp_dgp = "both", exp_format = "table", exp_out, exp_csv_out;
  std::vector<std::string> exp_estimators;
  std::optional<double> exp_fit_kappa;
  bool exp_timings = false, exp_no_individual = false;
  CLI::App* exp = app.add_subcommand("experiment",
                                     "Repeated simulation study and report");
  exp->add_option("--dgp", exp_dgp, "gaussian, bivariate-beta or both")
      ->check(CLI::IsMember({"gaussian", "bivariate-beta", "bb", "dirichlet", "both"}))
      ->capture_default_str();
  add_sim_flags(exp, exp_cfg, exp_flags);
  exp->add_option("--threads", exp_cfg.threads, "Worker threads (0: all cores)")
      ->capture_default_str();
  exp->add_option("--cell-budget", exp_cfg.cell_budget_seconds,
                  "Per-cell time budget in seconds")
      ->capture_default_str();
  exp->add_option("--format", exp_format, "table or csv")
      ->check(CLI::IsMember({"table", "csv"}))
      ->capture_default_str();
  exp->add_option("--out", exp_out, "Report file (default: stdout)");
  exp->add_option("--csv-out", exp_csv_out, "Also write the CSV report here");
  exp->add_option("--estimators", exp_estimators,
                  "Subset of independence, midpoint, BB, NBB, GBB, NGBB");
  exp->add_option("--fit-kappa", exp_fit_kappa,
                  "Noise concentration for NBB/NGBB (default: n_arm / 10)");
  exp->add_option("--mc-draws", exp_cfg.quadrature.mc_draws,
                  "Prior draws for noisy inference")
      ->capture_default_str();
  exp->add_option("--score-draws", exp_cfg.quadrature.score_draws,
                  "Score-space draws for noisy inference")
      ->capture_default_str();
  exp->add_option("--nodes", exp_cfg.quadrature.nodes, "Quadrature node budget")
      ->capture_default_str();
  exp->add_option("--max-evals", exp_cfg.fit.max_evaluations,
                  "Simplex search budget for GBB/NGBB")
      ->capture_default_str();
  exp->add_flag("--timings", exp_timings, "Report measured wall time");
  exp->add_flag("--no-individual", exp_no_individual,
                "Population level only");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sim->parsed()) {
      finish_sim_flags(sim_cfg, sim_flags);
      return cmd_simulate(sim_cfg, sim_out_dir, sim_prefix, out);
    }
    if (fit->parsed()) {
      const Family family = parse_family(fit_family);
      fit_cfg.combination = parse_m_combination(fit_combination);
      fit_cfg.deconvolve = !fit_no_deconvolve;
      fit_cfg.kappa = fit_kappa;
      const std::vector<Scores> scores = load_scores(fit_scores);
      // Without per-arm counts, assume a balanced split of the score rows.
      const std::size_t n_arm = fit_n_arm > 0 ? fit_n_arm : scores.size() / 2;
      const FitResult r = fit_model(family, scores, fit_cfg, n_arm);
      ModelFile mf;
      mf.model = r.model;
      mf.sample_size = r.sample_size;
      mf.config_digest = fit_digest(family, fit_cfg);
      write_text_file(fit_out, model_to_json(mf));
      const CounterfactualProbs p = population_estimate(r.model);
      out << "family = " << family_name(family) << '\n'
          << describe_params(r.model) << '\n'
          << "population estimate: p00 = " << format_double(p.p00)
          << ", p10 = " << format_double(p.p10) << ", p01 = "
          << format_double(p.p01) << ", p11 = " << format_double(p.p11) << '\n';
      if (r.clamped) err << "warning: a parameter was clamped to epsilon\n";
      if (r.variance_floored) {
        err << "warning: a deconvolved moment was floored\n";
      }
      return kExitOk;
    }
    if (inf->parsed()) {
      inf_q.rule = parse_quadrature_rule(inf_rule);
      inf_q.proposal = parse_noisy_proposal(inf_proposal);
      validate(inf_q);
      return cmd_infer(inf_model, inf_scores, inf_out, inf_q, out, err);
    }
    if (exp->parsed()) {
      exp_flags.dgp = exp_dgp == "both" ? "gaussian" : exp_dgp;
      finish_sim_flags(exp_cfg, exp_flags);
      exp_cfg.fit.kappa = exp_fit_kappa;
      exp_cfg.individual = !exp_no_individual;
      if (!exp_estimators.empty()) {
        exp_cfg.estimators.fill(false);
        for (const std::string& name : exp_estimators) {
          exp_cfg.estimators[static_cast<int>(parse_estimator(name))] = true;
        }
      }
      std::vector<Dgp> dgps;
      if (exp_dgp == "both") {
        dgps = {Dgp::kGaussian, Dgp::kBivariateBeta};
      } else {
        dgps = {parse_dgp(exp_dgp)};
      }
      std::vector<ExperimentReport> reports;
      for (Dgp d : dgps) {
        SimConfig c = exp_cfg;
        c.dgp = d;
        reports.push_back(run_experiment(c));
      }
      const std::string csv = report_csv(reports, exp_timings);
      const std::string text = exp_format == "csv"
                                   ? csv
                                   : report_table(reports, exp_timings);
      if (exp_out.empty()) {
        out << text;
      } else {
        write_text_file(exp_out, text);
      }
      if (!exp_csv_out.empty()) write_text_file(exp_csv_out, csv);
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace bbcf

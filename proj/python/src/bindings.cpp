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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <limits>
#include <sstream>

#include "bbcf/cli.hpp"
#include "bbcf/errors.hpp"
#include "bbcf/fitting.hpp"
#include "bbcf/inference.hpp"
#include "bbcf/io.hpp"
#include "bbcf/uplift.hpp"

namespace py = pybind11;

namespace bbcf {
namespace {

using Probs4 = std::array<double, 4>;

std::vector<Scores> to_scores(const py::array_t<double, py::array::c_style |
                                                            py::array::forcecast>& a) {
  if (a.ndim() != 2 || a.shape(1) != 2) {
    throw Error(ErrorCode::kInvalidArgument, "scores must have shape (n, 2)");
  }
  auto v = a.unchecked<2>();
  std::vector<Scores> out(v.shape(0));
  for (py::ssize_t i = 0; i < v.shape(0); ++i) out[i] = make_scores(v(i, 0), v(i, 1));
  return out;
}

py::array_t<double> from_scores(const std::vector<Scores>& s) {
  py::array_t<double> out({static_cast<py::ssize_t>(s.size()), py::ssize_t{2}});
  auto v = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < s.size(); ++i) {
    v(i, 0) = s[i].z0;
    v(i, 1) = s[i].z1;
  }
  return out;
}

py::dict result_dict(const PosteriorResult& r) {
  py::dict d;
  d["mean"] = r.mean.to_array();
  d["log_evidence"] = r.log_evidence;
  d["error_estimate"] = r.error_estimate;
  d["nodes"] = r.nodes;
  d["draws"] = r.draws;
  d["ess"] = r.ess;
  d["degenerate"] = r.degenerate;
  return d;
}

QuadratureConfig quadrature(const std::string& rule, int nodes, double tolerance,
                            const std::string& proposal, int mc_draws,
                            std::uint64_t seed) {
  QuadratureConfig q;
  q.rule = parse_quadrature_rule(rule);
  q.nodes = nodes;
  q.tolerance = tolerance;
  q.proposal = parse_noisy_proposal(proposal);
  q.mc_draws = mc_draws;
  q.seed = seed;
  return q;
}

}  // namespace
}  // namespace bbcf

PYBIND11_MODULE(_bbcf, m) {
  using namespace bbcf;
  m.doc() = "Joint counterfactual probabilities from uplift scores";

  static py::exception<Error> error(m, "Error", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  m.def("frechet_bounds", [](double z0, double z1) {
    const FrechetInterval b = frechet_bounds(make_scores(z0, z1));
    return std::make_pair(b.lower, b.upper);
  });
  m.def("independence_estimate", [](double z0, double z1) {
    return independence_estimate(make_scores(z0, z1)).to_array();
  });
  m.def("midpoint_estimate", [](double z0, double z1) {
    return midpoint_estimate(make_scores(z0, z1)).to_array();
  });
  m.def("calibrate", &calibrate, py::arg("p_s"), py::arg("beta"));

  py::class_<LatentModel>(m, "Model")
      .def_static("bb", [](const Probs4& mm) { return LatentModel::bb({mm}); },
                  py::arg("m"))
      .def_static("gbb",
                  [](const std::array<double, 3>& a, const std::array<double, 3>& b) {
                    return LatentModel::gbb({a, b});
                  },
                  py::arg("a"), py::arg("b"))
      .def_static("nbb",
                  [](const Probs4& mm, double kappa) {
                    return LatentModel::nbb({mm}, {kappa});
                  },
                  py::arg("m"), py::arg("kappa"))
      .def_static("ngbb",
                  [](const std::array<double, 3>& a, const std::array<double, 3>& b,
                     double kappa) { return LatentModel::ngbb({a, b}, {kappa}); },
                  py::arg("a"), py::arg("b"), py::arg("kappa"))
      .def_property_readonly("family",
                             [](const LatentModel& l) {
                               return std::string(family_name(l.family()));
                             })
      .def_property_readonly("params",
                             [](const LatentModel& l) -> py::dict {
                               py::dict d;
                               if (l.generalized()) {
                                 d["a"] = l.gd_params().a;
                                 d["b"] = l.gd_params().b;
                               } else {
                                 d["m"] = l.bb_params().m;
                               }
                               return d;
                             })
      .def_property_readonly("kappa",
                             [](const LatentModel& l) {
                               return l.noisy() ? l.noise().kappa
                                                : std::numeric_limits<double>::infinity();
                             })
      .def("population_estimate",
           [](const LatentModel& l) { return population_estimate(l).to_array(); })
      .def("sample",
           [](const LatentModel& l, std::size_t n, std::uint64_t seed) {
             Rng rng(seed);
             std::vector<Scores> s(n);
             for (Scores& x : s) {
               x = l.noisy() ? noisy_sample(l, rng).observed : bb_sample(l, rng);
             }
             return from_scores(s);
           },
           py::arg("n"), py::arg("seed") = 1)
      .def("to_json",
           [](const LatentModel& l, std::size_t sample_size) {
             ModelFile f;
             f.model = l;
             f.sample_size = sample_size;
             return model_to_json(f);
           },
           py::arg("sample_size") = 0)
      .def_static("from_json",
                  [](const std::string& text) { return model_from_json(text).model; })
      .def("__eq__", [](const LatentModel& a, const LatentModel& b) { return a == b; })
      .def("__repr__", [](const LatentModel& l) {
        return "<bbcf.Model " + std::string(family_name(l.family())) + ">";
      });

  m.def(
      "fit",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& scores,
         const std::string& family, std::optional<double> kappa, std::size_t n_arm,
         double epsilon, int max_evaluations) {
        FitConfig cfg;
        cfg.kappa = kappa;
        cfg.epsilon = epsilon;
        cfg.max_evaluations = max_evaluations;
        return fit_model(parse_family(family), to_scores(scores), cfg, n_arm).model;
      },
      py::arg("scores"), py::arg("family") = "bb", py::arg("kappa") = py::none(),
      py::arg("n_arm") = 0, py::arg("epsilon") = 1e-3,
      py::arg("max_evaluations") = 400);

  m.def(
      "posterior_mean",
      [](const LatentModel& model, double z0, double z1, const std::string& rule,
         int nodes, double tolerance, const std::string& proposal, int mc_draws,
         std::uint64_t seed) {
        const QuadratureConfig q =
            quadrature(rule, nodes, tolerance, proposal, mc_draws, seed);
        const Scores s{z0, z1};
        return result_dict(model.noisy() ? posterior_mean_noisy(model, s, q)
                                         : posterior_mean(model, make_scores(z0, z1), q));
      },
      py::arg("model"), py::arg("z0"), py::arg("z1"), py::arg("rule") = "tanh-sinh",
      py::arg("nodes") = 201, py::arg("tolerance") = 1e-6,
      py::arg("proposal") = "auto", py::arg("mc_draws") = 100000,
      py::arg("seed") = 20240611);

  m.def(
      "posterior_means",
      [](const LatentModel& model,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& scores,
         int nodes, std::uint64_t seed) {
        QuadratureConfig q;
        q.nodes = nodes;
        q.seed = seed;
        const std::vector<Scores> s = to_scores(scores);
        py::array_t<double> out({static_cast<py::ssize_t>(s.size()), py::ssize_t{4}});
        auto v = out.mutable_unchecked<2>();
        auto store = [&](std::size_t i, const PosteriorResult& r) {
          const Probs4 p = r.mean.to_array();
          for (int c = 0; c < 4; ++c) v(i, c) = p[c];
        };
        if (model.noisy()) {
          const NoisyPosterior post(model, q);
          for (std::size_t i = 0; i < s.size(); ++i) store(i, post(s[i]));
        } else {
          const SegmentPosterior post(model, q);
          for (std::size_t i = 0; i < s.size(); ++i) store(i, post(s[i]));
        }
        return out;
      },
      py::arg("model"), py::arg("scores"), py::arg("nodes") = 201,
      py::arg("seed") = 20240611);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}

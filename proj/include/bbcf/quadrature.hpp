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

// Quadrature on the unit interval, expressed entirely in log space.
//
// Each node carries log(x), log(1 - x) and a log weight, so that integrands
// of the form x^(a-1) (1-x)^(b-1) g(x) with a or b well below one can be
// integrated without ever forming x itself: near an endpoint the relevant
// mass may sit at x far below the smallest representable double.

#pragma once

#include <cmath>
#include <string_view>
#include <vector>

#include "bbcf/special.hpp"

namespace bbcf {

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

GaussLegendreRule gauss_legendre(int n);

enum class QuadratureRule { kTanhSinh, kGaussLegendre };

std::string_view quadrature_rule_name(QuadratureRule rule);
QuadratureRule parse_quadrature_rule(std::string_view name);

struct UnitNode {
  double log_x;
  double log_1mx;
  // Weights of the primary rule and of an embedded coarser rule used for the
  // error estimate; kNegInf where a node does not belong to a rule.
  double log_w_fine;
  double log_w_coarse;
};

struct UnitNodes {
  QuadratureRule rule = QuadratureRule::kTanhSinh;
  std::vector<UnitNode> nodes;
};

// Truncation point of the double-exponential variable t such that an
// endpoint singularity x^(min_shape - 1) leaves negligible mass beyond it.
double tanh_sinh_range(double min_shape);

// Tanh-sinh: `node_budget` nodes (rounded up to odd) on t in
// [-t_max, t_max]; the coarse rule is every other node at twice the step.
// Gauss-Legendre: composite 8-point panels, with 4-point panels on the same
// partition as the coarse rule. `t_max` is ignored there.
UnitNodes make_unit_nodes(QuadratureRule rule, int node_budget, double t_max);

struct LogIntegral {
  double log_value = kNegInf;
  double log_value_coarse = kNegInf;
  // |I_fine - I_coarse| / I_fine.
  double relative_error() const {
    if (log_value == kNegInf) return 0.0;
    return std::abs(std::expm1(log_value_coarse - log_value));
  }
};

// Integrates exp(log_f(log_x, log_1mx)) over (0, 1).
template <typename LogF>
LogIntegral integrate_log(const UnitNodes& q, LogF&& log_f) {
  std::vector<double> fine;
  std::vector<double> coarse;
  fine.reserve(q.nodes.size());
  coarse.reserve(q.nodes.size());
  for (const UnitNode& n : q.nodes) {
    const double v = log_f(n.log_x, n.log_1mx);
    if (n.log_w_fine != kNegInf) fine.push_back(v + n.log_w_fine);
    if (n.log_w_coarse != kNegInf) coarse.push_back(v + n.log_w_coarse);
  }
  return {log_sum_exp(fine), log_sum_exp(coarse)};
}

}  // namespace bbcf

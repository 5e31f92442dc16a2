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

#include "bbcf/quadrature.hpp"

#include <algorithm>
#include <numbers>
#include <string>

#include "bbcf/errors.hpp"

namespace bbcf {
namespace {

// log(sigmoid(v)) without overflow.
double log_sigmoid(double v) {
  if (v >= 0.0) return -std::log1p(std::exp(-v));
  return v - std::log1p(std::exp(v));
}

double log_cosh(double t) {
  const double a = std::abs(t);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

void add_tanh_sinh(int node_budget, double t_max, UnitNodes& out) {
  const int half = std::max(1, node_budget / 2);
  const double h = t_max / half;
  const double log_h = std::log(h);
  const double log_2h = std::log(2.0 * h);
  const double log_pi = std::log(std::numbers::pi);
  for (int k = -half; k <= half; ++k) {
    const double t = k * h;
    // x = (1 + tanh(u)) / 2 = sigmoid(2u), u = (pi / 2) sinh(t);
    // dx/dt = pi cosh(t) x (1 - x).
    const double u2 = std::numbers::pi * std::sinh(t);
    UnitNode n;
    n.log_x = log_sigmoid(u2);
    n.log_1mx = log_sigmoid(-u2);
    const double log_jac = log_pi + log_cosh(t) + n.log_x + n.log_1mx;
    n.log_w_fine = log_h + log_jac;
    // Coarse rule: even k at step 2h.
    n.log_w_coarse = (k % 2 == 0) ? log_2h + log_jac : kNegInf;
    out.nodes.push_back(n);
  }
}

void add_panel(const GaussLegendreRule& rule, double lo, double hi,
               bool fine, UnitNodes& out) {
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double x = mid + half * rule.nodes[i];
    // Distance to the right endpoint computed from the mirrored node.
    const double xc = (1.0 - hi) + half * (1.0 - rule.nodes[i]);
    UnitNode n;
    n.log_x = std::log(x);
    n.log_1mx = std::log(xc);
    const double lw = std::log(half * rule.weights[i]);
    n.log_w_fine = fine ? lw : kNegInf;
    n.log_w_coarse = fine ? kNegInf : lw;
    out.nodes.push_back(n);
  }
}

}  // namespace

GaussLegendreRule gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "need n >= 1 nodes");
  GaussLegendreRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 2.0);
  if (n == 1) return rule;
  // Legendre P_n and its derivative by the three-term recurrence.
  auto legendre = [n](double x, double& dp) {
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    return p1;
  };
  for (int i = 0; i < n / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      const double dx = legendre(x, dp) / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(x, dp);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) {
    double dp = 0.0;
    legendre(0.0, dp);
    rule.weights[n / 2] = 2.0 / (dp * dp);
  }
  return rule;
}

std::string_view quadrature_rule_name(QuadratureRule rule) {
  return rule == QuadratureRule::kTanhSinh ? "tanh-sinh" : "gauss-legendre";
}

QuadratureRule parse_quadrature_rule(std::string_view name) {
  if (name == "tanh-sinh" || name == "de") return QuadratureRule::kTanhSinh;
  if (name == "gauss-legendre" || name == "gl") {
    return QuadratureRule::kGaussLegendre;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown quadrature rule '" + std::string(name) + "'");
}

double tanh_sinh_range(double min_shape) {
  min_shape = std::clamp(min_shape, 1e-12, 1.0);
  return std::max(3.5, std::log(30.0 / min_shape) + 0.5);
}

UnitNodes make_unit_nodes(QuadratureRule rule, int node_budget, double t_max) {
  if (node_budget < 3) {
    throw Error(ErrorCode::kInvalidArgument, "node budget must be >= 3");
  }
  UnitNodes out;
  out.rule = rule;
  if (rule == QuadratureRule::kTanhSinh) {
    if (!(t_max > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "t_max must be positive");
    }
    add_tanh_sinh(node_budget, t_max, out);
    return out;
  }
  static const GaussLegendreRule fine = gauss_legendre(8);
  static const GaussLegendreRule coarse = gauss_legendre(4);
  const int panels = std::max(1, node_budget / 12);
  for (int p = 0; p < panels; ++p) {
    const double lo = static_cast<double>(p) / panels;
    const double hi = static_cast<double>(p + 1) / panels;
    add_panel(fine, lo, hi, true, out);
    add_panel(coarse, lo, hi, false, out);
  }
  return out;
}

}  // namespace bbcf

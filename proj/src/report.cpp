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

#include "bbcf/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "bbcf/io.hpp"

namespace bbcf {
namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::string display_cell(const CellResult& cell) {
  if (cell.status != CellStatus::kOk || !std::isfinite(cell.mean)) return "--";
  if (cell.mean == 0.0) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "0.00(%.2e)", cell.sd);
    return buf;
  }
  int e = static_cast<int>(std::floor(std::log10(cell.mean)));
  // Rounding to two decimals can carry into the next decade.
  if (cell.mean / std::pow(10.0, e) >= 9.995) ++e;
  const double scale = std::pow(10.0, e);
  const double m = cell.mean / scale;
  const double s = cell.sd / scale;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f(%.2f)e%d", m, s, e);
  return buf;
}

std::string report_csv(std::span<const ExperimentReport> reports,
                       bool timings) {
  std::ostringstream out;
  out << "simulation,level,estimator,status,repetitions,mean,sd,display,"
         "estimated_seconds,";
  if (timings) out << "measured_seconds,";
  out << "reason\n";
  for (const ExperimentReport& r : reports) {
    for (int l = 0; l < 2; ++l) {
      for (int e = 0; e < kEstimatorCount; ++e) {
        const CellResult& c = r.cells[e][l];
        out << dgp_name(r.dgp) << ',' << level_name(static_cast<Level>(l))
            << ',' << estimator_name(kAllEstimators[e]) << ','
            << cell_status_name(c.status) << ',' << c.values.size() << ','
            << format_double(c.mean) << ',' << format_double(c.sd) << ','
            << display_cell(c) << ',' << format_double(c.estimated_seconds)
            << ',';
        if (timings) out << format_double(c.measured_seconds) << ',';
        out << csv_field(c.reason) << '\n';
      }
    }
  }
  return out.str();
}

std::string report_table(std::span<const ExperimentReport> reports,
                         bool timings) {
  std::ostringstream out;
  std::size_t first = 12;
  for (Estimator e : kAllEstimators) {
    first = std::max(first, estimator_name(e).size() + 2);
  }
  for (int l = 0; l < 2; ++l) {
    const Level level = static_cast<Level>(l);
    out << "Squared estimation error of " << level_name(level)
        << "-level counterfactuals, mean(std)\n";
    std::vector<std::size_t> widths;
    for (const ExperimentReport& r : reports) {
      std::size_t w = dgp_name(r.dgp).size();
      for (int e = 0; e < kEstimatorCount; ++e) {
        w = std::max(w, display_cell(r.cells[e][l]).size());
      }
      widths.push_back(w + 2);
    }
    out << pad("estimator", first);
    for (std::size_t i = 0; i < reports.size(); ++i) {
      out << pad(std::string(dgp_name(reports[i].dgp)), widths[i]);
    }
    out << '\n';
    for (int e = 0; e < kEstimatorCount; ++e) {
      out << pad(std::string(estimator_name(kAllEstimators[e])), first);
      for (std::size_t i = 0; i < reports.size(); ++i) {
        out << pad(display_cell(reports[i].cells[e][l]), widths[i]);
      }
      out << '\n';
    }
    out << '\n';
  }
  for (const ExperimentReport& r : reports) {
    if (r.dgp == Dgp::kBivariateBeta) {
      out << "(bivariate-beta is also called the Dirichlet simulation)\n";
      break;
    }
  }
  for (const ExperimentReport& r : reports) {
    out << dgp_name(r.dgp) << ": n=" << r.n << " repetitions=" << r.repetitions
        << " seed=" << r.seed;
    if (timings) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.2f", r.measured_seconds);
      out << " wall_seconds=" << buf;
    }
    out << '\n';
    for (int l = 0; l < 2; ++l) {
      for (int e = 0; e < kEstimatorCount; ++e) {
        const CellResult& c = r.cells[e][l];
        if (c.status == CellStatus::kSkipped ||
            c.status == CellStatus::kFailed) {
          out << "  " << estimator_name(kAllEstimators[e]) << ' '
              << level_name(static_cast<Level>(l)) << ": "
              << cell_status_name(c.status) << " (" << c.reason << ")\n";
        }
      }
    }
  }
  return out.str();
}

}  // namespace bbcf

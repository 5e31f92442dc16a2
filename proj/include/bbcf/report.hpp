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

// Experiment report emitters: CSV with full-precision numbers and an aligned
// text table with one row per estimator and one column per simulation.

#pragma once

#include <span>
#include <string>

#include "bbcf/simulation.hpp"

namespace bbcf {

// "m.mm(s.ss)e-X" with a shared exponent taken from the mean, or "--" for a
// cell without a value.
std::string display_cell(const CellResult& cell);

// Columns: simulation, level, estimator, status, repetitions, mean, sd,
// display, estimated_seconds, [measured_seconds,] reason.
std::string report_csv(std::span<const ExperimentReport> reports,
                       bool timings = false);

std::string report_table(std::span<const ExperimentReport> reports,
                         bool timings = false);

}  // namespace bbcf

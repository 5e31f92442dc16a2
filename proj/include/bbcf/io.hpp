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

// Delimited text formats and the JSON model file.
//
//   score file:    header z0,z1 (other columns ignored)
//   campaign file: header t,y,x1..xn
//   truth file:    header z0,z1,p00,p10,p01,p11

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bbcf/core.hpp"
#include "bbcf/distributions.hpp"
#include "bbcf/simulation.hpp"
#include "bbcf/uplift.hpp"

namespace bbcf {

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

std::vector<Scores> read_scores(std::istream& in);
void write_scores(std::ostream& out, std::span<const Scores> scores);

std::vector<CampaignRecord> read_campaign(std::istream& in);
void write_campaign(std::ostream& out,
                    std::span<const CampaignRecord> records);

void write_truth(std::ostream& out, std::span<const RecordTruth> truth);
std::vector<RecordTruth> read_truth(std::istream& in);

inline constexpr int kModelSchemaVersion = 1;

struct ModelFile {
  int schema_version = kModelSchemaVersion;
  LatentModel model = LatentModel::bb({});
  std::size_t sample_size = 0;
  // FNV-1a digest of the fit configuration, hex encoded.
  std::string config_digest;

  friend bool operator==(const ModelFile&, const ModelFile&) = default;
};

std::string model_to_json(const ModelFile& f);
ModelFile model_from_json(std::string_view text);

// 64-bit FNV-1a, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view data);

// File helpers; kIoError when the file cannot be opened or written.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace bbcf

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

#include "bbcf/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "bbcf/errors.hpp"
#include "json.hpp"

namespace bbcf {
namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void parse_error(std::size_t line, const std::string& msg) {
  throw Error(ErrorCode::kParseError,
              "line " + std::to_string(line) + ": " + msg);
}

double parse_double(std::string_view field, std::size_t line) {
  double v = 0.0;
  const char* end = field.data() + field.size();
  const auto r = std::from_chars(field.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end) {
    parse_error(line, "not a number: '" + std::string(field) + "'");
  }
  return v;
}

int parse_binary(std::string_view field, std::size_t line, const char* what) {
  if (field == "0") return 0;
  if (field == "1") return 1;
  parse_error(line, std::string(what) + " must be 0 or 1, got '" +
                        std::string(field) + "'");
}

double parse_probability(std::string_view field, std::size_t line,
                         const char* what) {
  const double v = parse_double(field, line);
  try {
    return checked_probability(v, what);
  } catch (const Error& e) {
    parse_error(line, e.what());
  }
}

// Reads a header row and the following data rows. Blank lines are skipped.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string_view>> rows;
  std::vector<std::size_t> line_numbers;
  std::string storage;
};

Table read_table(std::istream& in) {
  Table t;
  std::ostringstream buf;
  buf << in.rdbuf();
  t.storage = buf.str();
  std::string_view text = t.storage;
  std::size_t line_no = 0;
  bool have_header = false;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string_view> fields = split(line);
    if (!have_header) {
      for (std::string_view f : fields) t.header.emplace_back(f);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size()) {
      parse_error(line_no, "expected " + std::to_string(t.header.size()) +
                               " fields, got " + std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(line_no);
  }
  if (!have_header) parse_error(1, "missing header row");
  return t;
}

std::size_t column(const Table& t, std::string_view name) {
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (t.header[i] == name) return i;
  }
  parse_error(1, "missing column '" + std::string(name) + "'");
}

json array_json(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

template <std::size_t N>
std::array<double, N> array_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != N) {
    throw Error(ErrorCode::kParseError,
                std::string(what) + " must be an array of " +
                    std::to_string(N) + " numbers");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!j[i].is_number()) {
      throw Error(ErrorCode::kParseError,
                  std::string(what) + " must hold numbers");
    }
    out[i] = j[i].get<double>();
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::vector<Scores> read_scores(std::istream& in) {
  const Table t = read_table(in);
  const std::size_t c0 = column(t, "z0");
  const std::size_t c1 = column(t, "z1");
  std::vector<Scores> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::size_t line = t.line_numbers[r];
    out.push_back({parse_probability(t.rows[r][c0], line, "z0"),
                   parse_probability(t.rows[r][c1], line, "z1")});
  }
  return out;
}

void write_scores(std::ostream& out, std::span<const Scores> scores) {
  out << "z0,z1\n";
  for (const Scores& s : scores) {
    out << format_double(s.z0) << ',' << format_double(s.z1) << '\n';
  }
}

std::vector<CampaignRecord> read_campaign(std::istream& in) {
  const Table t = read_table(in);
  const std::size_t ct = column(t, "t");
  const std::size_t cy = column(t, "y");
  std::vector<std::size_t> cx;
  for (std::size_t j = 1;; ++j) {
    const std::string name = "x" + std::to_string(j);
    const auto it = std::find(t.header.begin(), t.header.end(), name);
    if (it == t.header.end()) break;
    cx.push_back(static_cast<std::size_t>(it - t.header.begin()));
  }
  std::vector<CampaignRecord> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::size_t line = t.line_numbers[r];
    CampaignRecord rec;
    rec.t = parse_binary(t.rows[r][ct], line, "t");
    rec.y = parse_binary(t.rows[r][cy], line, "y");
    rec.x.reserve(cx.size());
    for (std::size_t c : cx) {
      const double v = parse_double(t.rows[r][c], line);
      if (!std::isfinite(v)) parse_error(line, "features must be finite");
      rec.x.push_back(v);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

void write_campaign(std::ostream& out,
                    std::span<const CampaignRecord> records) {
  const std::size_t dim = records.empty() ? 0 : records.front().x.size();
  out << "t,y";
  for (std::size_t j = 1; j <= dim; ++j) out << ",x" << j;
  out << '\n';
  for (const CampaignRecord& r : records) {
    out << r.t << ',' << r.y;
    for (double v : r.x) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_truth(std::ostream& out, std::span<const RecordTruth> truth) {
  out << "z0,z1,p00,p10,p01,p11\n";
  for (const RecordTruth& t : truth) {
    out << format_double(t.scores.z0) << ',' << format_double(t.scores.z1);
    for (double p : t.probs.to_array()) out << ',' << format_double(p);
    out << '\n';
  }
}

std::vector<RecordTruth> read_truth(std::istream& in) {
  const Table t = read_table(in);
  static constexpr const char* kCols[6] = {"z0", "z1", "p00",
                                           "p10", "p01", "p11"};
  std::array<std::size_t, 6> c{};
  for (int i = 0; i < 6; ++i) c[i] = column(t, kCols[i]);
  std::vector<RecordTruth> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    std::array<double, 6> v{};
    for (int i = 0; i < 6; ++i) {
      v[i] = parse_probability(t.rows[r][c[i]], t.line_numbers[r], kCols[i]);
    }
    out.push_back({{v[0], v[1]}, {v[2], v[3], v[4], v[5]}});
  }
  return out;
}

std::string model_to_json(const ModelFile& f) {
  json j;
  j["schema_version"] = f.schema_version;
  j["family"] = std::string(family_name(f.model.family()));
  if (f.model.generalized()) {
    const GDParams& g = f.model.gd_params();
    j["params"] = {{"a", array_json(g.a)}, {"b", array_json(g.b)}};
  } else {
    j["params"] = {{"m", array_json(f.model.bb_params().m)}};
  }
  if (f.model.noisy()) {
    const double k = f.model.noise().kappa;
    if (std::isinf(k)) {
      j["kappa"] = "inf";
    } else {
      j["kappa"] = k;
    }
  }
  j["provenance"] = {{"sample_size", f.sample_size},
                     {"config_digest", f.config_digest}};
  return j.dump(2) + "\n";
}

ModelFile model_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("model file: ") + e.what());
  }
  try {
    ModelFile f;
    f.schema_version = j.at("schema_version").get<int>();
    if (f.schema_version != kModelSchemaVersion) {
      throw Error(ErrorCode::kParseError,
                  "unsupported model schema version " +
                      std::to_string(f.schema_version));
    }
    const Family family = parse_family(j.at("family").get<std::string>());
    const json& p = j.at("params");
    std::optional<NoiseParams> noise;
    if (is_noisy(family)) {
      const json& k = j.at("kappa");
      if (k.is_string() && k.get<std::string>() == "inf") {
        noise = NoiseParams{std::numeric_limits<double>::infinity()};
      } else {
        noise = NoiseParams{k.get<double>()};
      }
    }
    if (is_generalized(family)) {
      GDParams g;
      g.a = array_from<3>(p.at("a"), "params.a");
      g.b = array_from<3>(p.at("b"), "params.b");
      f.model = noise ? LatentModel::ngbb(g, *noise) : LatentModel::gbb(g);
    } else {
      BBParams m;
      m.m = array_from<4>(p.at("m"), "params.m");
      f.model = noise ? LatentModel::nbb(m, *noise) : LatentModel::bb(m);
    }
    const json& prov = j.at("provenance");
    f.sample_size = prov.at("sample_size").get<std::size_t>();
    f.config_digest = prov.at("config_digest").get<std::string>();
    return f;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("model file: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kParseError) throw;
    throw Error(ErrorCode::kParseError, std::string("model file: ") + e.what());
  }
}

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = kHex[h & 0xf];
    h >>= 4;
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path,
                     std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIoError, "cannot write '" + path.string() + "'");
  }
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) {
    throw Error(ErrorCode::kIoError, "write failed for '" + path.string() + "'");
  }
}

}  // namespace bbcf

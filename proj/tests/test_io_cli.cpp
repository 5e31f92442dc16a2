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

#include <gtest/gtest.h>

#include <filesystem>
#include <limits>
#include <sstream>

#include "bbcf/cli.hpp"
#include "bbcf/errors.hpp"
#include "bbcf/io.hpp"

namespace bbcf {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() /
            (std::string("bbcf_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  fs::path path_;
};

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun Cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

TEST(FormatDouble, RoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456.789, -2.5}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "nan");
}

TEST(ModelFile, RoundTripsAllFamilies) {
  const BBParams m{{0.7, 1.5, 2.25, 3.0}};
  const GDParams g{{0.5, 1.25, 2.0}, {3.0, 1.5, 0.75}};
  const double inf = std::numeric_limits<double>::infinity();
  const LatentModel models[] = {
      LatentModel::bb(m), LatentModel::gbb(g), LatentModel::nbb(m, {33.3}),
      LatentModel::ngbb(g, {inf})};
  for (const LatentModel& model : models) {
    ModelFile f;
    f.model = model;
    f.sample_size = 1234;
    f.config_digest = fnv1a_hex("cfg");
    EXPECT_EQ(model_from_json(model_to_json(f)), f);
  }
}

TEST(ModelFile, RejectsMalformed) {
  EXPECT_THROW(model_from_json("{"), Error);
  EXPECT_THROW(model_from_json(R"({"family":"xx","params":{}})"), Error);
  try {
    model_from_json(R"({"schema_version":1,"family":"bb","params":{"m":[1,2]}})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
  }
}

TEST(Fnv1a, KnownVectors) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(Csv, ScoresRoundTripAndIgnoreExtraColumns) {
  const std::vector<Scores> s{{0.1, 0.2}, {1.0 / 3.0, 0.999}};
  std::stringstream buf;
  write_scores(buf, s);
  EXPECT_EQ(read_scores(buf), s);
  std::istringstream extra("id,z1,z0\n7,0.5,0.25\n");
  const std::vector<Scores> e = read_scores(extra);
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e[0], (Scores{0.25, 0.5}));
}

TEST(Csv, ParseErrors) {
  for (const char* text : {"z0\n0.1\n", "z0,z1\n0.1,abc\n", "z0,z1\n0.1\n",
                           "z0,z1\n1.5,0.2\n"}) {
    std::istringstream in(text);
    EXPECT_THROW(read_scores(in), Error) << text;
  }
}

TEST(Csv, CampaignAndTruthRoundTrip) {
  const std::vector<CampaignRecord> rec{{{0.5, -1.25}, 1, 0}, {{2.0, 3.0}, 0, 1}};
  std::stringstream buf;
  write_campaign(buf, rec);
  const std::vector<CampaignRecord> back = read_campaign(buf);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].x, rec[i].x);
    EXPECT_EQ(back[i].t, rec[i].t);
    EXPECT_EQ(back[i].y, rec[i].y);
  }
  const std::vector<RecordTruth> truth{{{0.3, 0.4}, {0.4, 0.2, 0.3, 0.1}}};
  std::stringstream tbuf;
  write_truth(tbuf, truth);
  const std::vector<RecordTruth> tb = read_truth(tbuf);
  ASSERT_EQ(tb.size(), 1u);
  EXPECT_EQ(tb[0].scores, truth[0].scores);
  EXPECT_EQ(tb[0].probs.p11, 0.1);
}

TEST(Cli, UsageAndIoExitCodes) {
  EXPECT_EQ(Cli({}).code, kExitUsage);
  EXPECT_EQ(Cli({"fit", "--bogus"}).code, kExitUsage);
  EXPECT_EQ(Cli({"fit"}).code, kExitUsage);
  EXPECT_EQ(Cli({"fit", "--scores", "/nonexistent/x.csv"}).code, kExitIo);
  EXPECT_EQ(Cli({"--help"}).code, kExitOk);
}

TEST(Cli, TooFewRowsIsADataError) {
  TempDir dir;
  write_text_file(dir / "s.csv", "z0,z1\n0.1,0.2\n0.3,0.4\n0.5,0.6\n");
  const CliRun r = Cli({"fit", "--scores", dir / "s.csv", "--out", dir / "m.json"});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_FALSE(r.err.empty());
  EXPECT_FALSE(fs::exists(dir / "m.json"));
}

TEST(Cli, SimulateIsDeterministic) {
  TempDir dir;
  const std::vector<std::string> base{"simulate", "--n", "300", "--reps", "2",
                                      "--seed", "5", "--out-dir"};
  auto args = base;
  args.push_back(dir / "a");
  ASSERT_EQ(Cli(args).code, kExitOk);
  args.back() = dir / "b";
  ASSERT_EQ(Cli(args).code, kExitOk);
  for (const char* f : {"sim_0_campaign.csv", "sim_1_scores.csv", "sim_1_truth.csv"}) {
    const std::string a = read_text_file(dir / ("a/" + std::string(f)));
    EXPECT_EQ(a, read_text_file(dir / ("b/" + std::string(f))));
    EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 301);
  }
  const CliRun g = Cli({"simulate", "--dgp", "gaussian", "--n", "200", "--reps",
                        "1", "--epochs", "50", "--out-dir", dir / "g"});
  ASSERT_EQ(g.code, kExitOk) << g.err;
  std::istringstream c(read_text_file(dir / "g/sim_0_campaign.csv"));
  const auto rec = read_campaign(c);
  ASSERT_EQ(rec.size(), 200u);
  EXPECT_EQ(rec[0].x.size(), 10u);
}

TEST(Cli, FitThenInfer) {
  TempDir dir;
  ASSERT_EQ(Cli({"simulate", "--n", "2000", "--reps", "1", "--m", "1", "2", "3",
                 "4", "--kappa", "inf", "--out-dir", dir / ""})
                .code,
            kExitOk);
  const CliRun fit = Cli({"fit", "--scores", dir / "sim_0_scores.csv", "--out",
                          dir / "m.json"});
  ASSERT_EQ(fit.code, kExitOk) << fit.err;
  EXPECT_NE(fit.out.find("family = bb"), std::string::npos);
  const ModelFile mf = model_from_json(read_text_file(dir / "m.json"));
  EXPECT_EQ(mf.sample_size, 2000u);
  EXPECT_EQ(mf.config_digest.size(), 16u);

  write_text_file(dir / "q.csv", "z0,z1\n0.6,0.3\n0,0.4\n");
  const CliRun inf = Cli({"infer", "--model", dir / "m.json", "--scores",
                          dir / "q.csv"});
  ASSERT_EQ(inf.code, kExitOk) << inf.err;
  std::istringstream lines(inf.out);
  std::string header, row1, row2;
  std::getline(lines, header);
  std::getline(lines, row1);
  std::getline(lines, row2);
  EXPECT_EQ(header.rfind("z0,z1,p00_sure_thing,p10_persuadable", 0), 0u);
  EXPECT_NE(row1.find(",ok"), std::string::npos);
  // z0 = 0 pins the whole composition.
  EXPECT_EQ(row2, "0,0.4,0.6,0,0.4,0,Sure thing,nan,0,0,0,nan,degenerate");
}

TEST(Cli, InferFlagsBadRows) {
  TempDir dir;
  ModelFile mf;
  mf.model = LatentModel::bb({{1, 2, 3, 4}});
  write_text_file(dir / "m.json", model_to_json(mf));
  write_text_file(dir / "q.csv", "z0,z1\n0.5,0.5\n");
  EXPECT_EQ(Cli({"infer", "--model", dir / "m.json", "--scores", dir / "q.csv",
                 "--nodes", "2"})
                .code,
            kExitUsage);
  EXPECT_EQ(Cli({"infer", "--model", dir / "none.json", "--scores", dir / "q.csv"})
                .code,
            kExitIo);
}

TEST(Cli, ExperimentFormatsAgreeAndBudgetBlanksCells) {
  TempDir dir;
  const std::vector<std::string> args{
      "experiment", "--dgp", "bivariate-beta", "--n", "300", "--reps", "2",
      "--estimators", "independence", "midpoint", "BB", "NBB", "--mc-draws",
      "2000", "--csv-out", dir / "r.csv", "--threads", "2"};
  const CliRun t = Cli(args);
  ASSERT_EQ(t.code, kExitOk) << t.err;
  const std::string csv = read_text_file(dir / "r.csv");
  auto csv_args = args;
  csv_args.insert(csv_args.end(), {"--format", "csv"});
  EXPECT_EQ(Cli(csv_args).out, csv);
  EXPECT_NE(t.out.find("BB"), std::string::npos);

  auto tight = args;
  tight.insert(tight.end(), {"--cell-budget", "1e-6"});
  const CliRun b = Cli(tight);
  ASSERT_EQ(b.code, kExitOk);
  EXPECT_NE(b.out.find("--"), std::string::npos);
  EXPECT_NE(b.out.find("skipped"), std::string::npos);
}

}  // namespace
}  // namespace bbcf

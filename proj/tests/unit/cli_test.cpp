// Copyright 2026 The sdelab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sdelab/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

namespace sdelab::cli {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("sdelab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }

  static std::string problem_block() {
    return R"("problem": {"drift": "ind(1,inf) - x^5", "diffusion": "x", "ell": 4, "x0": 1})";
  }

  fs::path dir_;
};

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

TEST(Format, RealsRoundTrip) {
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(format_real(0.25), "0.25");
  EXPECT_EQ(std::stod(format_real(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(format_real(2.0, 3), "2");
}

TEST(Format, CsvFieldQuoting) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_field("two\nlines"), "\"two\nlines\"");
}

TEST_F(CliTest, ValidateShippedConfigs) {
  EXPECT_EQ(run_cli({"validate", "--config", SDELAB_CONFIG_DIR "/jump_quintic.json"}).code, kSuccess);
  const Outcome bad = run_cli({"validate", "--config", SDELAB_CONFIG_DIR "/vanishing_sigma.json"});
  EXPECT_EQ(bad.code, kDomainFailure);
  bool found = false;
  for (const auto& line : lines_of(bad.out)) found = found || line.rfind("B2\t", 0) == 0;
  EXPECT_TRUE(found) << bad.out;
}

TEST_F(CliTest, UsageAndConfigErrorsExitTwo) {
  EXPECT_EQ(run_cli({}).code, kUsageError);
  EXPECT_EQ(run_cli({"frobnicate"}).code, kUsageError);
  EXPECT_EQ(run_cli({"validate"}).code, kUsageError);
  EXPECT_EQ(run_cli({"validate", "--config", (dir_ / "missing.json").string()}).code, kUsageError);
  EXPECT_EQ(run_cli({"validate", "--config", write("bad.json", "{ \"problem\": ")}).code, kUsageError);
  EXPECT_EQ(run_cli({"validate", "--config", write("typo.json", "{" + problem_block() + R"(, "validat": {}})")})
                .code,
            kUsageError);
  EXPECT_EQ(
      run_cli({"validate", "--config",
               write("expr.json", R"({"problem": {"drift": "x +", "diffusion": "1", "ell": 1, "x0": 0}})")})
          .code,
      kUsageError);
  EXPECT_EQ(run_cli({"converge", "--config",
                     write("empty.json", "{" + problem_block() +
                                             R"(, "converge": {"n_list": [], "n_ref": 64, "m_paths": 4}})")})
                .code,
            kUsageError);
  EXPECT_EQ(run_cli({"simulate", "--config", write("nosim.json", "{" + problem_block() + "}")}).code, kUsageError);
}

TEST_F(CliTest, SimulateRowsAndDeterminism) {
  const std::string cfg =
      write("sim.json", "{" + problem_block() + R"(, "simulate": {"scheme": "tamed_euler", "n": 4, "seed": 5}})");
  const Outcome a = run_cli({"simulate", "--config", cfg});
  ASSERT_EQ(a.code, kSuccess) << a.err;
  const auto lines = lines_of(a.out);
  ASSERT_EQ(lines.size(), 6u);
  EXPECT_EQ(lines[0], "t,value");
  for (int j = 0; j <= 4; ++j) {
    const std::string t = lines[j + 1].substr(0, lines[j + 1].find(','));
    EXPECT_EQ(std::stod(t), j / 4.0);
  }
  EXPECT_EQ(lines[1], "0,1");
  EXPECT_EQ(a.out.find('\r'), std::string::npos);
  EXPECT_EQ(run_cli({"simulate", "--config", cfg}).out, a.out);
  EXPECT_NE(run_cli({"simulate", "--config", cfg, "--seed", "6"}).out, a.out);
}

TEST_F(CliTest, SimulateEulerOverflowExitsOne) {
  const std::string cfg = write(
      "em.json", R"({"problem": {"drift": "ind(1,inf) - x^5", "diffusion": "x", "ell": 4, "x0": 3},
                     "simulate": {"scheme": "euler_maruyama", "n": 8, "seed": 1}})");
  const Outcome r = run_cli({"simulate", "--config", cfg});
  EXPECT_EQ(r.code, kDomainFailure);
  EXPECT_NE(r.err.find("euler_maruyama"), std::string::npos);
}

TEST_F(CliTest, ConvergeCsvContract) {
  const std::string csv_path = (dir_ / "conv.csv").string();
  const std::string cfg = write("conv.json", "{" + problem_block() + R"(,
      "converge": {"scheme": "tamed_euler", "n_list": [8, 16, 32, 64, 128, 256], "n_ref": 1024,
                   "m_paths": 50, "p_list": [1, 2], "seed": 3, "threads": 2},
      "output": {"csv_path": ")" + csv_path + R"("}})");
  const Outcome r = run_cli({"converge", "--config", cfg});
  ASSERT_EQ(r.code, kSuccess) << r.err;
  std::ifstream in(csv_path, std::ios::binary);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto lines = lines_of(text);
  ASSERT_EQ(lines.size(), 1u + 6 * 2 + 2);
  EXPECT_EQ(lines[0], "n,h,p,error,ci_halfwidth");
  EXPECT_EQ(lines[1].rfind("8,0.125,1,", 0), 0u);
  EXPECT_EQ(lines[2].rfind("8,0.125,2,", 0), 0u);
  EXPECT_EQ(lines[13].rfind("# slope,1,", 0), 0u);
  EXPECT_EQ(lines[14].rfind("# slope,2,", 0), 0u);
  EXPECT_EQ(text.find('\r'), std::string::npos);

  ASSERT_EQ(run_cli({"converge", "--config", cfg}).code, kSuccess);
  std::ifstream in2(csv_path, std::ios::binary);
  const std::string text2((std::istreambuf_iterator<char>(in2)), std::istreambuf_iterator<char>());
  EXPECT_EQ(text2, text);
}

TEST_F(CliTest, ConvergeExactProblemReportsNanSlope) {
  const std::string cfg = write("exact.json", R"({"problem": {"drift": "0", "diffusion": "0", "ell": 1, "x0": 0.5},
      "converge": {"n_list": [8, 16, 32], "n_ref": 128, "m_paths": 10, "p_list": [2], "seed": 1}})");
  const Outcome r = run_cli({"converge", "--config", cfg});
  ASSERT_EQ(r.code, kSuccess) << r.err;
  EXPECT_NE(r.out.find("# slope,2,nan\n"), std::string::npos) << r.out;
}

TEST_F(CliTest, ConvergeOverflowExitsOneNamingScheme) {
  const std::string cfg = write("ov.json", R"({"problem": {"drift": "ind(1,inf) - x^5", "diffusion": "x",
                                                           "ell": 4, "x0": 1e100},
      "converge": {"n_list": [8, 16, 32], "n_ref": 128, "m_paths": 4, "p_list": [2], "seed": 1}})");
  const Outcome r = run_cli({"converge", "--config", cfg});
  EXPECT_EQ(r.code, kDomainFailure);
  EXPECT_NE(r.err.find("tamed_euler"), std::string::npos) << r.err;
}

TEST_F(CliTest, SignchangeCsvContract) {
  const std::string cfg = write("sc.json", "{" + problem_block() + R"(,
      "signchange": {"n_list": [8, 16, 32], "refine": 8, "m_paths": 40, "p_list": [1, 2], "seed": 2}})");
  const Outcome r = run_cli({"signchange", "--config", cfg});
  ASSERT_EQ(r.code, kSuccess) << r.err;
  const auto lines = lines_of(r.out);
  ASSERT_EQ(lines.size(), 1u + 3 * 2 + 2);
  EXPECT_EQ(lines[0], "n,h,p,statistic,ci_halfwidth");
  EXPECT_EQ(lines[7].rfind("# slope,1,", 0), 0u);
  EXPECT_EQ(run_cli({"signchange", "--config", cfg}).out, r.out);
}

TEST_F(CliTest, TransformCheck) {
  const Outcome ok = run_cli({"transform-check", "--config", SDELAB_CONFIG_DIR "/jump_quintic.json"});
  EXPECT_EQ(ok.code, kSuccess) << ok.out;
  EXPECT_EQ(ok.out.find("FAIL"), std::string::npos);
  EXPECT_NE(ok.out.find("alpha[xi=1]\t-0.5"), std::string::npos);
  const Outcome bad = run_cli({"transform-check", "--config", SDELAB_CONFIG_DIR "/vanishing_sigma.json"});
  EXPECT_EQ(bad.code, kDomainFailure);
}

}  // namespace
}  // namespace sdelab::cli

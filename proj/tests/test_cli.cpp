#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "fault_iso/cli.hpp"

namespace fault_iso::cli {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::random_device rd;
    dir_ = fs::temp_directory_path() / ("fault_iso_cli_" + std::to_string(rd()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& name, const std::string& text) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  int run(const std::vector<std::string>& args) const {
    std::vector<const char*> argv{"fault-iso"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

const char* kShort = R"({"version": 1, "scenario": {"steps": 600,
  "f_a": [{"start": 0, "value": 0}, {"start": 200, "mode": "const", "value": 0.001}],
  "f_m": [{"start": 0, "value": 0}, {"start": 100, "value": -0.1}]}})";

TEST(Config, Defaults) {
  const RunConfig c = parse_config("{}");
  EXPECT_TRUE(c.builtin_bicycle);
  EXPECT_EQ(c.signs, SignConvention::kStabilized);
  EXPECT_EQ(c.d_N, 3);
  EXPECT_EQ(c.a_roots, (std::vector<double>{-0.85, -0.59, -0.58}));
  EXPECT_EQ(c.n, 10);
  EXPECT_EQ(c.prefilter, PrefilterKind::kDynamic);
  EXPECT_EQ(c.policy, DegeneratePolicy::kHoldLast);
  EXPECT_EQ(c.steps, 2500u);
  EXPECT_DOUBLE_EQ(c.sample_time, 0.01);
}

TEST(Config, Overrides) {
  const RunConfig c = parse_config(R"({"estimator": {"n": 40, "prefilter": "static",
    "degenerate_policy": "emit-error"}, "synthesis": {"a_roots": [-0.5, -0.4, -0.3]},
    "model": {"signs": "verbatim"}})");
  EXPECT_EQ(c.n, 40);
  EXPECT_EQ(c.prefilter, PrefilterKind::kStatic);
  EXPECT_EQ(c.policy, DegeneratePolicy::kEmitError);
  EXPECT_EQ(c.signs, SignConvention::kVerbatim);
  EXPECT_EQ(c.a_roots.front(), -0.5);
}

TEST(Config, Rejections) {
  EXPECT_THROW(parse_config(R"({"bogus": 1})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"estimator": {"n": 10, "extra": 0}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"version": 2})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"estimator": {"prefilter": "fancy"}})"), ConfigError);
  EXPECT_THROW(parse_config("{not json"), ConfigError);
  EXPECT_THROW(parse_config(R"({"model": {"type": "file"}})"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/fault-iso.json"), ConfigError);
}

TEST_F(CliTest, SynthWritesReport) {
  const fs::path cfg = write_config("c.json", "{}");
  const fs::path out = dir_ / "synth";
  EXPECT_EQ(run({"synth", "--config", cfg.string(), "--out", out.string()}), kOk);
  EXPECT_TRUE(fs::exists(out / "filter.txt"));
  const std::string rep = slurp(out / "synth_report.txt");
  EXPECT_NE(rep.find("T(1) ="), std::string::npos);
  EXPECT_NE(rep.find("detectable = yes"), std::string::npos);
}

TEST_F(CliTest, ExitCodes) {
  const fs::path bad = write_config("bad.json", R"({"unknown": true})");
  EXPECT_EQ(run({"synth", "--config", bad.string(), "--out", (dir_ / "x").string()}), kConfigError);
  EXPECT_EQ(run({"synth", "--config", (dir_ / "missing.json").string()}), kConfigError);
  EXPECT_EQ(run({"frobnicate"}), kConfigError);

  const fs::path no_null = write_config("nonull.json", R"({"synthesis": {"d_N": 0}})");
  EXPECT_EQ(run({"synth", "--config", no_null.string(), "--out", (dir_ / "y").string()}),
            kSynthesisInfeasible);

  const fs::path flat = write_config("flat.json", R"({"scenario": {"steps": 300,
    "input": [{"type": "zero"}], "f_a": [], "f_m": []}, "estimator": {"degenerate_policy": "emit-error"}})");
  EXPECT_EQ(run({"simulate", "--config", flat.string(), "--out", (dir_ / "z").string()}),
            kDegenerateAbort);
  const fs::path held = write_config("held.json", R"({"scenario": {"steps": 300,
    "input": [{"type": "zero"}], "f_a": [], "f_m": []}})");
  EXPECT_EQ(run({"simulate", "--config", held.string(), "--out", (dir_ / "w").string()}), kOk);
}

TEST_F(CliTest, SimulateIsReproducible) {
  const fs::path cfg = write_config("c.json", kShort);
  ASSERT_EQ(run({"simulate", "--config", cfg.string(), "--out", (dir_ / "a").string()}), kOk);
  ASSERT_EQ(run({"simulate", "--config", cfg.string(), "--out", (dir_ / "b").string()}), kOk);
  const std::string a = slurp(dir_ / "a" / "trace_dynamic.csv");
  const std::string b = slurp(dir_ / "b" / "trace_dynamic.csv");
  ASSERT_FALSE(a.empty());
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.rfind(std::string("# ") + kTraceVersion, 0), 0u);
  std::size_t lines = 0;
  for (char c : a) lines += c == '\n';
  EXPECT_EQ(lines, 602u);
}

TEST_F(CliTest, RandomInputFollowsSeed) {
  const fs::path cfg = write_config("r.json", R"({"scenario": {"steps": 300,
    "input": [{"type": "random", "amplitude": 0.002, "hold": 5}], "f_a": [],
    "f_m": [{"start": 0, "value": 0}, {"start": 50, "value": -0.1}]}})");
  ASSERT_EQ(run({"simulate", "--config", cfg.string(), "--seed", "7", "--out", (dir_ / "s7a").string()}), kOk);
  ASSERT_EQ(run({"simulate", "--config", cfg.string(), "--seed", "7", "--out", (dir_ / "s7b").string()}), kOk);
  ASSERT_EQ(run({"simulate", "--config", cfg.string(), "--seed", "8", "--out", (dir_ / "s8").string()}), kOk);
  const std::string a = slurp(dir_ / "s7a" / "trace_dynamic.csv");
  EXPECT_EQ(a, slurp(dir_ / "s7b" / "trace_dynamic.csv"));
  EXPECT_NE(a, slurp(dir_ / "s8" / "trace_dynamic.csv"));
}

TEST_F(CliTest, SinglePointSweepMatchesSimulate) {
  const std::string text = std::string(kShort).substr(0, std::string(kShort).size() - 1) +
                           R"(, "sweep": {"points": [{"n": 10, "p": 0.85}], "prefilters": ["dynamic"]}})";
  const fs::path cfg = write_config("s.json", text);
  ASSERT_EQ(run({"simulate", "--config", cfg.string(), "--out", (dir_ / "sim").string()}), kOk);
  ASSERT_EQ(run({"sweep", "--config", cfg.string(), "--out", (dir_ / "sw").string()}), kOk);
  const std::string sim = slurp(dir_ / "sim" / "trace_dynamic.csv");
  const std::string sw = slurp(dir_ / "sw" / "run_n10_p0.85_dynamic.csv");
  ASSERT_FALSE(sim.empty());
  EXPECT_EQ(sim, sw);
  const std::string summary = slurp(dir_ / "sw" / "sweep_summary.csv");
  EXPECT_NE(summary.find(",dynamic,ok,"), std::string::npos) << summary;
}

}  // namespace
}  // namespace fault_iso::cli

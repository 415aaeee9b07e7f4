#include "hjlab/cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace hjlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "hjlab_cli_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Json base_config(const fs::path& out) {
  Json j = Json::parse(R"({
    "seed": 3,
    "model": {"base": [[1, 0], [0, 1]], "constants": {"r": 0.5, "R": 2, "c0": 1, "alpha": 0.25}},
    "grid": {"box": {"lo": [-1.2, -1.2], "hi": [1.2, 1.2]}, "n": 65},
    "domain": {"type": "ball", "center": [0, 0], "radius": 1},
    "solver": {"direction_count": 64},
    "level_sets": [0.5],
    "trajectories": [{"x0": [0.3, 0.1]}],
    "audit": {"sample_count": 200, "samples_per_lemma": 50}
  })");
  j["output"] = out.string();
  return j;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run(const std::string& cmd, const Json& config, const fs::path& dir, std::vector<std::string> extra = {}) {
  const fs::path cfg = dir / "config.json";
  std::ofstream(cfg) << config.dump(2);
  std::vector<std::string> args{"hjlab", cmd, "--config", cfg.string()};
  args.insert(args.end(), extra.begin(), extra.end());
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST(Cli, AllWritesArtifacts) {
  const auto dir = scratch("all");
  const auto out = dir / "out";
  ASSERT_EQ(run("all", base_config(out), dir), kExitPass);
  for (const char* f : {"audit.json", "lemma_residuals.csv", "u.field", "levelset_t0.5.csv", "traj_0.csv", "fits.json"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  const auto fits = Json::parse(slurp(out / "fits.json"));
  EXPECT_TRUE(fits.contains("solve"));
  EXPECT_TRUE(fits.contains("trajectories"));
}

TEST(Cli, ByteIdenticalReruns) {
  const auto dir = scratch("rerun");
  ASSERT_EQ(run("all", base_config(dir / "a"), dir), kExitPass);
  ASSERT_EQ(run("all", base_config(dir / "b"), dir, {"--threads", "3"}), kExitPass);
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    const auto name = e.path().filename();
    EXPECT_EQ(slurp(dir / "a" / name), slurp(dir / "b" / name)) << name;
  }
}

TEST(Cli, TraceOutsideDomainIsConfigError) {
  const auto dir = scratch("outside");
  auto c = base_config(dir / "out");
  c["trajectories"] = Json::parse(R"([{"x0": [1.5, 0]}])");
  EXPECT_EQ(run("trace", c, dir), kExitConfigError);
}

TEST(Cli, ProbeWithoutFieldIsConfigError) {
  const auto dir = scratch("nofield");
  auto c = base_config(dir / "out");
  c.erase("solver");
  c["probe"] = Json::parse(R"({"radii": [0.3, 0.35, 0.4, 0.45, 0.5]})");
  testing::internal::CaptureStderr();
  EXPECT_EQ(run("probe", c, dir), kExitConfigError);
  EXPECT_NE(testing::internal::GetCapturedStderr().find("missing value field"), std::string::npos);
}

TEST(Cli, SolvedFieldCanBeReloaded) {
  const auto dir = scratch("reload");
  const auto out = dir / "out";
  auto c = base_config(out);
  ASSERT_EQ(run("solve", c, dir, {"--field-format", "binary"}), kExitPass);
  c.erase("solver");
  c["field"] = (out / "u.field").string();
  EXPECT_EQ(run("trace", c, dir), kExitPass);
  const auto fits = Json::parse(slurp(out / "fits.json"));
  EXPECT_TRUE(fits.contains("solve"));
  EXPECT_TRUE(fits.contains("trajectories"));
}

TEST(Cli, DeclaredConstantsViolated) {
  const auto dir = scratch("violated");
  const auto out = dir / "out";
  auto c = base_config(out);
  c["model"]["base"] = Json::parse("[[2, 0], [0, 1]]");
  c["model"]["constants"] = Json::parse(R"({"r": 1.5, "R": 2, "c0": 1, "alpha": 0.25})");
  EXPECT_EQ(run("audit", c, dir), kExitThresholdFail);
  const auto csv = slurp(out / "lemma_residuals.csv");
  EXPECT_NE(csv.find("declared_growth_lower"), std::string::npos);
}

TEST(Cli, MalformedConfig) {
  const auto dir = scratch("malformed");
  auto c = base_config(dir / "out");
  c.erase("seed");
  EXPECT_EQ(run("audit", c, dir), kExitConfigError);
  EXPECT_EQ(run("audit", Json::parse(R"({"seed": 1, "model": {"constants": {"r": 2, "R": 1, "c0": 1, "alpha": 0.25}}})"), dir),
            kExitConfigError);
}

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(testing::TempDir()) / ("fiemctl_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(const std::string& args) {
  const std::string cmd = std::string(FIEMCTL_PATH) + " " + args + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string config(const std::string& name) { return std::string(CONFIG_DIR) + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "exp.ini";
  std::ofstream(p) << text;
  return p;
}

const std::string kThree = R"([family]
perm = 3 2 1
lambda0 = 0.25 0.3 0.45
lambda1 = 0.45 0.3 0.25
)";

}  // namespace

TEST(Cli, OracleFigure4) {
  const fs::path out = scratch("oracle");
  ASSERT_EQ(run("oracle --config " + config("figure4.ini") + " --out " + out.string()), 0);
  const std::string txt = slurp(out / "oracle.txt");
  EXPECT_NE(txt.find("PERIODIC_INTERVAL left=7/50 right=11/50 period=3 itinerary=2,2,4"), std::string::npos) << txt;
  const auto doc = nlohmann::json::parse(slurp(out / "oracle.json"));
  bool bb3 = false;
  for (const auto& s : doc.at("saddle_connections")) bb3 = bb3 || s.at("label") == "(B,B,3)";
  EXPECT_TRUE(bb3);
  EXPECT_TRUE(fs::exists(out / "resolved_config.ini"));
}

TEST(Cli, VerifyStandardMapPasses) {
  const fs::path out = scratch("verify");
  EXPECT_EQ(run("verify --config " + config("standard_map.ini") + " --out " + out.string()), 0);
  const auto doc = nlohmann::json::parse(slurp(out / "verify.json"));
  EXPECT_TRUE(doc.at("passed").get<bool>());
}

TEST(Cli, SweepFigure12FindsOnePitchfork) {
  const fs::path out = scratch("sweep");
  ASSERT_EQ(run("sweep --config " + config("figure12.ini") + " --out " + out.string()), 0);
  const std::string log = slurp(out / "events.log");
  std::size_t n = 0;
  for (std::size_t at = log.find(" pitchfork "); at != std::string::npos; at = log.find(" pitchfork ", at + 1)) ++n;
  EXPECT_EQ(n, 1u) << log;
  const std::string csv = slurp(out / "sweep.csv");
  EXPECT_EQ(csv.rfind("eps,q,x0,y0,residue,class,event\n", 0), 0u);
}

TEST(Cli, IterateZeroStepsWritesSeedRowsOnly) {
  const fs::path dir = scratch("iter0");
  const fs::path cfg = write_config(dir, kThree + "[iterate]\nseeds = 0.1 0.5; 0.2 0.3\nsteps = 0\n");
  ASSERT_EQ(run("iterate --config " + cfg.string() + " --out " + (dir / "out").string()), 0);
  const std::string t = slurp(dir / "out" / "trajectory_001.csv");
  EXPECT_EQ(t, "step,x,y,alpha\n0,0.2,0.3,1\n");
}

TEST(Cli, ConfigErrorsExitOne) {
  const fs::path dir = scratch("bad");
  EXPECT_EQ(run("iterate --config " + write_config(dir, kThree + "[iterate]\nseeds = 0.1 1.5\n").string() +
                " --out " + dir.string()),
            1);
  EXPECT_EQ(run("iterate --config " + write_config(dir, kThree + "[map]\nepsilon = 1\n").string() + " --out " +
                dir.string()),
            1);
  EXPECT_EQ(run("iterate --config " + write_config(dir, kThree + "[forcing]\nterms = cos1:1\n").string() +
                " --out " + dir.string()),
            1);
  EXPECT_EQ(run("iterate"), 1);
  EXPECT_EQ(run("nosuch --config x"), 1);
}

TEST(Cli, BoundaryEscapeExitsTwo) {
  const fs::path dir = scratch("escape");
  const fs::path cfg = write_config(dir, kThree + "y_min = 0.4\ny_max = 0.6\n[map]\neps = 0.2\n[iterate]\nseeds = 0.1 0.59\nsteps = 100\n");
  EXPECT_EQ(run("iterate --config " + cfg.string() + " --out " + (dir / "out").string()), 2);
  EXPECT_TRUE(fs::exists(dir / "out" / "trajectory_000.csv"));
}

TEST(Cli, SymmetryLinesWithZeroCapGivesGammaZeroOnly) {
  const fs::path dir = scratch("imax0");
  const fs::path cfg = write_config(dir, kThree + "[map]\neps = 0.01\n[symmetry]\ni_max = 0\n");
  ASSERT_EQ(run("symmetry-lines --config " + cfg.string() + " --out " + (dir / "out").string()), 0);
  const auto doc = nlohmann::json::parse(slurp(dir / "out" / "symmetry_lines.json"));
  ASSERT_EQ(doc.size(), 1u);
  EXPECT_EQ(doc[0].at("line_index"), 0);
  EXPECT_EQ(doc[0].at("branches").size(), 2u);
  EXPECT_EQ(nlohmann::json::parse(slurp(dir / "out" / "candidates.json")).size(), 0u);
}

TEST(Cli, OutputIndependentOfThreadCount) {
  const fs::path a = scratch("threads1"), b = scratch("threads4");
  ASSERT_EQ(run("symmetry-lines --config " + config("figure8.ini") + " --threads 1 --out " + a.string()), 0);
  ASSERT_EQ(run("symmetry-lines --config " + config("figure8.ini") + " --threads 4 --out " + b.string()), 0);
  for (const char* f : {"symmetry_lines.csv", "symmetry_lines.json", "candidates.json", "resolved_config.ini"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(Cli, FindPeriodicThreeIem) {
  const fs::path out = scratch("periodic");
  ASSERT_EQ(run("find-periodic --config " + config("three_iem.ini") + " --out " + out.string()), 0);
  const auto doc = nlohmann::json::parse(slurp(out / "orbits.json"));
  EXPECT_EQ(doc.at("symmetric").size(), 1u);
  EXPECT_EQ(doc.at("nonsymmetric").size(), 4u);
  EXPECT_EQ(doc.at("predictions").at(0).at("predicted"), 4);
}

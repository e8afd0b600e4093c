#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cli.hpp"
#include "pcurve/io.hpp"

namespace fs = std::filesystem;
using namespace pcurve;

namespace {

const std::string kDomains = std::string(PCURVE_DATA_DIR) + "/domains/";

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("pcurve_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "pcurve");
    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return cli::run(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

nlohmann::json read_json(const std::string& p) {
  std::ifstream f(p);
  return nlohmann::json::parse(f);
}

}  // namespace

TEST_F(Cli, NoArgumentsIsAnError) { EXPECT_EQ(run({}), cli::kSpecError); }

TEST_F(Cli, HelpIsOk) { EXPECT_EQ(run({"--help"}), cli::kOk); }

TEST_F(Cli, ReferenceArc) {
  EXPECT_EQ(run({"solve", "--curve", "arc:0.6666666666666666", "--out", dir_.string(), "--name", "arc"}),
            cli::kOk)
      << err_.str();
  EXPECT_TRUE(fs::exists(path("arc.csv")));
  EXPECT_TRUE(fs::exists(path("arc.json")));
  EXPECT_NEAR(load_trace_csv(path("arc.csv")).end(), 1.0471975511965976, 1e-12);
}

TEST_F(Cli, SolveQuadrant) {
  EXPECT_EQ(run({"solve", "--domain", kDomains + "quadrant.json", "--x0", "1,0", "--zeta0", "1.5707963267948966",
                 "--length", "5", "--out", dir_.string(), "--name", "q"}),
            cli::kOk)
      << err_.str();
  const CurveTrace tr = load_trace_csv(path("q.csv"));
  EXPECT_NEAR(tr.end(), 5.0, 1e-12);
  EXPECT_EQ(read_json(path("q.json"))["format_version"], 1);
}

TEST_F(Cli, StartOutsideIsInadmissible) {
  EXPECT_EQ(run({"solve", "--domain", kDomains + "ball3.json", "--x0", "2,0,0", "--tangent", "1,0,0", "--out",
                 dir_.string()}),
            cli::kInadmissible);
}

TEST_F(Cli, MissingDomainFile) {
  EXPECT_EQ(run({"solve", "--domain", path("none.json"), "--x0", "0,0", "--zeta0", "0", "--out", dir_.string()}),
            cli::kSpecError);
  EXPECT_FALSE(err_.str().empty());
}

TEST_F(Cli, SweepWritesEveryJob) {
  std::ofstream(path("sweep.json"))
      << R"([{"name": "a", "x0": [0, 0, 0], "tangent": [1, 0, 0], "length": 0.5},
             {"name": "b", "x0": [0.1, 0.2, 0], "tangent": [0, 1, 1], "length": 0.3}])";
  EXPECT_EQ(run({"solve", "--domain", kDomains + "ball3.json", "--sweep", path("sweep.json"), "--out",
                 dir_.string(), "--threads", "2"}),
            cli::kOk)
      << err_.str();
  EXPECT_TRUE(fs::exists(path("a.csv")));
  EXPECT_TRUE(fs::exists(path("b.csv")));
}

TEST_F(Cli, ValidateArcPasses) {
  ASSERT_EQ(run({"solve", "--curve", "arc:0.6666666666666666", "--out", dir_.string(), "--name", "arc"}), 0);
  EXPECT_EQ(run({"validate", "--domain", kDomains + "quarter_disk.json", "--trace", path("arc.csv"), "--samples",
                 "50000", "--barycenter-tol", "0.03", "--out", path("arc_report.json")}),
            cli::kOk)
      << out_.str() << err_.str();
  const nlohmann::json j = read_json(path("arc_report.json"));
  EXPECT_TRUE(j["passed"].get<bool>());
  EXPECT_EQ(j["thresholds"]["barycenter"], 0.03);
  EXPECT_NE(out_.str().find("PASS"), std::string::npos);
}

TEST_F(Cli, ValidateParabolaFails) {
  ASSERT_EQ(run({"solve", "--curve", "square-parabola", "--out", dir_.string(), "--name", "par"}), 0);
  EXPECT_EQ(run({"validate", "--domain", kDomains + "unit_square.json", "--trace", path("par.csv"), "--samples",
                 "20000", "--out", path("par_report.json")}),
            cli::kValidationFailed);
  EXPECT_FALSE(read_json(path("par_report.json"))["passed"].get<bool>());
  EXPECT_NE(out_.str().find("FAIL"), std::string::npos);
}

TEST_F(Cli, HelixTable) {
  EXPECT_EQ(run({"helix", "--a", "0.2,0.2", "--b", "0.5,1.0", "--out", path("helix.csv")}), cli::kOk) << err_.str();
  std::ifstream f(path("helix.csv"));
  const std::vector<HelixRow> rows = read_helix_csv(f);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_LE(rows[0].residual, 1e-8);
  EXPECT_NEAR(rows[1].residual, 0.15, 1e-8);
  EXPECT_TRUE(rows[0].admissible);
}

TEST_F(Cli, HelixMismatchedLists) {
  EXPECT_EQ(run({"helix", "--a", "0.2,0.3", "--b", "0.5", "--out", path("helix.csv")}), cli::kSpecError);
}

TEST_F(Cli, SquareCompose) {
  EXPECT_EQ(run({"square-compose", "--samples", "20", "--out", path("square.csv")}), cli::kOk) << err_.str();
  std::ifstream f(path("square.csv"));
  std::string line;
  std::getline(f, line);
  EXPECT_EQ(line, "# format_version=1");
  EXPECT_NE(out_.str().find("c = 6.6555"), std::string::npos) << out_.str();
}

TEST_F(Cli, SectionsExport) {
  ASSERT_EQ(run({"solve", "--curve", "helix:0.2:0.5", "--out", dir_.string(), "--name", "h"}), 0) << err_.str();
  EXPECT_EQ(run({"sections", "--domain", kDomains + "cylinder.json", "--trace", path("h.csv"), "--count", "4",
                 "--points", "12", "--out", path("sec.json")}),
            cli::kOk)
      << err_.str();
  const nlohmann::json j = read_json(path("sec.json"));
  EXPECT_EQ(j["format_version"], 1);
  ASSERT_EQ(j["sections"].size(), 4u);
  EXPECT_EQ(j["sections"][0]["outline"].size(), 12u);
  EXPECT_EQ(j["sections"][0]["outline"][0].size(), 3u);
}

TEST_F(Cli, ReportCarriesNodePositions) {
  ASSERT_EQ(run({"solve", "--curve", "arc:0.6666666666666666", "--out", dir_.string(), "--name", "arc"}), 0);
  ASSERT_EQ(run({"validate", "--domain", kDomains + "quarter_disk.json", "--trace", path("arc.csv"), "--samples",
                 "20000", "--barycenter-tol", "0.05", "--out", path("r.json")}),
            cli::kOk);
  const nlohmann::json cell = read_json(path("r.json"))["barycenters"][0];
  const double r = std::hypot(cell["node_position"][0].get<double>(), cell["node_position"][1].get<double>());
  EXPECT_NEAR(r, 2.0 / 3.0, 1e-12);
}

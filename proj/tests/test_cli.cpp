#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "qcert/acceptance.hpp"
#include "qcert/cli.hpp"

namespace qcert {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "qcert");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("qcert_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    bundled_ = std::string(QCERT_TEST_DATA_DIR) + "/josephson.json";
  }
  void TearDown() override { fs::remove_all(dir_); }

  /// Writes the bundled config with `edit` applied to its JSON document.
  std::string variant(const std::string& name, const std::function<void(json&)>& edit) {
    json doc = json::parse(read_file(bundled_));
    edit(doc);
    const fs::path p = dir_ / name;
    std::ofstream(p) << doc.dump(2);
    return p.string();
  }

  fs::path dir_;
  std::string bundled_;
};

TEST(Sha256, KnownDigest) {
  EXPECT_EQ(cli::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(cli::sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_F(CliTest, AnalyzeLiteralAtReportedTau) {
  const auto r = run_cli({"analyze", bundled_, "--kappa-mode", "literal", "--tau1", "0.8165", "--out-dir", dir_.string()});
  ASSERT_EQ(r.code, cli::kSuccess) << r.err;
  const json doc = json::parse(read_file(dir_ / "certificate.json"));
  EXPECT_EQ(doc["status"], "certified");
  EXPECT_EQ(doc["kappa_mode"], "literal");
  EXPECT_GT(doc["feasibility_margin"].get<double>(), 0.0);
  EXPECT_TRUE(doc["bound"].is_number());
  const auto& cmp = doc["paper_comparison"];
  EXPECT_EQ(cmp["reported"].get<double>(), 6.0965);
  EXPECT_NEAR(cmp["computed_eq14_at_paper_P"].get<double>(), 12.192, 1e-9);
  EXPECT_FALSE(cmp["note"].get<std::string>().empty());
  EXPECT_EQ(doc["manifest"]["config_sha256"], cli::sha256_hex(read_file(bundled_)));
}

TEST_F(CliTest, AnalyzeDefaultSearch) {
  const auto r = run_cli({"analyze", bundled_, "--out-dir", dir_.string()});
  ASSERT_EQ(r.code, cli::kSuccess) << r.err;
  const json doc = json::parse(read_file(dir_ / "certificate.json"));
  EXPECT_EQ(doc["kappa_mode"], "derivation_consistent");
  EXPECT_GT(doc["tau1_trace"].size(), 31u);
  EXPECT_EQ(doc["sector_report"]["passed"], true);
}

TEST_F(CliTest, AnalyzeIsDeterministicOutsideManifest) {
  const fs::path a = dir_ / "a", b = dir_ / "b";
  fs::create_directories(a);
  fs::create_directories(b);
  ASSERT_EQ(run_cli({"analyze", bundled_, "--tau1", "0.9", "--out-dir", a.string()}).code, 0);
  ASSERT_EQ(run_cli({"analyze", bundled_, "--tau1", "0.9", "--out-dir", b.string()}).code, 0);
  json da = json::parse(read_file(a / "certificate.json"));
  json db = json::parse(read_file(b / "certificate.json"));
  da.erase("manifest");
  db.erase("manifest");
  EXPECT_EQ(da.dump(), db.dump());
}

TEST_F(CliTest, AnalyzeUndampedPlantInfeasible) {
  const auto cfg = variant("undamped.json", [](json& d) {
    d["plant"]["M"] = json::array({{0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}});
    d["plant"]["N1"] = json::array({{0, 0}, {0, 0}});
    d["tau1"]["search"]["grid_points"] = 5;
  });
  const auto r = run_cli({"analyze", cfg, "--out-dir", dir_.string()});
  EXPECT_EQ(r.code, cli::kInfeasible);
  EXPECT_NE(r.err.find("no feasible τ₁ on grid"), std::string::npos) << r.err;
}

TEST_F(CliTest, AnalyzeBadConfigIsError) {
  const auto cfg = variant("bad.json", [](json& d) { d["sector"]["gamma1"] = 0; });
  const auto r = run_cli({"analyze", cfg, "--out-dir", dir_.string()});
  EXPECT_EQ(r.code, cli::kError);
  EXPECT_NE(r.err.find("gamma1 must be positive"), std::string::npos) << r.err;
  EXPECT_EQ(run_cli({"analyze", (dir_ / "missing.json").string()}).code, cli::kError);
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kError);
}

TEST_F(CliTest, AnalyzeStrictSector) {
  const auto cfg = variant("weak.json", [](json& d) { d["sector"]["delta3"] = 0.5; });
  EXPECT_EQ(run_cli({"analyze", cfg, "--tau1", "0.9", "--strict-sector", "--out-dir", dir_.string()}).code,
            cli::kSectorViolation);
}

TEST_F(CliTest, VerifySectorPasses) {
  const auto r = run_cli({"verify-sector", bundled_, "--json"});
  ASSERT_EQ(r.code, cli::kSuccess) << r.err;
  const json doc = json::parse(r.out);
  for (const auto& c : doc["conditions"]) EXPECT_LE(c["max_violation"].get<double>(), 1e-12);
}

TEST_F(CliTest, VerifySectorViolationReportsWitness) {
  const auto cfg = variant("d3.json", [](json& d) { d["sector"]["delta3"] = 0.5; });
  const auto r = run_cli({"verify-sector", cfg});
  EXPECT_EQ(r.code, cli::kSectorViolation);
  EXPECT_NE(r.err.find("witness z = (0, 0)"), std::string::npos) << r.err;
}

TEST_F(CliTest, VerifySectorEmptyGrid) {
  const auto cfg = variant("grid.json", [](json& d) { d["sector_grid"]["n_angular"] = 0; });
  EXPECT_EQ(run_cli({"verify-sector", cfg}).code, cli::kError);
}

TEST_F(CliTest, VerifySectorCsv) {
  const fs::path csv = dir_ / "s.csv";
  ASSERT_EQ(run_cli({"verify-sector", bundled_, "--csv", csv.string()}).code, 0);
  std::ifstream in(csv);
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  EXPECT_EQ(lines, 1 + 1 + 60 * 60);
}

TEST_F(CliTest, SimulateAgainstCertificate) {
  ASSERT_EQ(run_cli({"analyze", bundled_, "--out-dir", dir_.string()}).code, 0);
  const auto r = run_cli({"simulate", bundled_, "--against", (dir_ / "certificate.json").string(), "--t-final", "0.5",
                          "--cutoff", "6", "--out-dir", dir_.string()});
  ASSERT_EQ(r.code, cli::kSuccess) << r.err;
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
  const json s = json::parse(read_file(dir_ / "simulation_summary.json"));
  EXPECT_TRUE(s["comparison"]["passed"].get<bool>());
  EXPECT_EQ(s["cutoff"], 6);
  EXPECT_TRUE(fs::exists(dir_ / "simulation.csv"));
}

TEST_F(CliTest, SimulateWithoutAgainstOmitsComparison) {
  const auto r = run_cli({"simulate", bundled_, "--t-final", "0.2", "--cutoff", "6", "--out-dir", dir_.string()});
  ASSERT_EQ(r.code, cli::kSuccess) << r.err;
  const json s = json::parse(read_file(dir_ / "simulation_summary.json"));
  EXPECT_FALSE(s.contains("comparison"));
}

TEST_F(CliTest, SimulateTinyCutoffWarns) {
  const auto r = run_cli({"simulate", bundled_, "--cutoff", "2", "--t-final", "1", "--out-dir", dir_.string()});
  EXPECT_EQ(r.code, cli::kSuccess);
  EXPECT_NE(r.err.find("truncation leak"), std::string::npos) << r.err;
  const auto strict = run_cli({"simulate", bundled_, "--cutoff", "2", "--t-final", "1", "--strict-truncation",
                               "--out-dir", dir_.string()});
  EXPECT_EQ(strict.code, cli::kError);
}

TEST_F(CliTest, SimulateFailsAgainstTooSmallBound) {
  const fs::path cert = dir_ / "tiny.json";
  std::ofstream(cert) << R"({"bound": 0.1})";
  const auto r = run_cli({"simulate", bundled_, "--against", cert.string(), "--t-final", "0.2", "--cutoff", "6",
                          "--out-dir", dir_.string()});
  EXPECT_EQ(r.code, cli::kError);
  EXPECT_NE(r.out.find("FAIL"), std::string::npos);
}

TEST_F(CliTest, PlotW) {
  const auto r = run_cli({"plot-w", bundled_, "--x-max", std::to_string(M_PI / 4.0), "--points", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "x,W");
  std::vector<std::pair<double, double>> rows;
  for (std::string line; std::getline(in, line);) {
    const auto comma = line.find(',');
    rows.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
  }
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1].second, 0.0);
  EXPECT_NEAR(rows[2].second, M_PI * M_PI / 4.0 - 1.0, 1e-5);
}

TEST_F(CliTest, PlotWIsEven) {
  const auto r = run_cli({"plot-w", bundled_});
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  std::vector<double> w;
  while (std::getline(in, line)) w.push_back(std::stod(line.substr(line.find(',') + 1)));
  ASSERT_EQ(w.size(), 601u);
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_EQ(w[i], w[w.size() - 1 - i]) << i;
}

TEST_F(CliTest, CheckPaperExampleJson) {
  const auto r = run_cli({"check-paper-example", "--only", "A1,A5", "--json"});
  EXPECT_EQ(r.code, 0) << r.out;
  const json doc = json::parse(r.out);
  ASSERT_EQ(doc["criteria"].size(), 2u);
  EXPECT_EQ(doc["criteria"][0]["id"], "A1");
  EXPECT_EQ(run_cli({"check-paper-example", "--only", "A42"}).code, cli::kError);
}

TEST(Acceptance, TamperedPFailsA1) {
  AcceptanceInputs in;
  in.P(0, 0) = -5.0;
  EXPECT_FALSE(run_criterion("A1", in).passed);
  EXPECT_TRUE(run_criterion("A1", AcceptanceInputs{}).passed);
  EXPECT_THROW(run_criterion("A0", AcceptanceInputs{}), std::invalid_argument);
}

}  // namespace
}  // namespace qcert

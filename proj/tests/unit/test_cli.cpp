#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "hs/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int status = -1;
  std::string out;
  std::string err;
};

Result run(const std::string& args, const std::string& env = "") {
  static int counter = 0;
  const fs::path err_file = fs::temp_directory_path() / ("hs_cli_err_" + std::to_string(::getpid()) + "_" +
                                                         std::to_string(counter++));
  const std::string cmd = env + " " + std::string(HS_CLI_PATH) + " " + args + " 2>" + err_file.string();
  Result r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int raw = ::pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(err_file);
  std::stringstream ss;
  ss << in.rdbuf();
  r.err = ss.str();
  fs::remove(err_file);
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("hs_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

double last_cdf(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, last;
  while (std::getline(in, line)) {
    if (!line.empty()) last = line;
  }
  std::istringstream row(last);
  std::string cell;
  std::getline(row, cell, ',');
  std::getline(row, cell, ',');
  std::getline(row, cell, ',');
  return std::stod(cell);
}

}  // namespace

TEST_F(CliTest, MpCheckAgreesWithClosedForm) {
  const Result r = run("mp-check --c 0.5");
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("abs_error"), std::string::npos);
}

TEST_F(CliTest, DensityOfOnesProfileCarriesUnitMass) {
  const std::string out = path("density.csv");
  const Result r = run("density --profile ones --n 128 --N 128 --xmin -0.5 --xmax 4.5 --output " + out);
  ASSERT_EQ(r.status, 0) << r.err;
  const std::string csv = hs::read_file(out);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "x,density,cdf,eta_used");
  const double mass = last_cdf(csv);
  EXPECT_GE(mass, 0.99);
  EXPECT_LE(mass, 1.01);
  EXPECT_TRUE(fs::exists(out + ".manifest.json"));
}

TEST_F(CliTest, MissingRequiredFlagIsUsageError) {
  const Result r = run("truncate --profile ones --n 4 --N 4");
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("--epsilon"), std::string::npos) << r.err;
}

TEST_F(CliTest, GeneratedProfileNeedsDimensions) {
  const Result r = run("certify --profile ones --z 1+1i --N 4");
  EXPECT_EQ(r.status, 2);
  EXPECT_NE(r.err.find("--n"), std::string::npos) << r.err;
}

TEST_F(CliTest, NonPositiveImaginaryPartIsRejected) {
  EXPECT_EQ(run("certify --profile ones --n 4 --N 4 --z 1-1i").status, 2);
  EXPECT_EQ(run("certify --profile ones --n 4 --N 4 --z 1+0i").status, 2);
  EXPECT_EQ(run("certify --profile ones --n 4 --N 4 --z banana").status, 2);
}

TEST_F(CliTest, UnknownSubcommandIsUsageError) { EXPECT_EQ(run("frobnicate").status, 2); }

TEST_F(CliTest, HelpExitsCleanly) {
  const Result r = run("--help");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("density"), std::string::npos);
}

TEST_F(CliTest, RerunsAreByteIdentical) {
  const std::string a = path("a.csv");
  const std::string b = path("b.csv");
  const std::string args = "solve --profile uniform:0,2 --n 12 --N 20 --seed 7 --points 9 --v 0.2 --output ";
  ASSERT_EQ(run(args + a).status, 0);
  ASSERT_EQ(run(args + b + " --threads 1").status, 0);
  EXPECT_EQ(hs::read_file(a), hs::read_file(b));
}

TEST_F(CliTest, EnvironmentSeedAppliesUnlessFlagGiven) {
  const std::string base = "truncate --profile uniform:0,5 --n 10 --N 10 --epsilon 0.2 --profile-out ";
  ASSERT_EQ(run(base + path("env.csv"), "HS_SEED=11").status, 0);
  ASSERT_EQ(run(base + path("flag.csv") + " --seed 11").status, 0);
  ASSERT_EQ(run(base + path("override.csv") + " --seed 11", "HS_SEED=12").status, 0);
  ASSERT_EQ(run(base + path("other.csv"), "HS_SEED=12").status, 0);
  EXPECT_EQ(hs::read_file(path("env.csv")), hs::read_file(path("flag.csv")));
  EXPECT_EQ(hs::read_file(path("override.csv")), hs::read_file(path("flag.csv")));
  EXPECT_NE(hs::read_file(path("other.csv")), hs::read_file(path("flag.csv")));
  const std::string manifest = hs::read_file(path("env.csv") + ".manifest.json");
  EXPECT_NE(manifest.find("HS_SEED"), std::string::npos);
}

TEST_F(CliTest, ConfigFileSuppliesSubcommandOptions) {
  const std::string ini = path("run.ini");
  std::ofstream(ini) << "[truncate]\nprofile=block:1,9/1,1\nn=4\nN=4\nepsilon=0.25\n";
  const Result r = run("--config " + ini + " truncate");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("\"M\""), std::string::npos) << r.out;
}

TEST_F(CliTest, CertifyReportsContraction) {
  const Result r = run("certify --profile uniform:0.5,1.5 --n 6 --N 9 --seed 3 --z 0.7+0.3i");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("rho"), std::string::npos);
}

TEST_F(CliTest, SimulateWritesOneFilePerTrial) {
  const std::string dir = path("spectra");
  const Result r = run("simulate --profile ones --n 8 --N 8 --trials 3 --seed 2 --out-dir " + dir);
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir + "/trial_0000.csv"));
  EXPECT_TRUE(fs::exists(dir + "/trial_0002.csv"));
  EXPECT_TRUE(fs::exists(dir + "/manifest.json"));
}

TEST_F(CliTest, ProfileCsvIsAccepted) {
  const std::string csv = path("d.csv");
  std::ofstream(csv) << "1,2\n0.5,1\n1,1\n";
  const Result r = run("certify --profile " + csv + " --z 1+0.5i");
  EXPECT_EQ(r.status, 0) << r.err;
}

TEST_F(CliTest, InvalidProfileIsComputeError) {
  const std::string csv = path("bad.csv");
  std::ofstream(csv) << "1,0\n1,0\n";
  const Result r = run("certify --profile " + csv + " --z 1+0.5i");
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("ZeroColumn"), std::string::npos) << r.err;
}

TEST_F(CliTest, SimulateFromSpecMatchesCompareSeeds) {
  const std::string ini = path("exp.ini");
  std::ofstream(ini) << "[experiment]\nprofile = ones\nsizes = 6x8\ntrials = 2\nseed = 4\nladder_depth = 0\n"
                        "[inversion]\npoints = 201\n";
  const std::string dir = path("spectra");
  const Result r = run("simulate --spec " + ini + " --out-dir " + dir);
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir + "/6x8/trial_0001.csv"));
  const Result c = run("compare --spec " + ini);
  ASSERT_EQ(c.status, 0) << c.err;
  const std::string manifest = hs::read_file(dir + "/manifest.json");
  // Per-trial seeds in the manifest are the ones listed in the report.
  std::istringstream rows(c.out);
  std::string line;
  std::getline(rows, line);
  while (std::getline(rows, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    ASSERT_GE(cells.size(), 4u);
    EXPECT_NE(manifest.find("\"seed\": " + cells[3]), std::string::npos) << cells[3];
  }
}

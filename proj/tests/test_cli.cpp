#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kCli = LANGINC_CLI_PATH;

struct CmdResult {
  int exit_code = -1;
  std::string stdout_text;
  std::string stderr_text;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("langinc_cli_") + info->name() + "_" + std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& name, const std::string& text) {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  CmdResult run(const std::string& args) {
    const auto out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    const std::string cmd = kCli + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    CmdResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.stdout_text = slurp(out);
    r.stderr_text = slurp(err);
    return r;
  }

  // Runs the command twice into separate directories; every file must match byte for byte.
  void expect_reproducible(const std::string& args_before_out) {
    const auto a = dir_ / "run_a", b = dir_ / "run_b";
    ASSERT_EQ(run(args_before_out + " --out " + a.string()).exit_code, 0) << args_before_out;
    ASSERT_EQ(run(args_before_out + " --out " + b.string()).exit_code, 0) << args_before_out;
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(a)) {
      ++files;
      const auto other = b / e.path().filename();
      ASSERT_TRUE(fs::exists(other)) << other;
      EXPECT_TRUE(slurp(e.path()) == slurp(other)) << "differs: " << e.path().filename();
    }
    EXPECT_GT(files, 0u);
    fs::remove_all(a);
    fs::remove_all(b);
  }

  fs::path dir_;
};

std::vector<std::vector<double>> read_csv(const fs::path& p, std::vector<std::string>* header = nullptr) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  if (header) {
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header->push_back(cell);
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

// Point counts of every <polyline> and the number of bar rects.
struct SvgShape {
  std::vector<std::size_t> polylines;
  std::size_t bars = 0;
};

SvgShape svg_shape(const fs::path& p) {
  boost::property_tree::ptree tree;
  boost::property_tree::read_xml(p.string(), tree);
  SvgShape s;
  for (const auto& [tag, node] : tree.get_child("svg")) {
    if (tag == "polyline") {
      std::istringstream pts(node.get<std::string>("<xmlattr>.points"));
      std::string pair;
      std::size_t n = 0;
      while (pts >> pair) ++n;
      s.polylines.push_back(n);
    }
    if (tag == "rect" && node.get<std::string>("<xmlattr>.class", "") == "bar") ++s.bars;
  }
  return s;
}

const char* kSmallConfig = R"(potential = "paper_example"
[sampler]
epsilon = 1e-3
steps = 10_000
[fp]
N = 400
times = [0.5]
dt = 0.01
[jko]
h = 0.05
steps = 20
M = 200
times = [0.5, 1.0]
grid_N = 400
[gibbs]
points = 101
)";

}  // namespace

TEST_F(CliTest, SampleWritesOneRowPerStepAndMetadata) {
  const auto cfg = write_config("c.toml", kSmallConfig);
  ASSERT_EQ(run("sample --config " + cfg.string() + " --out " + (dir_ / "o").string()).exit_code, 0);
  std::vector<std::string> header;
  const auto rows = read_csv(dir_ / "o/chain.csv", &header);
  EXPECT_EQ(header, (std::vector<std::string>{"step", "x"}));
  ASSERT_EQ(rows.size(), 10'000u);
  EXPECT_EQ(rows.front()[0], 1.0);
  EXPECT_EQ(rows.back()[0], 10'000.0);
  const auto meta = nlohmann::json::parse(slurp(dir_ / "o/chain.json"));
  EXPECT_EQ(meta["retained"], 10'000);
  EXPECT_EQ(meta["config"]["sampler"]["proposal_std"], 1.0);
  EXPECT_EQ(meta["config"]["sampler"]["seed"], 42);
  EXPECT_EQ(svg_shape(dir_ / "o/chain.svg").polylines, std::vector<std::size_t>{rows.size()});
}

TEST_F(CliTest, SeedFlagOverridesConfig) {
  const auto cfg = write_config("c.toml", kSmallConfig);
  ASSERT_EQ(run("sample --config " + cfg.string() + " --seed 9 --out " + (dir_ / "a").string()).exit_code, 0);
  ASSERT_EQ(run("sample --config " + cfg.string() + " --out " + (dir_ / "b").string()).exit_code, 0);
  EXPECT_NE(slurp(dir_ / "a/chain.csv"), slurp(dir_ / "b/chain.csv"));
  EXPECT_EQ(nlohmann::json::parse(slurp(dir_ / "a/chain.json"))["config"]["sampler"]["seed"], 9);
}

TEST_F(CliTest, FpSteadyStateHasUnitTrapezoidMass) {
  const auto cfg = write_config("c.toml", kSmallConfig);
  ASSERT_EQ(run("fp --config " + cfg.string() + " --out " + (dir_ / "o").string()).exit_code, 0);
  for (const char* stem : {"fp_steady", "fp_t0.5"}) {
    std::vector<std::string> header;
    const auto rows = read_csv(dir_ / "o" / (std::string(stem) + ".csv"), &header);
    EXPECT_EQ(header, (std::vector<std::string>{"x", "rho"}));
    double mass = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      mass += 0.5 * (rows[i][0] - rows[i - 1][0]) * (rows[i][1] + rows[i - 1][1]);
    }
    EXPECT_NEAR(mass, 1.0, 1e-10) << stem;
    EXPECT_EQ(svg_shape(dir_ / "o" / (std::string(stem) + ".svg")).polylines, std::vector<std::size_t>{rows.size()});
  }
  std::vector<std::string> header;
  const auto res = read_csv(dir_ / "o/fp_residual.csv", &header);
  EXPECT_EQ(header, (std::vector<std::string>{"breakpoint", "density_jump", "current_jump"}));
  ASSERT_EQ(res.size(), 3u);
  EXPECT_EQ(res[1][0], 0.0);
}

TEST_F(CliTest, JkoTraceAndDensities) {
  const auto cfg = write_config("c.toml", kSmallConfig);
  ASSERT_EQ(run("jko --config " + cfg.string() + " --out " + (dir_ / "o").string()).exit_code, 0);
  std::vector<std::string> header;
  const auto rows = read_csv(dir_ / "o/jko_trace.csv", &header);
  EXPECT_EQ(header, (std::vector<std::string>{"k", "free_energy", "w2_step"}));
  ASSERT_EQ(rows.size(), 21u);
  for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_LE(rows[k][1], rows[k - 1][1] + 1e-8);
  EXPECT_EQ(svg_shape(dir_ / "o/jko_trace.svg").polylines, std::vector<std::size_t>{rows.size()});
  EXPECT_TRUE(fs::exists(dir_ / "o/jko_density_t0.5.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "o/jko_density_t1.csv"));
}

TEST_F(CliTest, GibbsTable) {
  const auto cfg = write_config("c.toml", kSmallConfig);
  ASSERT_EQ(run("gibbs --config " + cfg.string() + " --out " + (dir_ / "o").string()).exit_code, 0);
  std::vector<std::string> header;
  const auto rows = read_csv(dir_ / "o/gibbs.csv", &header);
  EXPECT_EQ(header, (std::vector<std::string>{"x", "pdf", "cdf"}));
  ASSERT_EQ(rows.size(), 101u);
  EXPECT_EQ(rows.front()[0], -4.0);
  EXPECT_EQ(rows.back()[0], 4.0);
  EXPECT_NEAR(rows[50][2], 0.5, 1e-12);
  EXPECT_EQ(svg_shape(dir_ / "o/gibbs.svg").polylines, (std::vector<std::size_t>{101, 101}));
}

TEST_F(CliTest, MetricsBetweenFilesAndAgainstGibbs) {
  std::ofstream(dir_ / "a.csv") << "step,x\n1,0\n2,1\n";
  std::ofstream(dir_ / "b.csv") << "x\n0.5\n1.5\n";
  auto r = run("metrics --a " + (dir_ / "a.csv").string() + " --b " + (dir_ / "b.csv").string() + " --out " +
               (dir_ / "o").string());
  ASSERT_EQ(r.exit_code, 0) << r.stderr_text;
  const auto j = nlohmann::json::parse(slurp(dir_ / "o/metrics.json"));
  EXPECT_DOUBLE_EQ(j["w1"].get<double>(), 0.5);
  EXPECT_EQ(j["n_a"], 2);
  EXPECT_EQ(j["n_b"], 2);
  EXPECT_EQ(nlohmann::json::parse(r.stdout_text), j);

  const auto cfg = write_config("c.toml", kSmallConfig);
  r = run("metrics --a " + (dir_ / "a.csv").string() + " --config " + cfg.string() + " --out " + (dir_ / "g").string());
  ASSERT_EQ(r.exit_code, 0) << r.stderr_text;
  const auto g = nlohmann::json::parse(slurp(dir_ / "g/metrics.json"));
  EXPECT_GT(g["w1"].get<double>(), 0.0);
  EXPECT_TRUE(g["n_b"].is_null());

  std::ofstream(dir_ / "bad.csv") << "x\n1\noops\n";
  r = run("metrics --a " + (dir_ / "bad.csv").string() + " --b " + (dir_ / "b.csv").string());
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.stderr_text.find("line 3"), std::string::npos) << r.stderr_text;
  EXPECT_EQ(run("metrics --a " + (dir_ / "a.csv").string()).exit_code, 2);
}

TEST_F(CliTest, ConfigErrorsExitTwoWithPosition) {
  auto cfg = write_config("bad.toml", "[sampler]\nepsilon = 0.1\n  bogus = 3\n");
  auto r = run("sample --config " + cfg.string());
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.stderr_text.find("line 3, column 3"), std::string::npos) << r.stderr_text;

  cfg = write_config("syntax.toml", "[sampler\n");
  r = run("fp --config " + cfg.string());
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.stderr_text.find("line 1"), std::string::npos) << r.stderr_text;

  EXPECT_EQ(run("sample --config " + (dir_ / "missing.toml").string()).exit_code, 2);
  EXPECT_EQ(run("frobnicate").exit_code, 2);
  EXPECT_EQ(run("sample --no-such-flag").exit_code, 2);
  EXPECT_EQ(run("repro no-such-figure").exit_code, 2);

  cfg = write_config("relu.toml", "[potential]\nkind = \"relu\"\nwidths = [5, 1]\n");
  EXPECT_EQ(run("fp --config " + cfg.string()).exit_code, 2);
}

TEST_F(CliTest, DivergenceExitsThree) {
  // Gradient step factor 1 - 2 * 5 = -9 blows the chain up within a few steps.
  const auto cfg = write_config("d.toml", "[potential]\npieces = [[0, 0, 1]]\n[sampler]\nepsilon = 5\nsteps = 100\n");
  const auto r = run("sample --config " + cfg.string() + " --out " + (dir_ / "o").string());
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_NE(r.stderr_text.find("diverged"), std::string::npos) << r.stderr_text;
}

TEST_F(CliTest, ReluSampleHasOneColumnPerParameter) {
  const auto cfg = write_config("r.toml", "[potential]\nwidths = [5, 3, 1]\n[sampler]\nepsilon = 1e-5\nsigma = 1e-3\nsteps = 50\nthin = 10\n");
  ASSERT_EQ(run("sample --config " + cfg.string() + " --out " + (dir_ / "o").string()).exit_code, 0);
  std::vector<std::string> header;
  const auto rows = read_csv(dir_ / "o/chain.csv", &header);
  EXPECT_EQ(header.size(), 1u + 3u * 6u + 4u);
  EXPECT_EQ(header[1], "x0");
  EXPECT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows.back()[0], 50.0);
}

TEST_F(CliTest, BitIdenticalReruns) {
  const auto cfg = write_config("c.toml", kSmallConfig);
  for (const char* cmd : {"sample", "fp", "jko", "gibbs"}) expect_reproducible(std::string(cmd) + " --config " + cfg.string());
  std::ofstream(dir_ / "a.csv") << "x\n0.1\n-0.7\n1.9\n";
  expect_reproducible("metrics --a " + (dir_ / "a.csv").string() + " --config " + cfg.string());
  for (const char* fig : {"gibbs-pdf", "metro-hist", "ula-hist", "wasserstein-curve", "relu-toy"}) {
    expect_reproducible(std::string("repro ") + fig);
  }
}

TEST_F(CliTest, ReproOutputsMatchTheirCharts) {
  ASSERT_EQ(run("repro gibbs-pdf --out " + (dir_ / "o").string()).exit_code, 0);
  auto rows = read_csv(dir_ / "o/gibbs_pdf.csv");
  EXPECT_EQ(svg_shape(dir_ / "o/gibbs_pdf.svg").polylines, std::vector<std::size_t>{rows.size()});
  const auto meta = nlohmann::json::parse(slurp(dir_ / "o/gibbs_pdf.json"));
  EXPECT_EQ(meta["maxima"][0], -1.0);
  EXPECT_EQ(meta["maxima"][1], 1.0);

  ASSERT_EQ(run("repro metro-hist --out " + (dir_ / "o").string()).exit_code, 0);
  rows = read_csv(dir_ / "o/metro_hist.csv");
  const auto shape = svg_shape(dir_ / "o/metro_hist.svg");
  EXPECT_EQ(shape.bars, rows.size());
  EXPECT_EQ(shape.polylines, std::vector<std::size_t>{rows.size()});
  double count = 0.0;
  for (const auto& r : rows) count += r[2];
  EXPECT_LE(count, 100'000.0);
  EXPECT_GE(count, 99'000.0);
}

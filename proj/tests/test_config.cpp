#include <clocale>
#include <sstream>
#include <string>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <gtest/gtest.h>

#include "langinc/commands.hpp"
#include "langinc/config.hpp"
#include "langinc/experiment.hpp"
#include "langinc/output.hpp"

using namespace langinc;

namespace {

// Position of the error raised while loading `text`, or {0, 0} when it loads.
std::pair<std::size_t, std::size_t> error_position(const std::string& text) {
  try {
    experiment_from_toml(parse_toml(text));
  } catch (const ConfigError& e) {
    return {e.line(), e.column()};
  }
  return {0, 0};
}

std::string error_message(const std::string& text) {
  try {
    experiment_from_toml(parse_toml(text));
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::size_t count_points(const std::string& points) {
  std::istringstream in(points);
  std::string pair;
  std::size_t n = 0;
  while (in >> pair) ++n;
  return n;
}

}  // namespace

TEST(Toml, ScalarsArraysAndTables) {
  const auto doc = parse_toml(R"toml(# leading comment
name = "a \"quoted\" value"  # trailing comment
count = 10_000
neg = -3
x = 1.5e-3
flag = true
list = [1, 2.5,
        -3]   # multi-line
nested = [[1, 2], [3]]
point = { a = 1, b = "two" }

[section]
"quoted key" = false
sub.key = 4

[section.deeper]
v = +0.25
)toml");
  const auto& r = doc.root;
  EXPECT_EQ(r["name"], "a \"quoted\" value");
  EXPECT_EQ(r["count"], 10000);
  EXPECT_EQ(r["neg"], -3);
  EXPECT_DOUBLE_EQ(r["x"].get<double>(), 1.5e-3);
  EXPECT_EQ(r["flag"], true);
  EXPECT_EQ(r["list"].size(), 3u);
  EXPECT_DOUBLE_EQ(r["list"][2].get<double>(), -3.0);
  EXPECT_EQ(r["nested"][0][1], 2);
  EXPECT_EQ(r["point"]["b"], "two");
  EXPECT_EQ(r["section"]["quoted key"], false);
  EXPECT_EQ(r["section"]["sub"]["key"], 4);
  EXPECT_DOUBLE_EQ(r["section"]["deeper"]["v"].get<double>(), 0.25);
  EXPECT_EQ(doc.where("section.sub.key").line, 14u);
  EXPECT_EQ(doc.where("flag").column, 1u);
}

TEST(Toml, EmptyDocument) {
  EXPECT_TRUE(parse_toml("").root.empty());
  EXPECT_TRUE(parse_toml("\n# only a comment\n\n").root.empty());
}

TEST(Toml, ErrorsCarryLineAndColumn) {
  struct Case {
    const char* text;
    std::size_t line, column;
  };
  const Case cases[] = {
      {"a = \"open\n", 1, 10},          // unterminated string
      {"a = 1\na = 2\n", 2, 1},          // duplicate key
      {"a 1\n", 1, 3},                   // missing '='
      {"x = 1.2.3\n", 1, 5},             // bad number
      {"x = inf\n", 1, 5},               // non-finite
      {"[t]\n[t]\n", 2, 1},              // table twice
      {"x = [1, 2\n", 2, 1},             // unterminated array
      {"x = 1 y = 2\n", 1, 7},           // junk after value
      {"x = tru\n", 1, 8},               // bad literal
      {"[[arr]]\n", 1, 2},               // unsupported
  };
  for (const auto& c : cases) {
    try {
      parse_toml(c.text);
      ADD_FAILURE() << "accepted: " << c.text;
    } catch (const ConfigError& e) {
      EXPECT_EQ(e.line(), c.line) << c.text << " -> " << e.what();
      EXPECT_EQ(e.column(), c.column) << c.text << " -> " << e.what();
      EXPECT_NE(std::string(e.what()).find("line " + std::to_string(c.line)), std::string::npos);
    }
  }
}

TEST(Experiment, DefaultsUseThePresetPotential) {
  const auto cfg = experiment_from_toml(parse_toml(""));
  EXPECT_EQ(cfg.potential.preset, "paper_example");
  EXPECT_EQ(cfg.piecewise().breakpoints(), example_potential().breakpoints());
  EXPECT_EQ(cfg.sampler.seed, kDefaultSeed);
  EXPECT_EQ(cfg.sampler.proposal_std, 1.0);
  EXPECT_EQ(cfg.sampler.init, 0.0);
  EXPECT_EQ(cfg.fp.n, 1200u);
}

TEST(Experiment, ReadsEverySection) {
  const auto cfg = experiment_from_toml(parse_toml(R"toml(
seed = 7
out = "results"
[potential]
breakpoints = [0.0]
pieces = [[0.0, -1.0], [0.0, 1.0]]
[sampler]
kind = "rwm"
epsilon = 0.01
sigma = 0.5
steps = 500
burn_in = 100
thin = 2
selection = "right_limit"
proposal_std = 0.3
init = 1.5
[fp]
domain = [-6, 6]
N = 300
tol = 1e-9
dt = 0.005
times = [0.1, 1]
init = "uniform(-1, 2)"
[jko]
h = 0.05
steps = 20
M = 100
init = "gaussian(1, 0.25)"
times = [0.5, 1.0]
grid_N = 400
[gibbs]
sigma = 2
grid = [-3, 3]
points = 11
)toml"));
  EXPECT_EQ(cfg.out, "results");
  EXPECT_EQ(cfg.piecewise()(-2.0), 2.0);
  EXPECT_EQ(cfg.sampler.kind, SamplerKind::RWM);
  EXPECT_EQ(cfg.sampler.seed, 7u);
  EXPECT_EQ(cfg.sampler.selection, SelectionRule::RightLimit);
  EXPECT_EQ(cfg.sampler.thin, 2u);
  EXPECT_DOUBLE_EQ(cfg.sampler.init, 1.5);
  EXPECT_EQ(cfg.fp.domain.lo, -6.0);
  EXPECT_EQ(cfg.fp.times.size(), 2u);
  EXPECT_EQ(cfg.fp.init.kind, InitialLaw::Kind::Uniform);
  EXPECT_EQ(cfg.fp.init.b, 2.0);
  EXPECT_EQ(cfg.jko.m, 100u);
  EXPECT_EQ(cfg.jko.init.a, 1.0);
  EXPECT_EQ(cfg.gibbs.points, 11u);
}

TEST(Experiment, RejectsUnknownKeysWithTheirPosition) {
  EXPECT_EQ(error_position("[sampler]\nepsilon = 0.1\nepsilom = 0.2\n"), std::make_pair(std::size_t{3}, std::size_t{1}));
  EXPECT_EQ(error_position("colour = 1\n"), std::make_pair(std::size_t{1}, std::size_t{1}));
  EXPECT_EQ(error_position("[nonsense]\n"), std::make_pair(std::size_t{1}, std::size_t{1}));
  EXPECT_NE(error_message("[fp]\n  extra = 3\n").find("unknown key 'fp.extra'"), std::string::npos);
  EXPECT_EQ(error_position("[potential]\npreset = \"paper_example\"\nwidth = 2\n").first, 3u);
}

TEST(Experiment, RejectsInvalidValues) {
  EXPECT_EQ(error_position("[sampler]\nepsilon = -0.1\n").first, 2u);
  EXPECT_EQ(error_position("[sampler]\nepsilon = \"big\"\n").first, 2u);
  EXPECT_EQ(error_position("[sampler]\nsteps = 10\nburn_in = 10\n").first, 3u);
  EXPECT_EQ(error_position("[sampler]\nthin = 0\n").first, 2u);
  EXPECT_EQ(error_position("[sampler]\nsteps = -5\n").first, 2u);
  EXPECT_EQ(error_position("[sampler]\nkind = \"hmc\"\n").first, 2u);
  EXPECT_EQ(error_position("[sampler]\nselection = \"any\"\n").first, 2u);
  EXPECT_EQ(error_position("[fp]\ndomain = [1, -1]\n").first, 2u);
  EXPECT_EQ(error_position("[fp]\ntimes = [1, 0.5]\n").first, 2u);
  EXPECT_EQ(error_position("[jko]\ninit = \"gaussian(0, -1)\"\n").first, 2u);
  EXPECT_EQ(error_position("[jko]\nh = 0.1\nsteps = 5\ntimes = [0.6]\n").first, 4u);
  EXPECT_EQ(error_position("potential = \"nope\"\n").first, 1u);
  EXPECT_EQ(error_position("[potential]\npreset = \"nope\"\n").first, 2u);
}

TEST(Experiment, PotentialValidationFromTheLibrary) {
  // Discontinuous at 0 and wrong piece count are reported at `pieces`.
  EXPECT_EQ(error_position("[potential]\nbreakpoints = [0.0]\npieces = [[0.0], [1.0]]\n").first, 3u);
  EXPECT_EQ(error_position("[potential]\nbreakpoints = [0.0]\npieces = [[0.0]]\n").first, 3u);
  EXPECT_EQ(error_position("[potential]\nbreakpoints = [0.0]\npieces = [[0, 1, 2, 3, 4], [0]]\n").first, 3u);
}

TEST(Experiment, ReluSection) {
  const auto cfg = experiment_from_toml(parse_toml(R"toml(
[potential]
kind = "relu"
widths = [5, 4, 1]
lambda = 0.5
relu_slope_at_zero = 0.5
)toml"));
  ASSERT_EQ(cfg.potential.kind, PotentialSection::Kind::Relu);
  const auto net = cfg.relu_network();
  EXPECT_EQ(net.dimension(), 4u * 6u + 5u);
  EXPECT_EQ(net.training_data().rows, 200u);
  EXPECT_THROW(cfg.piecewise(), ConfigError);
  EXPECT_EQ(error_position("[potential]\nkind = \"relu\"\nwidths = [5, 2]\n").first, 3u);
  EXPECT_EQ(error_position("[potential]\nkind = \"relu\"\nwidths = [5, 1]\nrelu_slope_at_zero = 2\n").first, 4u);
}

TEST(Experiment, ShippedConfigsLoad) {
  for (const char* name : {"paper_example.toml", "custom_piecewise.toml", "relu_toy.toml"}) {
    EXPECT_NO_THROW(load_experiment(std::string(LANGINC_SOURCE_DIR) + "/configs/" + name)) << name;
  }
  EXPECT_THROW(load_experiment("/nonexistent/file.toml"), ConfigError);
}

TEST(InitialLawTest, Parse) {
  auto g = InitialLaw::parse("gaussian(0, 0.5)");
  ASSERT_TRUE(g);
  EXPECT_EQ(g->kind, InitialLaw::Kind::Gaussian);
  EXPECT_EQ(g->b, 0.5);
  auto u = InitialLaw::parse(" uniform( -1 , 2e0 ) ");
  ASSERT_TRUE(u);
  EXPECT_EQ(u->a, -1.0);
  EXPECT_EQ(u->pdf(0.0), 1.0 / 3.0);
  EXPECT_FALSE(InitialLaw::parse("uniform(2, 1)"));
  EXPECT_FALSE(InitialLaw::parse("cauchy(0, 1)"));
  EXPECT_FALSE(InitialLaw::parse("gaussian(0)"));
}

TEST(Output, NumbersRoundTripAndIgnoreLocale) {
  for (double v : {0.1, -1e-300, 1.0 / 3.0, 6.02214076e23, 1.0}) {
    EXPECT_EQ(std::stod(format_number(v)), v);
  }
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(2.5), "2.5");
  if (std::setlocale(LC_ALL, "de_DE.UTF-8")) {
    EXPECT_EQ(format_number(2.5), "2.5");
    std::setlocale(LC_ALL, "C");
  }
}

TEST(Output, CsvQuotingAndLineEndings) {
  CsvTable t({"name", "value"});
  t.add_row(std::vector<std::string>{"plain", "1"});
  t.add_row(std::vector<std::string>{"a,b", "say \"hi\""});
  EXPECT_EQ(t.str(), "name,value\nplain,1\n\"a,b\",\"say \"\"hi\"\"\"\n");
  EXPECT_THROW(t.add_row(std::vector<double>{1.0}), ContractViolation);
}

TEST(Output, SvgIsXmlWithOnePointPerRow) {
  Series a{"first", {0, 1, 2, 3}, {0, 1, 4, 9}};
  Series b{"x<y & z", {0, 3}, {9, 0}};
  const auto svg = svg_line_chart({"title & more", "x", "y", false}, {a, b});
  std::istringstream in(svg);
  boost::property_tree::ptree tree;
  ASSERT_NO_THROW(boost::property_tree::read_xml(in, tree));
  std::vector<std::size_t> counts;
  for (const auto& [tag, node] : tree.get_child("svg")) {
    if (tag == "polyline") counts.push_back(count_points(node.get<std::string>("<xmlattr>.points")));
  }
  EXPECT_EQ(counts, (std::vector<std::size_t>{4, 2}));

  const auto log_svg = svg_line_chart({"", "", "", true}, {Series{"", {10, 1000}, {1, 2}}});
  std::istringstream in2(log_svg);
  ASSERT_NO_THROW(boost::property_tree::read_xml(in2, tree));
  EXPECT_THROW(svg_line_chart({"", "", "", true}, {Series{"", {0, 1}, {1, 2}}}), ContractViolation);
}

TEST(Output, BarChartHasOneRectPerBin) {
  const auto svg = svg_bar_chart({"h", "x", "d", false}, {0, 1, 2, 3}, {0.2, 0.5, 0.3},
                                 {Series{"ref", {0.5, 1.5, 2.5}, {0.25, 0.5, 0.25}}});
  std::istringstream in(svg);
  boost::property_tree::ptree tree;
  ASSERT_NO_THROW(boost::property_tree::read_xml(in, tree));
  std::size_t bars = 0;
  for (const auto& [tag, node] : tree.get_child("svg")) {
    if (tag == "rect" && node.get<std::string>("<xmlattr>.class", "") == "bar") ++bars;
  }
  EXPECT_EQ(bars, 3u);
  EXPECT_THROW(svg_bar_chart({}, {0, 1}, {1, 2}), ContractViolation);
}

TEST(Output, DensityProfileTrapezoidIsExact) {
  const auto f = example_potential();
  const auto grid = build_grid(f, Interval{-8.0, 8.0}, 400);
  Rng rng(3);
  DensityField rho{grid, std::vector<double>(grid.size()), 0.0};
  for (auto& v : rho.values) v = rng.uniform();
  const double m = rho.mass();
  for (auto& v : rho.values) v /= m;
  const auto s = cli::density_profile(rho);
  EXPECT_EQ(s.x.size(), 2 * grid.size() + 1);
  EXPECT_NEAR(cli::trapezoid(s.x, s.y), 1.0, 1e-13);
}

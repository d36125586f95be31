#ifndef LANGINC_EXPERIMENT_HPP_
#define LANGINC_EXPERIMENT_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <numbers>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "langinc/config.hpp"
#include "langinc/errors.hpp"
#include "langinc/potential.hpp"
#include "langinc/relu_potential.hpp"
#include "langinc/sampler.hpp"

namespace langinc {

inline constexpr std::uint64_t kDefaultSeed = 42;

/// Named initial laws: "gaussian(mean, std)" or "uniform(a, b)".
struct InitialLaw {
  enum class Kind { Gaussian, Uniform };
  Kind kind = Kind::Gaussian;
  double a = 0.0;  // mean or left end
  double b = 0.5;  // std or right end

  std::string str() const {
    return (kind == Kind::Gaussian ? "gaussian(" : "uniform(") + format(a) + ", " + format(b) + ")";
  }

  static std::optional<InitialLaw> parse(const std::string& text) {
    static const std::regex re(R"(^\s*(gaussian|uniform)\s*\(\s*([-+0-9.eE]+)\s*,\s*([-+0-9.eE]+)\s*\)\s*$)");
    std::smatch m;
    if (!std::regex_match(text, m, re)) return std::nullopt;
    InitialLaw law;
    law.kind = m[1] == "gaussian" ? Kind::Gaussian : Kind::Uniform;
    try {
      law.a = std::stod(m[2]);
      law.b = std::stod(m[3]);
    } catch (const std::exception&) {
      return std::nullopt;
    }
    if (!std::isfinite(law.a) || !std::isfinite(law.b)) return std::nullopt;
    if (law.kind == Kind::Gaussian && !(law.b > 0.0)) return std::nullopt;
    if (law.kind == Kind::Uniform && !(law.a < law.b)) return std::nullopt;
    return law;
  }

  double pdf(double x) const {
    if (kind == Kind::Uniform) return (x >= a && x <= b) ? 1.0 / (b - a) : 0.0;
    const double z = (x - a) / b;
    return std::exp(-0.5 * z * z) / (b * std::sqrt(2.0 * std::numbers::pi));
  }

 private:
  static std::string format(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
  }
};

struct PotentialSection {
  enum class Kind { Piecewise, Relu };
  Kind kind = Kind::Piecewise;
  std::string preset;  // empty for explicit pieces
  std::optional<PiecewisePotential1D> piecewise;
  // ReLU network posterior.
  std::vector<std::size_t> widths;
  double lambda = 1e-2;
  double relu_slope_at_zero = 0.0;
  std::string dataset;  // empty: built-in synthetic regression
  std::uint64_t init_seed = 7;
};

struct SamplerSection {
  SamplerKind kind = SamplerKind::ULA;
  double epsilon = 1e-3;
  double sigma = 1.0;
  std::uint64_t steps = 10'000;
  std::uint64_t burn_in = 0;
  std::uint64_t thin = 1;
  std::uint64_t seed = kDefaultSeed;
  SelectionRule selection = SelectionRule::MinNorm;
  double proposal_std = 1.0;
  double init = 0.0;
};

struct FpSection {
  double sigma = 1.0;
  Interval domain{-8.0, 8.0};
  std::size_t n = 1200;
  double tol = 1e-12;
  double dt = 1e-2;
  std::vector<double> times;  // snapshot times of the evolution from `init`
  InitialLaw init{};
};

struct JkoSection {
  double sigma = 1.0;
  double h = 1e-2;
  std::size_t steps = 500;
  std::size_t m = 2000;
  InitialLaw init{};
  std::vector<double> times;  // density outputs; empty means the final time
  Interval domain{-8.0, 8.0};
  std::size_t grid_n = 1200;
};

struct GibbsSection {
  double sigma = 1.0;
  Interval grid{-4.0, 4.0};
  std::size_t points = 801;
};

struct ExperimentConfig {
  PotentialSection potential;
  SamplerSection sampler;
  FpSection fp;
  JkoSection jko;
  GibbsSection gibbs;
  std::string out = "out";
  std::filesystem::path base_dir;  // relative dataset paths resolve here

  const PiecewisePotential1D& piecewise() const {
    if (potential.kind != PotentialSection::Kind::Piecewise) {
      throw ConfigError("this command needs a one-dimensional piecewise potential, not a ReLU network");
    }
    return *potential.piecewise;
  }

  ReLUNetPotential relu_network() const {
    const auto& ps = potential;
    Dataset data;
    if (ps.dataset.empty()) {
      data = synthetic_regression(200, ps.widths.front(), 2024);
    } else {
      std::filesystem::path p(ps.dataset);
      if (p.is_relative()) p = base_dir / p;
      data = load_csv_dataset(p.string());
    }
    return ReLUNetPotential(ps.widths, std::move(data), ps.lambda, ps.relu_slope_at_zero);
  }

  nlohmann::json to_json() const;
};

inline std::optional<PiecewisePotential1D> preset_potential(const std::string& name) {
  if (name == "paper_example") return example_potential();
  return std::nullopt;
}

namespace detail {

inline void check(ConfigTable& t, const std::string& key, bool ok, const std::string& what) {
  if (!ok) t.fail(key, "'" + t.qualified(key) + "' " + what);
}

inline Interval read_interval(ConfigTable& t, const std::string& key, Interval fallback) {
  auto v = t.get<std::vector<double>>(key);
  if (!v) return fallback;
  check(t, key, v->size() == 2 && (*v)[0] < (*v)[1], "must be [lo, hi] with lo < hi");
  return {(*v)[0], (*v)[1]};
}

inline InitialLaw read_law(ConfigTable& t, const std::string& key) {
  auto s = t.get<std::string>(key);
  if (!s) return {};
  auto law = InitialLaw::parse(*s);
  check(t, key, law.has_value(), "must be gaussian(mean, std) with std > 0 or uniform(a, b) with a < b");
  return *law;
}

inline std::vector<double> read_times(ConfigTable& t, const std::string& key) {
  auto v = t.get_or<std::vector<double>>(key, {});
  for (std::size_t i = 0; i < v.size(); ++i) {
    check(t, key, v[i] >= 0.0 && (i == 0 || v[i] > v[i - 1]), "must be nonnegative and increasing");
  }
  return v;
}

inline double positive(ConfigTable& t, const std::string& key, double fallback) {
  const double v = t.get_or(key, fallback);
  check(t, key, v > 0.0, "must be > 0");
  return v;
}

inline void read_potential(const TomlDocument& doc, ConfigTable& root, ExperimentConfig& cfg) {
  auto& ps = cfg.potential;
  if (root.has("potential") && doc.root["potential"].is_string()) {
    ps.preset = *root.get<std::string>("potential");
    auto p = preset_potential(ps.preset);
    if (!p) root.fail("potential", "unknown potential preset '" + ps.preset + "'");
    ps.piecewise = std::move(p);
    return;
  }
  auto t = root.sub("potential");
  if (!t.present()) {
    if (root.has("potential")) root.fail("potential", "'potential' must be a preset name or a table");
    ps.preset = "paper_example";
    ps.piecewise = example_potential();
    return;
  }
  const auto kind = t.get_or<std::string>("kind", t.has("widths") ? "relu" : "piecewise");
  if (kind == "relu") {
    ps.kind = PotentialSection::Kind::Relu;
    ps.widths = t.require<std::vector<std::size_t>>("widths");
    check(t, "widths", ps.widths.size() >= 2 && ps.widths.back() == 1, "must list at least two widths and end in 1");
    for (auto w : ps.widths) check(t, "widths", w > 0, "must be positive");
    ps.lambda = t.get_or("lambda", ps.lambda);
    check(t, "lambda", ps.lambda >= 0.0, "must be >= 0");
    ps.relu_slope_at_zero = t.get_or("relu_slope_at_zero", ps.relu_slope_at_zero);
    check(t, "relu_slope_at_zero", ps.relu_slope_at_zero >= 0.0 && ps.relu_slope_at_zero <= 1.0, "must lie in [0, 1]");
    ps.dataset = t.get_or<std::string>("dataset", "");
    ps.init_seed = t.get_or<std::uint64_t>("init_seed", ps.init_seed);
    t.finish();
    return;
  }
  if (kind != "piecewise") t.fail("kind", "'potential.kind' must be \"piecewise\" or \"relu\"");
  if (auto preset = t.get<std::string>("preset")) {
    if (t.has("breakpoints") || t.has("pieces")) t.fail("preset", "give either 'preset' or 'breakpoints'/'pieces'");
    ps.preset = *preset;
    auto p = preset_potential(ps.preset);
    if (!p) t.fail("preset", "unknown potential preset '" + ps.preset + "'");
    ps.piecewise = std::move(p);
    t.finish();
    return;
  }
  const auto bps = t.get_or<std::vector<double>>("breakpoints", {});
  const auto rows = t.require<std::vector<std::vector<double>>>("pieces");
  std::vector<Cubic> pieces;
  for (const auto& r : rows) {
    check(t, "pieces", !r.empty() && r.size() <= 4, "entries must hold 1 to 4 coefficients [c0, c1, c2, c3]");
    Cubic c{0.0, 0.0, 0.0, 0.0};
    for (std::size_t k = 0; k < r.size(); ++k) c[k] = r[k];
    pieces.push_back(c);
  }
  try {
    ps.piecewise = PiecewisePotential1D(bps, std::move(pieces));
  } catch (const ContractViolation& e) {
    t.fail("pieces", e.what());
  }
  t.finish();
}

}  // namespace detail

/*
 * Builds an ExperimentConfig from a parsed document. Every key is checked:
 * unknown keys, wrong types and out-of-range values raise ConfigError with
 * the offending key's position.
 */
inline ExperimentConfig experiment_from_toml(const TomlDocument& doc) {
  using detail::check;
  using detail::positive;
  ExperimentConfig cfg;
  ConfigTable root(doc, "");
  cfg.out = root.get_or<std::string>("out", cfg.out);
  const std::uint64_t seed = root.get_or<std::uint64_t>("seed", kDefaultSeed);
  detail::read_potential(doc, root, cfg);

  {
    auto t = root.sub("sampler");
    auto& s = cfg.sampler;
    s.seed = seed;
    if (auto kind = t.get<std::string>("kind")) {
      auto k = parse_sampler_kind(*kind);
      if (!k) t.fail("kind", "'sampler.kind' must be one of ula, rwm, mala");
      s.kind = *k;
    }
    s.epsilon = positive(t, "epsilon", s.epsilon);
    s.sigma = positive(t, "sigma", s.sigma);
    s.steps = t.get_or("steps", s.steps);
    check(t, "steps", s.steps > 0, "must be positive");
    s.burn_in = t.get_or("burn_in", s.burn_in);
    check(t, "burn_in", s.burn_in < s.steps, "must be smaller than steps");
    s.thin = t.get_or("thin", s.thin);
    check(t, "thin", s.thin > 0, "must be positive");
    s.seed = t.get_or("seed", s.seed);
    if (auto sel = t.get<std::string>("selection")) {
      auto r = parse_selection_rule(*sel);
      if (!r) t.fail("selection", "'sampler.selection' must be one of min_norm, left_limit, right_limit, midpoint, random_convex");
      s.selection = *r;
    }
    s.proposal_std = positive(t, "proposal_std", s.proposal_std);
    s.init = t.get_or("init", s.init);
    t.finish();
  }
  {
    auto t = root.sub("fp");
    auto& f = cfg.fp;
    f.sigma = positive(t, "sigma", f.sigma);
    f.domain = detail::read_interval(t, "domain", f.domain);
    f.n = t.get_or("N", f.n);
    check(t, "N", f.n >= 2, "must be at least 2");
    f.tol = positive(t, "tol", f.tol);
    f.dt = positive(t, "dt", f.dt);
    f.times = detail::read_times(t, "times");
    f.init = detail::read_law(t, "init");
    t.finish();
  }
  {
    auto t = root.sub("jko");
    auto& j = cfg.jko;
    j.sigma = positive(t, "sigma", j.sigma);
    j.h = positive(t, "h", j.h);
    j.steps = t.get_or("steps", j.steps);
    j.m = t.get_or("M", j.m);
    check(t, "M", j.m >= 2, "must be at least 2");
    j.init = detail::read_law(t, "init");
    j.times = detail::read_times(t, "times");
    for (double time : j.times) {
      check(t, "times", time <= j.h * static_cast<double>(j.steps) * (1.0 + 1e-12), "must not exceed h * steps");
    }
    j.domain = detail::read_interval(t, "domain", j.domain);
    j.grid_n = t.get_or("grid_N", j.grid_n);
    check(t, "grid_N", j.grid_n >= 2, "must be at least 2");
    t.finish();
  }
  {
    auto t = root.sub("gibbs");
    auto& g = cfg.gibbs;
    g.sigma = positive(t, "sigma", g.sigma);
    g.grid = detail::read_interval(t, "grid", g.grid);
    g.points = t.get_or("points", g.points);
    check(t, "points", g.points >= 2, "must be at least 2");
    t.finish();
  }
  root.finish();
  return cfg;
}

inline ExperimentConfig load_experiment(const std::string& path) {
  auto cfg = experiment_from_toml(load_toml(path));
  cfg.base_dir = std::filesystem::path(path).parent_path();
  return cfg;
}

inline nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  if (potential.kind == PotentialSection::Kind::Relu) {
    j["potential"] = {{"kind", "relu"},
                      {"widths", potential.widths},
                      {"lambda", potential.lambda},
                      {"relu_slope_at_zero", potential.relu_slope_at_zero},
                      {"dataset", potential.dataset.empty() ? "synthetic_regression(200, d, 2024)" : potential.dataset},
                      {"init_seed", potential.init_seed}};
  } else {
    nlohmann::json pieces = nlohmann::json::array();
    for (const auto& c : piecewise().pieces()) pieces.push_back({c[0], c[1], c[2], c[3]});
    j["potential"] = {{"kind", "piecewise"}, {"breakpoints", piecewise().breakpoints()}, {"pieces", pieces}};
    if (!potential.preset.empty()) j["potential"]["preset"] = potential.preset;
  }
  j["sampler"] = {{"kind", to_string(sampler.kind)},
                  {"epsilon", sampler.epsilon},
                  {"sigma", sampler.sigma},
                  {"steps", sampler.steps},
                  {"burn_in", sampler.burn_in},
                  {"thin", sampler.thin},
                  {"seed", sampler.seed},
                  {"selection", to_string(sampler.selection)},
                  {"proposal_std", sampler.proposal_std},
                  {"init", sampler.init}};
  j["fp"] = {{"sigma", fp.sigma}, {"domain", {fp.domain.lo, fp.domain.hi}}, {"N", fp.n}, {"tol", fp.tol},
             {"dt", fp.dt},       {"times", fp.times},                       {"init", fp.init.str()}};
  j["jko"] = {{"sigma", jko.sigma}, {"h", jko.h},         {"steps", jko.steps},
              {"M", jko.m},         {"init", jko.init.str()}, {"times", jko.times},
              {"domain", {jko.domain.lo, jko.domain.hi}}, {"grid_N", jko.grid_n}};
  j["gibbs"] = {{"sigma", gibbs.sigma}, {"grid", {gibbs.grid.lo, gibbs.grid.hi}}, {"points", gibbs.points}};
  j["out"] = out;
  return j;
}

}  // namespace langinc

#endif  // LANGINC_EXPERIMENT_HPP_

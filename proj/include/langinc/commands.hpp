#ifndef LANGINC_COMMANDS_HPP_
#define LANGINC_COMMANDS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "langinc/experiment.hpp"
#include "langinc/fokker_planck.hpp"
#include "langinc/gibbs.hpp"
#include "langinc/jko.hpp"
#include "langinc/metrics.hpp"
#include "langinc/output.hpp"
#include "langinc/relu_potential.hpp"
#include "langinc/sampler.hpp"

namespace langinc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Shared helpers.

/*
 * Cell averages as a piecewise-linear profile through faces and centers.
 * Interior faces carry the width-weighted mean of their two cells and the
 * outer faces repeat the edge cell, which makes the trapezoid rule over the
 * 2N+1 points return exactly sum rho_i dx_i.
 */
inline Series density_profile(const DensityField& rho, const std::string& label = "") {
  const auto& g = rho.grid;
  const std::size_t n = g.size();
  Series s{label, {}, {}};
  for (std::size_t k = 0; k <= n; ++k) {
    double v;
    if (k == 0) {
      v = rho.values.front();
    } else if (k == n) {
      v = rho.values.back();
    } else {
      const double wl = g.width(k - 1), wr = g.width(k);
      v = (wl * rho.values[k - 1] + wr * rho.values[k]) / (wl + wr);
    }
    s.x.push_back(g.face(k));
    s.y.push_back(v);
    if (k < n) {
      s.x.push_back(g.center(k));
      s.y.push_back(rho.values[k]);
    }
  }
  return s;
}

inline CsvTable density_table(const DensityField& rho) {
  const auto s = density_profile(rho);
  CsvTable t({"x", "rho"});
  for (std::size_t i = 0; i < s.x.size(); ++i) t.add_row({s.x[i], s.y[i]});
  return t;
}

inline void write_density(const fs::path& out, const std::string& stem, const DensityField& rho,
                          const std::string& title) {
  write_text(out / (stem + ".csv"), density_table(rho).str());
  write_text(out / (stem + ".svg"), svg_line_chart({title, "x", "density", false}, {density_profile(rho)}));
}

/// Trapezoid rule over (x, y) rows.
inline double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  if (n > 1) x.back() = hi;
  return x;
}

/// Per-chain seed for the index-th chain of a multi-chain run.
inline std::uint64_t chain_seed(std::uint64_t seed, std::uint64_t index) { return seed ^ index; }

inline ChainConfig<double> chain_config(const SamplerSection& s) {
  ChainConfig<double> c;
  c.epsilon = s.epsilon;
  c.sigma = s.sigma;
  c.n_steps = s.steps;
  c.burn_in = s.burn_in;
  c.thin = s.thin;
  c.seed = s.seed;
  c.selection = s.selection;
  c.proposal_std = s.proposal_std;
  c.init = s.init;
  return c;
}

inline QuantileField initial_quantiles(const InitialLaw& law, std::size_t m) {
  return law.kind == InitialLaw::Kind::Gaussian ? gaussian_quantiles(m, law.a, law.b)
                                                : uniform_quantiles(m, law.a, law.b);
}

inline std::string time_tag(double t) { return format_number(t); }

// Histogram whose densities are relative to all samples, overflow included.
struct BinnedSamples {
  Histogram hist;
  std::vector<double> density;
};

inline BinnedSamples bin_samples(std::span<const double> xs, double lo, double hi, std::size_t bins) {
  BinnedSamples b{histogram(xs, uniform_edges(lo, hi, bins)), {}};
  const double keep = static_cast<double>(b.hist.total) / static_cast<double>(xs.size());
  for (double d : b.hist.density) b.density.push_back(d * keep);
  return b;
}

inline CsvTable histogram_table(const BinnedSamples& b, const GibbsDensity* g) {
  std::vector<std::string> header{"bin_lo", "bin_hi", "count", "density"};
  if (g) header.push_back("gibbs_pdf");
  CsvTable t(header);
  for (std::size_t k = 0; k < b.hist.bins(); ++k) {
    std::vector<double> row{b.hist.edges[k], b.hist.edges[k + 1], static_cast<double>(b.hist.counts[k]), b.density[k]};
    if (g) row.push_back(g->pdf(b.hist.center(k)));
    t.add_row(row);
  }
  return t;
}

inline std::string histogram_svg(const BinnedSamples& b, const GibbsDensity* g, const std::string& title) {
  std::vector<Series> overlay;
  if (g) {
    Series s{"Gibbs density", {}, {}};
    for (std::size_t k = 0; k < b.hist.bins(); ++k) {
      s.x.push_back(b.hist.center(k));
      s.y.push_back(g->pdf(b.hist.center(k)));
    }
    overlay.push_back(std::move(s));
  }
  return svg_bar_chart({title, "x", "density", false}, b.hist.edges, b.density, overlay);
}

/// Modes of a histogram left and right of `split`, and whether the bin at `split` dips below both.
struct Bimodality {
  double left_mode = 0.0;
  double right_mode = 0.0;
  bool bimodal = false;
};

inline Bimodality bimodality(const BinnedSamples& b, double split = 0.0) {
  Bimodality r;
  const auto& h = b.hist;
  r.left_mode = histogram_mode(h, h.edges.front(), split);
  r.right_mode = histogram_mode(h, split, h.edges.back());
  auto density_at = [&](double x) {
    for (std::size_t k = 0; k < h.bins(); ++k) {
      if (x >= h.edges[k] && x < h.edges[k + 1]) return b.density[k];
    }
    return 0.0;
  };
  const double valley = std::min(density_at(split - 1e-9), density_at(split + 1e-9));
  r.bimodal = valley < density_at(r.left_mode) && valley < density_at(r.right_mode);
  return r;
}

// ---------------------------------------------------------------------------
// Subcommands.

inline json cmd_sample(const ExperimentConfig& cfg, const fs::path& out) {
  const auto& s = cfg.sampler;
  json meta;
  meta["command"] = "sample";
  meta["config"] = cfg.to_json();
  meta["defaults_note"] = "proposal_std and init default to 1.0 and 0 when not configured";
  if (cfg.potential.kind == PotentialSection::Kind::Relu) {
    const auto net = cfg.relu_network();
    ChainConfig<std::vector<double>> c;
    c.epsilon = s.epsilon;
    c.sigma = s.sigma;
    c.n_steps = s.steps;
    c.burn_in = s.burn_in;
    c.thin = s.thin;
    c.seed = s.seed;
    c.selection = s.selection;
    c.proposal_std = s.proposal_std;
    Rng init_rng(cfg.potential.init_seed);
    c.init = net.initial_parameters(init_rng);
    const auto chain = run_chain(net, c, s.kind);
    std::vector<std::string> header{"step"};
    for (std::size_t k = 0; k < net.dimension(); ++k) header.push_back("x" + std::to_string(k));
    CsvTable t(header);
    Series trace{"x0", {}, {}};
    for (std::size_t j = 0; j < chain.samples.size(); ++j) {
      std::vector<double> row{static_cast<double>(chain.step_of(j))};
      row.insert(row.end(), chain.samples[j].begin(), chain.samples[j].end());
      t.add_row(row);
      trace.x.push_back(static_cast<double>(chain.step_of(j)));
      trace.y.push_back(chain.samples[j][0]);
    }
    write_text(out / "chain.csv", t.str());
    write_text(out / "chain.svg", svg_line_chart({"Chain trace (first coordinate)", "step", "x0", false}, {trace}));
    meta["dimension"] = net.dimension();
    meta["retained"] = chain.samples.size();
    meta["acceptance_rate"] = chain.acceptance_rate();
    if (!chain.samples.empty()) meta["final_training_mse"] = net.mse(chain.samples.back(), net.training_data());
    write_json(out / "chain.json", meta);
    return meta;
  }

  const auto& p = cfg.piecewise();
  const auto chain = run_chain(p, chain_config(s), s.kind);
  CsvTable t({"step", "x"});
  Series trace{"x", {}, {}};
  for (std::size_t j = 0; j < chain.samples.size(); ++j) {
    const double step = static_cast<double>(chain.step_of(j));
    t.add_row({step, chain.samples[j]});
    trace.x.push_back(step);
    trace.y.push_back(chain.samples[j]);
  }
  write_text(out / "chain.csv", t.str());
  write_text(out / "chain.svg", svg_line_chart({"Chain trace", "step", "x", false}, {trace}));
  meta["retained"] = chain.samples.size();
  meta["acceptance_rate"] = chain.acceptance_rate();
  if (p.is_confined() && !chain.samples.empty()) {
    const GibbsDensity g(p, s.sigma);
    meta["w1_to_gibbs"] = w1_to_gibbs(chain.samples, g);
  }
  write_json(out / "chain.json", meta);
  return meta;
}

inline json cmd_fp(const ExperimentConfig& cfg, const fs::path& out) {
  const auto& p = cfg.piecewise();
  const auto& f = cfg.fp;
  const auto grid = build_grid(p, f.domain, f.n);
  const auto steady = steady_state(p, f.sigma, grid, f.tol);
  write_density(out, "fp_steady", steady, "Fokker-Planck steady state");

  CsvTable res({"breakpoint", "density_jump", "current_jump"});
  json residuals = json::array();
  for (const auto& r : interface_residual(p, f.sigma, steady)) {
    res.add_row({r.breakpoint, r.density_jump, r.current_jump});
    residuals.push_back({{"breakpoint", r.breakpoint}, {"density_jump", r.density_jump}, {"current_jump", r.current_jump}});
  }
  write_text(out / "fp_residual.csv", res.str());

  double max_current = 0.0;
  for (double j : current(p, f.sigma, steady)) max_current = std::max(max_current, std::abs(j));
  json meta;
  meta["command"] = "fp";
  meta["config"] = cfg.to_json();
  meta["steady_state"] = {{"mass", steady.mass()}, {"max_abs_current", max_current}, {"pseudo_time", steady.time}};
  meta["interface_residuals"] = residuals;
  if (p.is_confined()) {
    const GibbsDensity g(p, f.sigma);
    const auto ref = project_density(grid, [&](double x) { return g.pdf(x); });
    meta["steady_state"]["l1_to_gibbs"] = l1_distance(grid, steady.values, ref.values);
  }

  json snaps = json::array();
  if (!f.times.empty()) {
    DensityField rho = project_density(grid, [&](double x) { return f.init.pdf(x); });
    for (double t : f.times) {
      rho = evolve(p, f.sigma, rho, t, f.dt);
      const std::string stem = "fp_t" + time_tag(t);
      write_density(out, stem, rho, "Fokker-Planck density at t = " + time_tag(t));
      snaps.push_back({{"time", t}, {"file", stem + ".csv"}, {"mass", rho.mass()}});
    }
  }
  meta["snapshots"] = snaps;
  write_json(out / "fp.json", meta);
  return meta;
}

inline json cmd_jko(const ExperimentConfig& cfg, const fs::path& out) {
  const auto& p = cfg.piecewise();
  const auto& j = cfg.jko;
  const auto run = run_jko(p, j.sigma, j.h, j.steps, initial_quantiles(j.init, j.m));
  if (!run.converged) throw NoConvergenceError("a JKO step did not reach its stationarity tolerance");

  CsvTable t({"k", "free_energy", "w2_step"});
  Series fe{"free energy", {}, {}};
  for (std::size_t k = 0; k < run.steps.size(); ++k) {
    t.add_row({static_cast<double>(k), run.free_energies[k], run.step_distances[k]});
    fe.x.push_back(static_cast<double>(k));
    fe.y.push_back(run.free_energies[k]);
  }
  write_text(out / "jko_trace.csv", t.str());
  write_text(out / "jko_trace.svg", svg_line_chart({"JKO free energy", "step k", "free energy", false}, {fe}));

  const auto grid = build_grid(p, j.domain, j.grid_n);
  auto times = j.times;
  if (times.empty()) times.push_back(j.h * static_cast<double>(j.steps));
  json dens = json::array();
  for (double time : times) {
    const auto rho = density_from_quantiles(interpolate(run, time), grid);
    const std::string stem = "jko_density_t" + time_tag(time);
    write_density(out, stem, rho, "JKO density at t = " + time_tag(time));
    dens.push_back({{"time", time}, {"file", stem + ".csv"}});
  }

  double max_increase = 0.0;
  for (std::size_t k = 1; k < run.free_energies.size(); ++k) {
    max_increase = std::max(max_increase, run.free_energies[k] - run.free_energies[k - 1]);
  }
  json meta;
  meta["command"] = "jko";
  meta["config"] = cfg.to_json();
  meta["final_free_energy"] = run.free_energies.back();
  meta["max_free_energy_increase"] = max_increase;
  meta["densities"] = dens;
  if (p.is_confined()) {
    const GibbsDensity g(p, j.sigma);
    meta["gibbs_free_energy"] = -j.sigma * g.log_normalizer();
    meta["final_w2_to_gibbs"] = w2(run.steps.back(), gibbs_quantiles(g, j.m));
  }
  write_json(out / "jko.json", meta);
  return meta;
}

inline json cmd_gibbs(const ExperimentConfig& cfg, const fs::path& out) {
  const auto& gs = cfg.gibbs;
  const GibbsDensity g(cfg.piecewise(), gs.sigma);
  CsvTable t({"x", "pdf", "cdf"});
  Series pdf{"pdf", {}, {}}, cdf{"cdf", {}, {}};
  for (double x : linspace(gs.grid.lo, gs.grid.hi, gs.points)) {
    const double d = g.pdf(x), c = g.cdf(x);
    t.add_row({x, d, c});
    pdf.x.push_back(x);
    pdf.y.push_back(d);
    cdf.x.push_back(x);
    cdf.y.push_back(c);
  }
  write_text(out / "gibbs.csv", t.str());
  write_text(out / "gibbs.svg", svg_line_chart({"Gibbs density and distribution function", "x", "", false}, {pdf, cdf}));
  json meta;
  meta["command"] = "gibbs";
  meta["config"] = cfg.to_json();
  meta["normalizer"] = g.normalizer();
  meta["log_normalizer"] = g.log_normalizer();
  meta["tail_mass"] = g.tail_mass();
  meta["domain"] = {g.domain().lo, g.domain().hi};
  write_json(out / "gibbs.json", meta);
  return meta;
}

/// Samples from a CSV file: the `x` column, or the only column besides `step`.
inline std::vector<double> read_sample_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open sample file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + ": empty file", 1, 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  std::optional<std::size_t> col;
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == "x") col = k;
  }
  if (!col) {
    if (header.size() == 1) col = 0;
    if (header.size() == 2 && header[0] == "step") col = 1;
  }
  if (!col) throw ConfigError(path + ": no 'x' column and more than one data column", 1, 1);
  std::vector<double> xs;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t start = 0, k = 0;
    while (k < *col) {
      start = line.find(',', start);
      if (start == std::string::npos) throw ConfigError(path + ": too few columns", lineno, line.size() + 1);
      ++start;
      ++k;
    }
    const std::size_t end = std::min(line.find(',', start), line.size());
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(line.data() + start, line.data() + end, v);
    if (ec != std::errc() || ptr != line.data() + end || !std::isfinite(v)) {
      throw ConfigError(path + ": not a finite number", lineno, start + 1);
    }
    xs.push_back(v);
  }
  if (xs.empty()) throw ConfigError(path + ": no samples");
  return xs;
}

struct MetricsArgs {
  std::string a;
  std::string b;                          // second sample file, or empty
  std::optional<ExperimentConfig> gibbs;  // Gibbs reference when b is empty
};

inline json cmd_metrics(const MetricsArgs& args, const fs::path& out) {
  const auto a = read_sample_csv(args.a);
  json result;
  std::vector<double> sa(a), sb;
  std::sort(sa.begin(), sa.end());
  std::optional<GibbsDensity> g;
  if (!args.b.empty()) {
    sb = read_sample_csv(args.b);
    std::sort(sb.begin(), sb.end());
    result = {{"w1", w1_samples(a, sb)}, {"n_a", a.size()}, {"n_b", sb.size()}};
  } else if (args.gibbs) {
    g.emplace(args.gibbs->piecewise(), args.gibbs->gibbs.sigma);
    result = {{"w1", w1_to_gibbs(a, *g)}, {"n_a", a.size()}, {"n_b", nullptr}, {"reference", "gibbs"}};
  } else {
    throw ConfigError("metrics needs a second sample file (--b) or a Gibbs config (--config)");
  }
  // Quantile-quantile view of the two laws on a fixed level grid.
  CsvTable t({"u", "quantile_a", "quantile_b"});
  Series qa{"A", {}, {}}, qb{args.b.empty() ? "Gibbs" : "B", {}, {}};
  auto empirical = [](const std::vector<double>& s, double u) {
    const auto i = static_cast<std::size_t>(u * static_cast<double>(s.size()));
    return s[std::min(i, s.size() - 1)];
  };
  for (std::size_t k = 0; k < 199; ++k) {
    const double u = (static_cast<double>(k) + 1.0) / 200.0;
    const double xa = empirical(sa, u);
    const double xb = g ? g->quantile(u) : empirical(sb, u);
    t.add_row({u, xa, xb});
    qa.x.push_back(u);
    qa.y.push_back(xa);
    qb.x.push_back(u);
    qb.y.push_back(xb);
  }
  write_text(out / "metrics_quantiles.csv", t.str());
  write_text(out / "metrics_quantiles.svg", svg_line_chart({"Quantile functions", "level u", "x", false}, {qa, qb}));
  write_json(out / "metrics.json", result);
  return result;
}

// ---------------------------------------------------------------------------
// Reproduction figures.

inline const std::vector<std::string>& figure_names() {
  static const std::vector<std::string> names{"gibbs-pdf", "metro-hist", "ula-hist", "wasserstein-curve", "relu-toy"};
  return names;
}

inline bool is_figure(const std::string& name) {
  const auto& n = figure_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

/// Desk-scale ULA study: one chain per step size, W1 to Gibbs on growing prefixes.
struct UlaStudy {
  std::vector<double> epsilons{1e-2, 1e-3, 1e-4};
  std::uint64_t burn_in = 100'000;
  std::uint64_t samples = 2'000'000;
  std::vector<std::uint64_t> checkpoints{10'000, 20'000, 50'000, 100'000, 200'000, 500'000, 1'000'000, 2'000'000};
  std::vector<std::vector<double>> chains;  // retained samples per step size
  std::vector<std::vector<double>> w1;      // [eps][checkpoint]
  static constexpr std::uint64_t kReferenceSamples = 10'000'000;
};

inline std::vector<double> run_desk_ula(double epsilon, std::uint64_t burn_in, std::uint64_t samples,
                                        std::uint64_t seed, SelectionRule rule = SelectionRule::MinNorm) {
  ChainConfig<double> c;
  c.epsilon = epsilon;
  c.sigma = 1.0;
  c.n_steps = burn_in + samples;
  c.burn_in = burn_in;
  c.seed = seed;
  c.selection = rule;
  c.init = 0.0;
  return run_ula(example_potential(), c).samples;
}

inline UlaStudy run_ula_study(std::uint64_t seed, bool with_curve) {
  UlaStudy st;
  const GibbsDensity g(example_potential(), 1.0);
  for (std::size_t i = 0; i < st.epsilons.size(); ++i) {
    st.chains.push_back(run_desk_ula(st.epsilons[i], st.burn_in, st.samples, chain_seed(seed, i)));
    std::vector<double> w;
    if (with_curve) {
      for (auto n : st.checkpoints) w.push_back(w1_to_gibbs(std::span<const double>(st.chains.back().data(), n), g));
    }
    st.w1.push_back(std::move(w));
  }
  return st;
}

inline json scale_note(std::uint64_t samples) {
  return {{"samples_per_chain", samples},
          {"reference_samples_per_chain", UlaStudy::kReferenceSamples},
          {"scale_factor", static_cast<double>(samples) / static_cast<double>(UlaStudy::kReferenceSamples)}};
}

inline json repro_gibbs_pdf(const fs::path& out) {
  const GibbsDensity g(example_potential(), 1.0);
  CsvTable t({"x", "pdf"});
  Series s{"", {}, {}};
  double left_max = -1, right_max = -1, left_at = 0, right_at = 0;
  for (double x : linspace(-4.0, 4.0, 801)) {
    const double d = g.pdf(x);
    t.add_row({x, d});
    s.x.push_back(x);
    s.y.push_back(d);
    if (x < 0 && d > left_max) left_max = d, left_at = x;
    if (x > 0 && d > right_max) right_max = d, right_at = x;
  }
  write_text(out / "gibbs_pdf.csv", t.str());
  write_text(out / "gibbs_pdf.svg", svg_line_chart({"Stationary density exp(-f)/Z", "x", "density", false}, {s}));
  json meta{{"figure", "gibbs-pdf"},
            {"potential", "paper_example"},
            {"sigma", 1.0},
            {"normalizer", g.normalizer()},
            {"maxima", {left_at, right_at}}};
  write_json(out / "gibbs_pdf.json", meta);
  return meta;
}

inline json repro_metro_hist(std::uint64_t seed, const fs::path& out) {
  const auto f = example_potential();
  const GibbsDensity g(f, 1.0);
  ChainConfig<double> c;
  c.sigma = 1.0;
  c.n_steps = 100'000;
  c.seed = seed;
  c.proposal_std = 1.0;
  c.init = 0.0;
  const auto chain = run_rwm(f, c);
  const auto b = bin_samples(chain.samples, -6.0, 6.0, 120);
  write_text(out / "metro_hist.csv", histogram_table(b, &g).str());
  write_text(out / "metro_hist.svg", histogram_svg(b, &g, "Random-walk Metropolis, 100000 samples"));
  const auto bi = bimodality(b);
  json meta{{"figure", "metro-hist"},
            {"samples", chain.samples.size()},
            {"proposal_std", c.proposal_std},
            {"init", c.init},
            {"seed", seed},
            {"acceptance_rate", chain.acceptance_rate()},
            {"w1_to_gibbs", w1_to_gibbs(chain.samples, g)},
            {"modes", {bi.left_mode, bi.right_mode}},
            {"bimodal", bi.bimodal},
            {"note", "proposal_std and init are defaults, not values taken from the reference experiment"}};
  write_json(out / "metro_hist.json", meta);
  return meta;
}

inline json repro_ula_hist(const UlaStudy& st, std::uint64_t seed, const fs::path& out) {
  const GibbsDensity g(example_potential(), 1.0);
  json runs = json::array();
  for (std::size_t i = 0; i < st.epsilons.size(); ++i) {
    const std::string tag = format_number(st.epsilons[i]);
    const auto b = bin_samples(st.chains[i], -6.0, 6.0, 120);
    write_text(out / ("ula_hist_eps" + tag + ".csv"), histogram_table(b, &g).str());
    write_text(out / ("ula_hist_eps" + tag + ".svg"), histogram_svg(b, &g, "ULA histogram, epsilon = " + tag));
    const auto bi = bimodality(b);
    runs.push_back({{"epsilon", st.epsilons[i]},
                    {"seed", chain_seed(seed, i)},
                    {"w1_to_gibbs", w1_to_gibbs(st.chains[i], g)},
                    {"modes", {bi.left_mode, bi.right_mode}},
                    {"bimodal", bi.bimodal}});
  }
  json meta{{"figure", "ula-hist"}, {"burn_in", st.burn_in}, {"init", 0.0}, {"scale", scale_note(st.samples)}, {"runs", runs}};
  write_json(out / "ula_hist.json", meta);
  return meta;
}

inline json repro_wasserstein_curve(const UlaStudy& st, std::uint64_t seed, const fs::path& out) {
  std::vector<std::string> header{"n"};
  for (double e : st.epsilons) header.push_back("w1_eps" + format_number(e));
  CsvTable t(header);
  std::vector<Series> series;
  for (double e : st.epsilons) series.push_back({"epsilon = " + format_number(e), {}, {}});
  for (std::size_t k = 0; k < st.checkpoints.size(); ++k) {
    std::vector<double> row{static_cast<double>(st.checkpoints[k])};
    for (std::size_t i = 0; i < st.epsilons.size(); ++i) {
      row.push_back(st.w1[i][k]);
      series[i].x.push_back(static_cast<double>(st.checkpoints[k]));
      series[i].y.push_back(st.w1[i][k]);
    }
    t.add_row(row);
  }
  write_text(out / "wasserstein_curve.csv", t.str());
  write_text(out / "wasserstein_curve.svg",
             svg_line_chart({"W1 to the Gibbs law along ULA chains", "samples", "W1", true}, series));
  json runs = json::array();
  for (std::size_t i = 0; i < st.epsilons.size(); ++i) {
    runs.push_back({{"epsilon", st.epsilons[i]},
                    {"seed", chain_seed(seed, i)},
                    {"w1", st.w1[i]},
                    {"final_below_first", st.w1[i].back() < st.w1[i].front()}});
  }
  json meta{{"figure", "wasserstein-curve"},
            {"checkpoints", st.checkpoints},
            {"burn_in", st.burn_in},
            {"scale", scale_note(st.samples)},
            {"runs", runs}};
  write_json(out / "wasserstein_curve.json", meta);
  return meta;
}

/*
 * Toy analogue of the network experiment: a d -> 10 -> 10 -> 10 -> 1 ReLU
 * regression on the built-in synthetic data (200 rows, d = 5), trained on
 * the first 160 rows and scored on the last 40.
 */
struct ReluToy {
  std::uint64_t data_seed = 2024;
  std::size_t rows = 200, dim = 5, train_rows = 160;
  double lambda = 1e-2;
  double sigma = 1e-3;
  double epsilon = 1e-5;
  std::uint64_t steps = 20'000;
  std::uint64_t thin = 10;
  double proposal_std = 1.0;
  std::uint64_t init_seed = 7;

  std::vector<std::uint64_t> trace_steps;
  std::vector<double> ula_loss, rwm_loss;
  double ula_acceptance = 1.0, rwm_acceptance = 0.0;
  std::size_t dimension = 0;

  static double mean(const std::vector<double>& v, std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t i = a; i < b; ++i) s += v[i];
    return s / static_cast<double>(b - a);
  }
  double ula_first_5pct() const { return mean(ula_loss, 0, ula_loss.size() / 20); }
  double ula_final_quarter() const { return mean(ula_loss, 3 * ula_loss.size() / 4, ula_loss.size()); }
  double rwm_first_quarter() const { return mean(rwm_loss, 0, rwm_loss.size() / 4); }
  double rwm_final_quarter() const { return mean(rwm_loss, 3 * rwm_loss.size() / 4, rwm_loss.size()); }
};

inline ReluToy run_relu_toy(std::uint64_t seed) {
  ReluToy toy;
  const auto data = synthetic_regression(toy.rows, toy.dim, toy.data_seed);
  const auto test = slice_rows(data, toy.train_rows, toy.rows);
  const ReLUNetPotential net(ReLUNetPotential::three_hidden_layers(toy.dim), slice_rows(data, 0, toy.train_rows),
                             toy.lambda);
  toy.dimension = net.dimension();
  Rng init_rng(toy.init_seed);
  ChainConfig<std::vector<double>> c;
  c.epsilon = toy.epsilon;
  c.sigma = toy.sigma;
  c.n_steps = toy.steps;
  c.thin = toy.thin;
  c.seed = seed;
  c.proposal_std = toy.proposal_std;
  c.init = net.initial_parameters(init_rng);
  const auto ula = run_ula(net, c);
  const auto rwm = run_rwm(net, c);
  for (std::size_t j = 0; j < ula.samples.size(); ++j) {
    toy.trace_steps.push_back(ula.step_of(j));
    toy.ula_loss.push_back(net.mse(ula.samples[j], test));
    toy.rwm_loss.push_back(net.mse(rwm.samples[j], test));
  }
  toy.rwm_acceptance = rwm.acceptance_rate();
  return toy;
}

inline json repro_relu_toy(std::uint64_t seed, const fs::path& out) {
  const auto toy = run_relu_toy(seed);
  CsvTable t({"step", "ula_test_mse", "rwm_test_mse"});
  Series su{"ULA", {}, {}}, sr{"RWM", {}, {}};
  for (std::size_t j = 0; j < toy.trace_steps.size(); ++j) {
    const double s = static_cast<double>(toy.trace_steps[j]);
    t.add_row({s, toy.ula_loss[j], toy.rwm_loss[j]});
    su.x.push_back(s);
    su.y.push_back(toy.ula_loss[j]);
    sr.x.push_back(s);
    sr.y.push_back(toy.rwm_loss[j]);
  }
  write_text(out / "relu_toy.csv", t.str());
  write_text(out / "relu_toy.svg", svg_line_chart({"Test loss along the chains", "step", "test MSE", false}, {su, sr}));
  json meta{{"figure", "relu-toy"},
            {"network", ReLUNetPotential::three_hidden_layers(toy.dim)},
            {"parameters", toy.dimension},
            {"data", {{"generator", "synthetic_regression"}, {"rows", toy.rows}, {"dim", toy.dim}, {"seed", toy.data_seed},
                      {"train_rows", toy.train_rows}}},
            {"lambda", toy.lambda},
            {"sigma", toy.sigma},
            {"epsilon", toy.epsilon},
            {"steps", toy.steps},
            {"thin", toy.thin},
            {"seed", seed},
            {"init_seed", toy.init_seed},
            {"rwm_proposal_std", toy.proposal_std},
            {"rwm_acceptance_rate", toy.rwm_acceptance},
            {"ula_first_5pct_mean", toy.ula_first_5pct()},
            {"ula_final_quarter_mean", toy.ula_final_quarter()},
            {"rwm_first_quarter_mean", toy.rwm_first_quarter()},
            {"rwm_final_quarter_mean", toy.rwm_final_quarter()}};
  write_json(out / "relu_toy.json", meta);
  return meta;
}

inline json cmd_repro(const std::string& figure, std::uint64_t seed, const fs::path& out) {
  if (figure == "gibbs-pdf") return repro_gibbs_pdf(out);
  if (figure == "metro-hist") return repro_metro_hist(seed, out);
  if (figure == "ula-hist") return repro_ula_hist(run_ula_study(seed, false), seed, out);
  if (figure == "wasserstein-curve") return repro_wasserstein_curve(run_ula_study(seed, true), seed, out);
  if (figure == "relu-toy") return repro_relu_toy(seed, out);
  throw ConfigError("unknown figure '" + figure + "'");
}

}  // namespace langinc::cli

#endif  // LANGINC_COMMANDS_HPP_

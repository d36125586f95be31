// langinc: command-line front end for the sampling, Fokker-Planck, JKO and
// Gibbs tools. Exit codes: 0 success, 2 bad configuration or arguments,
// 3 numerical failure (divergence, no convergence), 1 anything else.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "langinc/commands.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct GlobalOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

langinc::ExperimentConfig load(const GlobalOptions& g, bool required) {
  if (g.config.empty()) {
    if (required) throw langinc::ConfigError("this command needs --config <path>");
    return langinc::experiment_from_toml(langinc::parse_toml(""));
  }
  return langinc::load_experiment(g.config);
}

std::string out_dir(const GlobalOptions& g, const langinc::ExperimentConfig& cfg) {
  return g.out.empty() ? cfg.out : g.out;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace langinc;
  CLI::App app{"Langevin sampling, Fokker-Planck and JKO tools for piecewise potentials", "langinc"};
  app.fallthrough();
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config, "TOML experiment configuration");
  app.add_option("--out", g.out, "output directory (default: the config's `out`, else ./out)");
  app.add_option("--seed", g.seed, "seed overriding the configuration");

  auto* sample = app.add_subcommand("sample", "run a ULA, RWM or MALA chain");
  auto* fp = app.add_subcommand("fp", "Fokker-Planck steady state, snapshots and interface residuals");
  auto* jko = app.add_subcommand("jko", "JKO minimizing movement in quantile coordinates");
  auto* gibbs = app.add_subcommand("gibbs", "Gibbs density and distribution function tables");
  auto* metrics = app.add_subcommand("metrics", "W1 between two sample files or a sample file and the Gibbs law");
  std::string file_a, file_b;
  metrics->add_option("--a", file_a, "CSV of samples (column `x`)")->required();
  metrics->add_option("--b", file_b, "second CSV of samples; without it --config supplies the Gibbs law");
  auto* repro = app.add_subcommand("repro", "regenerate one of the reference figures");
  std::string figure;
  repro->add_option("figure", figure, "gibbs-pdf | metro-hist | ula-hist | wasserstein-curve | relu-toy")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    nlohmann::json result;
    if (repro->parsed()) {
      if (!cli::is_figure(figure)) {
        std::cerr << "error: unknown figure '" << figure << "'; expected one of gibbs-pdf, metro-hist, ula-hist, "
                  << "wasserstein-curve, relu-toy\n";
        return kExitConfig;
      }
      const std::string out = g.out.empty() ? "out" : g.out;
      result = cli::cmd_repro(figure, g.seed.value_or(kDefaultSeed), out);
    } else if (metrics->parsed()) {
      cli::MetricsArgs args{file_a, file_b, std::nullopt};
      std::string out = g.out.empty() ? "out" : g.out;
      if (file_b.empty() || !g.config.empty()) {
        auto cfg = load(g, file_b.empty());
        if (g.out.empty()) out = cfg.out;
        if (file_b.empty()) args.gibbs = std::move(cfg);
      }
      result = cli::cmd_metrics(args, out);
      std::cout << result.dump() << "\n";
      return 0;
    } else {
      auto cfg = load(g, false);
      if (g.seed) cfg.sampler.seed = *g.seed;
      const std::string out = out_dir(g, cfg);
      if (sample->parsed()) result = cli::cmd_sample(cfg, out);
      if (fp->parsed()) result = cli::cmd_fp(cfg, out);
      if (jko->parsed()) result = cli::cmd_jko(cfg, out);
      if (gibbs->parsed()) result = cli::cmd_gibbs(cfg, out);
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ContractViolation& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

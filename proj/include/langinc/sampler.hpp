#ifndef LANGINC_SAMPLER_HPP_
#define LANGINC_SAMPLER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "langinc/errors.hpp"
#include "langinc/potential.hpp"
#include "langinc/relu_potential.hpp"
#include "langinc/rng.hpp"

namespace langinc {

enum class SamplerKind { ULA, RWM, MALA };

inline std::string_view to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::ULA: return "ula";
    case SamplerKind::RWM: return "rwm";
    case SamplerKind::MALA: return "mala";
  }
  return "?";
}

inline std::optional<SamplerKind> parse_sampler_kind(std::string_view name) {
  for (auto k : {SamplerKind::ULA, SamplerKind::RWM, SamplerKind::MALA}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

/// States beyond this magnitude are treated as divergence.
inline constexpr double kDivergenceBound = 1e8;

template <class State>
struct ChainConfig {
  double epsilon = 1e-3;
  double sigma = 1.0;
  std::uint64_t n_steps = 1000;
  std::uint64_t burn_in = 0;
  std::uint64_t thin = 1;
  std::uint64_t seed = 0;
  SelectionRule selection = SelectionRule::MinNorm;
  State init{};
  double proposal_std = 1.0;

  void validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ContractViolation("epsilon must be > 0");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ContractViolation("sigma must be > 0");
    if (n_steps == 0) throw ContractViolation("n_steps must be positive");
    if (thin == 0) throw ContractViolation("thin must be positive");
    if (burn_in + 1 > n_steps) throw ContractViolation("burn_in must be smaller than n_steps");
    if (!(proposal_std > 0.0) || !std::isfinite(proposal_std)) {
      throw ContractViolation("proposal_std must be > 0");
    }
  }

  /// floor((n_steps - burn_in) / thin).
  std::uint64_t retained() const { return (n_steps - burn_in) / thin; }
};

template <class State>
struct Chain {
  std::vector<State> samples;
  std::uint64_t accepted = 0;
  ChainConfig<State> config;
  SamplerKind kind = SamplerKind::ULA;

  /// Iteration index (1-based) of sample j.
  std::uint64_t step_of(std::size_t j) const { return config.burn_in + (j + 1) * config.thin; }
  double acceptance_rate() const {
    return static_cast<double>(accepted) / static_cast<double>(config.n_steps);
  }
};

// ---------------------------------------------------------------------------
// Target adaptors: value and drift selection for the two potential families.

inline double potential_value(const PiecewisePotential1D& p, double x) { return p(x); }

inline double drift_selection(const PiecewisePotential1D& p, double x, SelectionRule rule, Rng& rng) {
  return select(p.clarke_subdiff(x), rule, rng);
}

inline double potential_value(const ReLUNetPotential& p, const std::vector<double>& x) { return p(x); }

// The network exposes a single selection; the rule is fixed by relu_slope_at_zero.
inline std::vector<double> drift_selection(const ReLUNetPotential& p, const std::vector<double>& x,
                                           SelectionRule, Rng&) {
  return p.gradient(x);
}

namespace detail {

inline double draw_noise(double, Rng& rng) { return rng.normal(); }
inline std::vector<double> draw_noise(const std::vector<double>& like, Rng& rng) {
  std::vector<double> b(like.size());
  for (auto& v : b) v = rng.normal();
  return b;
}

// x - eps*g + c*b
inline double langevin_move(double x, double g, double eps, double c, double b) { return x - eps * g + c * b; }
inline std::vector<double> langevin_move(const std::vector<double>& x, const std::vector<double>& g, double eps,
                                         double c, const std::vector<double>& b) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - eps * g[i] + c * b[i];
  return y;
}

inline double random_walk_move(double x, double sd, double b) { return x + sd * b; }
inline std::vector<double> random_walk_move(const std::vector<double>& x, double sd, const std::vector<double>& b) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + sd * b[i];
  return y;
}

// |a - b + eps*g|^2
inline double transition_residual_sq(double a, double b, double eps, double g) {
  const double r = a - b + eps * g;
  return r * r;
}
inline double transition_residual_sq(const std::vector<double>& a, const std::vector<double>& b, double eps,
                                     const std::vector<double>& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double r = a[i] - b[i] + eps * g[i];
    s += r * r;
  }
  return s;
}

inline bool state_ok(double x) { return std::isfinite(x) && std::abs(x) <= kDivergenceBound; }
inline bool state_ok(const std::vector<double>& x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return state_ok(v); });
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Single-step kernels.

/// x - eps*g + sqrt(2 sigma eps) * noise, g drawn from the selection rule.
template <class Potential, class State>
State ula_step(const Potential& p, const State& x, const ChainConfig<State>& cfg, const State& noise, Rng& rng) {
  const auto g = drift_selection(p, x, cfg.selection, rng);
  return detail::langevin_move(x, g, cfg.epsilon, std::sqrt(2.0 * cfg.sigma * cfg.epsilon), noise);
}

template <class Potential, class State>
State ula_step(const Potential& p, const State& x, const ChainConfig<State>& cfg, Rng& rng) {
  const auto g = drift_selection(p, x, cfg.selection, rng);
  const auto b = detail::draw_noise(x, rng);
  return detail::langevin_move(x, g, cfg.epsilon, std::sqrt(2.0 * cfg.sigma * cfg.epsilon), b);
}

/// min(1, exp(-(f_proposal - f_current) / sigma)).
inline double metropolis_accept_prob(double f_current, double f_proposal, double sigma) {
  const double log_ratio = -(f_proposal - f_current) / sigma;
  if (std::isnan(log_ratio)) return 0.0;
  return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

/*
 * MALA acceptance probability for a move x -> y with drift selections g_x, g_y:
 *   log a = -(f(y) - f(x))/sigma + q(x|y) - q(y|x),
 *   q(a|b) = -|a - b + eps g(b)|^2 / (4 eps sigma).
 */
template <class State, class Grad>
double mala_accept_prob(double f_x, double f_y, const State& x, const State& y, const Grad& g_x, const Grad& g_y,
                        double eps, double sigma) {
  const double q_x_given_y = -detail::transition_residual_sq(x, y, eps, g_y) / (4.0 * eps * sigma);
  const double q_y_given_x = -detail::transition_residual_sq(y, x, eps, g_x) / (4.0 * eps * sigma);
  const double log_ratio = -(f_y - f_x) / sigma + q_x_given_y - q_y_given_x;
  if (std::isnan(log_ratio)) return 0.0;
  return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

// ---------------------------------------------------------------------------
// Chain drivers.

namespace detail {

template <class State, class Kernel>
Chain<State> drive(const ChainConfig<State>& cfg, SamplerKind kind, Kernel&& kernel) {
  cfg.validate();
  Chain<State> chain;
  chain.config = cfg;
  chain.kind = kind;
  chain.samples.reserve(cfg.retained());
  Rng rng(cfg.seed);
  State x = cfg.init;
  if (!state_ok(x)) throw DivergedError(0, "initial state is not finite or exceeds the divergence bound");
  for (std::uint64_t k = 1; k <= cfg.n_steps; ++k) {
    if (kernel(x, rng)) ++chain.accepted;
    if (!state_ok(x)) throw DivergedError(k, "state left the finite region |x| <= 1e8");
    if (k > cfg.burn_in && (k - cfg.burn_in) % cfg.thin == 0) chain.samples.push_back(x);
  }
  return chain;
}

}  // namespace detail

template <class Potential, class State>
Chain<State> run_ula(const Potential& p, const ChainConfig<State>& cfg) {
  return detail::drive(cfg, SamplerKind::ULA, [&](State& x, Rng& rng) {
    x = ula_step(p, x, cfg, rng);
    return true;
  });
}

template <class Potential, class State>
Chain<State> run_rwm(const Potential& p, const ChainConfig<State>& cfg) {
  std::optional<double> fx;
  return detail::drive(cfg, SamplerKind::RWM, [&](State& x, Rng& rng) {
    if (!fx) fx = potential_value(p, x);
    const auto b = detail::draw_noise(x, rng);
    State y = detail::random_walk_move(x, cfg.proposal_std, b);
    const double fy = potential_value(p, y);
    const double a = metropolis_accept_prob(*fx, fy, cfg.sigma);
    if (rng.uniform() < a) {
      x = std::move(y);
      fx = fy;
      return true;
    }
    return false;
  });
}

template <class Potential, class State>
Chain<State> run_mala(const Potential& p, const ChainConfig<State>& cfg) {
  using Grad = decltype(drift_selection(p, cfg.init, cfg.selection, std::declval<Rng&>()));
  std::optional<double> fx;
  std::optional<Grad> gx;
  const double c = std::sqrt(2.0 * cfg.sigma * cfg.epsilon);
  return detail::drive(cfg, SamplerKind::MALA, [&](State& x, Rng& rng) {
    if (!fx) {
      fx = potential_value(p, x);
      gx = drift_selection(p, x, cfg.selection, rng);
    }
    const auto b = detail::draw_noise(x, rng);
    State y = detail::langevin_move(x, *gx, cfg.epsilon, c, b);
    const double fy = potential_value(p, y);
    if (!std::isfinite(fy)) return false;
    auto gy = drift_selection(p, y, cfg.selection, rng);
    const double a = mala_accept_prob(*fx, fy, x, y, *gx, gy, cfg.epsilon, cfg.sigma);
    if (rng.uniform() < a) {
      x = std::move(y);
      fx = fy;
      gx = std::move(gy);
      return true;
    }
    return false;
  });
}

template <class Potential, class State>
Chain<State> run_chain(const Potential& p, const ChainConfig<State>& cfg, SamplerKind kind) {
  switch (kind) {
    case SamplerKind::ULA: return run_ula(p, cfg);
    case SamplerKind::RWM: return run_rwm(p, cfg);
    case SamplerKind::MALA: return run_mala(p, cfg);
  }
  throw ContractViolation("unknown sampler kind");
}

}  // namespace langinc

#endif  // LANGINC_SAMPLER_HPP_

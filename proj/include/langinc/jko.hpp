#ifndef LANGINC_JKO_HPP_
#define LANGINC_JKO_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "langinc/errors.hpp"
#include "langinc/fokker_planck.hpp"
#include "langinc/gibbs.hpp"
#include "langinc/potential.hpp"

namespace langinc {

/// Smallest admissible gap between consecutive quantile values.
inline constexpr double kMinQuantileGap = 1e-12;

/*
 * A probability measure on the line through its quantile function sampled
 * at the midpoint levels u_j = (j + 1/2)/M, j = 0..M-1.
 */
class QuantileField {
 public:
  QuantileField() = default;
  explicit QuantileField(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() < 2) throw ContractViolation("quantile field needs at least two nodes");
    for (double v : values_) {
      if (!std::isfinite(v)) throw ContractViolation("quantile values must be finite");
    }
    for (std::size_t j = 1; j < values_.size(); ++j) {
      if (!(values_[j] - values_[j - 1] >= kMinQuantileGap)) {
        throw ContractViolation("quantile values must increase by at least 1e-12");
      }
    }
  }

  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t j) const { return values_[j]; }
  double level(std::size_t j) const { return (static_cast<double>(j) + 0.5) / static_cast<double>(size()); }

 private:
  std::vector<double> values_;
};

inline double w2(const QuantileField& a, const QuantileField& b) {
  if (a.size() != b.size()) throw ContractViolation("w2 needs quantile fields of equal size");
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(a.size()));
}

inline double potential_energy(const PiecewisePotential1D& p, std::span<const double> q) {
  double e = 0.0;
  for (double x : q) e += p(x);
  return e / static_cast<double>(q.size());
}

/// Quantile form of the entropy integral of rho log rho: -(1/M) sum log(M (Q_{j+1} - Q_j)).
inline double entropy(std::span<const double> q) {
  const double m = static_cast<double>(q.size());
  double s = 0.0;
  for (std::size_t j = 0; j + 1 < q.size(); ++j) s -= std::log(m * (q[j + 1] - q[j]));
  return s / m;
}

/// E + sigma * S.
inline double free_energy(const PiecewisePotential1D& p, double sigma, const QuantileField& q) {
  return potential_energy(p, q.values()) + sigma * entropy(q.values());
}

// ---------------------------------------------------------------------------
// Initial conditions.

inline QuantileField gaussian_quantiles(std::size_t m, double mean, double std_dev) {
  if (!(std_dev > 0.0)) throw ContractViolation("gaussian std must be > 0");
  std::vector<double> q(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double u = (static_cast<double>(j) + 0.5) / static_cast<double>(m);
    q[j] = mean + std_dev * std::sqrt(2.0) * boost::math::erf_inv(2.0 * u - 1.0);
  }
  return QuantileField(std::move(q));
}

inline QuantileField uniform_quantiles(std::size_t m, double a, double b) {
  if (!(a < b)) throw ContractViolation("uniform(a, b) needs a < b");
  std::vector<double> q(m);
  for (std::size_t j = 0; j < m; ++j) q[j] = a + (b - a) * (static_cast<double>(j) + 0.5) / static_cast<double>(m);
  return QuantileField(std::move(q));
}

inline QuantileField gibbs_quantiles(const GibbsDensity& g, std::size_t m) {
  std::vector<double> q(m);
  for (std::size_t j = 0; j < m; ++j) q[j] = g.quantile((static_cast<double>(j) + 0.5) / static_cast<double>(m));
  return QuantileField(std::move(q));
}

// ---------------------------------------------------------------------------
// One JKO step.

/*
 * Phi(Q) = 1/2 w2(Q_prev, Q)^2 + h F(Q) over monotone Q. Returns +inf for
 * non-monotone arguments.
 */
class JkoObjective {
 public:
  JkoObjective(const PiecewisePotential1D& p, double sigma, double h, const QuantileField& prev,
               SelectionRule rule = SelectionRule::MinNorm)
      : p_(p), sigma_(sigma), h_(h), prev_(prev.values()), rule_(rule) {}

  std::size_t size() const { return prev_.size(); }

  double value(std::span<const double> q) const {
    const double m = static_cast<double>(q.size());
    double prox = 0.0;
    double energy = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      const double d = q[j] - prev_[j];
      prox += d * d;
      energy += p_(q[j]);
    }
    double ent = 0.0;
    for (std::size_t j = 0; j + 1 < q.size(); ++j) {
      const double gap = q[j + 1] - q[j];
      if (!(gap > 0.0)) return std::numeric_limits<double>::infinity();
      ent -= std::log(m * gap);
    }
    return (0.5 * prox + h_ * energy + h_ * sigma_ * ent) / m;
  }

  /// Proximal plus entropy part of the gradient (everything except the potential term).
  std::vector<double> smooth_gradient(std::span<const double> q) const {
    const std::size_t n = q.size();
    const double m = static_cast<double>(n);
    std::vector<double> g(n);
    for (std::size_t j = 0; j < n; ++j) {
      double e = 0.0;
      if (j + 1 < n) e += 1.0 / (q[j + 1] - q[j]);
      if (j > 0) e -= 1.0 / (q[j] - q[j - 1]);
      g[j] = ((q[j] - prev_[j]) + h_ * sigma_ * e) / m;
    }
    return g;
  }

  /// Gradient with f' taken from the piece at Q_j, or from the selection rule at a breakpoint.
  std::vector<double> gradient(std::span<const double> q) const {
    auto g = smooth_gradient(q);
    const double m = static_cast<double>(q.size());
    for (std::size_t j = 0; j < q.size(); ++j) g[j] += h_ / m * select(p_.clarke_subdiff(q[j]), rule_);
    return g;
  }

  const PiecewisePotential1D& potential() const { return p_; }
  double sigma() const { return sigma_; }
  double h() const { return h_; }
  SelectionRule rule() const { return rule_; }

 private:
  const PiecewisePotential1D& p_;
  double sigma_;
  double h_;
  std::vector<double> prev_;
  SelectionRule rule_;
};

struct JkoOptions {
  double gradient_tolerance = 1e-10;
  std::size_t max_iterations = 500;
  std::size_t max_halvings = 60;
  SelectionRule rule = SelectionRule::MinNorm;
};

struct JkoStepReport {
  std::size_t iterations = 0;
  double stationarity = 0.0;
  bool converged = false;
};

namespace detail {

// Solve a symmetric tridiagonal system (diag, off) x = rhs; off[i] couples i and i+1.
inline std::vector<double> solve_tridiagonal(const std::vector<double>& diag, const std::vector<double>& off,
                                             const std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  std::vector<double> c(n, 0.0), d(n, 0.0), x(n);
  double denom = diag[0];
  c[0] = n > 1 ? off[0] / denom : 0.0;
  d[0] = rhs[0] / denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = diag[i] - off[i - 1] * c[i - 1];
    c[i] = i + 1 < n ? off[i] / denom : 0.0;
    d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / denom;
  }
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

}  // namespace detail

/*
 * Minimize Phi by an active-set Newton descent.
 *
 * The smooth part of Phi (proximal term, entropy, and f'' on each piece) has
 * a tridiagonal Hessian, so each direction costs O(M). The potential term is
 * nonsmooth at the breakpoints:
 *  - at a convex kink (left slope < right slope) a node may come to rest on
 *    the breakpoint. Steps are truncated where a node first reaches such a
 *    kink; the node is then pinned there and released only when one of the
 *    one-sided directional derivatives becomes negative.
 *  - concave kinks are crossed freely; the objective only drops faster than
 *    the one-piece model there. A node sitting exactly on one uses the
 *    selection rule.
 * Step lengths also keep every gap positive, and a backtracking Armijo
 * search guarantees Phi(result) <= Phi(Q_prev).
 *
 * Convergence is declared when the minimal-norm element of the Clarke
 * subdifferential of Phi has Euclidean norm <= gradient_tolerance.
 */
inline QuantileField jko_step(const PiecewisePotential1D& p, double sigma, double h, const QuantileField& prev,
                              const JkoOptions& opts = {}, JkoStepReport* report = nullptr) {
  if (!(h >= 0.0)) throw ContractViolation("JKO step h must be >= 0");
  if (!(sigma >= 0.0)) throw ContractViolation("sigma must be >= 0");
  const JkoObjective phi(p, sigma, h, prev, opts.rule);
  const std::size_t n = prev.size();
  const double m = static_cast<double>(n);
  const auto& bps = p.breakpoints();

  // Convex kinks in increasing order.
  std::vector<double> convex;
  std::vector<std::pair<double, double>> convex_slopes;
  for (std::size_t b = 0; b < bps.size(); ++b) {
    auto [left, right] = p.one_sided_derivatives(b);
    if (left < right) {
      convex.push_back(bps[b]);
      convex_slopes.emplace_back(left, right);
    }
  }
  auto convex_index = [&](double x) -> std::ptrdiff_t {
    auto it = std::lower_bound(convex.begin(), convex.end(), x);
    if (it != convex.end() && *it == x) return it - convex.begin();
    return -1;
  };

  std::vector<double> q = prev.values();
  // pinned[j] >= 0: node j rests on convex kink pinned[j].
  std::vector<std::ptrdiff_t> pinned(n, -1);
  for (std::size_t j = 0; j < n; ++j) pinned[j] = convex_index(q[j]);

  std::vector<double> g(n), diag(n), off(n > 0 ? n - 1 : 0), rhs(n);
  std::vector<int> release(n, 0);  // +1 / -1: pinned node allowed to leave in that direction
  double value = phi.value(q);
  JkoStepReport rep;

  for (rep.iterations = 0; rep.iterations < opts.max_iterations; ++rep.iterations) {
    const auto r = phi.smooth_gradient(q);
    std::fill(release.begin(), release.end(), 0);
    for (std::size_t j = 0; j < n; ++j) {
      if (pinned[j] < 0) {
        g[j] = r[j] + h / m * select(p.clarke_subdiff(q[j]), opts.rule);
        continue;
      }
      const auto [left, right] = convex_slopes[static_cast<std::size_t>(pinned[j])];
      const double up = r[j] + h / m * right;
      const double down = r[j] + h / m * left;
      if (up < 0.0) {
        release[j] = +1;
        g[j] = up;
      } else if (down > 0.0) {
        release[j] = -1;
        g[j] = down;
      } else {
        g[j] = 0.0;
      }
    }
    double norm = 0.0;
    for (double v : g) norm += v * v;
    rep.stationarity = std::sqrt(norm);
    if (rep.stationarity <= opts.gradient_tolerance) {
      rep.converged = true;
      break;
    }

    // Hessian of the smooth part (f'' clamped at zero keeps it positive definite).
    for (std::size_t j = 0; j < n; ++j) {
      const double curv = pinned[j] < 0 ? std::max(0.0, p.piece_second_derivative(q[j])) : 0.0;
      diag[j] = (1.0 + h * curv) / m;
    }
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const double gap = q[j + 1] - q[j];
      const double c = h * sigma / (m * gap * gap);
      diag[j] += c;
      diag[j + 1] += c;
      off[j] = -c;
    }

    // Direction: Newton on the free nodes; pinned nodes that may not move stay fixed.
    std::vector<char> fixed(n, 0);
    for (std::size_t j = 0; j < n; ++j) fixed[j] = (pinned[j] >= 0 && release[j] == 0);
    std::vector<double> d;
    for (std::size_t attempt = 0; attempt <= n; ++attempt) {
      std::vector<double> dg = diag, od = off;
      for (std::size_t j = 0; j < n; ++j) {
        rhs[j] = fixed[j] ? 0.0 : -g[j];
        if (fixed[j]) {
          dg[j] = 1.0;
          if (j > 0) od[j - 1] = 0.0;
          if (j + 1 < n) od[j] = 0.0;
        }
      }
      d = detail::solve_tridiagonal(dg, od, rhs);
      bool wrong_way = false;
      for (std::size_t j = 0; j < n; ++j) {
        if (release[j] != 0 && !fixed[j] && d[j] * release[j] <= 0.0) {
          fixed[j] = 1;
          wrong_way = true;
        }
      }
      if (!wrong_way) break;
    }
    double slope = 0.0;
    for (std::size_t j = 0; j < n; ++j) slope += g[j] * d[j];
    if (!(slope < 0.0)) {
      // Newton model blocked every released node: move those alone along -g / H_jj.
      std::fill(d.begin(), d.end(), 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        if (release[j] != 0) d[j] = -g[j] / diag[j];
      }
      slope = 0.0;
      for (std::size_t j = 0; j < n; ++j) slope += g[j] * d[j];
      if (!(slope < 0.0)) throw SolverError("JKO step: no descent direction at stationarity " +
                                            std::to_string(rep.stationarity));
    }

    // Longest step before a node reaches a convex kink or a gap closes.
    double alpha_kink = std::numeric_limits<double>::infinity();
    std::vector<std::pair<std::size_t, std::size_t>> blockers;  // (node, kink)
    for (std::size_t j = 0; j < n; ++j) {
      if (d[j] == 0.0 || convex.empty()) continue;
      std::ptrdiff_t target = -1;
      if (d[j] > 0.0) {
        auto it = std::upper_bound(convex.begin(), convex.end(), q[j]);
        if (it != convex.end()) target = it - convex.begin();
      } else {
        auto it = std::lower_bound(convex.begin(), convex.end(), q[j]);
        if (it != convex.begin()) target = (it - convex.begin()) - 1;
      }
      if (target < 0) continue;
      const double a = (convex[static_cast<std::size_t>(target)] - q[j]) / d[j];
      if (a < alpha_kink) {
        alpha_kink = a;
        blockers.assign(1, {j, static_cast<std::size_t>(target)});
      } else if (a == alpha_kink) {
        blockers.emplace_back(j, static_cast<std::size_t>(target));
      }
    }
    double alpha_gap = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const double closing = d[j] - d[j + 1];
      if (closing > 0.0) alpha_gap = std::min(alpha_gap, 0.9 * (q[j + 1] - q[j]) / closing);
    }
    double alpha = std::min({1.0, alpha_kink, alpha_gap});
    const bool kink_limited = alpha == alpha_kink;

    std::vector<double> trial(n);
    bool accepted = false;
    bool halved = false;
    for (std::size_t k = 0; k <= opts.max_halvings; ++k) {
      for (std::size_t j = 0; j < n; ++j) trial[j] = q[j] + alpha * d[j];
      if (!halved && kink_limited) {
        for (auto [j, kink] : blockers) trial[j] = convex[kink];
      }
      const double tv = phi.value(trial);
      if (tv <= value + 1e-4 * alpha * slope) {
        value = tv;
        accepted = true;
        break;
      }
      // Below the resolution of Phi: the predicted decrease is lost in rounding.
      if (tv <= value + 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(value)) &&
          -alpha * slope <= 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(value))) {
        value = std::min(value, tv);
        accepted = true;
        break;
      }
      alpha *= 0.5;
      halved = true;
    }
    if (!accepted) {
      throw SolverError("JKO step: line search failed after " + std::to_string(opts.max_halvings) +
                        " halvings (stationarity " + std::to_string(rep.stationarity) + ", iteration " +
                        std::to_string(rep.iterations) + ")");
    }
    q.swap(trial);
    for (std::size_t j = 0; j < n; ++j) {
      if (release[j] != 0 && d[j] != 0.0) pinned[j] = -1;
    }
    if (!halved && kink_limited) {
      for (auto [j, kink] : blockers) pinned[j] = static_cast<std::ptrdiff_t>(kink);
    }
  }
  if (report) *report = rep;
  return QuantileField(std::move(q));
}

// ---------------------------------------------------------------------------
// Runs, time interpolation and conversions.

struct JkoRun {
  double h = 0.0;
  std::vector<QuantileField> steps;    // steps[0] is the initial state
  std::vector<double> free_energies;   // F(steps[k])
  std::vector<double> step_distances;  // w2(steps[k-1], steps[k]); entry 0 is 0
  bool converged = true;
};

inline JkoRun run_jko(const PiecewisePotential1D& p, double sigma, double h, std::size_t n_steps,
                      const QuantileField& initial, const JkoOptions& opts = {}) {
  if (!(h > 0.0)) throw ContractViolation("JKO run needs h > 0");
  JkoRun run;
  run.h = h;
  run.steps.reserve(n_steps + 1);
  run.steps.push_back(initial);
  run.free_energies.push_back(free_energy(p, sigma, initial));
  run.step_distances.push_back(0.0);
  for (std::size_t k = 1; k <= n_steps; ++k) {
    JkoStepReport rep;
    run.steps.push_back(jko_step(p, sigma, h, run.steps.back(), opts, &rep));
    run.converged = run.converged && rep.converged;
    run.free_energies.push_back(free_energy(p, sigma, run.steps.back()));
    run.step_distances.push_back(w2(run.steps[k - 1], run.steps[k]));
  }
  return run;
}

/*
 * Piecewise-constant interpolation: the state at time t is step floor(t/h).
 * Times within 1e-12 (relative) below a step boundary count as the boundary.
 */
inline const QuantileField& interpolate(const JkoRun& run, double t) {
  const std::size_t last = run.steps.size() - 1;
  const double horizon = run.h * static_cast<double>(last);
  if (!(t >= 0.0) || t > horizon * (1.0 + 1e-12)) {
    throw DomainError("time " + std::to_string(t) + " outside [0, " + std::to_string(horizon) + "]");
  }
  const auto k = static_cast<std::size_t>(std::floor(t / run.h * (1.0 + 1e-12)));
  return run.steps[std::min(k, last)];
}

/*
 * Cell averages of the measure whose CDF interpolates (Q_j, u_j) linearly,
 * extended by half a gap at both ends to reach 0 and 1. Mass beyond the
 * grid is assigned to the boundary cells.
 */
inline DensityField density_from_quantiles(const QuantileField& q, const Grid1D& grid) {
  const std::size_t m = q.size();
  const double mm = static_cast<double>(m);
  std::vector<double> xs(m + 2), us(m + 2);
  xs[0] = q[0] - 0.5 * (q[1] - q[0]);
  us[0] = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    xs[j + 1] = q[j];
    us[j + 1] = (static_cast<double>(j) + 0.5) / mm;
  }
  xs[m + 1] = q[m - 1] + 0.5 * (q[m - 1] - q[m - 2]);
  us[m + 1] = 1.0;
  auto cdf = [&](double x) {
    if (x <= xs.front()) return 0.0;
    if (x >= xs.back()) return 1.0;
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    return us[i] + (us[i + 1] - us[i]) * (x - xs[i]) / (xs[i + 1] - xs[i]);
  };
  DensityField rho{grid, std::vector<double>(grid.size()), 0.0};
  double left = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double right = (i + 1 == grid.size()) ? 1.0 : cdf(grid.face(i + 1));
    rho.values[i] = (right - left) / grid.width(i);
    left = right;
  }
  return rho;
}

/// Inverse of the piecewise-linear CDF of a cell-averaged density at the levels (j + 1/2)/M.
inline QuantileField quantiles_from_density(const DensityField& rho, std::size_t m) {
  const Grid1D& g = rho.grid;
  const double mass = rho.mass();
  if (!(mass > 0.0)) throw ContractViolation("density has no mass");
  std::vector<double> cum(g.size() + 1, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) cum[i + 1] = cum[i] + rho.values[i] * g.width(i) / mass;
  std::vector<double> q(m);
  std::size_t i = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const double u = (static_cast<double>(j) + 0.5) / static_cast<double>(m);
    while (i + 1 < g.size() && cum[i + 1] <= u) ++i;
    const double cell_mass = cum[i + 1] - cum[i];
    const double frac = cell_mass > 0.0 ? std::clamp((u - cum[i]) / cell_mass, 0.0, 1.0) : 0.5;
    q[j] = g.face(i) + frac * g.width(i);
  }
  return QuantileField(std::move(q));
}

}  // namespace langinc

#endif  // LANGINC_JKO_HPP_

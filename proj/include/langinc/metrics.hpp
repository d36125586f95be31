#ifndef LANGINC_METRICS_HPP_
#define LANGINC_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "langinc/errors.hpp"
#include "langinc/fokker_planck.hpp"
#include "langinc/gibbs.hpp"
#include "langinc/potential.hpp"
#include "langinc/quadrature.hpp"

namespace langinc {

/// Integral of |F_A - F_B| over the merged support (empirical CDFs as staircases).
inline double w1_staircase(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ContractViolation("w1 needs nonempty sample sets");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double x = std::min(sa[0], sb[0]);
  double total = 0.0;
  while (i < sa.size() || j < sb.size()) {
    const double next = (j >= sb.size() || (i < sa.size() && sa[i] <= sb[j])) ? sa[i] : sb[j];
    total += std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb) * (next - x);
    x = next;
    while (i < sa.size() && sa[i] == x) ++i;
    while (j < sb.size() && sb[j] == x) ++j;
  }
  return total;
}

/// W1 between empirical measures: sorted matching for equal sizes, the staircase integral otherwise.
inline double w1_samples(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ContractViolation("w1 needs nonempty sample sets");
  if (a.size() != b.size()) return w1_staircase(a, b);
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  double s = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) s += std::abs(sa[i] - sb[i]);
  return s / static_cast<double>(sa.size());
}

namespace detail {

// Integral of the Gibbs CDF over [a, b], Simpson on panels no wider than 0.05.
inline double integrate_cdf(const GibbsDensity& g, double a, double b, double ga, double gb) {
  if (!(b > a)) return 0.0;
  const auto panels = static_cast<std::size_t>(std::ceil((b - a) / 0.05));
  if (panels <= 1) return (b - a) / 6.0 * (ga + 4.0 * g.cdf(0.5 * (a + b)) + gb);
  double s = 0.0;
  const double h = (b - a) / static_cast<double>(panels);
  double left = ga;
  for (std::size_t k = 0; k < panels; ++k) {
    const double x0 = a + h * static_cast<double>(k);
    const double x1 = k + 1 == panels ? b : x0 + h;
    const double right = k + 1 == panels ? gb : g.cdf(x1);
    s += (x1 - x0) / 6.0 * (left + 4.0 * g.cdf(0.5 * (x0 + x1)) + right);
    left = right;
  }
  return s;
}

}  // namespace detail

/*
 * W1 between an empirical measure and the Gibbs law: the integral of
 * |F_A - G| between consecutive order statistics, with the crossing point
 * located by the Gibbs quantile when the constant level c = i/n lies
 * between G at the interval ends.
 */
inline double w1_to_gibbs(std::span<const double> samples, const GibbsDensity& g) {
  if (samples.empty()) throw ContractViolation("w1_to_gibbs needs a nonempty sample set");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  const Interval dom = g.domain();

  double total = 0.0;
  // Left of the first sample F_A = 0; right of the last F_A = 1.
  double g_first = g.cdf(s.front());
  if (s.front() > dom.lo) total += detail::integrate_cdf(g, dom.lo, s.front(), 0.0, g_first);
  const double g_last = g.cdf(s.back());
  if (s.back() < dom.hi) total += (dom.hi - s.back()) - detail::integrate_cdf(g, s.back(), dom.hi, g_last, 1.0);

  double g_left = g_first;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = s[i];
    const double b = s[i + 1];
    const double g_right = (i + 2 == n) ? g_last : g.cdf(b);
    if (b > a) {
      const double c = static_cast<double>(i + 1) / static_cast<double>(n);
      if (c <= g_left) {
        total += detail::integrate_cdf(g, a, b, g_left, g_right) - c * (b - a);
      } else if (c >= g_right) {
        total += c * (b - a) - detail::integrate_cdf(g, a, b, g_left, g_right);
      } else {
        const double x = std::clamp(g.quantile(c), a, b);
        total += c * (x - a) - detail::integrate_cdf(g, a, x, g_left, c);
        total += detail::integrate_cdf(g, x, b, c, g_right) - c * (b - x);
      }
    }
    g_left = g_right;
  }
  return total;
}

struct Histogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;
  std::size_t total = 0;     // samples inside the edge range
  std::size_t overflow = 0;  // samples outside it
  std::vector<double> density;

  std::size_t bins() const { return counts.size(); }
  double center(std::size_t b) const { return 0.5 * (edges[b] + edges[b + 1]); }
  double width(std::size_t b) const { return edges[b + 1] - edges[b]; }
};

/// Left-closed bins, the last bin closed on both sides; out-of-range samples go to `overflow`.
inline Histogram histogram(std::span<const double> samples, std::vector<double> edges) {
  if (edges.size() < 2) throw ContractViolation("histogram needs at least two edges");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i - 1] < edges[i])) throw ContractViolation("histogram edges must be strictly increasing");
  }
  Histogram h;
  h.edges = std::move(edges);
  h.counts.assign(h.edges.size() - 1, 0);
  for (double x : samples) {
    if (!(x >= h.edges.front() && x <= h.edges.back())) {
      ++h.overflow;
      continue;
    }
    auto it = std::upper_bound(h.edges.begin(), h.edges.end(), x);
    auto b = static_cast<std::size_t>(it - h.edges.begin()) - 1;
    if (b >= h.counts.size()) b = h.counts.size() - 1;
    ++h.counts[b];
    ++h.total;
  }
  h.density.assign(h.counts.size(), 0.0);
  if (h.total > 0) {
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      h.density[b] = static_cast<double>(h.counts[b]) / (static_cast<double>(h.total) * h.width(b));
    }
  }
  return h;
}

inline std::vector<double> uniform_edges(double lo, double hi, std::size_t bins) {
  std::vector<double> e(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) e[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(bins);
  e.back() = hi;
  return e;
}

/// Center of the highest-density bin whose center lies in [lo, hi].
inline double histogram_mode(const Histogram& h, double lo, double hi) {
  double best = -1.0;
  double at = 0.5 * (lo + hi);
  for (std::size_t b = 0; b < h.bins(); ++b) {
    const double c = h.center(b);
    if (c < lo || c > hi) continue;
    if (h.density[b] > best) {
      best = h.density[b];
      at = c;
    }
  }
  return at;
}

inline double l1_density(const DensityField& a, const DensityField& b) {
  if (!(a.grid == b.grid)) throw ContractViolation("l1_density needs fields on the same grid");
  return l1_distance(a.grid, a.values, b.values);
}

/*
 * Free energy of consecutive non-overlapping windows of a scalar chain. Each
 * window is binned on common edges spanning the whole chain (sqrt(window)
 * bins, clamped to [10, 200]) and F = sum_b width * (f(center) rho_b +
 * sigma rho_b log rho_b), empty bins contributing zero.
 */
inline std::vector<double> free_energy_trace(const PiecewisePotential1D& p, double sigma,
                                             std::span<const double> chain, std::size_t window) {
  if (window < 100) throw ContractViolation("free_energy_trace needs window >= 100");
  if (chain.size() < window) return {};
  const auto [mn, mx] = std::minmax_element(chain.begin(), chain.end());
  const double lo = *mn;
  const double hi = *mx > *mn ? *mx : *mn + 1.0;
  const auto bins = static_cast<std::size_t>(std::clamp(std::sqrt(static_cast<double>(window)), 10.0, 200.0));
  const auto edges = uniform_edges(lo, hi, bins);
  std::vector<double> trace;
  for (std::size_t start = 0; start + window <= chain.size(); start += window) {
    const auto h = histogram(chain.subspan(start, window), edges);
    double f = 0.0;
    for (std::size_t b = 0; b < h.bins(); ++b) {
      const double r = h.density[b];
      if (r <= 0.0) continue;
      f += h.width(b) * (p(h.center(b)) * r + sigma * r * std::log(r));
    }
    trace.push_back(f);
  }
  return trace;
}

}  // namespace langinc

#endif  // LANGINC_METRICS_HPP_

#ifndef LANGINC_GIBBS_HPP_
#define LANGINC_GIBBS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "langinc/errors.hpp"
#include "langinc/potential.hpp"
#include "langinc/quadrature.hpp"
#include "langinc/rng.hpp"

namespace langinc {

namespace detail {

// Rough minimum of f over [lo, hi]; only used to keep exp(-f/sigma) in range.
inline double approximate_minimum(const PiecewisePotential1D& p, Interval domain) {
  double best = std::min(p(domain.lo), p(domain.hi));
  std::vector<double> knots{domain.lo};
  for (double b : p.breakpoints()) {
    if (domain.contains(b)) knots.push_back(b);
  }
  knots.push_back(domain.hi);
  for (std::size_t s = 0; s + 1 < knots.size(); ++s) {
    for (int k = 0; k <= 64; ++k) best = std::min(best, p(knots[s] + (knots[s + 1] - knots[s]) * k / 64.0));
  }
  return best;
}

inline void check_gibbs_inputs(const PiecewisePotential1D& p, double sigma, Interval domain) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ContractViolation("sigma must be > 0");
  if (!p.is_confined()) {
    throw ContractViolation("potential is not confining; exp(-f/sigma) is not integrable");
  }
  if (!(domain.lo < domain.hi)) throw ContractViolation("empty truncation domain");
  const auto& bps = p.breakpoints();
  if (!bps.empty() && !(domain.lo < bps.front() && bps.back() < domain.hi)) {
    throw ContractViolation("truncation domain must contain every breakpoint in its interior");
  }
}

// Segment boundaries: domain ends plus interior breakpoints.
inline std::vector<double> segment_knots(const PiecewisePotential1D& p, Interval domain) {
  std::vector<double> knots{domain.lo};
  for (double b : p.breakpoints()) {
    if (b > domain.lo && b < domain.hi) knots.push_back(b);
  }
  knots.push_back(domain.hi);
  return knots;
}

/*
 * Mass of exp(-(f - shift)/sigma) outside the domain. Exact when the outer
 * pieces are linear; otherwise the linearization at the boundary, which
 * bounds the tail for convex outer pieces. Infinite when f decreases
 * outward at the boundary.
 */
inline std::pair<double, double> tail_masses(const PiecewisePotential1D& p, double sigma, Interval domain,
                                             double shift) {
  auto tail = [&](double x, double outward_slope) {
    if (!(outward_slope > 0.0)) return std::numeric_limits<double>::infinity();
    return sigma / outward_slope * std::exp(-(p(x) - shift) / sigma);
  };
  const double left = tail(domain.lo, -poly_derivative(p.pieces().front(), domain.lo));
  const double right = tail(domain.hi, poly_derivative(p.pieces().back(), domain.hi));
  return {left, right};
}

}  // namespace detail

/*
 * Z = integral of exp(-f/sigma): composite Simpson per inter-breakpoint
 * segment of the truncation domain, refined to relative tolerance 1e-10,
 * plus the closed-form exponential tails when both outer pieces are linear.
 */
inline double normalizer(const PiecewisePotential1D& p, double sigma, Interval domain) {
  detail::check_gibbs_inputs(p, sigma, domain);
  const double shift = detail::approximate_minimum(p, domain);
  auto integrand = [&](double x) { return std::exp(-(p(x) - shift) / sigma); };
  const auto knots = detail::segment_knots(p, domain);
  double z = 0.0;
  for (std::size_t s = 0; s + 1 < knots.size(); ++s) {
    z += quad::simpson(integrand, knots[s], knots[s + 1], 1e-12, 1e-300);
  }
  if (p.outer_pieces_linear()) {
    auto [left, right] = detail::tail_masses(p, sigma, domain, shift);
    z += left + right;
  }
  return z * std::exp(-shift / sigma);
}

/*
 * The Gibbs law exp(-f/sigma)/Z of a confining piecewise potential.
 *
 * The density is tabulated once: every inter-breakpoint segment is split
 * into cells narrow enough that sigma-scaled potential changes stay small,
 * and each cell mass is a Gauss-Legendre integral. cdf() adds one partial
 * cell integral to the cumulative table; quantile() locates the cell in the
 * table and runs a bracketed Newton iteration inside it.
 */
class GibbsDensity {
 public:
  GibbsDensity(PiecewisePotential1D potential, double sigma, std::optional<Interval> domain = std::nullopt)
      : p_(std::move(potential)), sigma_(sigma) {
    if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) throw ContractViolation("sigma must be > 0");
    if (!p_.is_confined()) throw ContractViolation("potential is not confining; exp(-f/sigma) is not integrable");
    domain_ = domain ? *domain : automatic_domain();
    detail::check_gibbs_inputs(p_, sigma_, domain_);
    shift_ = detail::approximate_minimum(p_, domain_);
    z_shifted_ = langinc::normalizer(p_, sigma_, domain_) * std::exp(shift_ / sigma_);
    auto [left, right] = detail::tail_masses(p_, sigma_, domain_, shift_);
    tail_mass_ = (left + right) / z_shifted_;
    if (!(tail_mass_ <= 1e-10)) {
      throw ContractViolation("truncation domain too narrow: tail mass " + std::to_string(tail_mass_) +
                              " exceeds 1e-10");
    }
    build_table();
  }

  const PiecewisePotential1D& potential() const { return p_; }
  double sigma() const { return sigma_; }
  Interval domain() const { return domain_; }
  double normalizer() const { return z_shifted_ * std::exp(-shift_ / sigma_); }
  double log_normalizer() const { return std::log(z_shifted_) - shift_ / sigma_; }
  /// Fraction of the total mass outside the truncation domain.
  double tail_mass() const { return tail_mass_; }

  double pdf(double x) const { return unnormalized(x) / z_shifted_; }

  double cdf(double x) const {
    if (x <= domain_.lo) return 0.0;
    if (x >= domain_.hi) return 1.0;
    const std::size_t i = cell_of(x);
    const double partial = quad::gauss_legendre5([&](double t) { return unnormalized(t); }, edges_[i], x);
    return std::clamp((cumulative_[i] + partial) / cumulative_.back(), 0.0, 1.0);
  }

  double quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile level must lie in (0,1), got " + std::to_string(u));
    const double target = u * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - cumulative_.begin() - 1, 0));
    i = std::min(i, edges_.size() - 2);
    double lo = edges_[i];
    double hi = edges_[i + 1];
    const double base = cumulative_[i];
    auto mass_to = [&](double x) {
      return base + quad::gauss_legendre5([&](double t) { return unnormalized(t); }, edges_[i], x);
    };
    // Safeguarded Newton inside the cell: d(mass_to)/dx is the unnormalized density.
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 100 && hi - lo > 1e-12; ++it) {
      const double r = mass_to(x) - target;
      if (r == 0.0) return x;
      if (r < 0.0) {
        lo = x;
      } else {
        hi = x;
      }
      const double w = unnormalized(x);
      double next = w > 0.0 ? x - r / w : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x))) return next;
      x = next;
    }
    return x;
  }

  /// Cell edges of the internal table (strictly increasing, includes every breakpoint).
  const std::vector<double>& table_edges() const { return edges_; }

 private:
  double unnormalized(double x) const { return std::exp(-(p_(x) - shift_) / sigma_); }

  std::size_t cell_of(double x) const {
    auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
    auto i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - edges_.begin() - 1, 0));
    return std::min(i, edges_.size() - 2);
  }

  Interval automatic_domain() const {
    const auto& bps = p_.breakpoints();
    const double left0 = bps.empty() ? 0.0 : bps.front();
    const double right0 = bps.empty() ? 0.0 : bps.back();
    for (double width = 1.0; width < 1e7; width *= 1.5) {
      Interval d{left0 - width, right0 + width};
      const double shift = detail::approximate_minimum(p_, d);
      auto [left, right] = detail::tail_masses(p_, sigma_, d, shift);
      // The mass of the shifted density is at least of order sigma near its minimum.
      if (left + right <= 1e-14 * std::min(sigma_, 1.0) * std::min(width, 1.0)) return d;
    }
    throw ContractViolation("could not find a truncation domain with negligible tail mass");
  }

  void build_table() {
    const auto knots = detail::segment_knots(p_, domain_);
    edges_.clear();
    edges_.push_back(knots.front());
    for (std::size_t s = 0; s + 1 < knots.size(); ++s) {
      const double a = knots[s];
      const double b = knots[s + 1];
      double slope = 0.0;
      for (int k = 0; k <= 16; ++k) {
        const double x = a + (b - a) * k / 16.0;
        slope = std::max(slope, std::abs(poly_derivative(p_.pieces()[p_.piece_index(0.5 * (a + b))], x)));
      }
      const double resolution = (b - a) * (1.0 + slope / sigma_) * 20.0;
      const auto cells = static_cast<std::size_t>(std::clamp(std::ceil(resolution), 64.0, 400000.0));
      for (std::size_t c = 1; c < cells; ++c) edges_.push_back(a + (b - a) * static_cast<double>(c) / cells);
      edges_.push_back(b);
    }
    cumulative_.assign(edges_.size(), 0.0);
    for (std::size_t i = 0; i + 1 < edges_.size(); ++i) {
      cumulative_[i + 1] = cumulative_[i] + quad::gauss_legendre5([&](double t) { return unnormalized(t); },
                                                                  edges_[i], edges_[i + 1]);
    }
  }

  PiecewisePotential1D p_;
  double sigma_;
  Interval domain_;
  double shift_ = 0.0;
  double z_shifted_ = 1.0;
  double tail_mass_ = 0.0;
  std::vector<double> edges_;
  std::vector<double> cumulative_;
};

/// n inverse-CDF draws driven by the uniform stream of Rng(seed).
inline std::vector<double> iid_sample(const GibbsDensity& g, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ContractViolation("iid_sample needs n >= 1");
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = g.quantile(rng.uniform());
  return out;
}

/// Inverse-CDF transform of caller-supplied uniforms.
inline std::vector<double> inverse_cdf_transform(const GibbsDensity& g, const std::vector<double>& uniforms) {
  std::vector<double> out(uniforms.size());
  for (std::size_t i = 0; i < uniforms.size(); ++i) out[i] = g.quantile(uniforms[i]);
  return out;
}

}  // namespace langinc

#endif  // LANGINC_GIBBS_HPP_

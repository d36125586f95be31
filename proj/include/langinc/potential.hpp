#ifndef LANGINC_POTENTIAL_HPP_
#define LANGINC_POTENTIAL_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "langinc/errors.hpp"
#include "langinc/rng.hpp"

namespace langinc {

/// Closed interval [lo, hi]; used for truncation domains.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
};

/// Cubic polynomial c0 + c1 x + c2 x^2 + c3 x^3.
using Cubic = std::array<double, 4>;

inline double poly_value(const Cubic& c, double x) { return c[0] + x * (c[1] + x * (c[2] + x * c[3])); }
inline double poly_derivative(const Cubic& c, double x) { return c[1] + x * (2.0 * c[2] + x * 3.0 * c[3]); }
inline double poly_second_derivative(const Cubic& c, double x) { return 2.0 * c[2] + 6.0 * c[3] * x; }

/// Clarke subdifferential of a scalar function of one variable: the interval [lo, hi].
struct SubdiffValue {
  double lo = 0.0;
  double hi = 0.0;

  bool is_singleton() const { return lo == hi; }
  bool contains(double v) const { return lo <= v && v <= hi; }
  double midpoint() const { return 0.5 * (lo + hi); }
};

enum class SelectionRule { MinNorm, LeftLimit, RightLimit, Midpoint, RandomConvex };

inline std::string_view to_string(SelectionRule rule) {
  switch (rule) {
    case SelectionRule::MinNorm: return "min_norm";
    case SelectionRule::LeftLimit: return "left_limit";
    case SelectionRule::RightLimit: return "right_limit";
    case SelectionRule::Midpoint: return "midpoint";
    case SelectionRule::RandomConvex: return "random_convex";
  }
  return "?";
}

inline std::optional<SelectionRule> parse_selection_rule(std::string_view name) {
  for (auto rule : {SelectionRule::MinNorm, SelectionRule::LeftLimit, SelectionRule::RightLimit,
                    SelectionRule::Midpoint, SelectionRule::RandomConvex}) {
    if (to_string(rule) == name) return rule;
  }
  return std::nullopt;
}

/*
 * Pick one element of a subdifferential interval.
 *
 * Every rule returns a value inside [lo, hi]. Only RandomConvex touches the
 * generator, and only when the interval is not a singleton, so chains that
 * never land on a breakpoint consume identical streams under every rule.
 */
inline double select(const SubdiffValue& v, SelectionRule rule, Rng& rng) {
  if (v.is_singleton()) return v.lo;
  switch (rule) {
    case SelectionRule::MinNorm:
      if (v.lo <= 0.0 && 0.0 <= v.hi) return 0.0;
      return v.lo > 0.0 ? v.lo : v.hi;
    case SelectionRule::LeftLimit: return v.lo;
    case SelectionRule::RightLimit: return v.hi;
    case SelectionRule::Midpoint: return v.midpoint();
    case SelectionRule::RandomConvex: {
      const double t = rng.uniform();
      return std::clamp(v.lo + t * (v.hi - v.lo), v.lo, v.hi);
    }
  }
  return v.lo;
}

/// Deterministic rules only; RandomConvex falls back to the midpoint.
inline double select(const SubdiffValue& v, SelectionRule rule) {
  if (rule == SelectionRule::RandomConvex) rule = SelectionRule::Midpoint;
  Rng unused(0);
  return select(v, rule, unused);
}

/*
 * Continuous piecewise-cubic potential on the real line.
 *
 * `breakpoints` is the exceptional set, strictly increasing. Piece i is
 * valid on the open interval between breakpoints i-1 and i (with -inf and
 * +inf at the ends); at a breakpoint the right piece is used for
 * evaluation, which is immaterial because adjacent pieces are required to
 * agree there.
 *
 * Confinement (f -> +inf as |x| -> inf) is not required at construction
 * since flat test potentials are useful for the samplers and solvers; the
 * Gibbs oracle checks it through is_confined().
 */
class PiecewisePotential1D {
 public:
  PiecewisePotential1D(std::vector<double> breakpoints, std::vector<Cubic> pieces)
      : breakpoints_(std::move(breakpoints)), pieces_(std::move(pieces)) {
    if (pieces_.size() != breakpoints_.size() + 1) {
      throw ContractViolation("piecewise potential needs breakpoints.size() + 1 pieces, got " +
                              std::to_string(pieces_.size()) + " pieces for " +
                              std::to_string(breakpoints_.size()) + " breakpoints");
    }
    for (const double b : breakpoints_) {
      if (!std::isfinite(b)) throw ContractViolation("breakpoints must be finite");
    }
    for (const auto& c : pieces_) {
      for (const double v : c) {
        if (!std::isfinite(v)) throw ContractViolation("piece coefficients must be finite");
      }
    }
    for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
      if (!(breakpoints_[i - 1] < breakpoints_[i])) {
        throw ContractViolation("breakpoints must be strictly increasing");
      }
    }
    for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
      const double x = breakpoints_[i];
      const double left = poly_value(pieces_[i], x);
      const double right = poly_value(pieces_[i + 1], x);
      const double scale = std::max({1.0, std::abs(left), std::abs(right)});
      if (std::abs(left - right) > 1e-12 * scale) {
        throw ContractViolation("potential is discontinuous at breakpoint " + std::to_string(x));
      }
    }
  }

  /// A single smooth piece (no exceptional set).
  explicit PiecewisePotential1D(Cubic piece) : PiecewisePotential1D({}, {piece}) {}

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<Cubic>& pieces() const { return pieces_; }
  std::size_t piece_count() const { return pieces_.size(); }

  /// Index of the piece used at x (right piece at a breakpoint).
  std::size_t piece_index(double x) const {
    return static_cast<std::size_t>(std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x) -
                                    breakpoints_.begin());
  }

  /// Index of the breakpoint equal to x, if any.
  std::optional<std::size_t> breakpoint_at(double x) const {
    auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), x);
    if (it != breakpoints_.end() && *it == x) return static_cast<std::size_t>(it - breakpoints_.begin());
    return std::nullopt;
  }

  double operator()(double x) const { return poly_value(pieces_[piece_index(x)], x); }

  /// Derivative of the piece used at x; a selection of the subdifferential, not the hull.
  double piece_derivative(double x) const { return poly_derivative(pieces_[piece_index(x)], x); }
  double piece_second_derivative(double x) const {
    return poly_second_derivative(pieces_[piece_index(x)], x);
  }

  /// One-sided derivatives at breakpoint i: {from the left piece, from the right piece}.
  std::pair<double, double> one_sided_derivatives(std::size_t i) const {
    const double x = breakpoints_[i];
    return {poly_derivative(pieces_[i], x), poly_derivative(pieces_[i + 1], x)};
  }

  SubdiffValue clarke_subdiff(double x) const {
    if (auto i = breakpoint_at(x)) {
      auto [left, right] = one_sided_derivatives(*i);
      return {std::min(left, right), std::max(left, right)};
    }
    const double d = piece_derivative(x);
    return {d, d};
  }

  /// f(x) -> +inf as x -> -inf and as x -> +inf.
  bool is_confined() const {
    return tends_to_plus_infinity(pieces_.front(), -1.0) && tends_to_plus_infinity(pieces_.back(), +1.0);
  }

  /*
   * Lower bound slope c > 0 such that f(x) >= c|x| - C far from the
   * breakpoints. For linear outer pieces this is the smaller of the two
   * outer slopes in magnitude; super-linear outer pieces report slope 1.
   */
  double confinement_slope() const {
    auto outer = [](const Cubic& c, double dir) {
      if (c[3] != 0.0 || c[2] != 0.0) return 1.0;
      return dir * c[1];
    };
    return std::min(outer(pieces_.front(), -1.0), outer(pieces_.back(), +1.0));
  }

  bool outer_pieces_linear() const {
    auto linear = [](const Cubic& c) { return c[2] == 0.0 && c[3] == 0.0; };
    return linear(pieces_.front()) && linear(pieces_.back());
  }

  /// Same potential shifted by a constant.
  PiecewisePotential1D plus_constant(double c) const {
    auto pieces = pieces_;
    for (auto& p : pieces) p[0] += c;
    return PiecewisePotential1D(breakpoints_, std::move(pieces));
  }

 private:
  // Sign of the leading nonzero coefficient in direction dir (+1 or -1).
  static bool tends_to_plus_infinity(const Cubic& c, double dir) {
    for (int k = 3; k >= 1; --k) {
      if (c[k] != 0.0) return c[k] * std::pow(dir, k) > 0.0;
    }
    return false;
  }

  std::vector<double> breakpoints_;
  std::vector<Cubic> pieces_;
};

/// The double-well with kinks at -1, 0, 1: f = |x| - 1 outside [-1,1], 1 - |x| inside.
inline PiecewisePotential1D example_potential() {
  return PiecewisePotential1D({-1.0, 0.0, 1.0}, {Cubic{-1.0, -1.0, 0.0, 0.0}, Cubic{1.0, 1.0, 0.0, 0.0},
                                                 Cubic{1.0, -1.0, 0.0, 0.0}, Cubic{-1.0, 1.0, 0.0, 0.0}});
}

/// f(x) = |x|.
inline PiecewisePotential1D abs_potential() {
  return PiecewisePotential1D({0.0}, {Cubic{0.0, -1.0, 0.0, 0.0}, Cubic{0.0, 1.0, 0.0, 0.0}});
}

/// f(x) = a x^2.
inline PiecewisePotential1D quadratic_potential(double a = 0.5) {
  return PiecewisePotential1D(Cubic{0.0, 0.0, a, 0.0});
}

inline PiecewisePotential1D constant_potential(double c = 0.0) {
  return PiecewisePotential1D(Cubic{c, 0.0, 0.0, 0.0});
}

}  // namespace langinc

#endif  // LANGINC_POTENTIAL_HPP_

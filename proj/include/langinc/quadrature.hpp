#ifndef LANGINC_QUADRATURE_HPP_
#define LANGINC_QUADRATURE_HPP_

#include <array>
#include <cmath>
#include <cstddef>

namespace langinc::quad {

/// Five-point Gauss-Legendre rule on [a, b].
template <class F>
double gauss_legendre5(F&& f, double a, double b) {
  static constexpr std::array<double, 5> nodes = {0.0, -0.5384693101056831, 0.5384693101056831,
                                                  -0.9061798459386640, 0.9061798459386640};
  static constexpr std::array<double, 5> weights = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                                    0.2369268850561891, 0.2369268850561891};
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t i = 0; i < 5; ++i) sum += weights[i] * f(mid + half * nodes[i]);
  return half * sum;
}

/*
 * Composite Simpson on [a, b], doubling the panel count until the
 * Richardson error estimate |S_2n - S_n| / 15 drops below rel_tol * |S_2n|
 * (or abs_tol). Function values are reused across refinements.
 */
template <class F>
double simpson(F&& f, double a, double b, double rel_tol = 1e-10, double abs_tol = 0.0,
               std::size_t max_panels = std::size_t{1} << 24) {
  if (a == b) return 0.0;
  std::size_t n = 32;
  double h = (b - a) / static_cast<double>(n);
  double ends = f(a) + f(b);
  double odd = 0.0;
  double even = 0.0;
  for (std::size_t i = 1; i < n; ++i) (i % 2 ? odd : even) += f(a + static_cast<double>(i) * h);
  double prev = h / 3.0 * (ends + 4.0 * odd + 2.0 * even);
  while (n < max_panels) {
    even += odd;
    odd = 0.0;
    n *= 2;
    h = (b - a) / static_cast<double>(n);
    for (std::size_t i = 1; i < n; i += 2) odd += f(a + static_cast<double>(i) * h);
    const double cur = h / 3.0 * (ends + 4.0 * odd + 2.0 * even);
    if (std::abs(cur - prev) / 15.0 <= std::max(rel_tol * std::abs(cur), abs_tol)) return cur;
    prev = cur;
  }
  return prev;
}

}  // namespace langinc::quad

#endif  // LANGINC_QUADRATURE_HPP_

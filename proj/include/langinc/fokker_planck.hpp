#ifndef LANGINC_FOKKER_PLANCK_HPP_
#define LANGINC_FOKKER_PLANCK_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "langinc/errors.hpp"
#include "langinc/potential.hpp"
#include "langinc/quadrature.hpp"

namespace langinc {

/*
 * Finite-volume grid on [a, b]. Cells are uniform inside each
 * inter-breakpoint region and every breakpoint of the potential is a face
 * (stored bitwise equal to the breakpoint).
 */
class Grid1D {
 public:
  Grid1D() = default;
  Grid1D(std::vector<double> faces, std::vector<std::size_t> breakpoint_faces = {})
      : faces_(std::move(faces)), breakpoint_faces_(std::move(breakpoint_faces)) {
    if (faces_.size() < 2) throw ContractViolation("grid needs at least one cell");
    for (std::size_t i = 1; i < faces_.size(); ++i) {
      if (!(faces_[i - 1] < faces_[i])) throw ContractViolation("grid faces must be strictly increasing");
    }
  }

  std::size_t size() const { return faces_.size() - 1; }
  const std::vector<double>& faces() const { return faces_; }
  double face(std::size_t k) const { return faces_[k]; }
  double center(std::size_t i) const { return 0.5 * (faces_[i] + faces_[i + 1]); }
  double width(std::size_t i) const { return faces_[i + 1] - faces_[i]; }
  Interval domain() const { return {faces_.front(), faces_.back()}; }
  /// Face indices that coincide with breakpoints, in breakpoint order.
  const std::vector<std::size_t>& breakpoint_faces() const { return breakpoint_faces_; }

  std::vector<double> centers() const {
    std::vector<double> c(size());
    for (std::size_t i = 0; i < size(); ++i) c[i] = center(i);
    return c;
  }

  bool operator==(const Grid1D& other) const { return faces_ == other.faces_; }

 private:
  std::vector<double> faces_;
  std::vector<std::size_t> breakpoint_faces_;
};

/// Uniform grid without interior breakpoints.
inline Grid1D uniform_grid(Interval domain, std::size_t n_cells) {
  if (n_cells < 1) throw ContractViolation("grid needs at least one cell");
  std::vector<double> faces(n_cells + 1);
  for (std::size_t k = 0; k <= n_cells; ++k) {
    faces[k] = domain.lo + domain.length() * static_cast<double>(k) / static_cast<double>(n_cells);
  }
  faces.back() = domain.hi;
  return Grid1D(std::move(faces));
}

/*
 * Split [a, b] at the breakpoints and give each region a share of the N
 * cells proportional to its length (at least 16 per region when there is
 * more than one, remainders to the largest fractional parts).
 */
inline Grid1D build_grid(const PiecewisePotential1D& p, Interval domain, std::size_t n_cells) {
  const auto& bps = p.breakpoints();
  if (!(domain.lo < domain.hi)) throw ContractViolation("empty grid domain");
  if (!bps.empty() && !(domain.lo < bps.front() - 1.0 && bps.back() + 1.0 < domain.hi)) {
    throw ContractViolation("grid domain must extend more than 1 beyond every breakpoint");
  }
  std::vector<double> knots{domain.lo};
  knots.insert(knots.end(), bps.begin(), bps.end());
  knots.push_back(domain.hi);
  const std::size_t regions = knots.size() - 1;
  if (regions == 1) {
    if (n_cells < 1) throw ContractViolation("grid needs at least one cell");
    return Grid1D(uniform_grid(domain, n_cells).faces());
  }
  if (n_cells < 16 * regions) {
    throw ContractViolation("need at least 16 cells per region (" + std::to_string(16 * regions) + " total)");
  }

  const double total = domain.length();
  std::vector<std::size_t> cells(regions);
  std::vector<double> remainder(regions);
  std::size_t assigned = 0;
  for (std::size_t r = 0; r < regions; ++r) {
    const double share = static_cast<double>(n_cells) * (knots[r + 1] - knots[r]) / total;
    cells[r] = std::max<std::size_t>(16, static_cast<std::size_t>(std::floor(share)));
    remainder[r] = share - std::floor(share);
    assigned += cells[r];
  }
  std::vector<std::size_t> order(regions);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return remainder[i] > remainder[j]; });
  for (std::size_t k = 0; assigned < n_cells; k = (k + 1) % regions) {
    ++cells[order[k]];
    ++assigned;
  }
  while (assigned > n_cells) {
    auto it = std::max_element(cells.begin(), cells.end());
    if (*it <= 16) throw ContractViolation("cannot fit the regions into the requested cell count");
    --*it;
    --assigned;
  }

  std::vector<double> faces{domain.lo};
  std::vector<std::size_t> bp_faces;
  for (std::size_t r = 0; r < regions; ++r) {
    const double a = knots[r];
    const double b = knots[r + 1];
    for (std::size_t c = 1; c < cells[r]; ++c) {
      faces.push_back(a + (b - a) * static_cast<double>(c) / static_cast<double>(cells[r]));
    }
    faces.push_back(b);
    if (r + 1 < regions) bp_faces.push_back(faces.size() - 1);
  }
  return Grid1D(std::move(faces), std::move(bp_faces));
}


/// Cell-averaged density on a grid.
struct DensityField {
  Grid1D grid;
  std::vector<double> values;
  double time = 0.0;

  double mass() const {
    double m = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) m += values[i] * grid.width(i);
    return m;
  }
};

/// Cell averages of `density` (five-point Gauss-Legendre per cell), optionally rescaled to unit mass.
template <class F>
DensityField project_density(const Grid1D& grid, F&& density, bool normalize = true) {
  DensityField rho{grid, std::vector<double>(grid.size()), 0.0};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    rho.values[i] = quad::gauss_legendre5(density, grid.face(i), grid.face(i + 1)) / grid.width(i);
  }
  if (normalize) {
    const double m = rho.mass();
    if (!(m > 0.0)) throw ContractViolation("density has no mass on the grid");
    for (auto& v : rho.values) v /= m;
  }
  return rho;
}

/// Weighted L1 norm sum |a_i - b_i| dx_i.
inline double l1_distance(const Grid1D& grid, const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) s += std::abs(a[i] - b[i]) * grid.width(i);
  return s;
}

namespace detail {

// B(w) = w / (e^w - 1), B(0) = 1.
inline double bernoulli(double w) {
  if (std::abs(w) < 1e-6) return 1.0 - 0.5 * w + w * w / 12.0;
  return w / std::expm1(w);
}

}  // namespace detail

/*
 * Discretization of d rho/dt = d/dx ( f' rho + sigma d rho/dx ).
 *
 * The current at interior face k (between cells k-1 and k, centers h apart)
 * is the exponentially fitted upwind flux
 *
 *   J_k = (sigma/h) [ B(-w_k) rho_k - B(w_k) rho_{k-1} ],
 *   w_k = (f(x_k) - f(x_{k-1})) / sigma,
 *
 * which tends to upwinding on the drift sign for |w| large and to central
 * differencing for w -> 0. The potential difference across a breakpoint face
 * accumulates both one-sided drifts, so the flux there is built from the
 * left piece on one half cell and the right piece on the other. The discrete
 * Gibbs state rho_i ~ exp(-f(x_i)/sigma) has J == 0 on every face. Boundary
 * faces carry no flux.
 */
class FokkerPlanckOperator {
 public:
  FokkerPlanckOperator(const PiecewisePotential1D& p, double sigma, const Grid1D& grid)
      : grid_(grid), sigma_(sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ContractViolation("sigma must be > 0");
    const std::size_t n = grid.size();
    to_right_.assign(n + 1, 0.0);
    to_left_.assign(n + 1, 0.0);
    for (std::size_t k = 1; k < n; ++k) {
      const double xl = grid.center(k - 1);
      const double xr = grid.center(k);
      const double h = xr - xl;
      const double w = (p(xr) - p(xl)) / sigma;
      to_right_[k] = sigma / h * detail::bernoulli(-w);
      to_left_[k] = sigma / h * detail::bernoulli(w);
    }
  }

  const Grid1D& grid() const { return grid_; }

  /// Face currents J_0..J_N (J_0 = J_N = 0).
  std::vector<double> current(const std::vector<double>& rho) const {
    const std::size_t n = grid_.size();
    std::vector<double> j(n + 1, 0.0);
    for (std::size_t k = 1; k < n; ++k) j[k] = to_right_[k] * rho[k] - to_left_[k] * rho[k - 1];
    return j;
  }

  /*
   * Backward Euler, written per cell as w_i rho_i' - dt (J'_{i+1} - J'_i) = w_i rho_i
   * and solved by the Thomas algorithm plus one refinement sweep.
   */
  std::vector<double> implicit_step(const std::vector<double>& rho, double dt) const {
    const std::size_t n = grid_.size();
    std::vector<double> lower(n, 0.0), diag(n, 0.0), upper(n, 0.0), rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = grid_.width(i);
      diag[i] = w + dt * to_left_[i + 1] + dt * to_right_[i];
      if (i + 1 < n) upper[i] = -(dt * to_right_[i + 1]);
      if (i > 0) lower[i] = -(dt * to_left_[i]);
      rhs[i] = w * rho[i];
    }
    std::vector<double> c(n), denom(n);
    for (std::size_t i = 0; i < n; ++i) {
      denom[i] = diag[i] - (i > 0 ? lower[i] * c[i - 1] : 0.0);
      if (!(denom[i] > 0.0)) throw SolverError("singular Fokker-Planck system");
      c[i] = upper[i] / denom[i];
    }
    auto solve = [&](const std::vector<double>& b) {
      std::vector<double> y(n);
      y[0] = b[0] / denom[0];
      for (std::size_t i = 1; i < n; ++i) y[i] = (b[i] - lower[i] * y[i - 1]) / denom[i];
      for (std::size_t i = n - 1; i-- > 0;) y[i] -= c[i] * y[i + 1];
      return y;
    };
    auto out = solve(rhs);
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
      double ax = diag[i] * out[i];
      if (i > 0) ax += lower[i] * out[i - 1];
      if (i + 1 < n) ax += upper[i] * out[i + 1];
      r[i] = rhs[i] - ax;
    }
    const auto fix = solve(r);
    double before = 0.0, after = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = std::max(out[i] + fix[i], 0.0);
      before += rhs[i];
      after += grid_.width(i) * out[i];
    }
    // The scheme conserves mass exactly; this only removes the rounding drift of the solve.
    if (after > 0.0) {
      for (auto& v : out) v *= before / after;
    }
    return out;
  }

 private:
  Grid1D grid_;
  double sigma_;
  std::vector<double> to_right_;  // coefficient of rho_k in J_k
  std::vector<double> to_left_;   // coefficient of rho_{k-1} in J_k
};

inline std::vector<double> current(const PiecewisePotential1D& p, double sigma, const DensityField& rho) {
  return FokkerPlanckOperator(p, sigma, rho.grid).current(rho.values);
}

inline DensityField step(const PiecewisePotential1D& p, double sigma, const DensityField& rho, double dt) {
  if (!(dt > 0.0)) throw ContractViolation("dt must be > 0");
  FokkerPlanckOperator op(p, sigma, rho.grid);
  return {rho.grid, op.implicit_step(rho.values, dt), rho.time + dt};
}

/// Fixed-step evolution to t_end (the last step is shortened to land on it).
inline DensityField evolve(const PiecewisePotential1D& p, double sigma, const DensityField& rho, double t_end,
                           double dt) {
  if (!(dt > 0.0)) throw ContractViolation("dt must be > 0");
  if (t_end < rho.time) throw ContractViolation("t_end precedes the field's time");
  FokkerPlanckOperator op(p, sigma, rho.grid);
  DensityField out = rho;
  while (out.time < t_end) {
    double h = std::min(dt, t_end - out.time);
    if (t_end - (out.time + h) < 1e-12 * dt) h = t_end - out.time;
    out.values = op.implicit_step(out.values, h);
    out.time = (h == t_end - out.time) ? t_end : out.time + h;
  }
  return out;
}

struct SteadyStateOptions {
  double initial_dt = 1e-2;
  double growth = 1.5;
  double max_dt = 1e4;
  std::size_t max_iterations = 1'000'000;
};

/*
 * Implicit steps from the uniform density with geometrically growing dt
 * until sum |rho_new - rho_old| dx / dt <= tol. The face currents of the
 * result are partial sums of that increment, so max |J| <= tol as well.
 */
inline DensityField steady_state(const PiecewisePotential1D& p, double sigma, const Grid1D& grid, double tol,
                                 SteadyStateOptions opts = {}) {
  if (!(tol > 0.0)) throw ContractViolation("tol must be > 0");
  FokkerPlanckOperator op(p, sigma, grid);
  DensityField rho{grid, std::vector<double>(grid.size(), 1.0 / grid.domain().length()), 0.0};
  double dt = opts.initial_dt;
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    auto next = op.implicit_step(rho.values, dt);
    const double change = l1_distance(grid, next, rho.values) / dt;
    rho.values = std::move(next);
    rho.time += dt;
    if (change <= tol) return rho;
    dt = std::min(dt * opts.growth, opts.max_dt);
  }
  throw NoConvergenceError("Fokker-Planck steady state did not converge within the iteration cap");
}

struct InterfaceResidual {
  double breakpoint = 0.0;
  double density_jump = 0.0;
  double current_jump = 0.0;
};

/*
 * Continuity checks at every breakpoint face. Density: one-sided linear
 * extrapolations from the two nearest cells on each side, taken in the
 * variable u = rho exp((f - f(theta))/sigma) that the fitted flux keeps
 * piecewise constant at equilibrium; at the face u equals rho since f is
 * continuous there. Current: linear extrapolation of the two nearest interior
 * face currents on each side, which only involve that side's piece.
 */
inline std::vector<InterfaceResidual> interface_residual(const PiecewisePotential1D& p, double sigma,
                                                         const DensityField& rho) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ContractViolation("sigma must be > 0");
  const Grid1D& g = rho.grid;
  const auto& bp_faces = g.breakpoint_faces();
  if (bp_faces.size() != p.breakpoints().size()) {
    throw ContractViolation("grid is not snapped to the potential's breakpoints");
  }
  const auto j = current(p, sigma, rho);
  const auto& v = rho.values;
  std::vector<InterfaceResidual> out;
  for (std::size_t b = 0; b < bp_faces.size(); ++b) {
    const std::size_t k = bp_faces[b];
    if (k < 3 || k + 3 > g.size()) throw ContractViolation("breakpoint face too close to the boundary");
    const double theta = g.face(k);
    const double f_theta = p(theta);
    auto extrapolate = [theta](double x1, double v1, double x2, double v2) {
      return v1 + (v1 - v2) * (theta - x1) / (x1 - x2);
    };
    auto u = [&](std::size_t i) { return v[i] * std::exp((p(g.center(i)) - f_theta) / sigma); };
    const double rho_minus = extrapolate(g.center(k - 1), u(k - 1), g.center(k - 2), u(k - 2));
    const double rho_plus = extrapolate(g.center(k), u(k), g.center(k + 1), u(k + 1));
    const double j_minus = extrapolate(g.face(k - 1), j[k - 1], g.face(k - 2), j[k - 2]);
    const double j_plus = extrapolate(g.face(k + 1), j[k + 1], g.face(k + 2), j[k + 2]);
    out.push_back({theta, std::abs(rho_minus - rho_plus), std::abs(j_minus - j_plus)});
  }
  return out;
}

}  // namespace langinc

#endif  // LANGINC_FOKKER_PLANCK_HPP_

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "refel/boost.hpp"
#include "refel/error.hpp"
#include "refel/gaussian.hpp"
#include "refel/matrix.hpp"
#include "refel/nongaussian.hpp"
#include "refel/witness.hpp"

namespace refel {

using Evaluator = std::function<cplx(std::span<const double>)>;
using PointSet = std::vector<std::vector<double>>;

inline constexpr double default_fd_step = 1e-3;

struct ResidualReport {
  double max_abs_residual = 0.0;
  double max_rel_residual = 0.0;  // relative to the largest single term at the point
  std::size_t points_checked = 0;
  double step = 0.0;
};

namespace detail {

inline void check_step(double h) {
  if (!(h >= 1e-5 && h <= 1e-2)) fail(errc::invalid_argument, "finite-difference step must lie in [1e-5, 1e-2]");
}

inline cplx checked_eval(const Evaluator& psi, std::span<const double> p) {
  const cplx v = psi(p);
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) fail(errc::evaluation_failure, "psi is not finite");
  return v;
}

// Fourth-order central second derivative along coordinate k.
inline cplx second_derivative(const Evaluator& psi, std::vector<double>& p, std::size_t k, double h, cplx f0) {
  const double x0 = p[k];
  auto at = [&](double dx) {
    p[k] = x0 + dx;
    return checked_eval(psi, p);
  };
  const cplx fp1 = at(h), fm1 = at(-h), fp2 = at(2 * h), fm2 = at(-2 * h);
  p[k] = x0;
  return (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h);
}

// Residual of sum_k s_k d^2 psi / dq_k^2 + w(q) psi over the points, where
// s_k = +1 for time and -1 for space coordinates.
inline ResidualReport residual_generic(const Evaluator& psi, const PointSet& points, std::size_t dim,
                                       std::span<const double> signs,
                                       const std::function<cplx(std::span<const double>)>& weight, double h) {
  check_step(h);
  if (points.empty()) fail(errc::invalid_argument, "no test points");
  ResidualReport report;
  report.step = h;
  for (const auto& point : points) {
    if (point.size() != dim) fail(errc::dimension_mismatch, "test point has the wrong dimension");
    std::vector<double> p = point;
    const cplx f0 = checked_eval(psi, p);
    if (f0 == 0.0) fail(errc::evaluation_failure, "psi vanishes at a test point");
    cplx total = 0.0;
    double largest = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      const cplx term = signs[k] * second_derivative(psi, p, k, h, f0);
      total += term;
      largest = std::max(largest, std::abs(term));
    }
    const cplx wterm = weight(p) * f0;
    total += wterm;
    largest = std::max(largest, std::abs(wterm));
    const double abs_res = std::abs(total);
    report.max_abs_residual = std::max(report.max_abs_residual, abs_res);
    report.max_rel_residual = std::max(report.max_rel_residual, largest > 0.0 ? abs_res / largest : abs_res);
    ++report.points_checked;
  }
  return report;
}

}  // namespace detail

// sum_k (d_tk^2 - d_xk^2 + m_k^2) psi + V psi, V = -t^T Omega t + x^T Omega x,
// points in (t_1..t_N, x_1..x_N) order.
inline ResidualReport residual_unconstrained(const Evaluator& psi, const CouplingMatrix& omega,
                                             std::span<const double> masses, const PointSet& points,
                                             double h = default_fd_step) {
  const auto n = static_cast<std::size_t>(omega.dim());
  if (!masses.empty() && masses.size() != n) fail(errc::dimension_mismatch, "masses length");
  double m2 = 0.0;
  for (double m : masses) m2 += m * m;
  std::vector<double> signs(2 * n, 1.0);
  std::fill(signs.begin() + static_cast<long>(n), signs.end(), -1.0);
  auto weight = [&](std::span<const double> p) -> cplx {
    return m2 + potential_value(omega, p.subspan(0, n), p.subspan(n, n));
  };
  return detail::residual_generic(psi, points, 2 * n, signs, weight, h);
}

// (d_t^2 - d_x^2 + m^2) psi_j + (c_eff - Omega_jj t^2 + Omega_jj x^2) psi_j at points (t, x).
inline ResidualReport residual_factorizable(const Evaluator& psi_j, double effective_constant, double omega_jj,
                                            const PointSet& points, double h = default_fd_step,
                                            double mass = 0.0) {
  const double signs[] = {1.0, -1.0};
  auto weight = [&](std::span<const double> p) -> cplx {
    return mass * mass + effective_constant + omega_jj * (p[1] * p[1] - p[0] * p[0]);
  };
  return detail::residual_generic(psi_j, points, 2, signs, weight, h);
}

// Residual of the product solution under its own block-diagonal operator
//   (lap_t - lap_x) + sum_j [-t_j^T W_j t_j + x_j^T W_j x_j - 2 tau_j^T t_j + 2 xi_j^T x_j + m^2 + R_j],
// R_j the cross-subsystem constant. Points in (t_1..t_N, x_1..x_N) order.
inline ResidualReport residual_multipartite(const NonGaussianSolution& sol, const PointSet& points,
                                            double h = default_fd_step) {
  const std::size_t n = sol.n_particles;
  Evaluator psi = [&](std::span<const double> p) { return evaluate_nongaussian(sol, p.subspan(0, n), p.subspan(n, n)); };
  std::vector<double> signs(2 * n, 1.0);
  std::fill(signs.begin() + static_cast<long>(n), signs.end(), -1.0);
  cplx constant = 0.0;
  for (std::size_t j = 0; j < sol.subsystems.size(); ++j) constant += sol.mass_squared + sol.cross_subsystem_constant(j);
  auto weight = [&](std::span<const double> p) -> cplx {
    cplx w = constant;
    for (const SubsystemSolution& sub : sol.subsystems) {
      const auto nj = static_cast<Index>(sub.particles.size());
      VectorXd t(nj), x(nj);
      for (Index r = 0; r < nj; ++r) {
        t(r) = p[sub.particles[static_cast<std::size_t>(r)]];
        x(r) = p[n + sub.particles[static_cast<std::size_t>(r)]];
      }
      w += -t.dot(sub.omega_block * t) + x.dot(sub.omega_block * x) - 2.0 * sub.tau.dot(t) + 2.0 * sub.xi.dot(x);
    }
    return w;
  };
  return detail::residual_generic(psi, points, 2 * n, signs, weight, h);
}

struct GridSpec {
  double lo = -1.0;
  double hi = 1.0;
  std::size_t count = 5;

  std::vector<double> nodes() const {
    if (count < 2) fail(errc::invalid_argument, "grid needs at least two nodes");
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) v[i] = lo + (hi - lo) * double(i) / double(count - 1);
    return v;
  }
};

namespace detail {

// All points of nodes^k, first coordinate varying slowest.
inline PointSet tensor_grid(const std::vector<double>& nodes, std::size_t k) {
  PointSet out;
  std::vector<std::size_t> idx(k, 0);
  while (true) {
    std::vector<double> p(k);
    for (std::size_t i = 0; i < k; ++i) p[i] = nodes[idx[i]];
    out.push_back(std::move(p));
    std::size_t i = k;
    while (i > 0 && ++idx[i - 1] == nodes.size()) idx[--i] = 0;
    if (i == 0) break;
  }
  return out;
}

inline constexpr int ray_steps = 256;

// log psi(p) continued from the principal log psi(0) along the straight ray.
inline cplx ray_log(const Evaluator& psi, std::span<const double> p) {
  std::vector<double> q(p.size(), 0.0);
  auto eval = [&](double s) {
    for (std::size_t i = 0; i < p.size(); ++i) q[i] = s * p[i];
    const cplx v = psi(q);
    if (v == 0.0 || !std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      fail(errc::zero_amplitude, "psi vanishes or is not finite on the grid");
    }
    return v;
  };
  const double phase0 = std::arg(eval(0.0));
  double phase = phase0;
  double prev = phase0;
  cplx last;
  for (int s = 1; s <= ray_steps; ++s) {
    last = eval(double(s) / ray_steps);
    const double a = std::arg(last);
    double d = a - prev;
    d -= 2.0 * std::numbers::pi * std::round(d / (2.0 * std::numbers::pi));
    phase += d;
    prev = a;
  }
  return {std::log(std::abs(last)), phase};
}

}  // namespace detail

// max over grid pairs (u, v) of |log psi(u+v) + log psi(0) - log psi(u+0) - log psi(0+v)|,
// u on the part-1 coordinates and v on the part-2 coordinates, both sampled on `grid` per coordinate.
inline double factorizability_defect(const Evaluator& psi, const Bipartition& split, const GridSpec& grid = {}) {
  const std::vector<double> nodes = grid.nodes();
  const std::size_t d = split.dim();
  const PointSet us = detail::tensor_grid(nodes, split.part1().size());
  const PointSet vs = detail::tensor_grid(nodes, split.part2().size());
  auto place = [&](const std::vector<double>* u, const std::vector<double>* v) {
    std::vector<double> p(d, 0.0);
    if (u) for (std::size_t i = 0; i < u->size(); ++i) p[split.part1()[i]] = (*u)[i];
    if (v) for (std::size_t i = 0; i < v->size(); ++i) p[split.part2()[i]] = (*v)[i];
    return p;
  };
  const cplx l00 = detail::ray_log(psi, place(nullptr, nullptr));
  std::vector<cplx> lu, lv;
  for (const auto& u : us) lu.push_back(detail::ray_log(psi, place(&u, nullptr)));
  for (const auto& v : vs) lv.push_back(detail::ray_log(psi, place(nullptr, &v)));
  double worst = 0.0;
  for (std::size_t a = 0; a < us.size(); ++a) {
    for (std::size_t b = 0; b < vs.size(); ++b) {
      const cplx luv = detail::ray_log(psi, place(&us[a], &vs[b]));
      worst = std::max(worst, std::abs(luv + l00 - lu[a] - lv[b]));
    }
  }
  return worst;
}

// Gaussian case read off Q directly: max over the grid of |u^T Q_12 v|.
inline double factorizability_defect(const QuadraticForm& q, const Bipartition& split, const GridSpec& grid = {}) {
  if (static_cast<Index>(split.dim()) != q.dim()) fail(errc::dimension_mismatch, "bipartition size differs from form");
  const std::vector<double> nodes = grid.nodes();
  const auto n1 = static_cast<Index>(split.part1().size());
  const auto n2 = static_cast<Index>(split.part2().size());
  MatrixXcd q12(n1, n2);
  for (Index i = 0; i < n1; ++i)
    for (Index j = 0; j < n2; ++j) q12(i, j) = q.matrix()(static_cast<Index>(split.part1()[i]), static_cast<Index>(split.part2()[j]));
  double worst = 0.0;
  for (const auto& u : detail::tensor_grid(nodes, split.part1().size())) {
    const VectorXcd uu = Eigen::Map<const VectorXd>(u.data(), n1).cast<cplx>();
    for (const auto& v : detail::tensor_grid(nodes, split.part2().size())) {
      const VectorXcd vv = Eigen::Map<const VectorXd>(v.data(), n2).cast<cplx>();
      worst = std::max(worst, std::abs((uu.transpose() * q12 * vv)(0, 0)));
    }
  }
  return worst;
}

// psi = f(x_1 - t_2) f(x_2 - t_1) with f(z) = exp(-z^2), as exp(-1/2 q^T Q q),
// Q = 2 (l_1 l_1^T + l_2 l_2^T), l_1 = x_1 - t_2, l_2 = x_2 - t_1.
inline QuadraticForm counterexample_form() {
  VectorXd l1(4), l2(4);
  l1 << 0, -1, 1, 0;
  l2 << -1, 0, 0, 1;
  const MatrixXd q = 2.0 * (l1 * l1.transpose() + l2 * l2.transpose());
  return QuadraticForm(ComplexSymmetricMatrix(q.cast<cplx>()), spacetime_ordering(2));
}

// Boosted (common velocity v) and sliced at t' = 0: a form over (x_1, x_2).
inline QuadraticForm counterexample_slice(double v) {
  const BoostSet b({v, v});
  return spatial_form(condition_on_zero_times(transform_quadratic_form(counterexample_form(), b)));
}

// Coefficient of x_1 x_2 in the exponent of the boosted t' = 0 slice.
inline double counterexample_demo(double v) {
  return -counterexample_slice(v).matrix()(0, 1).real();
}

inline Evaluator gaussian_evaluator(const QuadraticForm& q) {
  return [q](std::span<const double> p) { return evaluate_wavefunction(q, p); };
}

}  // namespace refel

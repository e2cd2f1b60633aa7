#pragma once

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "refel/error.hpp"
#include "refel/matfun.hpp"
#include "refel/matrix.hpp"
#include "refel/model.hpp"

namespace refel {

// Gaussian multi-time trajectory
//   psi ~ exp(-1/2 [t;x]^T [[M, C], [C, M]] [t;x])
// in the fixed coordinate order (t_1..t_N, x_1..x_N).
struct GaussianTrajectory {
  ComplexSymmetricMatrix m;
  ComplexSymmetricMatrix c;
  bool constrained = false;  // true for the factorizable (product) solution

  Index n_particles() const noexcept { return m.dim(); }
};

// Sign inside mu_j = sqrt(Omega_jj +/- gamma_j^2). Only `plus` solves the
// wave equation; `minus` exists so verification can show that it does not.
enum class MassShellSign { plus, minus };

struct IdentityResiduals {
  double dispersion = 0.0;  // max|M^2 - C^2 - Omega| / scale
  double commutator = 0.0;  // max|MC - CM| / scale
};

inline IdentityResiduals identity_residuals(const GaussianTrajectory& traj, const CouplingMatrix& omega) {
  const MatrixXcd& m = traj.m.matrix();
  const MatrixXcd& c = traj.c.matrix();
  const MatrixXcd m2 = m * m;
  const MatrixXcd c2 = c * c;
  const MatrixXcd om = omega.matrix().cast<cplx>();
  const double s_disp = std::max({max_abs(m2), max_abs(c2), omega.norm(), 1e-300});
  const MatrixXcd mc = m * c;
  const MatrixXcd cm = c * m;
  const double s_comm = std::max({max_abs(mc), max_abs(cm), 1e-300});
  return {max_abs(m2 - c2 - om) / s_disp, max_abs(mc - cm) / s_comm};
}

inline GaussianTrajectory solve_unconstrained(const CouplingMatrix& omega, const ComplexSymmetricMatrix& c) {
  if (omega.dim() != c.dim()) fail(errc::dimension_mismatch, "solve_unconstrained: Omega and C sizes differ");
  const MatrixXcd om = omega.matrix().cast<cplx>();
  const MatrixXcd co = c.matrix() * om;
  const MatrixXcd oc = om * c.matrix();
  const double scale = std::max(max_abs(co), max_abs(oc));
  if (max_abs(co - oc) > default_rel_tol * scale) {
    fail(errc::non_commuting, "C must commute with Omega");
  }
  const auto x = ComplexSymmetricMatrix::symmetrized(om + c.matrix() * c.matrix());
  return {sqrtm_commuting(x, omega), c, false};
}

inline GaussianTrajectory solve_factorizable(const CouplingMatrix& omega, std::span<const cplx> gamma,
                                             MassShellSign sign = MassShellSign::plus) {
  const Index n = omega.dim();
  if (static_cast<Index>(gamma.size()) != n) fail(errc::dimension_mismatch, "solve_factorizable: gamma length");
  const double s = sign == MassShellSign::plus ? 1.0 : -1.0;
  VectorXcd mu(n);
  VectorXcd g(n);
  for (Index j = 0; j < n; ++j) {
    const cplx gj = gamma[static_cast<std::size_t>(j)];
    const cplx arg = omega(j, j) + s * gj * gj;
    mu(j) = principal_sqrt(arg, std::max(std::abs(omega(j, j)), std::norm(gj)));
    g(j) = gj;
  }
  return {ComplexSymmetricMatrix(mu.asDiagonal().toDenseMatrix()),
          ComplexSymmetricMatrix(g.asDiagonal().toDenseMatrix()), true};
}

struct TrajectoryPair {
  GaussianTrajectory entangled;
  GaussianTrajectory factorizable;
};

// Two-particle solutions that share the initial state psi(0, x_1, 0, x_2),
// i.e. M = M_fac = mu 1. For eta = 0 this gives
//   C     = s_- sqrt(mu^2 - 2 kappa) e_- e_-^T + s_+ mu e_+ e_+^T
//   C_fac = diag(s_1 sqrt(mu^2 - kappa), s_2 sqrt(mu^2 - kappa)).
// With eta != 0 the mode frequencies shift by eta and the same matching applies.
inline TrajectoryPair match_initial_values(const ModelParams& params,
                                           MassShellSign sign = MassShellSign::plus) {
  params.validate();
  if (params.n_particles != 2) fail(errc::unsupported_n, "initial-value matching is two-particle only");
  if (!params.massless()) fail(errc::invalid_argument, "Gaussian solutions require massless particles");

  const CouplingMatrix omega = build_coupling_hooke(2, params.kappa, params.eta);
  const cplx mu = params.mu;
  const cplx mu2 = mu * mu;
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::Vector2d e_plus(r, r);
  Eigen::Vector2d e_minus(r, -r);
  const MatrixXcd p_plus = (e_plus * e_plus.transpose()).cast<cplx>();
  const MatrixXcd p_minus = (e_minus * e_minus.transpose()).cast<cplx>();

  const double w2_plus = params.eta;
  const double w2_minus = params.eta + 2.0 * params.kappa;
  const double w2_diag = params.eta + params.kappa;
  const double scale = std::max({std::norm(mu), std::abs(w2_minus), std::abs(w2_diag)});
  const Signs& s = params.signs;

  const cplx gamma_plus = principal_sqrt(mu2 - w2_plus, scale);
  const cplx gamma_minus = principal_sqrt(mu2 - w2_minus, scale);
  const MatrixXcd c = double(s.sigma_minus) * gamma_minus * p_minus + double(s.sigma_plus) * gamma_plus * p_plus;
  GaussianTrajectory entangled = solve_unconstrained(omega, ComplexSymmetricMatrix::symmetrized(c));

  const cplx root = principal_sqrt(mu2 - w2_diag, scale);
  const std::vector<cplx> gamma{double(s.sigma1) * root, double(s.sigma2) * root};
  GaussianTrajectory factorizable = solve_factorizable(omega, gamma, sign);

  return {std::move(entangled), std::move(factorizable)};
}

inline QuadraticForm assemble_quadratic_form(const GaussianTrajectory& traj) {
  const Index n = traj.n_particles();
  MatrixXcd q(2 * n, 2 * n);
  q.topLeftCorner(n, n) = traj.m.matrix();
  q.topRightCorner(n, n) = traj.c.matrix();
  q.bottomLeftCorner(n, n) = traj.c.matrix();
  q.bottomRightCorner(n, n) = traj.m.matrix();
  return QuadraticForm(ComplexSymmetricMatrix(std::move(q)), spacetime_ordering(static_cast<std::size_t>(n)));
}

// Unnormalized exp(-1/2 q^T Q q).
inline cplx evaluate_wavefunction(const QuadraticForm& q, std::span<const double> point) {
  if (static_cast<Index>(point.size()) != q.dim()) fail(errc::dimension_mismatch, "evaluate_wavefunction");
  const Eigen::Map<const VectorXd> p(point.data(), q.dim());
  const VectorXcd pc = p.cast<cplx>();
  const cplx exponent = pc.transpose() * q.matrix() * pc;
  return std::exp(-0.5 * exponent);
}

// Re(Q) strictly positive definite.
inline bool is_normalizable(const GaussianTrajectory& traj) {
  const QuadraticForm q = assemble_quadratic_form(traj);
  return is_positive_definite(real_part(q.form()), 1e-12 * q.form().norm());
}

struct SpatialTimeSplit {
  ComplexSymmetricMatrix spatial_form;  // M
  MatrixXcd shift_map;                  // M^{-1} C
  ComplexSymmetricMatrix time_form;     // M - C M^{-1} C
};

// psi = exp(-1/2 (x + M^{-1}C t)^T M (x + M^{-1}C t)) exp(-1/2 t^T (M - C M^{-1} C) t)
inline SpatialTimeSplit spatial_time_split(const GaussianTrajectory& traj) {
  const MatrixXcd& m = traj.m.matrix();
  Eigen::JacobiSVD<MatrixXcd> svd(m);
  const auto& sv = svd.singularValues();
  if (!(sv(sv.size() - 1) > 1e-12 * traj.m.norm())) fail(errc::singular_m, "M is not invertible");
  const auto lu = m.partialPivLu();
  MatrixXcd shift = lu.solve(traj.c.matrix());
  MatrixXcd time = m - traj.c.matrix() * shift;
  return {traj.m, std::move(shift), ComplexSymmetricMatrix::symmetrized(time)};
}

// Evaluates the product form of a split at (t, x).
inline cplx evaluate_split(const SpatialTimeSplit& split, std::span<const double> t, std::span<const double> x) {
  const Index n = split.spatial_form.dim();
  if (static_cast<Index>(t.size()) != n || static_cast<Index>(x.size()) != n) {
    fail(errc::dimension_mismatch, "evaluate_split");
  }
  const VectorXcd tv = Eigen::Map<const VectorXd>(t.data(), n).cast<cplx>();
  const VectorXcd xv = Eigen::Map<const VectorXd>(x.data(), n).cast<cplx>();
  const VectorXcd y = xv + split.shift_map * tv;
  const cplx spatial = y.transpose() * split.spatial_form.matrix() * y;
  const cplx temporal = tv.transpose() * split.time_form.matrix() * tv;
  return std::exp(-0.5 * spatial) * std::exp(-0.5 * temporal);
}

}  // namespace refel

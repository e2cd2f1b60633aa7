#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "refel/error.hpp"
#include "refel/matfun.hpp"
#include "refel/matrix.hpp"
#include "refel/specfun.hpp"

namespace refel {

// One separated direction e_s of a subsystem block Omega_jj = sum_s w_s^2 e_s e_s^T.
struct EigenMode {
  double omega_squared = 0.0;
  cplx omega;              // principal root of omega_squared
  VectorXd direction;       // e_s, in the subsystem's local particle order
  unsigned n = 0;           // spatial quantum number
  cplx a;                   // temporal separation constant
  cplx nu;                  // temporal order
  double xi = 0.0;          // xi_j^T e_s
  double tau = 0.0;         // tau_j^T e_s
  bool normalizable = true; // Re(omega) > 0
};

struct SubsystemSolution {
  std::vector<std::size_t> particles;
  MatrixXd omega_block;
  VectorXd xi;   // sum_{k != j} Omega_jk <x_k>
  VectorXd tau;  // sum_{k != j} Omega_jk <t_k>
  std::vector<EigenMode> modes;
  cplx k_const;         // sum of the chosen a_s
  cplx spatial_energy;  // sum_s [w_s (2 n_s + 1) - xi_s^2 / w_s^2]
};

// Product solution psi = prod_j psi_j(t_j, x_j) for a K-partition of N particles with
//   psi_j = prod_s h_{n_s}(sqrt(w_s) x_s + xi_s / w_s^{3/2})
//               D_{nu_s}(sqrt(2) [sqrt(w_s) t_s + tau_s / w_s^{3/2}]),
// x_s = e_s^T x_j, t_s = e_s^T t_j. Each psi_j solves
//   (lap_t - lap_x) psi_j + (-t^T W t + x^T W x) psi_j - 2 tau^T t psi_j + 2 xi^T x psi_j
//     + (m^2 + R_j) psi_j = 0,   W = Omega_jj,
// where R_j = -(K_j + spatial_energy_j + m^2) is what the cross-subsystem
// expectation values must supply.
struct NonGaussianSolution {
  std::size_t n_particles = 0;
  std::vector<SubsystemSolution> subsystems;
  std::vector<double> masses;
  double mass_squared = 0.0;  // m_1^2 + ... + m_N^2

  cplx cross_subsystem_constant(std::size_t j) const {
    return -(subsystems.at(j).k_const + subsystems.at(j).spatial_energy + mass_squared);
  }
};

struct MultipartiteInput {
  std::vector<std::vector<std::size_t>> partition;  // 0-based particle indices
  std::vector<double> masses;                        // empty means massless
  std::vector<unsigned> n;                           // per mode, in partition then ascending-eigenvalue order
  std::vector<cplx> a;                               // per mode, same order
  std::optional<std::vector<double>> mean_t;         // <t_k>, default zero (centralized)
  std::optional<std::vector<double>> mean_x;         // <x_k>
};

inline void validate_partition(const std::vector<std::vector<std::size_t>>& partition, std::size_t n) {
  std::vector<std::size_t> all;
  for (const auto& block : partition) {
    if (block.empty()) fail(errc::bad_partition, "partition blocks must be nonempty");
    all.insert(all.end(), block.begin(), block.end());
  }
  if (!is_permutation_of(all, n)) fail(errc::bad_partition, "partition blocks must be disjoint and cover all particles");
}

inline NonGaussianSolution solve_multipartite(const CouplingMatrix& omega, const MultipartiteInput& in) {
  const auto n = static_cast<std::size_t>(omega.dim());
  validate_partition(in.partition, n);
  if (in.n.size() != n || in.a.size() != n) fail(errc::dimension_mismatch, "need one n and one a per mode");
  if (!in.masses.empty() && in.masses.size() != n) fail(errc::dimension_mismatch, "masses length");

  const VectorXd zero = VectorXd::Zero(static_cast<Index>(n));
  auto as_vec = [&](const std::optional<std::vector<double>>& v) {
    if (!v) return zero;
    if (v->size() != n) fail(errc::dimension_mismatch, "mean vector length");
    return VectorXd(Eigen::Map<const VectorXd>(v->data(), static_cast<Index>(n)));
  };
  const VectorXd mean_t = as_vec(in.mean_t);
  const VectorXd mean_x = as_vec(in.mean_x);

  NonGaussianSolution sol;
  sol.n_particles = n;
  sol.masses = in.masses.empty() ? std::vector<double>(n, 0.0) : in.masses;
  for (double m : sol.masses) sol.mass_squared += m * m;

  const double zero_tol = 1e-12 * std::max(1.0, omega.norm());
  std::size_t mode_index = 0;
  for (const auto& block : in.partition) {
    SubsystemSolution sub;
    sub.particles = block;
    const auto nj = static_cast<Index>(block.size());
    sub.omega_block.resize(nj, nj);
    sub.xi = VectorXd::Zero(nj);
    sub.tau = VectorXd::Zero(nj);
    std::vector<bool> inside(n, false);
    for (std::size_t p : block) inside[p] = true;
    for (Index r = 0; r < nj; ++r) {
      const auto pr = static_cast<Index>(block[static_cast<std::size_t>(r)]);
      for (Index c = 0; c < nj; ++c) sub.omega_block(r, c) = omega(pr, static_cast<Index>(block[static_cast<std::size_t>(c)]));
      for (std::size_t k = 0; k < n; ++k) {
        if (inside[k]) continue;
        sub.xi(r) += omega(pr, static_cast<Index>(k)) * mean_x(static_cast<Index>(k));
        sub.tau(r) += omega(pr, static_cast<Index>(k)) * mean_t(static_cast<Index>(k));
      }
    }

    const SymmetricEigen eig = eigh_real(RealSymmetricMatrix(sub.omega_block));
    sub.k_const = 0.0;
    sub.spatial_energy = 0.0;
    for (Index s = 0; s < nj; ++s, ++mode_index) {
      EigenMode mode;
      mode.omega_squared = eig.values(s);
      if (std::abs(mode.omega_squared) <= zero_tol) {
        fail(errc::zero_frequency_mode, "subsystem block has a zero-frequency mode");
      }
      mode.omega = principal_sqrt(mode.omega_squared);
      mode.direction = eig.vectors.col(s);
      mode.n = in.n[mode_index];
      mode.a = in.a[mode_index];
      mode.xi = sub.xi.dot(mode.direction);
      mode.tau = sub.tau.dot(mode.direction);
      const cplx w = mode.omega;
      mode.nu = mode.tau * mode.tau / (2.0 * w * w * w) - mode.a / (2.0 * w) - 0.5;
      mode.normalizable = w.real() > 0.0;
      sub.k_const += mode.a;
      sub.spatial_energy += w * (2.0 * mode.n + 1.0) - mode.xi * mode.xi / (w * w);
      sub.modes.push_back(std::move(mode));
    }
    sol.subsystems.push_back(std::move(sub));
  }
  return sol;
}

// psi_j at local coordinates (t_j, x_j), both in the block's particle order.
inline cplx evaluate_subsystem(const NonGaussianSolution& sol, std::size_t j, std::span<const double> t,
                               std::span<const double> x) {
  const SubsystemSolution& sub = sol.subsystems.at(j);
  const auto nj = static_cast<Index>(sub.particles.size());
  if (static_cast<Index>(t.size()) != nj || static_cast<Index>(x.size()) != nj) {
    fail(errc::dimension_mismatch, "evaluate_subsystem");
  }
  const Eigen::Map<const VectorXd> tv(t.data(), nj);
  const Eigen::Map<const VectorXd> xv(x.data(), nj);
  cplx value = 1.0;
  for (const EigenMode& mode : sub.modes) {
    const cplx rw = std::sqrt(mode.omega);
    const cplx w32 = rw * mode.omega;
    const double xs = mode.direction.dot(xv);
    const double ts = mode.direction.dot(tv);
    value *= hermite_fn(mode.n, rw * xs + mode.xi / w32);
    value *= parabolic_cylinder_D(mode.nu, std::sqrt(2.0) * (rw * ts + mode.tau / w32));
  }
  return value;
}

inline cplx evaluate_nongaussian(const NonGaussianSolution& sol, std::span<const double> t,
                                 std::span<const double> x) {
  if (t.size() != sol.n_particles || x.size() != sol.n_particles) {
    fail(errc::dimension_mismatch, "evaluate_nongaussian");
  }
  cplx value = 1.0;
  std::vector<double> tl, xl;
  for (std::size_t j = 0; j < sol.subsystems.size(); ++j) {
    tl.clear();
    xl.clear();
    for (std::size_t p : sol.subsystems[j].particles) {
      tl.push_back(t[p]);
      xl.push_back(x[p]);
    }
    value *= evaluate_subsystem(sol, j, tl, xl);
  }
  return value;
}

}  // namespace refel

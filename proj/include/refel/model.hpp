#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "refel/error.hpp"
#include "refel/matrix.hpp"

namespace refel {

struct Signs {
  int sigma1 = 1;
  int sigma2 = 1;
  int sigma_plus = 1;
  int sigma_minus = 1;

  bool valid() const {
    auto ok = [](int s) { return s == 1 || s == -1; };
    return ok(sigma1) && ok(sigma2) && ok(sigma_plus) && ok(sigma_minus);
  }
};

struct ModelParams {
  std::size_t n_particles = 2;
  double kappa = 1.5;
  double eta = 0.0;
  std::vector<double> masses;  // empty means all zero
  cplx mu{1.0, 0.0};
  Signs signs;

  void validate() const {
    if (n_particles < 1) fail(errc::invalid_argument, "n_particles must be >= 1");
    if (!(mu.real() > 0.0)) fail(errc::invalid_argument, "Re(mu) must be > 0");
    if (!signs.valid()) fail(errc::invalid_argument, "signs must be +1 or -1");
    if (!masses.empty() && masses.size() != n_particles) {
      fail(errc::dimension_mismatch, "masses must have n_particles entries");
    }
    for (double m : masses) {
      if (!(m >= 0.0)) fail(errc::invalid_argument, "masses must be >= 0");
    }
  }

  bool massless() const {
    for (double m : masses) {
      if (m != 0.0) return false;
    }
    return true;
  }
};

// Omega = (eta + N kappa) 1 - kappa J, J the all-ones matrix.
inline CouplingMatrix build_coupling_hooke(std::size_t n, double kappa, double eta) {
  if (n < 1) fail(errc::invalid_argument, "build_coupling_hooke: N must be >= 1");
  const auto dim = static_cast<Index>(n);
  MatrixXd omega = MatrixXd::Constant(dim, dim, -kappa);
  omega.diagonal().array() += eta + static_cast<double>(n) * kappa;
  return CouplingMatrix(std::move(omega));
}

// V = -t^T Omega t + x^T Omega x
inline double potential_value(const CouplingMatrix& omega, std::span<const double> t,
                              std::span<const double> x) {
  const auto n = static_cast<std::size_t>(omega.dim());
  if (t.size() != n || x.size() != n) fail(errc::dimension_mismatch, "potential_value");
  const Eigen::Map<const VectorXd> tv(t.data(), omega.dim());
  const Eigen::Map<const VectorXd> xv(x.data(), omega.dim());
  return -tv.dot(omega.matrix() * tv) + xv.dot(omega.matrix() * xv);
}

}  // namespace refel

#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "refel/error.hpp"
#include "refel/matrix.hpp"

namespace refel {

// Per-particle boost velocities in units of c, each strictly inside (-1, 1).
class BoostSet {
 public:
  explicit BoostSet(std::vector<double> velocities) : v_(std::move(velocities)) {
    for (double v : v_) {
      if (!(std::abs(v) < 1.0)) fail(errc::superluminal_velocity, "boost velocity must satisfy |v| < 1");
    }
  }

  const std::vector<double>& velocities() const noexcept { return v_; }
  std::size_t size() const noexcept { return v_.size(); }

  BoostSet inverse() const {
    std::vector<double> w(v_.size());
    for (std::size_t k = 0; k < v_.size(); ++k) w[k] = -v_[k];
    return BoostSet(std::move(w));
  }

 private:
  std::vector<double> v_;
};

struct BoostBlocks {
  VectorXd gamma;  // 1 / sqrt(1 - v^2)
  VectorXd sigma;  // v / sqrt(1 - v^2)
};

inline BoostBlocks boost_blocks(const BoostSet& b) {
  const auto n = static_cast<Index>(b.size());
  BoostBlocks out{VectorXd(n), VectorXd(n)};
  for (Index k = 0; k < n; ++k) {
    const double v = b.velocities()[static_cast<std::size_t>(k)];
    const double g = 1.0 / std::sqrt((1.0 - v) * (1.0 + v));
    out.gamma(k) = g;
    out.sigma(k) = v * g;
  }
  return out;
}

// Lambda = [[Gamma, Sigma], [Sigma, Gamma]] in (t, x) block form.
inline MatrixXd boost_matrix(const BoostSet& b) {
  const BoostBlocks blocks = boost_blocks(b);
  const auto n = static_cast<Index>(b.size());
  MatrixXd lambda = MatrixXd::Zero(2 * n, 2 * n);
  for (Index k = 0; k < n; ++k) {
    lambda(k, k) = blocks.gamma(k);
    lambda(n + k, n + k) = blocks.gamma(k);
    lambda(k, n + k) = blocks.sigma(k);
    lambda(n + k, k) = blocks.sigma(k);
  }
  return lambda;
}

// Substitutes the boosted coordinates into the exponent: the new form is
// (Lambda q)^T Q (Lambda q), i.e. Q' = Lambda^T Q Lambda.
inline QuadraticForm transform_quadratic_form(const QuadraticForm& q, const BoostSet& b) {
  if (!q.has_spacetime_ordering() || q.dim() != 2 * static_cast<Index>(b.size())) {
    fail(errc::dimension_mismatch, "transform_quadratic_form needs a (t_1..t_N, x_1..x_N) form with N velocities");
  }
  const MatrixXcd lambda = boost_matrix(b).cast<cplx>();
  const MatrixXcd out = lambda.transpose() * q.matrix() * lambda;
  return QuadraticForm(ComplexSymmetricMatrix::symmetrized(out), q.ordering());
}

// Quadratic form of psi(0, x_1, ..., 0, x_N): the xx block.
inline ComplexSymmetricMatrix condition_on_zero_times(const QuadraticForm& q) {
  if (!q.has_spacetime_ordering()) fail(errc::dimension_mismatch, "condition_on_zero_times needs (t, x) ordering");
  const Index n = q.dim() / 2;
  return ComplexSymmetricMatrix(q.matrix().bottomRightCorner(n, n));
}

inline QuadraticForm spatial_form(const ComplexSymmetricMatrix& xx) {
  return QuadraticForm(xx, spatial_ordering(static_cast<std::size_t>(xx.dim())));
}

// Closed form of the boosted t' = 0 slice for M = mu 1:
//   M' = mu (Gamma^2 + Sigma^2) + Gamma C Sigma + Sigma C Gamma.
inline ComplexSymmetricMatrix boosted_spatial_form(cplx mu, const ComplexSymmetricMatrix& c, const BoostSet& b) {
  if (c.dim() != static_cast<Index>(b.size())) fail(errc::dimension_mismatch, "boosted_spatial_form");
  const BoostBlocks blocks = boost_blocks(b);
  const VectorXcd g = blocks.gamma.cast<cplx>();
  const VectorXcd s = blocks.sigma.cast<cplx>();
  MatrixXcd out = g.asDiagonal() * c.matrix() * s.asDiagonal();
  out += s.asDiagonal() * c.matrix() * g.asDiagonal();
  out.diagonal() += mu * (g.array().square() + s.array().square()).matrix();
  return ComplexSymmetricMatrix::symmetrized(out);
}

}  // namespace refel

#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "refel/error.hpp"
#include "refel/matfun.hpp"
#include "refel/matrix.hpp"

namespace refel {

inline constexpr double certification_tol_default = 1e-9;

// Split of the coordinates {0..D-1} of a quadratic form into two nonempty parts.
class Bipartition {
 public:
  Bipartition(std::vector<std::size_t> part1, std::vector<std::size_t> part2, std::size_t dim)
      : part1_(std::move(part1)), part2_(std::move(part2)) {
    if (part1_.empty() || part2_.empty()) fail(errc::bad_partition, "both parts must be nonempty");
    std::vector<std::size_t> all = part1_;
    all.insert(all.end(), part2_.begin(), part2_.end());
    if (!is_permutation_of(all, dim)) fail(errc::bad_partition, "parts must be disjoint and cover all coordinates");
  }

  const std::vector<std::size_t>& part1() const noexcept { return part1_; }
  const std::vector<std::size_t>& part2() const noexcept { return part2_; }
  std::size_t dim() const noexcept { return part1_.size() + part2_.size(); }

  // part1 followed by part2
  Permutation layout() const {
    Permutation p = part1_;
    p.insert(p.end(), part2_.begin(), part2_.end());
    return p;
  }

  Bipartition swapped() const { return Bipartition(part2_, part1_, dim()); }

 private:
  std::vector<std::size_t> part1_;
  std::vector<std::size_t> part2_;
};

// Particle k owns coordinates k (time) and N + k (space) in (t, x) ordering.
// Particle indices are 0-based.
inline Bipartition spacetime_bipartition(std::size_t n, std::span<const std::size_t> group1,
                                         std::span<const std::size_t> group2) {
  std::vector<std::size_t> particles(group1.begin(), group1.end());
  particles.insert(particles.end(), group2.begin(), group2.end());
  if (group1.empty() || group2.empty() || !is_permutation_of(particles, n)) {
    fail(errc::bad_partition, "groups must partition the particles into two nonempty sets");
  }
  auto coords = [n](std::span<const std::size_t> group) {
    std::vector<std::size_t> c;
    for (std::size_t k : group) {
      c.push_back(k);
      c.push_back(n + k);
    }
    std::sort(c.begin(), c.end());
    return c;
  };
  return Bipartition(coords(group1), coords(group2), 2 * n);
}

namespace detail {

inline MatrixXd sqrt_psd(const MatrixXd& w) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(w);
  if (solver.info() != Eigen::Success) fail(errc::invalid_state, "eigen-solver failed on square-root argument");
  VectorXd lambda = solver.eigenvalues();
  if (lambda(0) < -1e-10 * std::max(1.0, max_abs(w))) {
    fail(errc::invalid_state, "square-root argument is not positive semidefinite");
  }
  lambda = lambda.cwiseMax(0.0).cwiseSqrt();
  const MatrixXd& v = solver.eigenvectors();
  MatrixXd s = v * lambda.asDiagonal() * v.transpose();
  return (s + s.transpose()) / 2.0;
}

struct FacMin {
  QuadraticForm q_fac_min;  // in the ordering of the input form
  bool cross_blocks_vanish = false;
};

inline FacMin fac_min(const QuadraticForm& q, const Bipartition& p) {
  if (static_cast<Index>(p.dim()) != q.dim()) fail(errc::dimension_mismatch, "bipartition size differs from form");
  const Permutation layout = p.layout();
  const ComplexSymmetricMatrix r = reorder_coordinates(q.form(), layout);
  const auto n1 = static_cast<Index>(p.part1().size());
  const auto n2 = static_cast<Index>(p.part2().size());
  const MatrixXcd& m = r.matrix();
  const MatrixXcd q11 = m.topLeftCorner(n1, n1);
  const MatrixXcd q12 = m.topRightCorner(n1, n2);
  const MatrixXcd q22 = m.bottomRightCorner(n2, n2);

  MatrixXcd f = MatrixXcd::Zero(n1 + n2, n1 + n2);
  const bool vanish = max_abs(q12) <= default_rel_tol * q.form().norm();
  if (vanish) {
    f.topLeftCorner(n1, n1) = q11;
    f.bottomRightCorner(n2, n2) = q22;
  } else {
    const MatrixXd p11 = q11.real();
    const MatrixXd p22 = q22.real();
    const MatrixXd x12 = q12.real();
    const MatrixXd y12 = q12.imag();
    const MatrixXd w1 = p11 * p11 + x12 * x12.transpose() + y12 * y12.transpose();
    const MatrixXd w2 = p22 * p22 + x12.transpose() * x12 + y12.transpose() * y12;
    f.topLeftCorner(n1, n1) = sqrt_psd(w1).cast<cplx>() + cplx(0, 1) * q11.imag().cast<cplx>();
    f.bottomRightCorner(n2, n2) = sqrt_psd(w2).cast<cplx>() + cplx(0, 1) * q22.imag().cast<cplx>();
  }
  ComplexSymmetricMatrix blockdiag = ComplexSymmetricMatrix::symmetrized(f);
  ComplexSymmetricMatrix back = reorder_coordinates(blockdiag, inverse_permutation(layout));
  return {QuadraticForm(std::move(back), q.ordering()), vanish};
}

}  // namespace detail

// Block-diagonal Gaussian Q_fac,min minimizing <L_Q> over product Gaussians
// for the split p. Returned in the coordinate order of q, so entries that
// couple part1 with part2 are exactly zero.
inline QuadraticForm build_q_fac_min(const QuadraticForm& q, const Bipartition& p) {
  return detail::fac_min(q, p).q_fac_min;
}

// <phi_A| L_Q |phi_A> for phi_A ~ exp(-1/2 q^T A q), L_Q = f^dag f, f = grad + Q q:
//   1/2 Tr[(Q - A) (Re A)^{-1} (Q - A)^dag]
inline double expectation_L(const QuadraticForm& a, const QuadraticForm& q) {
  if (a.dim() != q.dim()) fail(errc::dimension_mismatch, "expectation_L: sizes differ");
  const MatrixXd re_a = a.matrix().real();
  if (!is_positive_definite(RealSymmetricMatrix(re_a), 1e-12 * max_abs(re_a))) {
    fail(errc::singular_re_a, "Re(A) is not positive definite");
  }
  const MatrixXcd d = q.matrix() - a.matrix();
  const Eigen::LLT<MatrixXcd> llt(re_a.cast<cplx>());
  const MatrixXcd x = llt.solve(d.adjoint());
  return 0.5 * (d * x).trace().real();
}

namespace detail {

inline double g_from(const FacMin& fm, const QuadraticForm& q, bool& re_pd) {
  const MatrixXd re_f = fm.q_fac_min.matrix().real();
  re_pd = is_positive_definite(RealSymmetricMatrix(re_f), 1e-12 * max_abs(re_f));
  if (fm.cross_blocks_vanish) return 0.0;
  if (!re_pd) fail(errc::singular_re_q, "Re(Q_fac,min) is not positive definite");
  return expectation_L(fm.q_fac_min, q);
}

}  // namespace detail

// Zero without any inversion when the cross blocks vanish: then Q_fac,min == Q.
inline double g_fac_min(const QuadraticForm& q, const Bipartition& p) {
  bool re_pd = false;
  return detail::g_from(detail::fac_min(q, p), q, re_pd);
}

struct WitnessReport {
  double g_fac_min = 0.0;
  double witness = 0.0;  // <L> - g_fac,min with <L> = 0 for the state's own L
  QuadraticForm q_fac_min;
  bool re_q_fac_min_pd = false;
  bool entangled = false;
};

// The state under test is the ground state of its own L (f psi = 0), so
// <L> = 0 and the witness is -g_fac,min.
inline WitnessReport witness_value(const QuadraticForm& q, const Bipartition& p,
                                   double certification_tol = certification_tol_default) {
  detail::FacMin fm = detail::fac_min(q, p);
  WitnessReport report;
  report.g_fac_min = detail::g_from(fm, q, report.re_q_fac_min_pd);
  report.q_fac_min = std::move(fm.q_fac_min);
  report.witness = 0.0 - report.g_fac_min;
  report.entangled = report.witness < -certification_tol;
  return report;
}

}  // namespace refel

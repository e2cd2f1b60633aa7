#pragma once

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "refel/error.hpp"
#include "refel/matrix.hpp"

namespace refel {

inline constexpr double default_rel_tol = 1e-10;
inline constexpr Index max_sqrtm_dim = 64;

// Principal square root with Re >= 0. Values on (or numerically on) the
// negative real axis map to +i sqrt|z|; `scale` sets what "numerically" means.
inline cplx principal_sqrt(cplx z, double scale = 0.0) {
  const double snap = 1e-13 * std::max(scale, std::abs(z));
  if (z.real() < 0.0 && std::abs(z.imag()) <= snap) return {0.0, std::sqrt(-z.real())};
  cplx s = std::sqrt(z);
  if (s.real() < 0.0) s = -s;
  return s;
}

struct SymmetricEigen {
  VectorXd values;   // ascending
  MatrixXd vectors;  // orthonormal columns
};

// Eigenvectors are sign-normalized so that their first non-negligible
// component is positive; this makes the output deterministic.
inline SymmetricEigen eigh_real(const RealSymmetricMatrix& a) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(a.matrix());
  if (solver.info() != Eigen::Success) fail(errc::non_diagonalizable, "eigh_real: solver failed");
  SymmetricEigen out{solver.eigenvalues(), solver.eigenvectors()};
  for (Index k = 0; k < out.vectors.cols(); ++k) {
    auto col = out.vectors.col(k);
    const double cut = 1e-12 * col.cwiseAbs().maxCoeff();
    for (Index i = 0; i < col.size(); ++i) {
      if (std::abs(col(i)) > cut) {
        if (col(i) < 0.0) col = -col;
        break;
      }
    }
  }
  return out;
}

inline bool is_positive_definite(const RealSymmetricMatrix& a, double tol) {
  if (tol < 0.0) fail(errc::invalid_argument, "is_positive_definite: tol must be >= 0");
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(a.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) return false;
  return solver.eigenvalues()(0) > tol;
}

// General path: X = V diag(lambda) V^{-1} from a complex eigen-solver.
inline ComplexSymmetricMatrix sqrtm_principal(const ComplexSymmetricMatrix& x) {
  const Index n = x.dim();
  if (n > max_sqrtm_dim) fail(errc::invalid_argument, "sqrtm_principal: dimension above 64");
  const double scale = x.norm();
  if (scale == 0.0) return ComplexSymmetricMatrix::zero(n);

  Eigen::ComplexEigenSolver<MatrixXcd> solver(x.matrix());
  if (solver.info() != Eigen::Success) fail(errc::non_diagonalizable, "eigen-solver did not converge");
  const MatrixXcd& v = solver.eigenvectors();

  Eigen::JacobiSVD<MatrixXcd> svd(v);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (!(smin > 0.0) || sv(0) / smin > 1e12) {
    fail(errc::non_diagonalizable, "eigenvector matrix is numerically singular");
  }

  VectorXcd roots(n);
  for (Index i = 0; i < n; ++i) roots(i) = principal_sqrt(solver.eigenvalues()(i), scale);

  const MatrixXcd vd = v * roots.asDiagonal();
  const MatrixXcd s = v.transpose().partialPivLu().solve(vd.transpose()).transpose();  // vd * v^{-1}

  if (max_abs(s * s - x.matrix()) > default_rel_tol * scale) {
    fail(errc::non_diagonalizable, "square root failed the reconstruction check");
  }
  return ComplexSymmetricMatrix::symmetrized(s);
}

// Square root of X known to commute with the real symmetric `basis`: X is
// diagonalized block-wise in the eigenbasis of `basis`. Degenerate clusters
// of `basis` fall back to the general solver on the cluster block.
inline ComplexSymmetricMatrix sqrtm_commuting(const ComplexSymmetricMatrix& x,
                                              const RealSymmetricMatrix& basis) {
  const Index n = x.dim();
  if (basis.dim() != n) fail(errc::dimension_mismatch, "sqrtm_commuting: dimension mismatch");
  const double scale = x.norm();
  if (scale == 0.0) return ComplexSymmetricMatrix::zero(n);

  const SymmetricEigen eig = eigh_real(basis);
  const MatrixXcd v = eig.vectors.cast<cplx>();
  const MatrixXcd y = v.transpose() * x.matrix() * v;

  const double gap = 1e-10 * std::max(1.0, basis.norm());
  std::vector<Index> cluster_start{0};
  for (Index i = 1; i < n; ++i) {
    if (eig.values(i) - eig.values(i - 1) > gap) cluster_start.push_back(i);
  }
  cluster_start.push_back(n);

  MatrixXcd blocks = MatrixXcd::Zero(n, n);
  double leak = 0.0;
  for (std::size_t c = 0; c + 1 < cluster_start.size(); ++c) {
    const Index lo = cluster_start[c];
    const Index len = cluster_start[c + 1] - lo;
    leak = std::max(leak, max_abs(y.block(lo, 0, len, lo)));
    leak = std::max(leak, max_abs(y.block(lo, lo + len, len, n - lo - len)));
    if (len == 1) {
      blocks(lo, lo) = principal_sqrt(y(lo, lo), scale);
    } else {
      blocks.block(lo, lo, len, len) =
          sqrtm_principal(ComplexSymmetricMatrix::symmetrized(y.block(lo, lo, len, len))).matrix();
    }
  }
  if (leak > default_rel_tol * std::max(1.0, scale)) {
    fail(errc::non_commuting, "matrix does not commute with the given basis matrix");
  }
  return ComplexSymmetricMatrix::symmetrized(v * blocks * v.transpose());
}

using Permutation = std::vector<std::size_t>;

inline bool is_permutation_of(std::span<const std::size_t> perm, std::size_t n) {
  if (perm.size() != n) return false;
  std::vector<bool> seen(n, false);
  for (std::size_t p : perm) {
    if (p >= n || seen[p]) return false;
    seen[p] = true;
  }
  return true;
}

inline Permutation inverse_permutation(std::span<const std::size_t> perm) {
  Permutation inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = i;
  return inv;
}

// (p o q)[i] = p[q[i]], so reorder(reorder(Q, p), q) == reorder(Q, compose(p, q)).
inline Permutation compose(std::span<const std::size_t> p, std::span<const std::size_t> q) {
  Permutation r(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) r[i] = p[q[i]];
  return r;
}

// result(i, j) = Q(perm[i], perm[j])
template <typename Scalar>
SymmetricMatrix<Scalar> reorder_coordinates(const SymmetricMatrix<Scalar>& q,
                                            std::span<const std::size_t> perm) {
  const auto n = static_cast<std::size_t>(q.dim());
  if (!is_permutation_of(perm, n)) fail(errc::bad_permutation, "not a bijection of the right size");
  typename SymmetricMatrix<Scalar>::matrix_type r(q.dim(), q.dim());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      r(static_cast<Index>(i), static_cast<Index>(j)) =
          q.matrix()(static_cast<Index>(perm[i]), static_cast<Index>(perm[j]));
    }
  }
  return SymmetricMatrix<Scalar>(std::move(r));
}

inline QuadraticForm reorder_coordinates(const QuadraticForm& q, std::span<const std::size_t> perm) {
  ComplexSymmetricMatrix m = reorder_coordinates(q.form(), perm);
  Ordering labels;
  labels.reserve(perm.size());
  for (std::size_t p : perm) labels.push_back(q.ordering()[p]);
  return QuadraticForm(std::move(m), std::move(labels));
}

}  // namespace refel

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "refel/error.hpp"

namespace refel {

using cplx = std::complex<double>;
using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// Symmetric matrix with invariants checked once at construction. Values are
// immutable afterwards; the raw Eigen matrix is exposed read-only.
template <typename Scalar>
class SymmetricMatrix {
 public:
  using matrix_type = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  SymmetricMatrix() = default;

  // Strict: entries must already be exactly symmetric and finite.
  explicit SymmetricMatrix(matrix_type m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() < 1) {
      fail(errc::dimension_mismatch, "symmetric matrix must be square with dim >= 1");
    }
    for (Index i = 0; i < m_.rows(); ++i) {
      for (Index j = 0; j < m_.cols(); ++j) {
        if (!std::isfinite(std::abs(m_(i, j)))) fail(errc::non_finite, "non-finite entry");
        if (m_(i, j) != m_(j, i)) fail(errc::not_symmetric, "entries (i,j) and (j,i) differ");
      }
    }
  }

  // For computed results: averages away roundoff asymmetry.
  static SymmetricMatrix symmetrized(const matrix_type& m) {
    if (m.rows() != m.cols()) fail(errc::dimension_mismatch, "symmetrized: matrix must be square");
    matrix_type s = (m + m.transpose()) / Scalar(2);
    return SymmetricMatrix(std::move(s));
  }

  static SymmetricMatrix identity(Index n) { return SymmetricMatrix(matrix_type::Identity(n, n)); }
  static SymmetricMatrix zero(Index n) { return SymmetricMatrix(matrix_type::Zero(n, n)); }

  template <typename Vec>
  static SymmetricMatrix diagonal(const Vec& d) {
    matrix_type m = matrix_type::Zero(static_cast<Index>(d.size()), static_cast<Index>(d.size()));
    for (Index i = 0; i < m.rows(); ++i) m(i, i) = d[static_cast<std::size_t>(i)];
    return SymmetricMatrix(std::move(m));
  }

  Index dim() const noexcept { return m_.rows(); }
  const matrix_type& matrix() const noexcept { return m_; }
  Scalar operator()(Index i, Index j) const { return m_(i, j); }
  double norm() const { return max_abs(m_); }

 private:
  matrix_type m_;
};

using ComplexSymmetricMatrix = SymmetricMatrix<cplx>;
using RealSymmetricMatrix = SymmetricMatrix<double>;
using CouplingMatrix = RealSymmetricMatrix;

inline ComplexSymmetricMatrix to_complex(const RealSymmetricMatrix& a) {
  return ComplexSymmetricMatrix(a.matrix().cast<cplx>());
}

inline RealSymmetricMatrix real_part(const ComplexSymmetricMatrix& a) {
  return RealSymmetricMatrix(a.matrix().real());
}

inline RealSymmetricMatrix imag_part(const ComplexSymmetricMatrix& a) {
  return RealSymmetricMatrix(a.matrix().imag());
}

// Label for one coordinate of a quadratic form.
struct Coordinate {
  enum class Kind { time, space, generic };
  Kind kind = Kind::generic;
  std::size_t index = 0;  // particle index (0-based) or generic position

  friend bool operator==(const Coordinate&, const Coordinate&) = default;

  std::string name() const {
    switch (kind) {
      case Kind::time: return "t" + std::to_string(index + 1);
      case Kind::space: return "x" + std::to_string(index + 1);
      case Kind::generic: break;
    }
    return "q" + std::to_string(index + 1);
  }
};

using Ordering = std::vector<Coordinate>;

// (t_1..t_N, x_1..x_N)
inline Ordering spacetime_ordering(std::size_t n) {
  Ordering o;
  o.reserve(2 * n);
  for (std::size_t k = 0; k < n; ++k) o.push_back({Coordinate::Kind::time, k});
  for (std::size_t k = 0; k < n; ++k) o.push_back({Coordinate::Kind::space, k});
  return o;
}

inline Ordering spatial_ordering(std::size_t n) {
  Ordering o;
  o.reserve(n);
  for (std::size_t k = 0; k < n; ++k) o.push_back({Coordinate::Kind::space, k});
  return o;
}

inline Ordering generic_ordering(std::size_t n) {
  Ordering o;
  o.reserve(n);
  for (std::size_t k = 0; k < n; ++k) o.push_back({Coordinate::Kind::generic, k});
  return o;
}

// Gaussian exp(-1/2 q^T Q q) together with the meaning of each coordinate.
class QuadraticForm {
 public:
  QuadraticForm() = default;

  QuadraticForm(ComplexSymmetricMatrix q, Ordering ordering)
      : q_(std::move(q)), ordering_(std::move(ordering)) {
    if (static_cast<Index>(ordering_.size()) != q_.dim()) {
      fail(errc::dimension_mismatch, "ordering length differs from matrix dimension");
    }
  }

  explicit QuadraticForm(ComplexSymmetricMatrix q)
      : QuadraticForm(q, generic_ordering(static_cast<std::size_t>(q.dim()))) {}

  Index dim() const noexcept { return q_.dim(); }
  const ComplexSymmetricMatrix& form() const noexcept { return q_; }
  const MatrixXcd& matrix() const noexcept { return q_.matrix(); }
  cplx operator()(Index i, Index j) const { return q_(i, j); }
  const Ordering& ordering() const noexcept { return ordering_; }

  bool has_spacetime_ordering() const {
    return dim() % 2 == 0 && ordering_ == spacetime_ordering(static_cast<std::size_t>(dim() / 2));
  }

 private:
  ComplexSymmetricMatrix q_;
  Ordering ordering_;
};

}  // namespace refel

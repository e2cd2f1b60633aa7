#pragma once

#include <catch2/catch_amalgamated.hpp>

#include <complex>
#include <numeric>
#include <random>
#include <vector>

#include "refel/refel.hpp"

namespace testing {

using refel::cplx;
using refel::Index;
using refel::MatrixXcd;
using refel::MatrixXd;

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20260101);
  return gen;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

// Uniform in the unit disc.
inline cplx disc() {
  while (true) {
    const cplx z(uniform(-1, 1), uniform(-1, 1));
    if (std::abs(z) <= 1.0) return z;
  }
}

inline MatrixXcd random_complex_symmetric(Index n) {
  MatrixXcd a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j <= i; ++j) a(i, j) = a(j, i) = disc();
  return a;
}

inline MatrixXd random_real_symmetric(Index n) {
  MatrixXd a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j <= i; ++j) a(i, j) = a(j, i) = uniform(-1, 1);
  return a;
}

inline std::vector<std::vector<double>> random_points(std::size_t count, std::size_t dim, double r = 1.0) {
  std::vector<std::vector<double>> pts(count, std::vector<double>(dim));
  for (auto& p : pts)
    for (auto& x : p) x = uniform(-r, r);
  return pts;
}

inline double rel_diff(const MatrixXcd& a, const MatrixXcd& b) {
  return refel::max_abs(a - b) / std::max(1e-300, std::max(refel::max_abs(a), refel::max_abs(b)));
}

template <typename F>
refel::errc error_code(F&& f) {
  try {
    f();
  } catch (const refel::error& e) {
    return e.code();
  }
  FAIL("expected a refel::error");
  return refel::errc::invalid_argument;
}

}  // namespace testing

#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "refel/error.hpp"
#include "refel/matrix.hpp"

namespace refel {

inline constexpr unsigned max_hermite_order = 60;
inline constexpr double pcf_envelope = 30.0;

// Physicists' Hermite polynomial, H_{n+1} = 2 z H_n - 2 n H_{n-1}.
template <typename T>
T hermite_poly(unsigned n, T z) {
  if (n > max_hermite_order) fail(errc::order_too_large, "hermite order above 60");
  T prev(1);
  if (n == 0) return prev;
  T cur = T(2) * z;
  for (unsigned k = 1; k < n; ++k) {
    T next = T(2) * z * cur - T(2.0 * k) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

// Orthonormal Hermite function (2^n n! sqrt(pi))^{-1/2} e^{-z^2/2} H_n(z),
// evaluated with the normalized recurrence to stay in range for large n.
template <typename T>
T hermite_fn(unsigned n, T z) {
  if (n > max_hermite_order) fail(errc::order_too_large, "hermite order above 60");
  T prev = T(std::pow(std::numbers::pi, -0.25)) * std::exp(-z * z / T(2));
  if (n == 0) return prev;
  T cur = T(std::sqrt(2.0)) * z * prev;
  for (unsigned k = 1; k < n; ++k) {
    const double kk = k;
    T next = T(std::sqrt(2.0 / (kk + 1.0))) * z * cur - T(std::sqrt(kk / (kk + 1.0))) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

namespace detail {

inline bool is_nonpositive_integer(cplx z) {
  return z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real());
}

// Lanczos approximation (g = 7, 9 terms), valid for Re z >= 1/2.
inline cplx gamma_lanczos(cplx z) {
  static constexpr double coef[] = {0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
                                    771.32342877765313,   -176.61502916214059,   12.507343278686905,
                                    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  z -= 1.0;
  cplx x = coef[0];
  for (int i = 1; i < 9; ++i) x += coef[i] / (z + double(i));
  const cplx t = z + 7.5;
  return std::sqrt(2.0 * std::numbers::pi) * std::pow(t, z + 0.5) * std::exp(-t) * x;
}

}  // namespace detail

// 1/Gamma(z), entire; exactly zero at the non-positive integers.
inline cplx rgamma(cplx z) {
  if (detail::is_nonpositive_integer(z)) return 0.0;
  if (z.real() < 0.5) {
    return std::sin(std::numbers::pi * z) * detail::gamma_lanczos(1.0 - z) / std::numbers::pi;
  }
  return 1.0 / detail::gamma_lanczos(z);
}

namespace detail {

using lcplx = std::complex<long double>;

struct SeriesSum {
  lcplx value;
  long double magnitude;  // sum of |terms|, for the cancellation estimate
};

// Kummer's M(a, b, x) by its power series.
inline SeriesSum kummer_m(lcplx a, lcplx b, lcplx x) {
  constexpr long double eps = std::numeric_limits<long double>::epsilon();
  lcplx term = 1.0L;
  lcplx sum = 1.0L;
  long double mag = 1.0L;
  const long double xabs = std::abs(x);
  for (int k = 0; k < 20000; ++k) {
    const long double kk = k;
    term *= (a + kk) / (b + kk) * x / (kk + 1.0L);
    sum += term;
    mag += std::abs(term);
    if (term == lcplx(0.0L)) return {sum, mag};
    if (kk > xabs && std::abs(term) <= eps * std::abs(sum)) return {sum, mag};
  }
  fail(errc::out_of_envelope, "Kummer series did not converge");
}

struct SeriesValue {
  cplx value;
  double error;  // roundoff estimate from the summed term magnitudes
};

// Two-term confluent series around z = 0.
inline SeriesValue pcf_series_estimate(cplx nu, cplx z) {
  constexpr long double eps = std::numeric_limits<long double>::epsilon();
  const lcplx lnu(nu.real(), nu.imag());
  const lcplx lz(z.real(), z.imag());
  const lcplx x = lz * lz / 2.0L;
  const long double sqrt_pi = std::sqrt(std::numbers::pi_v<long double>);
  const lcplx pre = std::pow(lcplx(2.0L), lnu / 2.0L) * sqrt_pi;

  const cplx r1 = rgamma((1.0 - nu) / 2.0);
  const cplx r2 = rgamma(-nu / 2.0);
  const lcplx c1 = pre * lcplx(r1.real(), r1.imag());
  const lcplx c2 = -pre * std::sqrt(2.0L) * lcplx(r2.real(), r2.imag()) * lz;

  lcplx bracket = 0.0L;
  long double mag = 0.0L;
  if (c1 != lcplx(0.0L)) {
    const SeriesSum m1 = kummer_m(-lnu / 2.0L, 0.5L, x);
    bracket += c1 * m1.value;
    mag += std::abs(c1) * m1.magnitude;
  }
  if (c2 != lcplx(0.0L)) {
    const SeriesSum m2 = kummer_m((1.0L - lnu) / 2.0L, 1.5L, x);
    bracket += c2 * m2.value;
    mag += std::abs(c2) * m2.magnitude;
  }
  const lcplx result = std::exp(-lz * lz / 4.0L) * bracket;
  const long double err = 16.0L * eps * mag * std::abs(std::exp(-lz * lz / 4.0L));
  return {{static_cast<double>(result.real()), static_cast<double>(result.imag())}, static_cast<double>(err)};
}

inline cplx pcf_series(cplx nu, cplx z) {
  const SeriesValue s = pcf_series_estimate(nu, z);
  if (s.error > 1e-6 * std::abs(s.value) && s.error > 1e-300) {
    fail(errc::out_of_envelope, "parabolic cylinder series lost precision at this argument");
  }
  return s.value;
}

}  // namespace detail

// D_nu(z), solution of D'' + (nu + 1/2 - z^2/4) D = 0 decaying along the positive real axis.
inline cplx parabolic_cylinder_D(cplx nu, cplx z) {
  if (std::abs(z) > pcf_envelope || std::abs(nu) > pcf_envelope) {
    fail(errc::out_of_envelope, "parabolic_cylinder_D supports |z| <= 30 and |nu| <= 30");
  }
  if (nu.imag() == 0.0 && nu.real() >= 0.0 && nu.real() == std::floor(nu.real())) {
    const auto n = static_cast<unsigned>(nu.real());
    return std::pow(2.0, -0.5 * n) * std::exp(-z * z / 4.0) * hermite_poly(n, z / std::sqrt(2.0));
  }
  return detail::pcf_series(nu, z);
}

// Solution data for -w'' + (a + b q + c q^2) w = 0 as w(q) = D_nu(scale q + shift).
struct WeberMap {
  cplx nu;
  cplx scale;
  cplx shift;

  cplx operator()(double q) const { return parabolic_cylinder_D(nu, scale * q + shift); }
};

// With r the principal fourth root of c:
//   nu = b^2 / (8 r^6) - a / (2 r^2) - 1/2,  scale = sqrt(2) r,  shift = b / (sqrt(2) r^3).
inline WeberMap weber_map(cplx a, cplx b, cplx c) {
  if (c == 0.0) fail(errc::zero_coefficient, "weber_map requires c != 0");
  const cplx r = std::pow(c, 0.25);
  const cplx r2 = r * r;
  const cplx r3 = r2 * r;
  const double s2 = std::sqrt(2.0);
  return {b * b / (8.0 * r3 * r3) - a / (2.0 * r2) - 0.5, s2 * r, b / (s2 * r3)};
}

}  // namespace refel

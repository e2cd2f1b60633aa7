#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace refel {

enum class errc {
  not_symmetric,
  non_finite,
  dimension_mismatch,
  non_diagonalizable,
  bad_permutation,
  non_commuting,
  unsupported_n,
  singular_m,
  superluminal_velocity,
  invalid_state,
  singular_re_q,
  singular_re_a,
  bad_partition,
  order_too_large,
  out_of_envelope,
  zero_coefficient,
  zero_frequency_mode,
  evaluation_failure,
  zero_amplitude,
  invalid_argument,
};

constexpr std::string_view to_string(errc code) noexcept {
  switch (code) {
    case errc::not_symmetric: return "NotSymmetric";
    case errc::non_finite: return "NonFinite";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::non_diagonalizable: return "NonDiagonalizable";
    case errc::bad_permutation: return "BadPermutation";
    case errc::non_commuting: return "NonCommuting";
    case errc::unsupported_n: return "UnsupportedN";
    case errc::singular_m: return "SingularM";
    case errc::superluminal_velocity: return "SuperluminalVelocity";
    case errc::invalid_state: return "InvalidState";
    case errc::singular_re_q: return "SingularReQ";
    case errc::singular_re_a: return "SingularReA";
    case errc::bad_partition: return "BadPartition";
    case errc::order_too_large: return "OrderTooLarge";
    case errc::out_of_envelope: return "OutOfEnvelope";
    case errc::zero_coefficient: return "ZeroCoefficient";
    case errc::zero_frequency_mode: return "ZeroFrequencyMode";
    case errc::evaluation_failure: return "EvaluationFailure";
    case errc::zero_amplitude: return "ZeroAmplitude";
    case errc::invalid_argument: return "InvalidArgument";
  }
  return "Unknown";
}

// Every failure raised by the library carries one of the codes above.
class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

}  // namespace refel

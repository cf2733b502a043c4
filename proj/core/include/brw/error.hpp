#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace brw {

enum class ErrorCode {
  normalization,
  empty_law,
  subcritical_family,
  invalid_law,
  domain,
  no_convergence,
  overflow,
  zero_mass,
  population_cap,
  level_out_of_range,
  too_large,
  not_supercritical,
  too_many_discards,
  invalid_argument,
  parse,
  io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base for every failure raised by the library. The code is stable and is
/// what the CLI maps onto exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Fixed-point iteration hit its cap; carries the last iterate.
class NoConvergenceError : public Error {
 public:
  NoConvergenceError(const std::string& message, double last_iterate)
      : Error(ErrorCode::no_convergence, message), last_iterate_(last_iterate) {}

  double last_iterate() const noexcept { return last_iterate_; }

 private:
  double last_iterate_;
};

/// Enumeration refused by the pre-flight size estimate.
class TooLargeError : public Error {
 public:
  TooLargeError(const std::string& message, double log10_estimate)
      : Error(ErrorCode::too_large, message), log10_estimate_(log10_estimate) {}

  /// log10 of the projected outcome count.
  double log10_estimate() const noexcept { return log10_estimate_; }

 private:
  double log10_estimate_;
};

}  // namespace brw

#pragma once

#include <limits>
#include <span>
#include <vector>

namespace brw {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

/// Sum after sorting by nondecreasing magnitude. Takes its argument by value
/// because it reorders.
double stable_sum(std::vector<double> terms);

/// log(sum(exp(x))) with max subtraction. Empty input or all -inf gives -inf.
double log_sum_exp(std::span<const double> xs);

/// Running log-sum-exp accumulator. Order of add() calls affects rounding, so
/// callers that need reproducibility must add in a fixed order.
class LogSumExp {
 public:
  void add(double x);
  double value() const;

 private:
  double max_ = kNegInf;
  double scaled_ = 0.0;  // sum of exp(x - max_)
};

/// Sample mean and standard error of the mean (n-1 denominator).
struct MeanAndError {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

/// Two-pass mean/SE over values in the given order.
MeanAndError mean_and_error(std::span<const double> values);

}  // namespace brw

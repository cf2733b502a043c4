#include "brw/numeric.hpp"

#include <algorithm>
#include <cmath>

namespace brw {

double stable_sum(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end(),
            [](double a, double b) { return std::fabs(a) < std::fabs(b); });
  double total = 0.0;
  for (double t : terms) total += t;
  return total;
}

double log_sum_exp(std::span<const double> xs) {
  double hi = kNegInf;
  for (double x : xs) hi = std::max(hi, x);
  if (hi == kNegInf) return kNegInf;
  if (hi == kPosInf) return kPosInf;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

void LogSumExp::add(double x) {
  if (x == kNegInf) return;
  if (x <= max_) {
    scaled_ += std::exp(x - max_);
    return;
  }
  scaled_ = scaled_ * std::exp(max_ - x) + 1.0;
  max_ = x;
}

double LogSumExp::value() const {
  if (max_ == kNegInf) return kNegInf;
  return max_ + std::log(scaled_);
}

MeanAndError mean_and_error(std::span<const double> values) {
  MeanAndError out;
  out.n = values.size();
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) {
    const double d = v - out.mean;
    ss += d * d;
  }
  const double var = ss / static_cast<double>(values.size() - 1);
  out.se = std::sqrt(var / static_cast<double>(values.size()));
  return out;
}

}  // namespace brw

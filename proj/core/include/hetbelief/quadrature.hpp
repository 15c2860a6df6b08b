#pragma once

#include <span>

namespace hetbelief {

/// Composite Simpson rule on equally spaced samples; needs an odd sample
/// count >= 3.
double simpson(std::span<const double> samples, double h);

/// Estimate of the integral of f over [T, inf) from two samples f(T - span)
/// and f(T), assuming geometric (exponential) decay between them. Returns 0
/// when the samples change sign or do not decay.
struct TailEstimate {
  double value = 0.0;
  double decay_rate = 0.0;  // 0 when no geometric fit was possible
};
TailEstimate geometric_tail(double f_before, double f_end, double span);

}  // namespace hetbelief

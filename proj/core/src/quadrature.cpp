#include "hetbelief/quadrature.hpp"

#include <cmath>

#include "hetbelief/errors.hpp"

namespace hetbelief {

double simpson(std::span<const double> f, double h) {
  if (f.size() < 3 || f.size() % 2 == 0) {
    throw ValidationError("simpson: need an odd number (>= 3) of samples");
  }
  double odd = 0.0;
  double even = 0.0;
  for (std::size_t i = 1; i + 1 < f.size(); ++i) {
    (i % 2 == 1 ? odd : even) += f[i];
  }
  return h / 3.0 * (f.front() + 4.0 * odd + 2.0 * even + f.back());
}

TailEstimate geometric_tail(double f_before, double f_end, double span) {
  if (f_end == 0.0) {
    return {0.0, 0.0};
  }
  const double ratio = f_before / f_end;
  if (!(ratio > 1.0) || !(span > 0.0)) {
    return {0.0, 0.0};
  }
  const double rate = std::log(ratio) / span;
  return {f_end / rate, rate};
}

}  // namespace hetbelief

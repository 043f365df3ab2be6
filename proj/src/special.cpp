#include "r0kit/special.hpp"

#include <cmath>
#include <numbers>

namespace r0kit {

namespace {

// exp(x*x) with the rounding error of the square carried into a second factor.
double exp_square(double x) {
  const double hi = x * x;
  const double lo = std::fma(x, x, -hi);
  return std::exp(hi) * std::exp(lo);
}

// Continued fraction for erfc(x) exp(x^2) sqrt(pi), valid for large x.
double erfcx_continued_fraction(double x) {
  // erfcx(x) = (1/sqrt(pi)) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + 2/(x + ...)))))
  double tail = x;
  for (int n = 60; n >= 1; --n) tail = x + 0.5 * n / tail;
  return 1.0 / (tail * std::sqrt(std::numbers::pi));
}

}  // namespace

double erfcx(double x) {
  if (x < 0.0) return 2.0 * exp_square(x) - erfcx(-x);
  if (x < 25.0) return exp_square(x) * std::erfc(x);
  return erfcx_continued_fraction(x);
}

}  // namespace r0kit

#pragma once

namespace r0kit {

/// Scaled complementary error function exp(x^2) * erfc(x).
///
/// Finite for every finite x >= 0 (decays like 1/(x sqrt(pi))); grows like
/// 2 exp(x^2) for negative x and overflows below about -26.6.
double erfcx(double x);

}  // namespace r0kit

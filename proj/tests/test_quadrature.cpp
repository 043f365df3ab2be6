#include "helpers.hpp"

#include "r0kit/quadrature.hpp"
#include "r0kit/special.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace r0kit;

namespace {

double erfcx_oracle(double x) {
  using Big = boost::multiprecision::cpp_bin_float_50;
  const Big bx = x;
  return static_cast<double>(exp(bx * bx) * boost::math::erfc(bx));
}

}  // namespace

TEST_SUITE("quadrature") {
  TEST_CASE("erfcx matches a 50-digit oracle") {
    testing::Gen gen(11);
    for (int i = 0; i < 300; ++i) {
      const double x = i < 150 ? gen.uniform(-5.0, 5.0) : gen.uniform(5.0, 40.0);
      const double ref = erfcx_oracle(x);
      CHECK_MESSAGE(std::abs(erfcx(x) - ref) <= 2e-14 * ref, "x = " << x);
    }
    CHECK(erfcx(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("erfcx asymptotics for huge arguments") {
    for (double x : {1e3, 1e6, 1e10}) {
      const double lead = 1.0 / (x * std::sqrt(std::numbers::pi));
      CHECK(erfcx(x) == doctest::Approx(lead * (1.0 - 0.5 / (x * x))).epsilon(1e-12));
    }
  }

  TEST_CASE("smooth integrals") {
    CHECK(integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi) ==
          doctest::Approx(2.0).epsilon(1e-13));
    CHECK(integrate([](double x) { return std::exp(-x); }, 0.0, 50.0) ==
          doctest::Approx(-std::expm1(-50.0)).epsilon(1e-13));
    // Reversed bounds flip the sign.
    CHECK(integrate([](double x) { return x * x; }, 1.0, 0.0) ==
          doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
  }

  TEST_CASE("endpoint singularity converges adaptively") {
    const auto r = integrate_adaptive([](double x) { return std::sqrt(x); }, 0.0, 1.0,
                                      {1e-13, 1e-13, 5000});
    CHECK(r.value == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(r.intervals > 1);
  }

  TEST_CASE("pieces keep jumps on panel edges") {
    auto step = [](double x) { return x < 1.0 ? 0.0 : 2.0; };
    const double points[] = {0.0, 1.0, 3.0};
    CHECK(integrate_pieces(step, points) == doctest::Approx(4.0).epsilon(1e-14));
  }

  TEST_CASE("budget exhaustion throws") {
    auto nasty = [](double x) { return std::sin(1.0 / (x + 1e-6)); };
    CHECK_THROWS_AS(integrate(nasty, 0.0, 1.0, {1e-15, 1e-15, 4}), QuadratureError);
    CHECK_THROWS_AS(integrate([](double) { return 1.0; }, 0.0, INFINITY), QuadratureError);
  }
}

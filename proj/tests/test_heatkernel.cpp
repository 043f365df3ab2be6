#include "helpers.hpp"

#include "r0kit/analytic.hpp"
#include "r0kit/greens.hpp"
#include "r0kit/heatkernel.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace r0kit;

namespace {

using Big = boost::multiprecision::cpp_bin_float_50;

// Unsimplified kernel, evaluated with 50 digits so the huge exponentials
// cancel exactly.
double g0_oracle(double a, double s, double t, double mu, double d) {
  const Big A = a, S = s, T = t, MU = mu, D = d;
  const Big pi = boost::math::constants::pi<Big>();
  const Big root = sqrt(pi * D * T);
  const Big gx30 = (exp(-(A - S) * (A - S) / (4 * D * T)) + exp(-(A + S) * (A + S) / (4 * D * T))) /
                       (2 * root) -
                   exp(T / (4 * D) + (A + S) / (2 * D)) *
                       boost::math::erfc((A + S + T) / (2 * sqrt(D * T))) / (2 * D);
  return static_cast<double>(exp(A / (2 * D) - (MU + 1 / (4 * D)) * T - S / (2 * D)) * gx30);
}

}  // namespace

TEST_SUITE("heatkernel") {
  TEST_CASE("merged kernel agrees with the unsimplified form") {
    testing::Gen gen(29);
    for (int i = 0; i < 200; ++i) {
      const double a = gen.uniform(0.0, 8.0);
      const double s = gen.uniform(0.0, 2.0);
      const double t = gen.log_uniform(1e-2, 40.0);
      const double mu = gen.uniform(0.25, 2.0);
      const double d = gen.log_uniform(0.1, 5.0);
      const double ref = g0_oracle(a, s, t, mu, d);
      CHECK_MESSAGE(std::abs(g0(a, s, t, mu, d) - ref) <= 1e-12 * (std::abs(ref) + 1e-300) + 1e-300,
                    "a=" << a << " s=" << s << " t=" << t << " mu=" << mu << " D=" << d);
    }
  }

  TEST_CASE("kernel stays finite where the naive form overflows") {
    const double v = g0(50.0, 0.0, 100.0, 1.0, 0.01);
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
    CHECK(std::isfinite(g_x30(20.0, 1.0, 500.0, 0.01)));
  }

  TEST_CASE("G0 solves the forward equation") {
    // u_t = -u_a + D u_aa - mu u away from t = 0.
    const double mu = 0.8, d = 1.3, s = 0.4;
    const double h = 1e-3;
    for (double a : {0.5, 1.5, 3.0}) {
      for (double t : {0.5, 2.0}) {
        auto u = [&](double x, double tt) { return g0(x, s, tt, mu, d); };
        const double ut = (u(a, t + h) - u(a, t - h)) / (2 * h);
        const double ua = (u(a + h, t) - u(a - h, t)) / (2 * h);
        const double uaa = (u(a + h, t) - 2 * u(a, t) + u(a - h, t)) / (h * h);
        CHECK(ut == doctest::Approx(-ua + d * uaa - mu * u(a, t)).epsilon(1e-4));
      }
    }
  }

  TEST_CASE("completing-squares identity") {
    for (double a : {0.0, 1.0, 3.0, 7.5}) {
      for (double mu : {0.5, 1.0, 2.0}) {
        for (double d : {0.25, 1.0, 4.0}) {
          const auto c = integral_identity_check(a, mu, d);
          CHECK(c.lhs == doctest::Approx(c.rhs).epsilon(1e-9));
        }
      }
    }
  }

  TEST_CASE("time integral reproduces the stationary Green's function") {
    testing::Gen gen(31);
    for (int i = 0; i < 25; ++i) {
      const double a = gen.uniform(0.0, 6.0);
      const double s = gen.uniform(0.0, 1.0);
      const double mu = gen.uniform(0.4, 2.0);
      const double d = gen.uniform(0.2, 3.0);
      CHECK(time_integrated_kernel_quadrature(a, s, mu, d) ==
            doctest::Approx(greens_age_diffusion(a, s, mu, d)).epsilon(1e-8));
      CHECK(time_integrated_kernel(a, mu, d) ==
            doctest::Approx(psi_infinity_age(a, mu, d)).epsilon(1e-12));
    }
  }

  TEST_CASE("time-domain R0 at finite k tends to the limit") {
    ModelSpec m;
    m.beta = RateFunction::power_exp(1.0, 2.0, 1.0);
    m.diffusion = 2.0;
    const double limit = r0_age_diffusion(m);
    double previous = INFINITY;
    for (int k : {2, 8, 32}) {
      const double gap = std::abs(r0_time_domain(m, k) - limit);
      CHECK(gap < previous);
      previous = gap;
    }
    CHECK(previous < 1e-3);
    CHECK(r0_time_domain(m) == doctest::Approx(8.0 / 27.0).epsilon(1e-8));
  }

  TEST_CASE("time-domain route needs the age-diffusion model") {
    ModelSpec m;
    CHECK_THROWS_AS(r0_time_domain(m), UnsupportedModel);
    m.diffusion = 1.0;
    m.gamma = RateFunction::constant(2.0);
    CHECK_THROWS_AS(r0_time_domain(m), UnsupportedModel);
  }

  TEST_CASE("truncations") {
    CHECK(time_truncation(1.0, 1.0) == 50.0);
    CHECK(time_truncation(20.0, 1.0) == 200.0);
    ModelSpec m;
    m.beta = RateFunction::constant(2.0);
    const double lambda2 = lambda_pair(1.0, 1.0).lambda2;
    const double end = fertility_truncation(m, lambda2);
    CHECK(2.0 * std::exp(lambda2 * end) < 2e-14);
  }
}

#include "helpers.hpp"

#include "r0kit/analytic.hpp"
#include "r0kit/greens.hpp"
#include "r0kit/quadrature.hpp"

#include <doctest.h>

#include <cmath>

using namespace r0kit;

namespace {

// RK4 on (y, total): y' = -(mu/gamma) y, total' = (beta/gamma) y.
double size_oracle(const ModelSpec& m, double end, int steps) {
  const double h = (end - m.x0) / steps;
  auto f = [&](double x, double y) {
    const double g = m.gamma_at(x);
    return std::pair{-m.mu_at(x) / g * y, m.beta_at(x) / g * y};
  };
  double y = 1.0;
  double total = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double x = m.x0 + i * h;
    const auto k1 = f(x, y);
    const auto k2 = f(x + 0.5 * h, y + 0.5 * h * k1.first);
    const auto k3 = f(x + 0.5 * h, y + 0.5 * h * k2.first);
    const auto k4 = f(x + h, y + h * k3.first);
    y += h / 6.0 * (k1.first + 2 * k2.first + 2 * k3.first + k4.first);
    total += h / 6.0 * (k1.second + 2 * k2.second + 2 * k3.second + k4.second);
  }
  return m.birth_multiplicity * total;
}

double age_oracle(const ModelSpec& m) {
  const double mu = m.mu.constant_value();
  const double end = 60.0 / -lambda_pair(mu, m.diffusion).lambda2 + 20.0;
  std::vector<double> points{0.0};
  for (double b : m.beta.breakpoints()) {
    if (b > 0.0 && b < end) points.push_back(b);
  }
  points.push_back(end);
  return m.birth_multiplicity *
         integrate_pieces(
             [&](double a) { return m.beta_at(a) * psi_infinity_age(a, mu, m.diffusion); },
             points, {1e-14, 1e-12, 20000});
}

}  // namespace

TEST_SUITE("analytic") {
  TEST_CASE("size model closed form against an ODE integration") {
    testing::Gen gen(79);
    for (int i = 0; i < 25; ++i) {
      ModelSpec m = gen.model(false);
      if (m.beta.is_proportional()) continue;
      m.x_max = gen.uniform(3.0, 12.0);
      // Jumps in the rates cost the fixed-step oracle O(h).
      const double ref = size_oracle(m, m.x_max, 400000);
      CHECK(r0_size_closed(m) == doctest::Approx(ref).epsilon(1e-4));
    }
  }

  TEST_CASE("constant size model") {
    ModelSpec m;
    m.beta = RateFunction::constant(3.0);
    m.mu = RateFunction::constant(1.5);
    m.gamma = RateFunction::constant(0.5);
    CHECK(r0_size_closed(m) == doctest::Approx(2.0).epsilon(1e-15));
    m.x_max = 1.0;
    CHECK(r0_size_closed(m) == doctest::Approx(2.0 * (1.0 - std::exp(-3.0))).epsilon(1e-15));
    m.diffusion = 1.0;
    CHECK_THROWS_AS(r0_size_closed(m), UnsupportedModel);
  }

  TEST_CASE("age-diffusion closed form against quadrature of the stationary kernel") {
    testing::Gen gen(83);
    for (int i = 0; i < 40; ++i) {
      ModelSpec m;
      m.mu = RateFunction::constant(gen.uniform(0.3, 2.0));
      m.beta = gen.fertility();
      m.diffusion = gen.log_uniform(1e-3, 20.0);
      m.birth_multiplicity = gen.uniform(1.0, 2.0);
      CHECK(r0_age_diffusion(m) == doctest::Approx(age_oracle(m)).epsilon(1e-8));
    }
  }

  TEST_CASE("fertility proportional to mortality gives the factor") {
    for (double d : {0.0, 0.1, 1.0, 100.0}) {
      ModelSpec m;
      m.mu = RateFunction::constant(0.7);
      m.beta = RateFunction::proportional_to_mu(1.8);
      m.diffusion = d;
      CHECK(r0_age_diffusion(m) == doctest::Approx(1.8).epsilon(1e-15));
    }
  }

  TEST_CASE("quadratic and step fertility formulas") {
    testing::Gen gen(89);
    for (int i = 0; i < 50; ++i) {
      const double beta0 = gen.uniform(0.1, 10.0);
      const double mu = gen.uniform(0.1, 3.0);
      const double d = gen.log_uniform(1e-6, 1e4);
      ModelSpec m;
      m.mu = RateFunction::constant(mu);
      m.diffusion = d;
      m.beta = RateFunction::power_exp(beta0, 2.0, 1.0);
      CHECK(r0_quadratic_beta(beta0, mu, d) == doctest::Approx(r0_age_diffusion(m)).epsilon(1e-10));
      m.beta = RateFunction::step(1.0, beta0);
      CHECK(r0_step_beta(beta0, mu, d) == doctest::Approx(r0_age_diffusion(m)).epsilon(1e-10));
    }
    // D = 0 limits.
    CHECK(r0_quadratic_beta(1.0, 1.0, 0.0) == doctest::Approx(2.0 / 8.0));
    CHECK(r0_step_beta(2.0, 1.0, 0.0) == doctest::Approx(2.0 * std::exp(-1.0)));
    CHECK_THROWS_AS(r0_quadratic_beta(1.0, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(r0_step_beta(1.0, 1.0, -1.0), DomainError);
  }

  TEST_CASE("quadratic fertility is stable for very large D") {
    // Leading order: 32 beta0 / (8 sqrt(4 mu D)).
    const double d = 1e12;
    const double value = r0_quadratic_beta(1.0, 1.0, d);
    CHECK(std::isfinite(value));
    CHECK(value == doctest::Approx(4.0 / std::sqrt(4.0 * d)).epsilon(1e-5));
  }

  TEST_CASE("cell division with a point-mass offspring law") {
    ModelSpec m;
    m.x_max = 2.0;
    m.gamma = RateFunction::constant(1.0);
    m.mu = RateFunction::constant(0.5);
    m.birth_sample_point = 2.0;
    m.birth_multiplicity = 2.0;
    const auto r = r0_cell_distributed(m, PointMass{1.0});
    CHECK(r.value == doctest::Approx(2.0 * std::exp(-0.5)).epsilon(1e-14));
    CHECK(r.warnings.empty());
  }

  TEST_CASE("cell division with a density") {
    ModelSpec m;
    m.x_max = 2.0;
    m.mu = RateFunction::constant(1.0);
    m.birth_sample_point = 2.0;
    const auto sym = r0_cell_distributed(m, Density{[](double) { return 0.5; }});
    // int_0^2 e^{-(2 - s)} / 2 ds = (1 - e^{-2}) / 2
    CHECK(sym.value == doctest::Approx((1.0 - std::exp(-2.0)) / 2.0).epsilon(1e-11));
    CHECK(sym.warnings.empty());
    const auto skew = r0_cell_distributed(m, Density{[](double s) { return s / 2.0; }});
    CHECK_FALSE(skew.warnings.empty());
    m.x_max = kInfinity;
    CHECK_THROWS_AS(r0_cell_distributed(m, PointMass{}), UnsupportedModel);
  }

  TEST_CASE("optimum over diffusion") {
    const auto flat = optimal_diffusion(RateFunction::constant(2.0), 1.0);
    CHECK(flat.kind == OptimumKind::Flat);
    CHECK(flat.r0_star == doctest::Approx(2.0));
    const auto step = optimal_diffusion(RateFunction::step(1.0, 1.0), 1.0);
    CHECK(step.kind == OptimumKind::UpperBoundary);
    const auto quad = optimal_diffusion(RateFunction::power_exp(4.0, 2.0, 1.0), 1.0);
    CHECK(quad.kind == OptimumKind::Interior);
    CHECK(quad.d_star == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(quad.r0_star == doctest::Approx(r0_quadratic_beta(4.0, 1.0, 2.0)).epsilon(1e-12));
    CHECK(to_string(OptimumKind::LowerBoundary) == "boundary-lower");
  }

  TEST_CASE("dispatch") {
    ModelSpec m;
    CHECK(r0_analytic(m).value == 0.0);
    m.beta = RateFunction::constant(2.0);
    m.diffusion = 1.0;
    CHECK(r0_analytic(m).value == doctest::Approx(2.0));
    m.gamma = RateFunction::constant(2.0);
    CHECK_THROWS_AS(r0_analytic(m), UnsupportedModel);
  }
}

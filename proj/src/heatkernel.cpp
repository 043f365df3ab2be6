#include "r0kit/heatkernel.hpp"

#include "r0kit/greens.hpp"
#include "r0kit/quadrature.hpp"
#include "r0kit/special.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace r0kit {

namespace {

constexpr double kInvSqrtPi = std::numbers::inv_sqrtpi;

void require_positive_time(double t) {
  if (!(t > 0.0)) throw DomainError("heat kernel: t must be positive");
}

}  // namespace

double g_x30(double a, double s, double t, double diffusion) {
  require_positive_time(t);
  const double four_dt = 4.0 * diffusion * t;
  const double root = std::sqrt(diffusion * t);
  const double gauss = (std::exp(-(a - s) * (a - s) / four_dt) +
                        std::exp(-(a + s) * (a + s) / four_dt)) *
                       (0.5 * kInvSqrtPi / root);
  // e^{t/4D + (a+s)/2D} erfc(z) = e^{-(a+s)^2/4Dt} erfcx(z)
  const double z = (a + s + t) / (2.0 * root);
  const double robin = std::exp(-(a + s) * (a + s) / four_dt) * erfcx(z) / (2.0 * diffusion);
  return gauss - robin;
}

double g0(double a, double s, double t, double mu, double diffusion) {
  require_positive_time(t);
  const double four_dt = 4.0 * diffusion * t;
  const double root = std::sqrt(diffusion * t);
  const double half_heat = 0.5 * kInvSqrtPi / root;
  const double z = (a + s + t) / (2.0 * root);
  const double direct = std::exp(-(a - s - t) * (a - s - t) / four_dt) * half_heat;
  const double mirrored = std::exp(-(a + s - t) * (a + s - t) / four_dt - s / diffusion) *
                          (half_heat - erfcx(z) / (2.0 * diffusion));
  return std::exp(-mu * t) * (direct + mirrored);
}

double time_truncation(double a, double mu) { return std::max(10.0 * a, 50.0 / mu); }

namespace {

// int_0^T f(t) dt with t = tau^2, which removes the 1/sqrt(t) singularity at
// t = 0. The panel is split at tau = sqrt(peak) where the integrand peaks.
double time_integral(const std::function<double(double)>& f, double peak, double horizon,
                     const QuadratureOptions& options) {
  auto g = [&](double tau) {
    if (tau <= 0.0) return 0.0;
    return 2.0 * tau * f(tau * tau);
  };
  std::vector<double> points{0.0};
  const double tau_peak = std::sqrt(std::max(peak, 0.0));
  const double tau_end = std::sqrt(horizon);
  if (tau_peak > 0.0 && tau_peak < tau_end) points.push_back(tau_peak);
  points.push_back(tau_end);
  return integrate_pieces(g, points, options);
}

}  // namespace

IdentityCheck integral_identity_check(double a, double mu, double diffusion) {
  if (!(mu > 0.0) || !(diffusion > 0.0)) {
    throw DomainError("integral_identity_check: mu and D must be positive");
  }
  const double horizon = time_truncation(a, mu);
  auto integrand = [&](double t) {
    return std::exp(-mu * t - (a - t) * (a - t) / (4.0 * diffusion * t)) * kInvSqrtPi /
           std::sqrt(diffusion * t);
  };
  IdentityCheck out;
  out.lhs = time_integral(integrand, a, horizon, {1e-12, 1e-13, 20000});
  const double root = std::sqrt(1.0 + 4.0 * diffusion * mu);
  out.rhs = 2.0 * std::exp(a / (2.0 * diffusion) * (1.0 - root)) / root;
  return out;
}

double time_integrated_kernel(double a, double mu, double diffusion) {
  const auto p = lambda_pair(mu, diffusion);
  const double decay = std::exp(p.lambda2 * a);
  return 2.0 * decay / p.sqrt_disc -
         decay / (2.0 * mu * diffusion) * (1.0 - 1.0 / p.sqrt_disc);
}

double time_integrated_kernel_quadrature(double a, double s, double mu, double diffusion) {
  const double horizon = time_truncation(std::max(a, s), mu);
  auto integrand = [&](double t) { return g0(a, s, t, mu, diffusion); };
  return time_integral(integrand, std::abs(a - s), horizon, {1e-12, 1e-12, 20000});
}

double fertility_truncation(const ModelSpec& m, double lambda2) {
  const double left = m.x0;
  const double scale = std::max(1.0, m.beta_max());
  double span = 1.0;
  for (int iter = 0; iter < 400; ++iter) {
    const double a = left + span;
    const double bound = rate_supremum(m.beta, a, kInfinity, &m.mu) * std::exp(lambda2 * span);
    if (bound < 1e-14 * scale) return a;
    span *= 1.25;
  }
  throw DomainError("fertility does not decay fast enough for domain truncation");
}

double r0_time_domain(const ModelSpec& m, std::optional<int> k) {
  if (!m.is_age_model()) {
    throw UnsupportedModel("time-domain route needs gamma = 1 and constant mu");
  }
  if (!(m.diffusion > 0.0)) throw UnsupportedModel("time-domain route needs D > 0");
  if (k && *k < 1) throw DomainError("r0_time_domain: k must be >= 1");
  const double mu = m.mu.constant_value();
  const double d = m.diffusion;
  const auto p = lambda_pair(mu, d);
  const double x0 = m.x0;
  const double horizon = fertility_truncation(m, p.lambda2);

  std::function<double(double)> kernel;
  if (!k) {
    kernel = [=](double a) { return time_integrated_kernel_quadrature(a, 0.0, mu, d); };
  } else {
    const double width = 1.0 / *k;
    kernel = [=](double a) {
      // k int_0^{1/k} int_0^inf G0(a, s, t) dt ds
      auto inner = [&](double s) { return time_integrated_kernel_quadrature(a, s, mu, d); };
      std::vector<double> points{0.0};
      if (a > 0.0 && a < width) points.push_back(a);
      points.push_back(width);
      return integrate_pieces(inner, points, {1e-11 * width, 1e-11, 5000}) / width;
    };
  }

  std::vector<double> points{x0};
  for (double b : m.beta.breakpoints()) {
    if (b > x0 && b < horizon) points.push_back(b);
  }
  if (k && x0 + 1.0 / *k < horizon) points.push_back(x0 + 1.0 / *k);
  points.push_back(horizon);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  auto integrand = [&](double a) {
    const double b = m.beta_at(a);
    return b == 0.0 ? 0.0 : b * kernel(a - x0);
  };
  return m.birth_multiplicity * integrate_pieces(integrand, points, {1e-9, 1e-11, 5000});
}

}  // namespace r0kit

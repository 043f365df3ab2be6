#include "r0kit/greens.hpp"

#include "r0kit/quadrature.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <vector>

namespace r0kit {

namespace dev {
namespace {
std::atomic<bool> g_flip_lambda2{false};
}
void set_lambda2_sign_flip(bool enabled) { g_flip_lambda2.store(enabled); }
bool lambda2_sign_flip() { return g_flip_lambda2.load(); }
}  // namespace dev

LambdaPair lambda_pair(double mu, double diffusion) {
  if (!(mu > 0.0)) throw DomainError("lambda_pair: mu must be positive");
  if (!(diffusion > 0.0)) {
    throw DomainError("lambda_pair: D must be positive (pure transport has no lambda pair)");
  }
  const double sqrt_disc = std::sqrt(1.0 + 4.0 * diffusion * mu);
  LambdaPair p;
  p.sqrt_disc = sqrt_disc;
  p.lambda1 = (1.0 + sqrt_disc) / (2.0 * diffusion);
  // 1 - sqrt(1 + 4 D mu) = -4 D mu / (1 + sqrt(...)) avoids cancellation for small D mu.
  p.lambda2 = -2.0 * mu / (1.0 + sqrt_disc);
  if (dev::lambda2_sign_flip()) p.lambda2 = -p.lambda2;
  return p;
}

double mu_over_gamma_integral(const ModelSpec& m, double s, double x) {
  if (x == s) return 0.0;
  if (m.mu.is_constant() && m.gamma.is_constant()) {
    return m.mu.constant_value() / m.gamma.constant_value() * (x - s);
  }
  const double lo = std::min(s, x);
  const double hi = std::max(s, x);
  std::vector<double> points{lo};
  for (const auto* f : {&m.mu, &m.gamma}) {
    for (double b : f->breakpoints()) {
      if (b > lo && b < hi) points.push_back(b);
    }
  }
  points.push_back(hi);
  std::sort(points.begin(), points.end());
  const double value =
      integrate_pieces([&](double y) { return m.mu_at(y) / m.gamma_at(y); }, points,
                       {1e-10, 1e-13, 5000});
  return x >= s ? value : -value;
}

double greens_size(double x, double s, const ModelSpec& m) {
  if (x < s) return 0.0;
  return std::exp(-mu_over_gamma_integral(m, s, x)) / m.gamma_at(x);
}

double greens_age_diffusion(double a, double s, double mu, double diffusion) {
  const auto p = lambda_pair(mu, diffusion);
  double g = -(p.lambda2 / p.lambda1) * std::exp(p.lambda2 * a - p.lambda1 * s);
  if (a >= s) {
    g += std::exp(p.lambda2 * (a - s));
  } else {
    g += std::exp(p.lambda1 * (a - s));
  }
  return g / p.sqrt_disc;
}

double psi_infinity_age(double a, double mu, double diffusion) {
  const auto p = lambda_pair(mu, diffusion);
  return (1.0 - p.lambda2 / p.lambda1) * std::exp(p.lambda2 * a) / p.sqrt_disc;
}

double softened_exp(double x) {
  if (std::abs(x) < 1e-4) {
    // 1 - x/2 + x^2/6 - x^3/24 + x^4/120 - x^5/720
    return 1.0 + x * (-1.0 / 2 + x * (1.0 / 6 + x * (-1.0 / 24 + x * (1.0 / 120 - x / 720))));
  }
  return -std::expm1(-x) / x;
}

double minv_tail_coefficient(int k, double mu, double diffusion) {
  const auto p = lambda_pair(mu, diffusion);
  return softened_exp(p.lambda2 / k) - (p.lambda2 / p.lambda1) * softened_exp(p.lambda1 / k);
}

double minv_indicator(double a, int k, double mu, double diffusion) {
  if (k < 1) throw DomainError("minv_indicator: k must be >= 1");
  const auto p = lambda_pair(mu, diffusion);
  const double kk = k;
  double value = minv_tail_coefficient(k, mu, diffusion) * std::exp(p.lambda2 * a);
  if (a >= 0.0 && a <= 1.0 / kk) {
    const double r = 1.0 / kk - a;
    value += (1.0 - a * kk) * (softened_exp(p.lambda1 * r) - softened_exp(p.lambda2 * r));
  }
  return value / p.sqrt_disc;
}

std::function<double(double)> greens_limit_density(const ModelSpec& m) {
  if (m.diffusion == 0.0) {
    const ModelSpec copy = m;
    return [copy](double x) { return greens_size(x, copy.x0, copy); };
  }
  if (m.is_age_model()) {
    const double mu = m.mu.constant_value();
    const double d = m.diffusion;
    const double x0 = m.x0;
    lambda_pair(mu, d);  // validates the parameters up front
    return [mu, d, x0](double a) { return psi_infinity_age(a - x0, mu, d); };
  }
  throw UnsupportedModel(
      "no closed-form Green's function for this model (D > 0 needs gamma = 1 and constant mu); "
      "use the grid route");
}

}  // namespace r0kit

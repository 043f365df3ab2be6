#include "r0kit/analytic.hpp"

#include "r0kit/greens.hpp"
#include "r0kit/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace r0kit {

namespace {

constexpr double kSmallDiffusion = 1e-8;

std::vector<double> sorted_breakpoints(const ModelSpec& m, double lo, double hi) {
  std::vector<double> points{lo, hi};
  for (const auto* f : {&m.gamma, &m.mu, &m.beta}) {
    for (double b : f->breakpoints()) {
      if (b > lo && b < hi) points.push_back(b);
    }
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

// int_{x0}^inf beta(a) e^{-q (a - x0)} da.
double laplace_of_fertility(const ModelSpec& m, double q) {
  const double x0 = m.x0;
  const auto& family = m.beta.family();
  if (const auto* c = std::get_if<ConstantRate>(&family)) return c->value / q;
  if (const auto* p = std::get_if<ProportionalToMuRate>(&family)) {
    return p->factor * m.mu.constant_value() / q;
  }
  if (const auto* s = std::get_if<StepRate>(&family)) {
    return s->threshold >= x0 ? s->level * std::exp(-q * (s->threshold - x0)) / q
                              : s->level / q;
  }
  if (const auto* p = std::get_if<PowerExpRate>(&family); p != nullptr && x0 == 0.0) {
    return p->scale * std::tgamma(p->power + 1.0) / std::pow(p->rate + q, p->power + 1.0);
  }
  // Quadrature up to the last breakpoint and far enough for the exponential
  // to kill the integrand; a tabulated tail is constant and done exactly.
  double horizon = x0 + 40.0 / q;
  for (double b : m.beta.breakpoints()) horizon = std::max(horizon, b);
  const double fertility_scale = std::max(1.0, m.beta_max());
  while (rate_supremum(m.beta, horizon, kInfinity, &m.mu) * std::exp(-q * (horizon - x0)) >
         1e-16 * fertility_scale) {
    horizon += 10.0 / q;
  }
  auto points = sorted_breakpoints(m, x0, horizon);
  double value = integrate_pieces(
      [&](double a) { return m.beta_at(a) * std::exp(-q * (a - x0)); }, points,
      {1e-12, 1e-13, 10000});
  if (const auto* t = std::get_if<TabulatedRate>(&family); t != nullptr && t->extrapolate) {
    value += t->value.back() * std::exp(-q * (horizon - x0)) / q;
  }
  return value;
}

}  // namespace

double r0_size_closed(const ModelSpec& m) {
  if (m.diffusion != 0.0) throw UnsupportedModel("r0_size_closed needs D = 0");
  if (m.birth_sample_point) {
    throw UnsupportedModel("point-sampled births: use r0_cell_distributed");
  }
  const double x0 = m.x0;
  if (m.gamma.is_constant() && m.mu.is_constant() && m.beta.is_constant()) {
    const double ratio = m.beta.constant_value() / m.mu.constant_value();
    if (m.infinite_domain()) return m.birth_multiplicity * ratio;
    const double exponent = m.mu.constant_value() / m.gamma.constant_value() * (m.x_max - x0);
    return m.birth_multiplicity * ratio * -std::expm1(-exponent);
  }

  // The kernel decays at least like exp(-mu_min (x - x0) / gamma_max).
  const double end =
      m.infinite_domain() ? x0 + 40.0 * m.gamma_max() / m.mu_min() : m.x_max;
  auto points = sorted_breakpoints(m, x0, end);
  // Refine into panels so the accumulated exponent is built incrementally.
  std::vector<double> panels;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    constexpr int kSub = 16;
    for (int j = 0; j < kSub; ++j) {
      panels.push_back(points[i] + (points[i + 1] - points[i]) * j / kSub);
    }
  }
  panels.push_back(points.back());

  double total = 0.0;
  double exponent_at_start = 0.0;
  const QuadratureOptions options{1e-12, 1e-12, 5000};
  for (std::size_t i = 0; i + 1 < panels.size(); ++i) {
    const double a = panels[i];
    const double b = panels[i + 1];
    auto integrand = [&](double x) {
      const double beta = m.beta_at(x);
      if (beta == 0.0) return 0.0;
      return beta / m.gamma_at(x) *
             std::exp(-(exponent_at_start + mu_over_gamma_integral(m, a, x)));
    };
    total += integrate(integrand, a, b, options);
    exponent_at_start += mu_over_gamma_integral(m, a, b);
  }
  return m.birth_multiplicity * total;
}

CellR0 r0_cell_distributed(const ModelSpec& m, const OffspringLaw& phi) {
  if (m.infinite_domain()) throw UnsupportedModel("cell model needs a bounded domain");
  const double p = m.birth_sample_point.value_or(m.x_max);
  const double lo = m.left();
  const double hi = m.x_max;
  const double scale = m.birth_multiplicity;
  CellR0 out;
  if (const auto* point = std::get_if<PointMass>(&phi)) {
    out.value = point->x <= p ? scale * std::exp(-mu_over_gamma_integral(m, point->x, p)) : 0.0;
    return out;
  }
  const auto& density = std::get<Density>(phi).phi;
  const double mid = 0.5 * (lo + hi);
  const double points[] = {lo, mid, hi};
  const double asymmetry = integrate_pieces(
      [&](double x) { return std::abs(density(x) - density(lo + hi - x)); }, points,
      {1e-12, 1e-10, 5000});
  if (asymmetry > 1e-8) {
    out.warnings.push_back("offspring density is not symmetric about the middle of the domain");
  }
  std::vector<double> pieces{lo};
  if (mid < p) pieces.push_back(mid);
  pieces.push_back(p);
  out.value = scale * integrate_pieces(
                          [&](double s) {
                            return std::exp(-mu_over_gamma_integral(m, s, p)) * density(s);
                          },
                          pieces, {1e-12, 1e-12, 5000});
  return out;
}

double r0_age_diffusion(const ModelSpec& m) {
  if (!m.is_age_model()) {
    throw UnsupportedModel("age-diffusion closed form needs gamma = 1 and constant mu");
  }
  if (m.birth_sample_point) throw UnsupportedModel("age-diffusion model has integral births");
  const double mu = m.mu.constant_value();
  const double d = m.diffusion;
  if (d < 0.0) throw DomainError("negative diffusion");
  // 2 / ((1 + sqrt(1 + 4 D mu)) |lambda2|) == 1 / mu identically, so constant
  // fertility needs no roots at all.
  if (m.beta.is_constant()) return m.birth_multiplicity * m.beta.constant_value() / mu;
  if (m.beta.is_proportional()) {
    return m.birth_multiplicity * std::get<ProportionalToMuRate>(m.beta.family()).factor;
  }
  double prefactor = 1.0;
  double decay = mu;
  if (d >= kSmallDiffusion) {
    const auto p = lambda_pair(mu, d);
    prefactor = 2.0 / (1.0 + p.sqrt_disc);
    decay = -p.lambda2;
  }
  return m.birth_multiplicity * prefactor * laplace_of_fertility(m, decay);
}

double r0_quadratic_beta(double beta0, double mu, double diffusion) {
  if (!(mu > 0.0) || diffusion < 0.0) throw DomainError("r0_quadratic_beta: need mu > 0, D >= 0");
  const double root = std::sqrt(1.0 + 4.0 * mu * diffusion);
  // (2D + root - 1) = D (2 + 4 mu / (1 + root)); the D^3 factors cancel.
  const double bracket = 2.0 + 4.0 * mu / (1.0 + root);
  return 32.0 * beta0 / (bracket * bracket * bracket * (1.0 + root));
}

double r0_step_beta(double beta0, double mu, double diffusion) {
  if (!(mu > 0.0) || diffusion < 0.0) throw DomainError("r0_step_beta: need mu > 0, D >= 0");
  if (diffusion == 0.0) return beta0 / mu * std::exp(-mu);
  const double root = std::sqrt(1.0 + 4.0 * mu * diffusion);
  // (1 - root) / 2D = -2 mu / (1 + root)
  return beta0 / mu * std::exp(-2.0 * mu / (1.0 + root));
}

std::string to_string(OptimumKind kind) {
  switch (kind) {
    case OptimumKind::Interior:
      return "interior";
    case OptimumKind::LowerBoundary:
      return "boundary-lower";
    case OptimumKind::UpperBoundary:
      return "boundary-upper";
    case OptimumKind::Flat:
      return "flat";
  }
  return "unknown";
}

DiffusionOptimum optimal_diffusion(const RateFunction& beta, double mu) {
  ModelSpec m;
  m.beta = beta;
  m.mu = RateFunction::constant(mu);
  auto objective = [&](double log_d) {
    m.diffusion = std::exp(log_d);
    return r0_age_diffusion(m);
  };
  const double lo = std::log(1e-6);
  const double hi = std::log(1e6);
  constexpr int kScan = 241;
  std::vector<double> values(kScan);
  int best = 0;
  for (int i = 0; i < kScan; ++i) {
    values[static_cast<std::size_t>(i)] = objective(lo + (hi - lo) * i / (kScan - 1));
    if (values[static_cast<std::size_t>(i)] > values[static_cast<std::size_t>(best)]) best = i;
  }
  const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  DiffusionOptimum out;
  if (*max_it - *min_it <= 1e-12 * std::max(1.0, std::abs(*max_it))) {
    out.kind = OptimumKind::Flat;
    out.d_star = 1.0;
    out.r0_star = *max_it;
    return out;
  }
  if (best == 0 || best == kScan - 1) {
    out.kind = best == 0 ? OptimumKind::LowerBoundary : OptimumKind::UpperBoundary;
    out.d_star = best == 0 ? 1e-6 : 1e6;
    out.r0_star = values[static_cast<std::size_t>(best)];
    return out;
  }

  const double step = (hi - lo) / (kScan - 1);
  double a = lo + (best - 1) * step;
  double b = lo + (best + 1) * step;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  // Stop once the bracket is below 1e-8 in D (relative width times D).
  while ((std::exp(b) - std::exp(a)) > 1e-9) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = objective(d);
    }
    if (b - a < 1e-15) break;
  }
  out.kind = OptimumKind::Interior;
  out.d_star = std::exp(0.5 * (a + b));
  out.r0_star = objective(0.5 * (a + b));
  return out;
}

R0Report r0_analytic(const ModelSpec& m) {
  R0Report report;
  report.method = R0Method::Analytic;
  if (m.birth_sample_point) {
    report.value = r0_cell_distributed(m, PointMass{m.x0}).value;
  } else if (m.diffusion == 0.0) {
    report.value = r0_size_closed(m);
  } else if (m.is_age_model()) {
    report.value = r0_age_diffusion(m);
  } else {
    throw UnsupportedModel("no closed form for D > 0 with non-constant gamma or mu");
  }
  return report;
}

}  // namespace r0kit

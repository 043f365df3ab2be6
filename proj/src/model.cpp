#include "r0kit/model.hpp"

#include "r0kit/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace r0kit {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double power_exp_value(const PowerExpRate& p, double x) {
  if (x == 0.0) return p.power == 0.0 ? p.scale : 0.0;
  return p.scale * std::pow(x, p.power) * std::exp(-p.rate * x);
}

// Limit of scale * x^n * exp(-r x) as x -> infinity.
double power_exp_at_infinity(const PowerExpRate& p) {
  if (p.scale == 0.0) return 0.0;
  double magnitude;
  if (p.rate > 0.0) {
    magnitude = 0.0;
  } else if (p.rate == 0.0 && p.power == 0.0) {
    magnitude = std::abs(p.scale);
  } else if (p.rate == 0.0 && p.power < 0.0) {
    magnitude = 0.0;
  } else {
    magnitude = kInfinity;
  }
  return p.scale > 0.0 ? magnitude : -magnitude;
}

double table_value(const TabulatedRate& t, double x) {
  if (t.x.empty()) throw DomainError("tabulated rate has no nodes");
  if (x < t.x.front() || x > t.x.back()) {
    if (!t.extrapolate) {
      std::ostringstream msg;
      msg << "x = " << x << " outside tabulated range [" << t.x.front() << ", " << t.x.back()
          << "]";
      throw DomainError(msg.str());
    }
    return x < t.x.front() ? t.value.front() : t.value.back();
  }
  const auto it = std::upper_bound(t.x.begin(), t.x.end(), x);
  if (it == t.x.end()) return t.value.back();
  const auto i = static_cast<std::size_t>(it - t.x.begin());
  const double x1 = t.x[i - 1];
  const double x2 = t.x[i];
  const double w = (x - x1) / (x2 - x1);
  return (1.0 - w) * t.value[i - 1] + w * t.value[i];
}

// Candidate points where a rate can attain its extrema on [lo, hi].
std::vector<double> extremum_values(const RateFunction& f, double lo, double hi,
                                    const RateFunction* reference, bool want_min) {
  return std::visit(
      Overloaded{
          [&](const ConstantRate& c) { return std::vector<double>{c.value}; },
          [&](const PowerExpRate& p) {
            std::vector<double> v{power_exp_value(p, lo)};
            v.push_back(std::isinf(hi) ? power_exp_at_infinity(p) : power_exp_value(p, hi));
            if (p.rate > 0.0) {
              const double critical = p.power / p.rate;
              if (critical > lo && critical < hi) v.push_back(power_exp_value(p, critical));
            }
            return v;
          },
          [&](const StepRate& s) {
            std::vector<double> v;
            if (lo < s.threshold) v.push_back(0.0);
            if (hi >= s.threshold) v.push_back(s.level);
            return v;
          },
          [&](const ProportionalToMuRate& p) {
            if (reference == nullptr || reference->is_proportional()) {
              throw DomainError("proportional rate needs a mortality reference");
            }
            const bool flip = p.factor < 0.0;
            const double base = (want_min != flip) ? rate_infimum(*reference, lo, hi)
                                                   : rate_supremum(*reference, lo, hi);
            return std::vector<double>{p.factor * base};
          },
          [&](const TabulatedRate& t) {
            std::vector<double> v;
            const double a = t.extrapolate ? lo : std::max(lo, t.x.front());
            const double b = t.extrapolate ? hi : std::min(hi, t.x.back());
            v.push_back(table_value(t, a));
            v.push_back(std::isinf(b) ? t.value.back() : table_value(t, b));
            for (std::size_t i = 0; i < t.x.size(); ++i) {
              if (t.x[i] > a && t.x[i] < b) v.push_back(t.value[i]);
            }
            return v;
          },
      },
      f.family());
}

}  // namespace

double RateFunction::constant_value() const {
  if (const auto* c = std::get_if<ConstantRate>(&family_)) return c->value;
  throw UnsupportedModel("rate " + describe() + " is not constant");
}

std::vector<double> RateFunction::breakpoints() const {
  if (const auto* s = std::get_if<StepRate>(&family_)) return {s->threshold};
  if (const auto* t = std::get_if<TabulatedRate>(&family_)) return t->x;
  return {};
}

std::string RateFunction::describe() const {
  std::ostringstream out;
  std::visit(Overloaded{
                 [&](const ConstantRate& c) { out << "const:" << c.value; },
                 [&](const PowerExpRate& p) {
                   out << "powexp:" << p.scale << "," << p.power << "," << p.rate;
                 },
                 [&](const StepRate& s) { out << "step:" << s.threshold << "," << s.level; },
                 [&](const ProportionalToMuRate& p) { out << "prop_mu:" << p.factor; },
                 [&](const TabulatedRate& t) { out << "table(" << t.x.size() << " nodes)"; },
             },
             family_);
  return out.str();
}

double evaluate_rate(const RateFunction& f, double x, const RateFunction* reference) {
  return std::visit(
      Overloaded{
          [](const ConstantRate& c) { return c.value; },
          [x](const PowerExpRate& p) { return power_exp_value(p, x); },
          [x](const StepRate& s) { return x >= s.threshold ? s.level : 0.0; },
          [x, reference](const ProportionalToMuRate& p) {
            if (reference == nullptr || reference->is_proportional()) {
              throw DomainError("proportional rate needs a mortality reference");
            }
            return p.factor * evaluate_rate(*reference, x);
          },
          [x](const TabulatedRate& t) { return table_value(t, x); },
      },
      f.family());
}

double rate_infimum(const RateFunction& f, double lo, double hi, const RateFunction* reference) {
  const auto v = extremum_values(f, lo, hi, reference, true);
  return *std::min_element(v.begin(), v.end());
}

double rate_supremum(const RateFunction& f, double lo, double hi, const RateFunction* reference) {
  const auto v = extremum_values(f, lo, hi, reference, false);
  return *std::max_element(v.begin(), v.end());
}

bool ModelSpec::is_age_model() const {
  return gamma.is_constant() && gamma.constant_value() == 1.0 && mu.is_constant();
}

// ---------------------------------------------------------------------------

namespace {

void check_table(const std::string& name, const RateFunction& f, std::vector<Violation>& out) {
  const auto* t = std::get_if<TabulatedRate>(&f.family());
  if (t == nullptr) return;
  if (t->x.empty() || t->x.size() != t->value.size()) {
    out.push_back({name + "_table_shape", name + " table must have matching, non-empty columns"});
    return;
  }
  for (std::size_t i = 1; i < t->x.size(); ++i) {
    if (!(t->x[i] > t->x[i - 1])) {
      out.push_back({name + "_table_order", name + " table nodes not strictly increasing"});
      break;
    }
  }
  for (double v : t->value) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      out.push_back({name + "_table_values", name + " table values must be finite and >= 0"});
      break;
    }
  }
}

bool table_ok(const RateFunction& f) {
  const auto* t = std::get_if<TabulatedRate>(&f.family());
  if (t == nullptr) return true;
  if (t->x.empty() || t->x.size() != t->value.size()) return false;
  for (std::size_t i = 1; i < t->x.size(); ++i) {
    if (!(t->x[i] > t->x[i - 1])) return false;
  }
  return true;
}

}  // namespace

std::vector<Violation> validate_model(const ModelSpec& m) {
  std::vector<Violation> out;
  const double left = m.left();

  if (!std::isfinite(m.x0) || !std::isfinite(left)) {
    out.push_back({"domain", "x0 and x_min must be finite"});
    return out;
  }
  if (!(m.x0 < m.x_max)) out.push_back({"domain", "x0 must be smaller than x_max"});
  if (m.x0 < left) out.push_back({"domain", "x0 must not lie left of x_min"});
  if (!(m.diffusion >= 0.0) || !std::isfinite(m.diffusion)) {
    out.push_back({"diffusion", "diffusion coefficient must be finite and >= 0"});
  }
  if (!(m.birth_multiplicity > 0.0) || !std::isfinite(m.birth_multiplicity)) {
    out.push_back({"multiplicity", "birth multiplicity must be positive"});
  }
  if (m.birth_sample_point) {
    const double p = *m.birth_sample_point;
    if (!(p >= left && p <= m.x_max) || !std::isfinite(p)) {
      out.push_back({"sample_point", "birth sample point must lie in the domain"});
    }
  }
  if (!out.empty() && out.front().code == "domain") return out;

  check_table("gamma", m.gamma, out);
  check_table("mu", m.mu, out);
  check_table("beta", m.beta, out);

  if (m.gamma.is_proportional()) {
    out.push_back({"gamma_family", "growth rate cannot be proportional to mortality"});
  }
  if (m.mu.is_proportional()) {
    out.push_back({"mu_family", "mortality cannot be proportional to itself"});
  }
  if (!out.empty()) return out;

  const double hi = m.x_max;
  if (table_ok(m.gamma) && !(rate_infimum(m.gamma, left, hi) > 0.0)) {
    out.push_back({"gamma_min", "growth rate not bounded below by positive constant"});
  }
  if (table_ok(m.mu) && !(rate_infimum(m.mu, left, hi) > 0.0)) {
    out.push_back({"mu_min", "mortality not bounded below by positive constant"});
  }
  if (table_ok(m.beta)) {
    if (rate_infimum(m.beta, left, hi, &m.mu) < 0.0) {
      out.push_back({"beta_sign", "fertility negative"});
    }
    if (!std::isfinite(rate_supremum(m.beta, left, hi, &m.mu))) {
      out.push_back({"beta_bound", "fertility unbounded"});
    }
  }

  // Dense sampling catches non-finite values the family bounds cannot see.
  double right = hi;
  if (std::isinf(right)) {
    right = left + 100.0;
    for (const auto* f : {&m.gamma, &m.mu, &m.beta}) {
      for (double b : f->breakpoints()) right = std::max(right, b + 1.0);
    }
  }
  std::vector<double> samples;
  constexpr int kSamples = 1024;
  for (int i = 0; i < kSamples; ++i) {
    samples.push_back(left + (right - left) * i / (kSamples - 1));
  }
  for (const auto* f : {&m.gamma, &m.mu, &m.beta}) {
    for (double b : f->breakpoints()) {
      if (b >= left && b <= right) samples.push_back(b);
    }
  }
  bool finite = true;
  for (double x : samples) {
    if (!std::isfinite(m.gamma_at(x)) || !std::isfinite(m.mu_at(x)) ||
        !std::isfinite(m.beta_at(x))) {
      finite = false;
      break;
    }
  }
  if (!finite) out.push_back({"finite", "a rate evaluates to a non-finite value"});
  return out;
}

void require_valid(const ModelSpec& m) {
  const auto violations = validate_model(m);
  if (violations.empty()) return;
  std::string msg = "invalid model:";
  for (const auto& v : violations) msg += " " + v.message + ";";
  throw DomainError(msg);
}

// ---------------------------------------------------------------------------
// Mollifiers
// ---------------------------------------------------------------------------

std::string to_string(MollifierKind kind) {
  switch (kind) {
    case MollifierKind::UniformIndicator:
      return "uniform";
    case MollifierKind::SmoothBump:
      return "bump";
    case MollifierKind::Triangular:
      return "triangular";
  }
  return "unknown";
}

MollifierKind mollifier_kind_from_string(const std::string& name) {
  if (name == "uniform") return MollifierKind::UniformIndicator;
  if (name == "bump") return MollifierKind::SmoothBump;
  if (name == "triangular") return MollifierKind::Triangular;
  throw DomainError("unknown mollifier family '" + name + "'");
}

MollifierFamily::MollifierFamily(MollifierKind kind, double x0, double domain_left,
                                 double domain_right)
    : kind_(kind),
      x0_(x0),
      lo_(domain_left),
      hi_(domain_right),
      cache_(std::make_shared<BumpCache>()) {
  if (!(x0 >= domain_left && x0 < domain_right)) {
    throw DomainError("mollifier centre must lie in the domain");
  }
  if (std::isfinite(domain_right)) {
    window_lo_ = domain_left;
    window_hi_ = domain_right;
  } else {
    window_lo_ = domain_left;
    window_hi_ = std::max(domain_left + 1.0, 2.0 * x0 - domain_left);
  }
}

double MollifierFamily::raw_value(int k, double x) const {
  const double kk = k;
  switch (kind_) {
    case MollifierKind::UniformIndicator:
      return (x >= x0_ && x <= x0_ + 1.0 / kk) ? kk : 0.0;
    case MollifierKind::Triangular:
      return std::max(0.0, kk - kk * kk * std::abs(x - x0_));
    case MollifierKind::SmoothBump: {
      const double w = (x - window_lo_) * (window_hi_ - x);
      if (w <= 0.0) return 0.0;
      return bump_normaliser(k) * w * std::exp(-kk * std::abs(x - x0_));
    }
  }
  return 0.0;
}

double MollifierFamily::bump_normaliser(int k) const {
  std::lock_guard lock(cache_->mutex);
  auto it = cache_->normaliser.find(k);
  if (it != cache_->normaliser.end()) return it->second;
  const double kk = k;
  auto shape = [&](double x) {
    return (x - window_lo_) * (window_hi_ - x) * std::exp(-kk * std::abs(x - x0_));
  };
  const double points[] = {window_lo_, x0_, window_hi_};
  const double integral = integrate_pieces(shape, points, {1e-16, 1e-14, 20000});
  const double a = 1.0 / integral;
  cache_->normaliser.emplace(k, a);
  return a;
}

double MollifierFamily::raw_mass(int k, double a, double b) const {
  const auto [s_lo, s_hi] = support(k);
  a = std::max({a, lo_, s_lo});
  b = std::min({b, hi_, s_hi});
  if (!(b > a)) return 0.0;
  const double kk = k;
  switch (kind_) {
    case MollifierKind::UniformIndicator:
      return kk * (b - a);
    case MollifierKind::Triangular: {
      // Antiderivative of the hat, measured from its left foot.
      auto cumulative = [kk](double u) {
        u = std::clamp(u, -1.0 / kk, 1.0 / kk);
        return u <= 0.0 ? 0.5 * (1.0 + kk * u) * (1.0 + kk * u)
                        : 1.0 - 0.5 * (1.0 - kk * u) * (1.0 - kk * u);
      };
      return cumulative(b - x0_) - cumulative(a - x0_);
    }
    case MollifierKind::SmoothBump: {
      const double norm = bump_normaliser(k);
      auto shape = [&](double x) {
        return (x - window_lo_) * (window_hi_ - x) * std::exp(-kk * std::abs(x - x0_));
      };
      std::vector<double> points{a};
      if (x0_ > a && x0_ < b) points.push_back(x0_);
      points.push_back(b);
      return norm * integrate_pieces(shape, points, {1e-15 / norm, 1e-13, 20000});
    }
  }
  return 0.0;
}

double MollifierFamily::truncation_mass(int k) const {
  if (kind_ == MollifierKind::SmoothBump) return 1.0;
  return raw_mass(k, lo_, hi_);
}

std::pair<double, double> MollifierFamily::support(int k) const {
  const double width = 1.0 / k;
  switch (kind_) {
    case MollifierKind::UniformIndicator:
      return {x0_, std::min(hi_, x0_ + width)};
    case MollifierKind::Triangular:
      return {std::max(lo_, x0_ - width), std::min(hi_, x0_ + width)};
    case MollifierKind::SmoothBump:
      return {window_lo_, window_hi_};
  }
  return {x0_, x0_};
}

double MollifierFamily::operator()(int k, double x) const {
  if (k < 1) throw DomainError("mollifier index k must be >= 1");
  if (x < lo_ || x > hi_) return 0.0;
  return raw_value(k, x) / truncation_mass(k);
}

double MollifierFamily::mass(int k, double a, double b) const {
  if (k < 1) throw DomainError("mollifier index k must be >= 1");
  return raw_mass(k, a, b) / truncation_mass(k);
}

double mollifier_eval(const MollifierFamily& family, int k, double x) { return family(k, x); }

}  // namespace r0kit

#pragma once

#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace r0kit {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class UnsupportedModel : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Rate functions
// ---------------------------------------------------------------------------

struct ConstantRate {
  double value = 0.0;
};

/// scale * x^power * exp(-rate * x)
struct PowerExpRate {
  double scale = 0.0;
  double power = 0.0;
  double rate = 0.0;
};

/// 0 for x < threshold, level for x >= threshold.
struct StepRate {
  double threshold = 0.0;
  double level = 0.0;
};

/// factor * mu(x); only meaningful for fertility.
struct ProportionalToMuRate {
  double factor = 0.0;
};

/// Piecewise linear through (x, value) nodes, constant beyond the end nodes
/// when `extrapolate` is set.
struct TabulatedRate {
  std::vector<double> x;
  std::vector<double> value;
  bool extrapolate = true;
};

class RateFunction {
 public:
  using Family =
      std::variant<ConstantRate, PowerExpRate, StepRate, ProportionalToMuRate, TabulatedRate>;

  RateFunction() : family_(ConstantRate{0.0}) {}
  RateFunction(Family family) : family_(std::move(family)) {}  // NOLINT(implicit)

  static RateFunction constant(double c) { return RateFunction(ConstantRate{c}); }
  static RateFunction power_exp(double c, double n, double r) {
    return RateFunction(PowerExpRate{c, n, r});
  }
  static RateFunction step(double threshold, double level) {
    return RateFunction(StepRate{threshold, level});
  }
  static RateFunction proportional_to_mu(double factor) {
    return RateFunction(ProportionalToMuRate{factor});
  }
  static RateFunction tabulated(std::vector<double> x, std::vector<double> value,
                                bool extrapolate = true) {
    return RateFunction(TabulatedRate{std::move(x), std::move(value), extrapolate});
  }

  const Family& family() const { return family_; }

  bool is_constant() const { return std::holds_alternative<ConstantRate>(family_); }
  bool is_proportional() const { return std::holds_alternative<ProportionalToMuRate>(family_); }
  /// Value of a ConstantRate; throws otherwise.
  double constant_value() const;

  /// Points where the function has a jump or a kink (step thresholds,
  /// table nodes). Quadrature splits panels there.
  std::vector<double> breakpoints() const;

  std::string describe() const;

 private:
  Family family_;
};

/// Evaluates a self-contained rate family at x. ProportionalToMu needs the
/// mortality it refers to; pass it as `reference` or a DomainError is thrown.
/// Tabulated rates with extrapolation disabled throw outside the node range.
double evaluate_rate(const RateFunction& f, double x, const RateFunction* reference = nullptr);

/// Exact infimum / supremum of a rate over [lo, hi] (hi may be +infinity),
/// from the closed form of each family.
double rate_infimum(const RateFunction& f, double lo, double hi,
                    const RateFunction* reference = nullptr);
double rate_supremum(const RateFunction& f, double lo, double hi,
                     const RateFunction* reference = nullptr);

// ---------------------------------------------------------------------------
// Model specification
// ---------------------------------------------------------------------------

/// A linear structured population model with a concentrated state at birth.
///
/// The structuring variable lives on [left(), x_max). Newborns are placed at
/// x0, which is either the left endpoint (age/size models) or an interior
/// point (the symmetric cell-division model). Births are counted by
///   L u = multiplicity * integral beta(x) u(x) dx      (no sample point), or
///   L u = multiplicity * gamma(p) u(p)                 (sample point p).
struct ModelSpec {
  double x0 = 0.0;
  /// Left end of the domain; defaults to x0 when unset.
  std::optional<double> x_min;
  double x_max = kInfinity;
  RateFunction gamma = RateFunction::constant(1.0);
  RateFunction mu = RateFunction::constant(1.0);
  RateFunction beta = RateFunction::constant(0.0);
  double diffusion = 0.0;
  double birth_multiplicity = 1.0;
  std::optional<double> birth_sample_point;
  /// sigma(x) of the nonlinear models, kept for completeness; no operation reads it.
  std::optional<RateFunction> size_weight;

  double left() const { return x_min.value_or(x0); }
  bool infinite_domain() const { return x_max == kInfinity; }

  double gamma_at(double x) const { return evaluate_rate(gamma, x); }
  double mu_at(double x) const { return evaluate_rate(mu, x); }
  double beta_at(double x) const { return evaluate_rate(beta, x, &mu); }

  double gamma_min() const { return rate_infimum(gamma, left(), x_max); }
  double gamma_max() const { return rate_supremum(gamma, left(), x_max); }
  double mu_min() const { return rate_infimum(mu, left(), x_max); }
  double mu_max() const { return rate_supremum(mu, left(), x_max); }
  double beta_max() const { return rate_supremum(beta, left(), x_max, &mu); }

  /// Age-type model: gamma == 1 and mu constant.
  bool is_age_model() const;
};

struct Violation {
  std::string code;
  std::string message;
};

/// Checks the standing assumptions. Violations are returned, never thrown.
std::vector<Violation> validate_model(const ModelSpec& m);

/// Throws DomainError listing all violations when the model is invalid.
void require_valid(const ModelSpec& m);

// ---------------------------------------------------------------------------
// Concentrating offspring densities
// ---------------------------------------------------------------------------

enum class MollifierKind { UniformIndicator, SmoothBump, Triangular };

std::string to_string(MollifierKind kind);
MollifierKind mollifier_kind_from_string(const std::string& name);

/// A sequence phi_k of unit-mass densities concentrating at x0 as k grows.
///
///   UniformIndicator  k on [x0, x0 + 1/k]
///   SmoothBump        a_k w(x) exp(-k |x - x0|), w a parabola vanishing at
///                     the ends of a window around x0 (x(1-x) on (0,1))
///   Triangular        hat of half-width 1/k centred at x0
///
/// Every member is truncated to the model domain and renormalised there.
/// Copies share the SmoothBump normalisation cache; it is guarded so
/// concurrent evaluation is safe.
class MollifierFamily {
 public:
  MollifierFamily(MollifierKind kind, double x0, double domain_left, double domain_right);
  MollifierFamily(MollifierKind kind, const ModelSpec& m)
      : MollifierFamily(kind, m.x0, m.left(), m.x_max) {}

  MollifierKind kind() const { return kind_; }
  double x0() const { return x0_; }

  /// phi_k(x); zero outside the domain.
  double operator()(int k, double x) const;

  /// Integral of phi_k over [a, b] (clipped to the domain).
  double mass(int k, double a, double b) const;

  /// Closed interval outside of which phi_k vanishes.
  std::pair<double, double> support(int k) const;

 private:
  double bump_normaliser(int k) const;
  double raw_mass(int k, double a, double b) const;
  double raw_value(int k, double x) const;
  double truncation_mass(int k) const;

  struct BumpCache {
    std::mutex mutex;
    std::map<int, double> normaliser;
  };

  MollifierKind kind_;
  double x0_;
  double lo_;
  double hi_;
  double window_lo_;
  double window_hi_;
  std::shared_ptr<BumpCache> cache_;
};

double mollifier_eval(const MollifierFamily& family, int k, double x);

}  // namespace r0kit

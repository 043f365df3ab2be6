#pragma once

#include "r0kit/model.hpp"
#include "r0kit/nextgen.hpp"

#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace r0kit {

/// R0 = multiplicity * int (beta/gamma) exp(-int_{x0}^x mu/gamma) dx for the
/// pure-transport size model (D = 0).
double r0_size_closed(const ModelSpec& m);

/// Offspring-size law for the cell-division model.
struct PointMass {
  double x = 0.5;
};
struct Density {
  std::function<double(double)> phi;
};
using OffspringLaw = std::variant<PointMass, Density>;

struct CellR0 {
  double value = 0.0;
  std::vector<std::string> warnings;
};

/// R0 = multiplicity * int_0^p exp(-int_s^p mu/gamma) phi(s) ds, p the
/// division size (the sample point). Warns when phi is not symmetric about
/// the middle of the domain, which mass conservation in division requires.
CellR0 r0_cell_distributed(const ModelSpec& m, const OffspringLaw& phi);

/// R0 of the age-diffusion model:
///   (2 / (1 + sqrt(1 + 4 D mu))) int beta(a) e^{lambda2 a} da,
/// in closed form for constant, power-exponential and step fertility. Below
/// D = 1e-8 the D -> 0 limit int beta e^{-mu a} da is used instead.
double r0_age_diffusion(const ModelSpec& m);

/// Fertility beta0 a^2 e^{-a}:
///   32 beta0 D^3 / ((2D + sqrt(1+4 mu D) - 1)^3 (1 + sqrt(1+4 mu D))).
double r0_quadratic_beta(double beta0, double mu, double diffusion);

/// Fertility beta0 for a >= 1, zero before: (beta0/mu) e^{(1 - sqrt(1+4 mu D))/2D},
/// and (beta0/mu) e^{-mu} at D = 0.
double r0_step_beta(double beta0, double mu, double diffusion);

enum class OptimumKind { Interior, LowerBoundary, UpperBoundary, Flat };

std::string to_string(OptimumKind kind);

struct DiffusionOptimum {
  double d_star = 0.0;
  double r0_star = 0.0;
  OptimumKind kind = OptimumKind::Interior;
};

/// Maximises r0_age_diffusion over D in [1e-6, 1e6] by a log-scale scan
/// followed by golden-section refinement (tolerance 1e-8 in D).
DiffusionOptimum optimal_diffusion(const RateFunction& beta, double mu);

/// Dispatches to the closed form that matches the model: point mass at x0
/// for a sample-point model, r0_size_closed for D = 0, r0_age_diffusion for
/// the age-diffusion model. Throws UnsupportedModel otherwise.
R0Report r0_analytic(const ModelSpec& m);

}  // namespace r0kit

#pragma once

#include "r0kit/model.hpp"

#include <functional>

namespace r0kit {

/// Characteristic roots of D l^2 - l - mu = 0, the exponents of the
/// age-diffusion Green's function.
struct LambdaPair {
  double lambda1 = 0.0;    ///< (1 + sqrt_disc) / 2D > 0
  double lambda2 = 0.0;    ///< (1 - sqrt_disc) / 2D < 0
  double sqrt_disc = 0.0;  ///< sqrt(1 + 4 D mu)
};

/// Throws DomainError unless mu > 0 and D > 0; pure transport has no pair.
LambdaPair lambda_pair(double mu, double diffusion);

/// Integral of mu/gamma over [s, x]; exact for constant rates, adaptive
/// Gauss-Kronrod (absolute tolerance 1e-10) otherwise.
double mu_over_gamma_integral(const ModelSpec& m, double s, double x);

/// Green's function of the pure-transport operator (gamma u)' + mu u:
/// exp(-int_s^x mu/gamma) / gamma(x) for x >= s, zero for x < s.
double greens_size(double x, double s, const ModelSpec& m);

/// Green's function of v' + mu v - D v'' with v(0) = D v'(0) on [0, inf).
/// The diagonal a == s is counted once, on the e^{lambda2 (a - s)} branch.
double greens_age_diffusion(double a, double s, double mu, double diffusion);

/// psi_inf(a) = G(a, 0) = 2 e^{lambda2 a} / (1 + sqrt(1 + 4 D mu)).
double psi_infinity_age(double a, double mu, double diffusion);

/// F(x) = (1 - e^{-x}) / x, F(0) = 1. Uses a six-term series for |x| < 1e-4.
double softened_exp(double x);

/// Closed-form image of k 1_[0,1/k] under the inverse age-diffusion operator.
double minv_indicator(double a, int k, double mu, double diffusion);

/// The k-dependent coefficient F(lambda2/k) - (lambda2/lambda1) F(lambda1/k)
/// of the exponential tail of minv_indicator; decreasing in k.
double minv_tail_coefficient(int k, double mu, double diffusion);

/// a -> G(a, x0) for the two closed-form cases: D = 0 transport, or the
/// age-diffusion model (gamma = 1, constant mu). Anything else throws
/// UnsupportedModel; use the grid solver in discrete.hpp instead.
std::function<double(double)> greens_limit_density(const ModelSpec& m);

namespace dev {
/// Mutation switch for `r0kit validate --dev-mutate-lambda2`: flips the sign
/// of lambda2 so the acceptance checks can be seen to fail.
void set_lambda2_sign_flip(bool enabled);
bool lambda2_sign_flip();
}  // namespace dev

}  // namespace r0kit

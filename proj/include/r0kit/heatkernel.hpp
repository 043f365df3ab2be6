#pragma once

#include "r0kit/model.hpp"

#include <optional>

namespace r0kit {

/// Heat-kernel Green's function on [0, inf) for u_t = D u_aa with the
/// Robin condition u(0) - 2D u_a(0) = 0. The erfc term is evaluated through
/// erfcx so that exp(t/4D + (a+s)/2D) is never formed.
double g_x30(double a, double s, double t, double diffusion);

/// Kernel of the zero-fertility age-diffusion semigroup,
/// G0 = exp(a/2D - (mu + 1/4D) t - s/2D) G_X30, with the exponents merged:
///   e^{-mu t} [ e^{-(a-s-t)^2/4Dt} / (2 sqrt(pi D t))
///             + e^{-(a+s-t)^2/4Dt - s/D} (1/(2 sqrt(pi D t)) - erfcx(z)/(2D)) ]
/// with z = (a+s+t) / (2 sqrt(D t)).
double g0(double a, double s, double t, double mu, double diffusion);

struct IdentityCheck {
  double lhs = 0.0;  ///< quadrature of int_0^inf e^{-mu t} e^{-(a-t)^2/4Dt} / sqrt(pi D t) dt
  double rhs = 0.0;  ///< 2 e^{(a/2D)(1 - sqrt(1+4D mu))} / sqrt(1+4D mu)
};

/// Evaluates both sides of the completing-squares identity. The time
/// integral is truncated at T* = max(10a, 50/mu).
IdentityCheck integral_identity_check(double a, double mu, double diffusion);

/// Time truncation T* = max(10 a, 50 / mu) used by every time integral here.
double time_truncation(double a, double mu);

/// Closed form of int_0^inf G0(a, 0, t) dt:
///   2 e^{lambda2 a}/sqrt(1+4D mu) - e^{lambda2 a}/(2 mu D) (1 - 1/sqrt(1+4 mu D)).
double time_integrated_kernel(double a, double mu, double diffusion);

/// The same time integral of G0(a, s, .) evaluated by adaptive quadrature.
double time_integrated_kernel_quadrature(double a, double s, double mu, double diffusion);

/// R0 through the semigroup: int beta(a) int_0^inf G0(a, s, t) dt da with
/// s = 0 in the limit (k = nullopt), or averaged over s in [0, 1/k] for a
/// finite k. All integrals are nested adaptive quadratures; the outer one
/// is truncated where beta(a) e^{lambda2 a} < 1e-14.
///
/// Requires gamma = 1 and constant mu with D > 0.
double r0_time_domain(const ModelSpec& m, std::optional<int> k = std::nullopt);

/// Smallest A with sup_{a >= A} beta(a) e^{lambda2 (a - x0)} < 1e-14 * max(1, sup beta).
double fertility_truncation(const ModelSpec& m, double lambda2);

}  // namespace r0kit

#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>

namespace r0kit {

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-12;
  int max_intervals = 5000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

using Integrand = std::function<double(double)>;

/// Globally adaptive Gauss-Kronrod (21-point) quadrature on a finite
/// interval. The worst interval is bisected until the summed error estimate
/// drops below max(abs_tol, rel_tol * |integral|).
///
/// Throws QuadratureError when the interval budget runs out.
QuadratureResult integrate_adaptive(const Integrand& f, double a, double b,
                                    const QuadratureOptions& options = {});

double integrate(const Integrand& f, double a, double b,
                 const QuadratureOptions& options = {});

/// Integrates over consecutive pieces [p0,p1], [p1,p2], ... so that known
/// kinks and jumps of the integrand never fall inside a panel. Each piece
/// gets the full tolerance budget divided by the number of pieces.
double integrate_pieces(const Integrand& f, std::span<const double> points,
                        const QuadratureOptions& options = {});

}  // namespace r0kit

#include "r0kit/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace r0kit {

namespace {

struct Panel {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

Panel evaluate_panel(const Integrand& f, double a, double b) {
  using Rule = boost::math::quadrature::gauss_kronrod<double, 21>;
  double error = 0.0;
  // max_depth = 0 gives a single Kronrod evaluation. Boost reports |K - G|
  // on the reference interval [-1, 1], so it is scaled to [a, b] here.
  const double value = Rule::integrate(f, a, b, 0, 0.0, &error);
  return Panel{a, b, value, 0.5 * (b - a) * error};
}

}  // namespace

QuadratureResult integrate_adaptive(const Integrand& f, double a, double b,
                                    const QuadratureOptions& options) {
  if (a == b) return {};
  if (!(std::isfinite(a) && std::isfinite(b))) {
    throw QuadratureError("integrate_adaptive: bounds must be finite");
  }
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }

  std::priority_queue<Panel> panels;
  Panel first = evaluate_panel(f, a, b);
  double total = first.value;
  double total_error = first.error;
  panels.push(first);
  int count = 1;

  auto converged = [&] {
    return total_error <= std::max(options.abs_tol, options.rel_tol * std::abs(total));
  };

  while (!converged()) {
    if (count >= options.max_intervals) {
      throw QuadratureError("adaptive quadrature did not converge on [" + std::to_string(a) +
                            ", " + std::to_string(b) + "]: error estimate " +
                            std::to_string(total_error));
    }
    Panel worst = panels.top();
    // The largest remaining error is round-off: refining further cannot help.
    if (worst.error <= 64.0 * std::numeric_limits<double>::epsilon() * std::abs(worst.value)) {
      break;
    }
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      throw QuadratureError("adaptive quadrature: panel below floating-point resolution");
    }
    panels.pop();
    Panel left = evaluate_panel(f, worst.a, mid);
    Panel right = evaluate_panel(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
    ++count;
  }

  // The running sums drift; recompute from the final panel set.
  double value = 0.0;
  double error = 0.0;
  while (!panels.empty()) {
    value += panels.top().value;
    error += panels.top().error;
    panels.pop();
  }
  return QuadratureResult{sign * value, error, count};
}

double integrate(const Integrand& f, double a, double b, const QuadratureOptions& options) {
  return integrate_adaptive(f, a, b, options).value;
}

double integrate_pieces(const Integrand& f, std::span<const double> points,
                        const QuadratureOptions& options) {
  if (points.size() < 2) return 0.0;
  QuadratureOptions piece = options;
  piece.abs_tol = options.abs_tol / static_cast<double>(points.size() - 1);
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (points[i + 1] > points[i]) sum += integrate(f, points[i], points[i + 1], piece);
  }
  return sum;
}

}  // namespace r0kit

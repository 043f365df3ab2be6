#include "r0kit/nextgen.hpp"

#include "r0kit/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace r0kit {

namespace {

constexpr double kRoundoffFloor = 1e-12;

void require_resolved(const Grid& g, int k) {
  if (k < 1) throw DomainError("k must be >= 1");
  if (g.spacing() > 1.0 / (4.0 * k)) {
    std::ostringstream msg;
    msg << "grid too coarse for k = " << k << ": spacing " << g.spacing() << " > 1/(4k) = "
        << 1.0 / (4.0 * k);
    throw GridTooCoarse(msg.str());
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

BirthFunctional BirthFunctional::from_model(const ModelSpec& m) {
  return BirthFunctional(m.birth_sample_point ? Kind::PointSample : Kind::IntegralBeta, m);
}

std::vector<double> BirthFunctional::weights(const Grid& g) const {
  return birth_functional_weights(model_, g);
}

double BirthFunctional::apply(const Field& u) const { return dot(weights(u.grid), u.values); }

std::string to_string(R0Method method) {
  switch (method) {
    case R0Method::Analytic:
      return "analytic";
    case R0Method::GreenLimit:
      return "green-limit";
    case R0Method::FiniteKSequence:
      return "finite-k";
    case R0Method::TimeDomain:
      return "time-domain";
  }
  return "unknown";
}

std::vector<int> default_k_schedule() { return {8, 16, 32, 64, 128, 256}; }

int max_resolvable_k(const Grid& g) {
  return static_cast<int>(std::floor(1.0 / (4.0 * g.spacing()) * (1.0 + 1e-12)));
}

std::vector<int> resolvable_schedule(const std::vector<int>& schedule, const Grid& g) {
  std::vector<int> out;
  const int k_max = max_resolvable_k(g);
  std::copy_if(schedule.begin(), schedule.end(), std::back_inserter(out),
               [k_max](int k) { return k <= k_max; });
  return out;
}

double r0_rank_one(const ModelSpec& m, const MollifierFamily& family, int k, const Grid& g) {
  require_resolved(g, k);
  const FactoredOperator solver(assemble_operator(m, g));
  const Field phi = sample_mollifier(family, k, g);
  return dot(birth_functional_weights(m, g), solver.solve(std::span<const double>(phi.values)));
}

R0Report extrapolate_sequence(const std::vector<std::pair<int, double>>& sequence) {
  R0Report report;
  report.method = R0Method::GreenLimit;
  report.k_sequence = sequence;
  if (sequence.empty()) throw DomainError("empty k sequence");
  const auto n = sequence.size();
  const double last = sequence.back().second;
  const double floor = kRoundoffFloor * std::max(1.0, std::abs(last));
  report.value = last;

  auto extrapolant = [&](std::size_t i) {
    // First-order Richardson between entries i-1 and i: R = R_k + C/k.
    const double k1 = sequence[i - 1].first;
    const double k2 = sequence[i].first;
    return (k2 * sequence[i].second - k1 * sequence[i - 1].second) / (k2 - k1);
  };

  if (n == 1) {
    report.warnings.push_back("single k value: no extrapolation");
    return report;
  }
  if (n == 2) {
    report.value = extrapolant(1);
    report.extrapolated = true;
    report.extrapolation_error_estimate = std::max(std::abs(report.value - last), floor);
    report.warnings.push_back("two k values: order not fitted");
    return report;
  }

  const double d1 = sequence[n - 2].second - sequence[n - 3].second;
  const double d2 = sequence[n - 1].second - sequence[n - 2].second;
  if (std::abs(d1) <= floor && std::abs(d2) <= floor) {
    // Converged to round-off: nothing left to extrapolate.
    report.extrapolation_error_estimate = floor;
    return report;
  }
  const bool monotone = d1 * d2 > 0.0;
  if (!monotone) report.warnings.push_back("R0_k sequence is not eventually monotone");
  const double ratio = static_cast<double>(sequence[n - 1].first) / sequence[n - 2].first;
  if (monotone) {
    const double order = std::log(d1 / d2) / std::log(ratio);
    report.fitted_order = order;
    if (std::abs(order - 1.0) <= 0.5) {
      report.value = extrapolant(n - 1);
      report.extrapolated = true;
      report.extrapolation_error_estimate =
          std::max(std::abs(report.value - extrapolant(n - 2)), floor);
      return report;
    }
    std::ostringstream msg;
    msg << "fitted order " << order << " is not close to 1: reporting the last R0_k";
    report.warnings.push_back(msg.str());
  }
  report.extrapolation_error_estimate = std::max(std::abs(d2), floor);
  return report;
}

R0Report r0_limit(const ModelSpec& m, const MollifierFamily& family,
                  const std::vector<int>& k_schedule, const Grid& g) {
  if (k_schedule.empty()) throw DomainError("empty k schedule");
  if (!std::is_sorted(k_schedule.begin(), k_schedule.end()) ||
      std::adjacent_find(k_schedule.begin(), k_schedule.end()) != k_schedule.end()) {
    throw DomainError("k schedule must be strictly increasing");
  }
  for (int k : k_schedule) require_resolved(g, k);

  const FactoredOperator solver(assemble_operator(m, g));
  const std::vector<double> weights = birth_functional_weights(m, g);
  const auto values = ordered_parallel_map(k_schedule.size(), [&](std::size_t i) {
    const Field phi = sample_mollifier(family, k_schedule[i], g);
    return dot(weights, solver.solve(std::span<const double>(phi.values)));
  });

  std::vector<std::pair<int, double>> sequence;
  for (std::size_t i = 0; i < k_schedule.size(); ++i) sequence.emplace_back(k_schedule[i], values[i]);
  R0Report report = extrapolate_sequence(sequence);
  report.grid_n = g.n_cells;
  return report;
}

double spectral_radius_power(const std::vector<std::vector<double>>& matrix, double tol,
                             int max_iterations) {
  const std::size_t r = matrix.size();
  if (r == 0) throw DomainError("empty matrix");
  for (const auto& row : matrix) {
    if (row.size() != r) throw DomainError("matrix must be square");
  }
  if (r == 1) return std::abs(matrix[0][0]);

  std::vector<double> x(r, 1.0 / std::sqrt(static_cast<double>(r)));
  double previous = -1.0;
  for (int it = 0; it < max_iterations; ++it) {
    std::vector<double> y(r, 0.0);
    for (std::size_t i = 0; i < r; ++i) y[i] = dot(matrix[i], x);
    const double rayleigh = dot(x, y);
    const double norm = std::sqrt(dot(y, y));
    if (norm == 0.0) return 0.0;
    for (auto& e : y) e /= norm;
    // Residual of the Rayleigh pair guards against a stalled oscillation.
    double residual = 0.0;
    for (std::size_t i = 0; i < r; ++i) residual += std::pow(y[i] * norm - rayleigh * x[i], 2);
    residual = std::sqrt(residual);
    x = std::move(y);
    if (std::abs(rayleigh - previous) <= tol * std::abs(rayleigh) &&
        residual <= 1e3 * tol * std::abs(rayleigh)) {
      return std::abs(rayleigh);
    }
    previous = rayleigh;
  }
  throw SolverError("power iteration did not converge");
}

double r0_finite_rank(const ModelSpec& m, const std::vector<BirthFunctional>& functionals,
                      const std::vector<Field>& densities, const Grid& g) {
  if (functionals.empty() || functionals.size() != densities.size()) {
    throw DomainError("finite-rank birth operator needs equally many functionals and densities");
  }
  const std::size_t r = functionals.size();
  const FactoredOperator solver(assemble_operator(m, g));
  std::vector<std::vector<double>> responses;
  for (const auto& phi : densities) {
    if (!(phi.grid == g)) throw DomainError("density lives on a different grid");
    responses.push_back(solver.solve(std::span<const double>(phi.values)));
  }
  std::vector<std::vector<double>> matrix(r, std::vector<double>(r));
  for (std::size_t i = 0; i < r; ++i) {
    const auto w = functionals[i].weights(g);
    for (std::size_t j = 0; j < r; ++j) matrix[i][j] = dot(w, responses[j]);
  }
  return spectral_radius_power(matrix);
}

double r0_upper_bound(const ModelSpec& m, const MollifierFamily& family, int k, const Grid& g) {
  require_resolved(g, k);
  const FactoredOperator solver(assemble_operator(m, g));
  // Adjoint solve: entry j is L M^{-1} applied to the unit-mass column at cell j
  // (e_j / h), up to the factor 1/h applied below.
  const auto adjoint = solver.solve_transpose(birth_functional_weights(m, g));
  double worst = 0.0;
  for (double v : adjoint) worst = std::max(worst, v);
  const double column_norm = worst / g.spacing();
  return column_norm * sample_mollifier(family, k, g).l1_norm();
}

}  // namespace r0kit

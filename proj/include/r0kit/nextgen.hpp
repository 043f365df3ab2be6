#pragma once

#include "r0kit/discrete.hpp"
#include "r0kit/model.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace r0kit {

class GridTooCoarse : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Positive linear functional counting births.
class BirthFunctional {
 public:
  enum class Kind { IntegralBeta, PointSample };

  /// Integral form multiplicity * int beta u, or point form
  /// multiplicity * gamma(p) u(p) when the model has a sample point.
  static BirthFunctional from_model(const ModelSpec& m);

  Kind kind() const { return kind_; }
  const ModelSpec& model() const { return model_; }

  std::vector<double> weights(const Grid& g) const;
  double apply(const Field& u) const;

 private:
  BirthFunctional(Kind kind, ModelSpec m) : kind_(kind), model_(std::move(m)) {}
  Kind kind_;
  ModelSpec model_;
};

enum class R0Method { Analytic, GreenLimit, FiniteKSequence, TimeDomain };

std::string to_string(R0Method method);

struct R0Report {
  double value = 0.0;
  R0Method method = R0Method::Analytic;
  std::vector<std::pair<int, double>> k_sequence;
  std::optional<double> extrapolation_error_estimate;
  std::optional<int> grid_n;
  std::optional<double> fitted_order;
  /// True when value is a Richardson extrapolant rather than a raw R0_k.
  bool extrapolated = false;
  std::vector<std::string> warnings;
};

/// Default k schedule 8, 16, ..., 256.
std::vector<int> default_k_schedule();

/// Largest k with grid spacing <= 1/(4k).
int max_resolvable_k(const Grid& g);

/// The entries of `schedule` the grid resolves.
std::vector<int> resolvable_schedule(const std::vector<int>& schedule, const Grid& g);

/// R0_k = rho(B_k M^{-1}) = L M^{-1} phi_k on the grid.
/// Throws GridTooCoarse when the spacing exceeds 1/(4k).
double r0_rank_one(const ModelSpec& m, const MollifierFamily& family, int k, const Grid& g);

/// R0_k along a schedule, followed by Richardson extrapolation in 1/k.
///
/// With three or more entries the error order is fitted from the last three
/// values; when it is off from 1 by more than 0.5 the raw last value is
/// reported and a warning recorded. The error estimate is the change between
/// the last two extrapolants, floored at 1e-12 * max(1, |R0|) (round-off).
R0Report r0_limit(const ModelSpec& m, const MollifierFamily& family,
                  const std::vector<int>& k_schedule, const Grid& g);

/// Richardson step shared by r0_limit and the CLI convergence table.
R0Report extrapolate_sequence(const std::vector<std::pair<int, double>>& sequence);

/// Spectral radius of the finite-rank next-generation matrix
/// K_ij = L_i(M^{-1} phi_j) by power iteration (tolerance 1e-12,
/// at most 1e4 iterations).
double r0_finite_rank(const ModelSpec& m, const std::vector<BirthFunctional>& functionals,
                      const std::vector<Field>& densities, const Grid& g);

/// Dominant eigenvalue modulus of a square nonnegative matrix (row-major).
/// Throws SolverError if the iteration stalls.
double spectral_radius_power(const std::vector<std::vector<double>>& matrix, double tol = 1e-12,
                             int max_iterations = 10000);

/// ||L M^{-1}|| * ||phi_k||_1: the largest birth count produced by any
/// unit-mass column, times the mass of phi_k. Dominates r0_rank_one.
double r0_upper_bound(const ModelSpec& m, const MollifierFamily& family, int k, const Grid& g);

}  // namespace r0kit

#pragma once

#include "r0kit/discrete.hpp"
#include "r0kit/model.hpp"

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace r0kit {

class InstabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when the mass vanishes before the fitting window of malthus_estimate.
class DegenerateFit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TimeScheme { ImplicitEuler, CrankNicolson };

/// Terms of the discrete mass balance over one step:
///   mass_after - mass_before = dt * (births - deaths - outflow).
struct MassLedger {
  double mass_before = 0.0;
  double mass_after = 0.0;
  double births = 0.0;
  double deaths = 0.0;
  double outflow = 0.0;
  double dt = 0.0;

  double residual() const {
    return mass_after - mass_before - dt * (births - deaths - outflow);
  }
};

struct EvolutionState {
  Field field;
  double time = 0.0;
  std::vector<std::pair<double, double>> mass_history;
  MassLedger last_step;

  static EvolutionState initial(Field u0);
};

/// Time stepper for u' = (phi_k L - M) u with M implicit and births explicit.
class Evolution {
 public:
  struct Options {
    TimeScheme scheme = TimeScheme::ImplicitEuler;
    bool births = true;
    /// Skip the model validation (used for mu = 0 conservation runs).
    bool validate = true;
  };

  Evolution(const ModelSpec& m, const MollifierFamily& family, int k, const Grid& g, double dt);
  Evolution(const ModelSpec& m, const MollifierFamily& family, int k, const Grid& g, double dt,
            Options options);

  EvolutionState step(const EvolutionState& state) const;
  EvolutionState run(EvolutionState state, int steps) const;

  const Grid& grid() const { return grid_; }
  double dt() const { return dt_; }
  /// ||L M^{-1}||, the bound used by the setup stability check.
  double birth_operator_norm() const { return birth_norm_; }
  /// Total birth rate L u.
  double birth_rate(const Field& u) const;

 private:
  /// M v with the transport part as a difference of face fluxes.
  std::vector<double> flux_form(std::span<const double> v) const;

  Grid grid_;
  double dt_;
  Options options_;
  DiscreteOperator op_;
  std::optional<FactoredOperator> implicit_;
  std::vector<double> weights_;
  std::vector<double> phi_;
  std::vector<double> mu_;
  double phi_mass_ = 0.0;
  double birth_norm_ = 0.0;
};

/// One implicit-Euler step on the grid of `state`.
EvolutionState step(const ModelSpec& m, const MollifierFamily& family, int k,
                    const EvolutionState& state, double dt);

/// Grid used by the time-domain routes for resolution k: the truncated
/// model domain with at least 1024 cells and spacing <= 1/(4k).
Grid evolution_grid(const ModelSpec& m, int k);

/// Least-squares slope of log(mass) over the final third of [0, T], started
/// from phi_k. T defaults to 50 / mu_min. The field is rescaled as it runs,
/// so only a mass that becomes exactly zero is degenerate.
double malthus_estimate(const ModelSpec& m, const MollifierFamily& family, int k,
                        std::optional<double> horizon = std::nullopt, double dt = 0.01,
                        std::optional<Grid> grid = std::nullopt);

struct SignReport {
  double r0_k = 0.0;
  double malthus = 0.0;
  bool consistent = false;
};

/// Compares sign(R0_k - 1) with the sign of the Malthus estimate on the same
/// grid. Values with magnitude below 5e-3 count as critical on either side.
SignReport sign_consistency(const ModelSpec& m, const MollifierFamily& family, int k,
                            std::optional<Grid> grid = std::nullopt);

}  // namespace r0kit

#include "r0kit/semigroup.hpp"

#include "r0kit/nextgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace r0kit {

namespace {

constexpr double kCriticalBand = 5e-3;

double weighted_sum(std::span<const double> w, std::span<const double> u) {
  return std::inner_product(w.begin(), w.end(), u.begin(), 0.0);
}

int sign_with_band(double v) {
  if (std::abs(v) < kCriticalBand) return 0;
  return v > 0.0 ? 1 : -1;
}

}  // namespace

EvolutionState EvolutionState::initial(Field u0) {
  EvolutionState s;
  const double mass = u0.mass();
  s.field = std::move(u0);
  s.mass_history.emplace_back(0.0, mass);
  return s;
}

Evolution::Evolution(const ModelSpec& m, const MollifierFamily& family, int k, const Grid& g,
                     double dt)
    : Evolution(m, family, k, g, dt, Options{}) {}

Evolution::Evolution(const ModelSpec& m, const MollifierFamily& family, int k, const Grid& g,
                     double dt, Options options)
    : grid_(g), dt_(dt), options_(options) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("time step must be positive");
  if (options_.validate) require_valid(m);
  op_ = assemble_operator(m, g);
  const double factor = options_.scheme == TimeScheme::ImplicitEuler ? dt : 0.5 * dt;
  implicit_.emplace(op_.shifted(1.0, factor));
  mu_.resize(static_cast<std::size_t>(g.n_cells));
  for (int i = 0; i < g.n_cells; ++i) mu_[static_cast<std::size_t>(i)] = m.mu_at(g.center(i));

  if (options_.births) {
    weights_ = birth_functional_weights(m, g);
    const Field phi = sample_mollifier(family, k, g);
    phi_ = phi.values;
    phi_mass_ = phi.mass();
    const FactoredOperator inverse(op_);
    const auto adjoint = inverse.solve_transpose(weights_);
    birth_norm_ = *std::max_element(adjoint.begin(), adjoint.end()) / g.spacing();
    if (!(dt * birth_norm_ < 1.0)) {
      std::ostringstream msg;
      msg << "explicit birth step unstable: dt * ||L M^-1|| = " << dt * birth_norm_ << " >= 1";
      throw DomainError(msg.str());
    }
  }
}

double Evolution::birth_rate(const Field& u) const {
  return options_.births ? weighted_sum(weights_, u.values) : 0.0;
}

std::vector<double> Evolution::flux_form(std::span<const double> v) const {
  const std::size_t n = v.size();
  const double h = grid_.spacing();
  // Face f sits between cells f-1 and f; the end faces are closed except for
  // the free outflow on the right.
  std::vector<double> flux(n + 1, 0.0);
  for (std::size_t f = 1; f < n; ++f) {
    flux[f] = h * (-op_.lower[f] * v[f - 1] + op_.upper[f - 1] * v[f]);
  }
  flux[n] = op_.right_outflow * v[n - 1];
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = (flux[i + 1] - flux[i]) / h + mu_[i] * v[i];
  return out;
}

EvolutionState Evolution::step(const EvolutionState& state) const {
  if (!(state.field.grid == grid_)) throw DomainError("state lives on a different grid");
  const auto n = static_cast<std::size_t>(grid_.n_cells);
  const double h = grid_.spacing();
  const auto& u = state.field.values;

  std::vector<double> rhs(u);
  if (options_.scheme == TimeScheme::CrankNicolson) {
    const auto mu_old = flux_form(u);
    for (std::size_t i = 0; i < n; ++i) rhs[i] -= 0.5 * dt_ * mu_old[i];
  }
  const double births = birth_rate(state.field);
  if (options_.births) {
    for (std::size_t i = 0; i < n; ++i) rhs[i] += dt_ * births * phi_[i];
  }

  // The implicit solution gives the fluxes; the update itself is written in
  // flux form so the face terms telescope and the mass balance does not pick
  // up the rounding of the assembled diagonal.
  const std::vector<double> implicit = implicit_->solve(std::span<const double>(rhs));
  std::vector<double> solution(u);
  if (options_.scheme == TimeScheme::ImplicitEuler) {
    const auto mv = flux_form(implicit);
    for (std::size_t i = 0; i < n; ++i) solution[i] -= dt_ * mv[i];
  } else {
    std::vector<double> mid(n);
    for (std::size_t i = 0; i < n; ++i) mid[i] = 0.5 * (u[i] + implicit[i]);
    const auto mv = flux_form(mid);
    for (std::size_t i = 0; i < n; ++i) solution[i] -= dt_ * mv[i];
  }
  if (options_.births) {
    for (std::size_t i = 0; i < n; ++i) solution[i] += dt_ * births * phi_[i];
  }
  EvolutionState next;
  next.field = Field(grid_, std::move(solution));
  next.time = state.time + dt_;
  next.mass_history = state.mass_history;

  MassLedger ledger;
  ledger.dt = dt_;
  ledger.mass_before = state.field.mass();
  ledger.mass_after = next.field.mass();
  ledger.births = births * phi_mass_;
  const auto& un = implicit;
  auto loss_of = [&](const std::vector<double>& v) {
    double deaths = 0.0;
    for (std::size_t i = 0; i < n; ++i) deaths += mu_[i] * v[i];
    return std::pair{h * deaths, op_.right_outflow * v[n - 1]};
  };
  if (options_.scheme == TimeScheme::ImplicitEuler) {
    std::tie(ledger.deaths, ledger.outflow) = loss_of(un);
  } else {
    std::vector<double> mid(n);
    for (std::size_t i = 0; i < n; ++i) mid[i] = 0.5 * (u[i] + un[i]);
    std::tie(ledger.deaths, ledger.outflow) = loss_of(mid);
  }
  next.last_step = ledger;
  next.mass_history.emplace_back(next.time, ledger.mass_after);

  if (!std::isfinite(ledger.mass_after)) throw InstabilityError("mass is not finite");
  if (!state.mass_history.empty()) {
    const double m0 = state.mass_history.front().second;
    if (m0 > 0.0 && ledger.mass_after > m0 * std::exp(10.0 * next.time) * (1.0 + 1e-9)) {
      std::ostringstream msg;
      msg << "mass grows faster than e^(10 t) at t = " << next.time;
      throw InstabilityError(msg.str());
    }
  }
  return next;
}

EvolutionState Evolution::run(EvolutionState state, int steps) const {
  for (int i = 0; i < steps; ++i) state = step(state);
  return state;
}

EvolutionState step(const ModelSpec& m, const MollifierFamily& family, int k,
                    const EvolutionState& state, double dt) {
  return Evolution(m, family, k, state.field.grid, dt).step(state);
}

Grid evolution_grid(const ModelSpec& m, int k) {
  const double left = m.left();
  const double right = truncation_point(m);
  const double needed = 4.0 * k * (right - left);
  int n = 1024;
  while (n < needed) n *= 2;
  return Grid::uniform(left, right, n);
}

double malthus_estimate(const ModelSpec& m, const MollifierFamily& family, int k,
                        std::optional<double> horizon, double dt, std::optional<Grid> grid) {
  const Grid g = grid.value_or(evolution_grid(m, k));
  const double t_end = horizon.value_or(50.0 / m.mu_min());
  if (!(t_end > 0.0)) throw DomainError("horizon must be positive");
  const int steps = static_cast<int>(std::ceil(t_end / dt - 1e-9));
  const Evolution evolution(m, family, k, g, dt);

  EvolutionState state = EvolutionState::initial(sample_mollifier(family, k, g));
  // log(mass) is tracked as log_scale + log(current mass); the field is
  // rescaled to unit mass each step so long runs neither under- nor overflow.
  double log_scale = 0.0;
  const double fit_start = t_end * 2.0 / 3.0;
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  int count = 0;
  for (int i = 0; i < steps; ++i) {
    state.mass_history.resize(1);
    state = evolution.step(state);
    const double mass = state.field.mass();
    if (!(mass > 0.0)) {
      std::ostringstream msg;
      msg << "mass vanished at t = " << state.time << " before the fitting window closed";
      throw DegenerateFit(msg.str());
    }
    log_scale += std::log(mass);
    for (auto& v : state.field.values) v /= mass;
    state.mass_history.front().second = 1.0;
    state.time = 0.0;  // keeps the e^(10 t) guard relative to the last step
    const double t = (i + 1) * dt;
    if (t >= fit_start) {
      st += t;
      sy += log_scale;
      stt += t * t;
      sty += t * log_scale;
      ++count;
    }
  }
  if (count < 2) throw DegenerateFit("fewer than two samples in the fitting window");
  const double denom = count * stt - st * st;
  if (!(denom > 0.0)) throw DegenerateFit("fitting window has no spread in time");
  return (count * sty - st * sy) / denom;
}

SignReport sign_consistency(const ModelSpec& m, const MollifierFamily& family, int k,
                            std::optional<Grid> grid) {
  const Grid g = grid.value_or(evolution_grid(m, k));
  SignReport report;
  report.r0_k = r0_rank_one(m, family, k, g);
  report.malthus = malthus_estimate(m, family, k, std::nullopt, 0.01, g);
  report.consistent = sign_with_band(report.r0_k - 1.0) == sign_with_band(report.malthus);
  return report;
}

}  // namespace r0kit

#include "r0kit/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace r0kit {

namespace {

constexpr double kPivotFloor = 1e-300;

double compensated_sum(std::span<const double> v) {
  double sum = 0.0;
  double carry = 0.0;
  for (double x : v) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

}  // namespace

// ---------------------------------------------------------------------------
// Grid and fields
// ---------------------------------------------------------------------------

Grid Grid::uniform(double x_left, double x_right, int n_cells) {
  if (n_cells < 16) throw DomainError("grid needs at least 16 cells");
  if (!(x_right > x_left) || !std::isfinite(x_left) || !std::isfinite(x_right)) {
    throw DomainError("grid bounds must be finite with x_left < x_right");
  }
  return Grid{x_left, x_right, n_cells};
}

std::vector<double> Grid::cell_centers() const {
  std::vector<double> c(static_cast<std::size_t>(n_cells));
  for (int i = 0; i < n_cells; ++i) c[static_cast<std::size_t>(i)] = center(i);
  return c;
}

std::vector<double> Grid::face_positions() const {
  std::vector<double> f(static_cast<std::size_t>(n_cells) + 1);
  for (int i = 0; i <= n_cells; ++i) f[static_cast<std::size_t>(i)] = face(i);
  return f;
}

int Grid::cell_index(double x) const {
  const int i = static_cast<int>(std::floor((x - x_left) / spacing()));
  return std::clamp(i, 0, n_cells - 1);
}

double truncation_point(const ModelSpec& m) {
  if (!m.infinite_domain()) return m.x_max;
  const double gamma_max = m.gamma_max();
  const double mu_min = m.mu_min();
  if (!std::isfinite(gamma_max) || !(mu_min > 0.0)) {
    throw DomainError("cannot truncate domain: need bounded gamma and mu_min > 0");
  }
  double length = 12.0 * gamma_max / mu_min;
  if (m.diffusion > 0.0) {
    const double d = m.diffusion;
    const double decay =
        2.0 * mu_min / (gamma_max + std::sqrt(gamma_max * gamma_max + 4.0 * d * mu_min));
    length = std::max(length, 12.0 / decay);
  }
  return m.x0 + length;
}

Grid make_grid(const ModelSpec& m, int n_cells) {
  return Grid::uniform(m.left(), truncation_point(m), n_cells);
}

Field::Field(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != static_cast<std::size_t>(g.n_cells)) {
    throw DomainError("field size does not match grid");
  }
}

double Field::mass() const { return grid.spacing() * compensated_sum(values); }

double Field::l1_norm() const {
  std::vector<double> a(values.size());
  std::transform(values.begin(), values.end(), a.begin(), [](double x) { return std::abs(x); });
  return grid.spacing() * compensated_sum(a);
}

Field sample_mollifier(const MollifierFamily& family, int k, const Grid& g) {
  Field f(g);
  const double h = g.spacing();
  const auto [lo, hi] = family.support(k);
  for (int i = 0; i < g.n_cells; ++i) {
    const double a = g.face(i);
    const double b = g.face(i + 1);
    if (b <= lo || a >= hi) continue;
    f.values[static_cast<std::size_t>(i)] = family.mass(k, a, b) / h;
  }
  return f;
}

Field sample_function(const std::function<double(double)>& fn, const Grid& g) {
  Field f(g);
  for (int i = 0; i < g.n_cells; ++i) f.values[static_cast<std::size_t>(i)] = fn(g.center(i));
  return f;
}

double l1_error(const Field& u, const std::function<double(double)>& fn) {
  std::vector<double> diff(u.values.size());
  for (int i = 0; i < u.grid.n_cells; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    diff[idx] = std::abs(u.values[idx] - fn(u.grid.center(i)));
  }
  return u.grid.spacing() * compensated_sum(diff);
}

// ---------------------------------------------------------------------------
// Operator assembly
// ---------------------------------------------------------------------------

std::vector<double> DiscreteOperator::apply(std::span<const double> u) const {
  const std::size_t n = size();
  if (u.size() != n) throw DomainError("operator/field size mismatch");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = diag[i] * u[i];
    if (i > 0) v += lower[i] * u[i - 1];
    if (i + 1 < n) v += upper[i] * u[i + 1];
    out[i] = v;
  }
  if (jump) {
    double birth = 0.0;
    for (std::size_t i = 0; i < n; ++i) birth += jump->weights[i] * u[i];
    out[static_cast<std::size_t>(jump->target_cell)] -= birth / grid.spacing();
  }
  return out;
}

Field DiscreteOperator::apply(const Field& u) const { return Field(u.grid, apply(u.values)); }

DiscreteOperator DiscreteOperator::shifted(double alpha, double beta) const {
  DiscreteOperator out = *this;
  for (std::size_t i = 0; i < size(); ++i) {
    out.lower[i] = beta * lower[i];
    out.diag[i] = alpha + beta * diag[i];
    out.upper[i] = beta * upper[i];
  }
  out.right_outflow = beta * right_outflow;
  if (out.jump) {
    for (double& w : out.jump->weights) w *= beta;
  }
  return out;
}

bool DiscreteOperator::is_m_matrix_pattern() const {
  for (std::size_t i = 0; i < size(); ++i) {
    if (!(diag[i] > 0.0) || lower[i] > 0.0 || upper[i] > 0.0) return false;
  }
  return true;
}

DiscreteOperator assemble_operator(const ModelSpec& m, const Grid& g) {
  const int n = g.n_cells;
  const double h = g.spacing();
  const double d = m.diffusion;
  if (!(d >= 0.0)) throw AssemblyError("negative diffusion coefficient");
  DiscreteOperator op;
  op.grid = g;
  op.lower.assign(static_cast<std::size_t>(n), 0.0);
  op.diag.assign(static_cast<std::size_t>(n), 0.0);
  op.upper.assign(static_cast<std::size_t>(n), 0.0);

  for (int i = 0; i < n; ++i) op.diag[static_cast<std::size_t>(i)] = m.mu_at(g.center(i));

  // Interior faces: Phi_f = c_left u_{f-1} + c_right u_f.
  for (int f = 1; f < n; ++f) {
    const double gamma = m.gamma_at(g.face(f));
    double c_left;
    double c_right;
    if (d == 0.0 || gamma * h / d > 2.0) {
      c_left = std::max(gamma, 0.0) + d / h;
      c_right = std::min(gamma, 0.0) - d / h;
    } else {
      c_left = 0.5 * gamma + d / h;
      c_right = 0.5 * gamma - d / h;
    }
    const auto left = static_cast<std::size_t>(f - 1);
    const auto right = static_cast<std::size_t>(f);
    op.diag[left] += c_left / h;
    op.upper[left] += c_right / h;
    op.lower[right] -= c_left / h;
    op.diag[right] -= c_right / h;
  }

  // The left face always carries zero total flux (homogeneous Robin
  // condition). Pure transport on a bounded domain leaves freely at the
  // right; every other case is closed there.
  if (d == 0.0 && !m.infinite_domain()) {
    op.bc = BoundaryKind::RobinLeft;
    op.right_outflow = std::max(m.gamma_at(g.x_right), 0.0);
    op.diag[static_cast<std::size_t>(n - 1)] += op.right_outflow / h;
  } else {
    op.bc = BoundaryKind::NoFluxBoth;
  }

  if (!op.is_m_matrix_pattern()) {
    std::ostringstream msg;
    msg << "assembled operator is not an M-matrix (h = " << h << ", D = " << d << ")";
    throw AssemblyError(msg.str());
  }
  return op;
}

std::vector<double> birth_functional_weights(const ModelSpec& m, const Grid& g) {
  const int n = g.n_cells;
  const double h = g.spacing();
  std::vector<double> w(static_cast<std::size_t>(n), 0.0);
  if (!m.birth_sample_point) {
    for (int i = 0; i < n; ++i) {
      w[static_cast<std::size_t>(i)] = m.birth_multiplicity * h * m.beta_at(g.center(i));
    }
    return w;
  }
  // Quadratic interpolation of u at p from the three nearest cell centres.
  const double p = *m.birth_sample_point;
  const int nearest = static_cast<int>(std::lround((p - g.x_left) / h - 0.5));
  const int first = std::clamp(nearest - 1, 0, n - 3);
  const double scale = m.birth_multiplicity * m.gamma_at(p);
  for (int j = 0; j < 3; ++j) {
    double lagrange = 1.0;
    const double xj = g.center(first + j);
    for (int l = 0; l < 3; ++l) {
      if (l == j) continue;
      const double xl = g.center(first + l);
      lagrange *= (p - xl) / (xj - xl);
    }
    w[static_cast<std::size_t>(first + j)] = scale * lagrange;
  }
  return w;
}

DiscreteOperator assemble_interior_jump(const ModelSpec& m, const Grid& g, double x_jump) {
  const double h = g.spacing();
  const int face = static_cast<int>(std::lround((x_jump - g.x_left) / h));
  if (face < 2 || face > g.n_cells - 2) {
    throw DomainError("jump point must lie at least two cells inside the domain");
  }
  DiscreteOperator op = assemble_operator(m, g);
  op.bc = BoundaryKind::FluxJumpInterior;
  op.jump = InteriorJump{g.face(face), face, birth_functional_weights(m, g)};
  return op;
}

// ---------------------------------------------------------------------------
// Solvers
// ---------------------------------------------------------------------------

TridiagonalSolver::TridiagonalSolver(std::span<const double> lower, std::span<const double> diag,
                                     std::span<const double> upper)
    : lower_(lower.begin(), lower.end()),
      pivot_(diag.size()),
      upper_ratio_(diag.size(), 0.0) {
  const std::size_t n = diag.size();
  if (lower.size() != n || upper.size() != n || n == 0) {
    throw SolverError("tridiagonal bands have inconsistent sizes");
  }
  for (std::size_t i = 0; i < n; ++i) {
    double pivot = diag[i];
    if (i > 0) pivot -= lower[i] * upper_ratio_[i - 1];
    if (!(std::abs(pivot) >= kPivotFloor)) {
      throw SolverError("singular tridiagonal system: pivot " + std::to_string(pivot) +
                        " at row " + std::to_string(i));
    }
    pivot_[i] = pivot;
    if (i + 1 < n) upper_ratio_[i] = upper[i] / pivot;
  }
}

void TridiagonalSolver::solve_in_place(std::span<double> rhs) const {
  const std::size_t n = pivot_.size();
  if (rhs.size() != n) throw SolverError("right-hand side size mismatch");
  rhs[0] /= pivot_[0];
  for (std::size_t i = 1; i < n; ++i) rhs[i] = (rhs[i] - lower_[i] * rhs[i - 1]) / pivot_[i];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= upper_ratio_[i] * rhs[i + 1];
}

namespace {

TridiagonalSolver transpose_solver(const DiscreteOperator& op) {
  const std::size_t n = op.size();
  std::vector<double> lower(n, 0.0);
  std::vector<double> upper(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) lower[i] = op.upper[i - 1];
    if (i + 1 < n) upper[i] = op.lower[i + 1];
  }
  return TridiagonalSolver(lower, op.diag, upper);
}

}  // namespace

FactoredOperator::FactoredOperator(const DiscreteOperator& op)
    : grid_(op.grid),
      forward_(op.lower, op.diag, op.upper),
      transposed_(transpose_solver(op)),
      jump_(op.jump) {
  if (!jump_) return;
  // op = T - u w^T with u = e_t / h.
  const double h = grid_.spacing();
  forward_jump_column_.assign(op.size(), 0.0);
  forward_jump_column_[static_cast<std::size_t>(jump_->target_cell)] = 1.0 / h;
  forward_.solve_in_place(forward_jump_column_);
  adjoint_jump_column_ = jump_->weights;
  transposed_.solve_in_place(adjoint_jump_column_);
  jump_denominator_ = 1.0 - std::inner_product(jump_->weights.begin(), jump_->weights.end(),
                                               forward_jump_column_.begin(), 0.0);
  if (!(std::abs(jump_denominator_) >= 1e-14)) {
    throw SolverError("jump operator is singular (birth functional balances mortality exactly)");
  }
}

std::vector<double> FactoredOperator::solve(std::span<const double> rhs) const {
  std::vector<double> x(rhs.begin(), rhs.end());
  forward_.solve_in_place(x);
  if (jump_) {
    const double coupling =
        std::inner_product(jump_->weights.begin(), jump_->weights.end(), x.begin(), 0.0) /
        jump_denominator_;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += coupling * forward_jump_column_[i];
  }
  return x;
}

std::vector<double> FactoredOperator::solve_transpose(std::span<const double> rhs) const {
  std::vector<double> x(rhs.begin(), rhs.end());
  transposed_.solve_in_place(x);
  if (jump_) {
    const double coupling =
        x[static_cast<std::size_t>(jump_->target_cell)] / grid_.spacing() / jump_denominator_;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += coupling * adjoint_jump_column_[i];
  }
  return x;
}

Field FactoredOperator::solve(const Field& rhs) const {
  if (!(rhs.grid == grid_)) throw SolverError("right-hand side lives on a different grid");
  return Field(grid_, solve(std::span<const double>(rhs.values)));
}

Field solve_inverse(const DiscreteOperator& op, const Field& rhs) {
  return FactoredOperator(op).solve(rhs);
}

Field green_column(const ModelSpec& m, const Grid& g, double s) {
  Field rhs(g);
  rhs.values[static_cast<std::size_t>(g.cell_index(s))] = 1.0 / g.spacing();
  return solve_inverse(assemble_operator(m, g), rhs);
}

GrowthEstimate leading_growth_rate(const DiscreteOperator& op, double tol, int max_iterations) {
  const FactoredOperator solver(op);
  std::vector<double> x(op.size(), 1.0);
  auto normalise = [](std::vector<double>& v) {
    double norm = 0.0;
    for (double e : v) norm += e * e;
    norm = std::sqrt(norm);
    for (double& e : v) e /= norm;
  };
  normalise(x);
  GrowthEstimate out;
  double previous = 0.0;
  for (int it = 1; it <= max_iterations; ++it) {
    std::vector<double> y = solver.solve(x);
    // Rayleigh quotient of the inverse: x . A^{-1} x / x . x, with |x| = 1.
    const double theta = std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
    normalise(y);
    x = std::move(y);
    out.iterations = it;
    if (it > 1 && std::abs(theta - previous) <= tol * std::abs(theta)) {
      out.rate = -1.0 / theta;
      out.converged = true;
      return out;
    }
    previous = theta;
  }
  out.rate = -1.0 / previous;
  return out;
}

}  // namespace r0kit

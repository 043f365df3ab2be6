#pragma once

#include "r0kit/model.hpp"

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace r0kit {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uniform cell-centred grid on [x_left, x_right].
struct Grid {
  double x_left = 0.0;
  double x_right = 1.0;
  int n_cells = 16;

  static Grid uniform(double x_left, double x_right, int n_cells);

  double spacing() const { return (x_right - x_left) / n_cells; }
  double center(int i) const { return x_left + (i + 0.5) * spacing(); }
  double face(int i) const { return i == n_cells ? x_right : x_left + i * spacing(); }
  std::vector<double> cell_centers() const;
  std::vector<double> face_positions() const;
  /// Index of the cell containing x, clamped to [0, n_cells).
  int cell_index(double x) const;

  bool operator==(const Grid&) const = default;
};

/// Right end of the computational domain. For x_max = inf this is
///   x0 + max(12 / |lambda2|, 12 gamma_max / mu_min),
/// lambda2 the decaying characteristic root of D l^2 - gamma_max l - mu_min.
double truncation_point(const ModelSpec& m);

/// Grid over [m.left(), truncation_point(m)].
Grid make_grid(const ModelSpec& m, int n_cells);

/// Cell averages of a density on a grid.
struct Field {
  Grid grid;
  std::vector<double> values;

  Field() = default;
  explicit Field(const Grid& g) : grid(g), values(static_cast<std::size_t>(g.n_cells), 0.0) {}
  Field(const Grid& g, std::vector<double> v);

  /// h * sum(values), compensated.
  double mass() const;
  double l1_norm() const;
};

/// Field of cell averages of phi_k.
Field sample_mollifier(const MollifierFamily& family, int k, const Grid& g);

/// Field of point values f(center_i).
Field sample_function(const std::function<double(double)>& f, const Grid& g);

/// L1 distance h * sum |u_i - f(center_i)|.
double l1_error(const Field& u, const std::function<double(double)>& f);

enum class BoundaryKind {
  NoFluxBoth,        ///< zero total flux at both ends
  RobinLeft,         ///< zero total flux at the left end, free outflow on the right (D = 0)
  FluxJumpInterior,  ///< as the base kind, plus a birth flux injected at an interior face
};

/// Birth flux Phi(x_j+) - Phi(x_j-) = sum_i weights[i] u_i entering `target_cell`.
struct InteriorJump {
  double x_jump = 0.0;
  int target_cell = 0;
  std::vector<double> weights;
};

/// Finite-volume matrix of M u = (gamma u - D u')' + mu u.
///
/// Row i is (Phi_{i+1/2} - Phi_{i-1/2}) / h + mu_i u_i. The convective part
/// of a face flux is upwinded when gamma h / D > 2 (always for D = 0) and
/// central otherwise, so every row has a positive diagonal and nonpositive
/// off-diagonals.
struct DiscreteOperator {
  Grid grid;
  std::vector<double> lower;  ///< lower[i] multiplies u_{i-1}; lower[0] == 0
  std::vector<double> diag;
  std::vector<double> upper;  ///< upper[i] multiplies u_{i+1}; upper[n-1] == 0
  BoundaryKind bc = BoundaryKind::NoFluxBoth;
  /// Outflow flux coefficient at the right face (gamma(x_right) when RobinLeft).
  double right_outflow = 0.0;
  std::optional<InteriorJump> jump;

  std::size_t size() const { return diag.size(); }
  std::vector<double> apply(std::span<const double> u) const;
  Field apply(const Field& u) const;
  /// alpha I + beta * (this). The jump row scales with beta.
  DiscreteOperator shifted(double alpha, double beta) const;
  /// True when every row has a positive diagonal and nonpositive off-diagonals.
  bool is_m_matrix_pattern() const;
};

DiscreteOperator assemble_operator(const ModelSpec& m, const Grid& g);

/// Weights w with L u = sum_i w_i u_i on the grid: midpoint rule for the
/// integral form, quadratic interpolation at the sample point otherwise.
std::vector<double> birth_functional_weights(const ModelSpec& m, const Grid& g);

/// Operator of the limit model whose births enter through a flux jump at an
/// interior point x_j (snapped to the nearest face): the cell right of x_j
/// receives L u.
DiscreteOperator assemble_interior_jump(const ModelSpec& m, const Grid& g, double x_jump);

/// Thomas factorisation of a tridiagonal matrix, reusable across solves.
class TridiagonalSolver {
 public:
  TridiagonalSolver(std::span<const double> lower, std::span<const double> diag,
                    std::span<const double> upper);
  void solve_in_place(std::span<double> rhs) const;
  std::size_t size() const { return pivot_.size(); }

 private:
  std::vector<double> lower_;
  std::vector<double> pivot_;
  std::vector<double> upper_ratio_;
};

/// Factorised operator; a rank-one jump row is handled by Sherman-Morrison.
class FactoredOperator {
 public:
  explicit FactoredOperator(const DiscreteOperator& op);

  std::vector<double> solve(std::span<const double> rhs) const;
  /// Solves with the transposed operator (adjoint problems).
  std::vector<double> solve_transpose(std::span<const double> rhs) const;
  Field solve(const Field& rhs) const;
  const Grid& grid() const { return grid_; }

 private:
  Grid grid_;
  TridiagonalSolver forward_;
  TridiagonalSolver transposed_;
  std::optional<InteriorJump> jump_;
  std::vector<double> forward_jump_column_;  // T^{-1} e_t
  std::vector<double> adjoint_jump_column_;  // T^{-T} w / h
  double jump_denominator_ = 1.0;
};

/// M^{-1} rhs. Nonnegative data gives a nonnegative result for M-matrices.
Field solve_inverse(const DiscreteOperator& op, const Field& rhs);

/// Approximate column G(., s): M^{-1} applied to a unit-mass one-cell indicator at s.
Field green_column(const ModelSpec& m, const Grid& g, double s);

struct GrowthEstimate {
  double rate = 0.0;  ///< leading eigenvalue of -op (growth exponent)
  int iterations = 0;
  bool converged = false;
};

/// Inverse power iteration for the eigenvalue of op nearest zero, returned
/// as the growth exponent of u' = -op u.
GrowthEstimate leading_growth_rate(const DiscreteOperator& op, double tol = 1e-12,
                                   int max_iterations = 10000);

}  // namespace r0kit

#include "helpers.hpp"

#include "r0kit/discrete.hpp"

#include <doctest.h>

#include <cmath>

using namespace r0kit;

namespace {

ModelSpec bounded(testing::Gen& gen, double x_max) {
  ModelSpec m = gen.model();
  m.x_max = x_max;
  return m;
}

std::vector<double> multiply(const std::vector<std::vector<double>>& a, const std::vector<double>& x) {
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) y[i] += a[i][j] * x[j];
  }
  return y;
}

}  // namespace

TEST_SUITE("discrete") {
  TEST_CASE("grid geometry") {
    const Grid g = Grid::uniform(1.0, 3.0, 16);
    CHECK(g.spacing() == 0.125);
    CHECK(g.center(0) == 1.0625);
    CHECK(g.face(16) == 3.0);
    CHECK(g.cell_index(0.0) == 0);
    CHECK(g.cell_index(2.0) == 8);
    CHECK(g.cell_index(5.0) == 15);
    CHECK(g.face_positions().size() == 17);
    CHECK_THROWS_AS(Grid::uniform(0.0, 1.0, 8), DomainError);
    CHECK_THROWS_AS(Grid::uniform(1.0, 1.0, 32), DomainError);
    CHECK_THROWS_AS(Grid::uniform(0.0, kInfinity, 32), DomainError);
  }

  TEST_CASE("truncation point covers the decay scale") {
    ModelSpec m;
    m.mu = RateFunction::constant(0.5);
    CHECK(truncation_point(m) == doctest::Approx(24.0));
    m.x_max = 3.0;
    CHECK(truncation_point(m) == 3.0);
    m.x_max = kInfinity;
    m.mu = RateFunction::constant(0.0);
    CHECK_THROWS_AS(truncation_point(m), DomainError);
  }

  TEST_CASE("field mass and sampled mollifiers") {
    const Grid g = Grid::uniform(0.0, 2.0, 256);
    for (auto kind : {MollifierKind::UniformIndicator, MollifierKind::SmoothBump,
                      MollifierKind::Triangular}) {
      const MollifierFamily family(kind, 0.0, 0.0, 2.0);
      const Field phi = sample_mollifier(family, 16, g);
      CHECK(phi.mass() == doctest::Approx(1.0).epsilon(1e-12));
      for (double v : phi.values) CHECK(v >= 0.0);
    }
    const Field f = sample_function([](double x) { return x; }, g);
    CHECK(f.mass() == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(l1_error(f, [](double x) { return x; }) == 0.0);
    CHECK_THROWS_AS(Field(g, std::vector<double>(3, 1.0)), DomainError);
  }

  TEST_CASE("assembled operators are M-matrices") {
    testing::Gen gen(41);
    for (int i = 0; i < 100; ++i) {
      ModelSpec m = gen.model();
      if (gen.coin()) m.diffusion = gen.log_uniform(1e-4, 10.0);
      const Grid g = make_grid(m, gen.integer(16, 400));
      const auto op = assemble_operator(m, g);
      CHECK(op.is_m_matrix_pattern());
      // The inverse of an M-matrix is entrywise nonnegative.
      const Field unit = [&] {
        Field f(g);
        f.values[static_cast<std::size_t>(gen.integer(0, g.n_cells - 1))] = 1.0;
        return f;
      }();
      const Field v = solve_inverse(op, unit);
      for (double x : v.values) CHECK(x >= -1e-14);
    }
  }

  TEST_CASE("mass balance of the assembled operator") {
    testing::Gen gen(43);
    for (int i = 0; i < 50; ++i) {
      const ModelSpec m = bounded(gen, gen.uniform(2.0, 8.0));
      const Grid g = make_grid(m, 128);
      const auto op = assemble_operator(m, g);
      std::vector<double> u(static_cast<std::size_t>(g.n_cells));
      for (auto& x : u) x = gen.uniform(0.0, 1.0);
      const auto mu = op.apply(u);
      // h sum (M u)_i = h sum mu_i u_i + outflow at the right.
      double lhs = 0.0;
      double rhs = op.right_outflow * u.back();
      for (int c = 0; c < g.n_cells; ++c) {
        const auto ci = static_cast<std::size_t>(c);
        lhs += g.spacing() * mu[ci];
        rhs += g.spacing() * m.mu_at(g.center(c)) * u[ci];
      }
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
      CHECK((m.diffusion == 0.0) == (op.bc == BoundaryKind::RobinLeft));
    }
  }

  TEST_CASE("tridiagonal, jump and transposed solves match dense elimination") {
    testing::Gen gen(47);
    for (int i = 0; i < 40; ++i) {
      const ModelSpec m = bounded(gen, gen.uniform(2.0, 6.0));
      const Grid g = make_grid(m, gen.integer(16, 80));
      const auto op = gen.coin() ? assemble_operator(m, g)
                                 : assemble_interior_jump(m, g, gen.uniform(0.3, 0.7) * m.x_max);
      std::vector<double> b(op.size());
      for (auto& x : b) x = gen.uniform(-1.0, 1.0);
      const auto a = testing::dense(op);
      std::vector<double> x;
      try {
        x = FactoredOperator(op).solve(b);
      } catch (const SolverError&) {
        continue;  // the jump row can make the operator singular
      }
      const auto ref = testing::dense_solve(a, b);
      double scale = 0.0;
      for (double v : ref) scale = std::max(scale, std::abs(v));
      for (std::size_t j = 0; j < b.size(); ++j) CHECK(std::abs(x[j] - ref[j]) <= 1e-9 * scale);
      // Transpose.
      auto at = a;
      for (std::size_t r = 0; r < a.size(); ++r) {
        for (std::size_t c = 0; c < a.size(); ++c) at[r][c] = a[c][r];
      }
      const auto y = FactoredOperator(op).solve_transpose(b);
      const auto ref_t = testing::dense_solve(at, b);
      scale = 0.0;
      for (double v : ref_t) scale = std::max(scale, std::abs(v));
      for (std::size_t j = 0; j < b.size(); ++j) CHECK(std::abs(y[j] - ref_t[j]) <= 1e-9 * scale);
      // apply() agrees with the dense matrix (jump row included).
      const auto ax = op.apply(b);
      const auto dense_ax = multiply(a, b);
      for (std::size_t j = 0; j < b.size(); ++j) {
        CHECK(ax[j] == doctest::Approx(dense_ax[j]).epsilon(1e-12).scale(1.0));
      }
    }
  }

  TEST_CASE("shifted operator") {
    ModelSpec m;
    m.x_max = 4.0;
    const Grid g = make_grid(m, 32);
    const auto op = assemble_operator(m, g);
    const auto s = op.shifted(1.0, 0.5);
    for (std::size_t i = 0; i < op.size(); ++i) {
      CHECK(s.diag[i] == doctest::Approx(1.0 + 0.5 * op.diag[i]));
      CHECK(s.lower[i] == doctest::Approx(0.5 * op.lower[i]));
    }
  }

  TEST_CASE("leading growth rate of a closed population is minus the mortality") {
    testing::Gen gen(53);
    for (int i = 0; i < 10; ++i) {
      ModelSpec m;
      const double mu = gen.uniform(0.2, 3.0);
      m.mu = RateFunction::constant(mu);
      m.gamma = RateFunction::constant(gen.uniform(0.5, 2.0));
      m.diffusion = gen.uniform(0.1, 2.0);
      m.x_max = gen.uniform(2.0, 10.0);
      const auto op = assemble_operator(m, make_grid(m, 200));
      const auto est = leading_growth_rate(op);
      CHECK(est.converged);
      CHECK(est.rate == doctest::Approx(-mu).epsilon(1e-9));
    }
  }

  TEST_CASE("Green column approximates the continuous kernel mass balance") {
    ModelSpec m;
    m.diffusion = 1.0;
    const Grid g = make_grid(m, 2048);
    const Field col = green_column(m, g, 0.5);
    // int mu G(., s) = 1 with mu = 1 and nothing leaving a closed domain.
    CHECK(col.mass() == doctest::Approx(1.0).epsilon(1e-10));
  }

  TEST_CASE("interior jump needs room") {
    ModelSpec m;
    m.x_max = 1.0;
    const Grid g = make_grid(m, 32);
    CHECK_THROWS_AS(assemble_interior_jump(m, g, 0.01), DomainError);
    CHECK_NOTHROW(assemble_interior_jump(m, g, 0.5));
  }

  TEST_CASE("birth weights") {
    ModelSpec m;
    m.x_max = 2.0;
    m.beta = RateFunction::constant(3.0);
    m.birth_multiplicity = 2.0;
    const Grid g = make_grid(m, 64);
    const auto w = birth_functional_weights(m, g);
    double total = 0.0;
    for (double x : w) total += x;
    CHECK(total == doctest::Approx(12.0));
    // Point sampling reproduces quadratics exactly.
    m.birth_sample_point = 1.3;
    m.gamma = RateFunction::constant(1.0);
    m.birth_multiplicity = 1.0;
    const auto wp = birth_functional_weights(m, g);
    double value = 0.0;
    for (int i = 0; i < g.n_cells; ++i) {
      const double x = g.center(i);
      value += wp[static_cast<std::size_t>(i)] * (x * x - x + 2.0);
    }
    CHECK(value == doctest::Approx(1.3 * 1.3 - 1.3 + 2.0).epsilon(1e-12));
  }
}

#pragma once

#include "r0kit/discrete.hpp"
#include "r0kit/model.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace testing {

// Small hand-rolled generator for property tests; every case is reproducible
// from the seed printed by the failing check.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }

  r0kit::RateFunction positive_rate(double lo, double hi) {
    switch (integer(0, 2)) {
      case 0:
        return r0kit::RateFunction::constant(uniform(lo, hi));
      case 1: {
        std::vector<double> x{0.0};
        std::vector<double> v{uniform(lo, hi)};
        const int nodes = integer(2, 6);
        for (int i = 1; i < nodes; ++i) {
          x.push_back(x.back() + uniform(0.5, 3.0));
          v.push_back(uniform(lo, hi));
        }
        return r0kit::RateFunction::tabulated(x, v);
      }
      default: {
        // Step on top of a floor, encoded as a table with a jump.
        const double t = uniform(0.5, 4.0);
        const double a = uniform(lo, hi);
        const double b = uniform(lo, hi);
        return r0kit::RateFunction::tabulated({0.0, t, t + 1e-3}, {a, a, b});
      }
    }
  }

  r0kit::RateFunction fertility() {
    switch (integer(0, 3)) {
      case 0:
        return r0kit::RateFunction::constant(uniform(0.0, 3.0));
      case 1:
        return r0kit::RateFunction::power_exp(uniform(0.1, 2.0), integer(0, 3), uniform(0.5, 2.0));
      case 2:
        return r0kit::RateFunction::step(uniform(0.2, 3.0), uniform(0.1, 3.0));
      default:
        return r0kit::RateFunction::proportional_to_mu(uniform(0.1, 3.0));
    }
  }

  // A valid model on [0, inf) with bounded rates.
  r0kit::ModelSpec model(bool allow_diffusion = true) {
    r0kit::ModelSpec m;
    m.gamma = positive_rate(0.5, 2.0);
    m.mu = positive_rate(0.5, 2.0);
    m.beta = fertility();
    m.diffusion = allow_diffusion && coin() ? log_uniform(0.05, 3.0) : 0.0;
    return m;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

// Dense LU with partial pivoting, used as an oracle for the banded solvers.
inline std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    }
    std::swap(a[c], a[p]);
    std::swap(b[c], b[p]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

inline std::vector<std::vector<double>> dense(const r0kit::DiscreteOperator& op) {
  const std::size_t n = op.size();
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    a[i][i] = op.diag[i];
    if (i > 0) a[i][i - 1] = op.lower[i];
    if (i + 1 < n) a[i][i + 1] = op.upper[i];
  }
  if (op.jump) {
    const double h = op.grid.spacing();
    const auto t = static_cast<std::size_t>(op.jump->target_cell);
    for (std::size_t j = 0; j < n; ++j) a[t][j] -= op.jump->weights[j] / h;
  }
  return a;
}

class TempDir {
 public:
  TempDir() {
    path_ = std::filesystem::temp_directory_path() /
            ("r0kit_test_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path write(const std::string& name, const std::string& text) const {
    const auto p = path_ / name;
    std::ofstream(p) << text;
    return p;
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing

#pragma once

#include "r0kit/model.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace r0kit {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses a rate string: `const:c`, `powexp:c,n,r`, `step:t,l`, `prop_mu:f`
/// or `table:path.csv`. Relative table paths resolve against `base_dir`.
RateFunction parse_rate(const std::string& text, const std::filesystem::path& base_dir = {});

/// Reads a two-column `x,value` CSV with a header row.
RateFunction load_rate_table(const std::filesystem::path& path);

/// Parses the line-oriented model format:
///
///   [domain]     x0, x_max (`inf` allowed), optional x_min
///   [rates]      gamma, mu, beta, optional sigma
///   [diffusion]  D
///   [birth]      multiplicity, optional sample_point
///
/// `#` and `;` start comments. Unknown sections or keys are errors.
ModelSpec parse_model(const std::string& text, const std::filesystem::path& base_dir = {});

ModelSpec load_model(const std::filesystem::path& path);

}  // namespace r0kit

#include "r0kit/cli.hpp"

#include "r0kit/acceptance.hpp"
#include "r0kit/analytic.hpp"
#include "r0kit/greens.hpp"
#include "r0kit/heatkernel.hpp"
#include "r0kit/model_io.hpp"
#include "r0kit/nextgen.hpp"
#include "r0kit/parallel.hpp"
#include "r0kit/quadrature.hpp"
#include "r0kit/semigroup.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace r0kit {

namespace {

struct Globals {
  int grid_n = 4096;
  double tol = 1e-3;
  std::string family = "uniform";
  std::string out_path;
  std::uint64_t seed = 20240917;
  bool mutate_lambda2 = false;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string join(const std::vector<int>& ks) {
  std::string s;
  for (std::size_t i = 0; i < ks.size(); ++i) s += (i ? "," : "") + std::to_string(ks[i]);
  return s;
}

/// Where CSV goes: the --out file when given, the output stream otherwise.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw ParseError("cannot open output file " + path);
      stream_ = &file_;
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

struct Context {
  const Globals& globals;
  std::string invocation;
  std::ostream& out;
  std::ostream& err;

  void header(std::ostream& os, const std::string& command) const {
    os << "# r0kit v" << kVersion << " " << command << (invocation.empty() ? "" : " ")
       << invocation << "\n";
  }
};

ModelSpec load_valid_model(const std::string& path) {
  ModelSpec m = load_model(path);
  require_valid(m);
  return m;
}

MollifierFamily family_for(const Globals& g, const ModelSpec& m) {
  return MollifierFamily(mollifier_kind_from_string(g.family), m);
}

void settings_line(std::ostream& os, const Globals& g, const Grid& grid,
                   const std::vector<int>& schedule) {
  os << "# settings: grid_n=" << grid.n_cells << " domain=[" << fmt(grid.x_left) << ","
     << fmt(grid.x_right) << "] family=" << g.family << " k_schedule=" << join(schedule)
     << " tol=" << fmt(g.tol)
     << " truncation=x0+max(12*gamma_max/mu_min,12/|lambda2|)\n";
}

std::vector<int> usable_schedule(const std::vector<int>& requested, const Grid& grid,
                                 std::ostream& sink, std::ostream& err) {
  const auto usable = resolvable_schedule(requested, grid);
  if (usable.size() < requested.size()) {
    std::ostringstream msg;
    msg << "grid spacing " << fmt(grid.spacing()) << " resolves k <= " << max_resolvable_k(grid)
        << "; dropped larger k";
    sink << "# warning: " << msg.str() << "\n";
    err << "warning: " << msg.str() << "\n";
  }
  if (usable.empty()) throw GridTooCoarse("no k in the schedule is resolved; raise --grid-n");
  return usable;
}

struct RouteResult {
  std::string method;
  std::optional<R0Report> report;
  std::string status = "ok";
};

int cmd_compute(const Context& ctx, const std::string& model_path, const std::string& method,
                const std::vector<int>& k_list) {
  const ModelSpec m = load_valid_model(model_path);
  Sink sink(ctx.globals.out_path, ctx.out);
  ctx.header(*sink, "compute");
  const Grid grid = make_grid(m, ctx.globals.grid_n);

  std::vector<std::string> methods;
  if (method == "all") {
    methods = {"analytic", "green-limit", "time-domain"};
  } else {
    methods = {method};
  }
  const bool strict = methods.size() == 1;

  std::vector<int> schedule = k_list;
  if (std::find(methods.begin(), methods.end(), "green-limit") != methods.end()) {
    schedule = usable_schedule(k_list, grid, *sink, ctx.err);
  }
  settings_line(*sink, ctx.globals, grid, schedule);

  std::vector<RouteResult> results;
  for (const auto& name : methods) {
    RouteResult r;
    r.method = name;
    try {
      if (name == "analytic") {
        r.report = r0_analytic(m);
      } else if (name == "green-limit") {
        r.report = r0_limit(m, family_for(ctx.globals, m), schedule, grid);
      } else {
        R0Report rep;
        rep.method = R0Method::TimeDomain;
        rep.value = r0_time_domain(m);
        r.report = rep;
      }
    } catch (const UnsupportedModel& e) {
      if (strict) throw;
      r.status = std::string("unsupported: ") + e.what();
    }
    results.push_back(std::move(r));
  }

  *sink << "method,value,error_estimate,grid_n,k_count,status\n";
  std::vector<double> values;
  for (const auto& r : results) {
    if (r.report) {
      const auto& rep = *r.report;
      values.push_back(rep.value);
      *sink << r.method << "," << fmt(rep.value) << ","
            << (rep.extrapolation_error_estimate ? fmt(*rep.extrapolation_error_estimate) : "")
            << "," << (rep.grid_n ? std::to_string(*rep.grid_n) : "") << ","
            << rep.k_sequence.size() << "," << r.status << "\n";
      for (const auto& w : rep.warnings) {
        *sink << "# warning (" << r.method << "): " << w << "\n";
        ctx.err << "warning (" << r.method << "): " << w << "\n";
      }
    } else {
      *sink << r.method << ",,,,," << r.status << "\n";
    }
  }

  if (values.size() >= 2) {
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double spread = *hi - *lo;
    const bool agree = spread <= ctx.globals.tol;
    *sink << "# consistency: max_difference=" << fmt(spread) << " tol=" << fmt(ctx.globals.tol)
          << " agree=" << (agree ? "yes" : "no") << "\n";
    if (!agree) {
      ctx.err << "routes disagree: max difference " << fmt(spread) << " > tol "
              << fmt(ctx.globals.tol) << "\n";
      return kExitDisagreement;
    }
  }
  return kExitOk;
}

int cmd_converge(const Context& ctx, const std::string& model_path,
                 const std::vector<int>& k_list) {
  const ModelSpec m = load_valid_model(model_path);
  Sink sink(ctx.globals.out_path, ctx.out);
  ctx.header(*sink, "converge");
  const Grid grid = make_grid(m, ctx.globals.grid_n);
  const auto schedule = usable_schedule(k_list, grid, *sink, ctx.err);
  settings_line(*sink, ctx.globals, grid, schedule);
  const auto report = r0_limit(m, family_for(ctx.globals, m), schedule, grid);
  *sink << "k,r0_k,abs_diff_to_limit\n";
  for (const auto& [k, v] : report.k_sequence) {
    *sink << k << "," << fmt(v) << "," << fmt(std::abs(v - report.value)) << "\n";
  }
  *sink << "limit," << fmt(report.value) << ","
        << fmt(report.extrapolation_error_estimate.value_or(0.0)) << "\n";
  if (report.fitted_order) *sink << "# fitted_order=" << fmt(*report.fitted_order) << "\n";
  for (const auto& w : report.warnings) {
    *sink << "# warning: " << w << "\n";
    ctx.err << "warning: " << w << "\n";
  }
  return kExitOk;
}

int cmd_sweep_d(const Context& ctx, const std::string& model_path, double d_min, double d_max,
                int n_points, bool linear) {
  const ModelSpec m = load_valid_model(model_path);
  if (!(d_min > 0.0) && !linear) throw DomainError("--d-min must be positive on a log scale");
  if (!(d_max > d_min) || n_points < 2) throw DomainError("need d_min < d_max and n >= 2");
  if (!m.is_age_model()) {
    throw UnsupportedModel("sweep-d needs the age-diffusion model (gamma = 1, constant mu)");
  }
  Sink sink(ctx.globals.out_path, ctx.out);
  ctx.header(*sink, "sweep-d");
  *sink << "# settings: d_min=" << fmt(d_min) << " d_max=" << fmt(d_max)
        << " n_points=" << n_points << " scale=" << (linear ? "linear" : "log") << "\n";
  const auto values = ordered_parallel_map(static_cast<std::size_t>(n_points), [&](std::size_t i) {
    const double t = static_cast<double>(i) / (n_points - 1);
    const double d = linear ? d_min + t * (d_max - d_min)
                            : std::exp(std::log(d_min) + t * (std::log(d_max) - std::log(d_min)));
    ModelSpec local = m;
    local.diffusion = d;
    return std::pair{d, r0_age_diffusion(local)};
  });
  *sink << "D,R0\n";
  for (const auto& [d, r] : values) *sink << fmt(d) << "," << fmt(r) << "\n";
  const auto optimum = optimal_diffusion(m.beta, m.mu.constant_value());
  *sink << "# optimum: D*=" << fmt(optimum.d_star)
        << " R0*=" << fmt(m.birth_multiplicity * optimum.r0_star)
        << " kind=" << to_string(optimum.kind) << "\n";
  return kExitOk;
}

int cmd_simulate(const Context& ctx, const std::string& model_path, int k,
                 std::optional<double> t_end, double dt, const std::string& scheme, int every) {
  const ModelSpec m = load_valid_model(model_path);
  if (every < 1) throw DomainError("--every must be >= 1");
  const Grid grid = make_grid(m, ctx.globals.grid_n);
  if (k > max_resolvable_k(grid)) {
    throw GridTooCoarse("grid does not resolve k = " + std::to_string(k) + "; raise --grid-n");
  }
  const double horizon = t_end.value_or(50.0 / m.mu_min());
  Evolution::Options options;
  options.scheme = scheme == "crank-nicolson" ? TimeScheme::CrankNicolson : TimeScheme::ImplicitEuler;
  const MollifierFamily family = family_for(ctx.globals, m);
  const Evolution evolution(m, family, k, grid, dt, options);

  Sink sink(ctx.globals.out_path, ctx.out);
  ctx.header(*sink, "simulate");
  settings_line(*sink, ctx.globals, grid, {k});
  *sink << "# dt=" << fmt(dt) << " t_end=" << fmt(horizon) << " scheme=" << scheme << "\n";
  *sink << "t,mass,births,deaths,outflow,ledger_residual\n";
  EvolutionState state = EvolutionState::initial(sample_mollifier(family, k, grid));
  *sink << fmt(0.0) << "," << fmt(state.field.mass()) << ",,,,\n";
  const int steps = static_cast<int>(std::ceil(horizon / dt - 1e-9));
  for (int i = 1; i <= steps; ++i) {
    state = evolution.step(state);
    state.mass_history.erase(state.mass_history.begin() + 1, state.mass_history.end());
    if (i % every == 0 || i == steps) {
      const auto& l = state.last_step;
      *sink << fmt(state.time) << "," << fmt(l.mass_after) << "," << fmt(l.births) << ","
            << fmt(l.deaths) << "," << fmt(l.outflow) << "," << fmt(l.residual()) << "\n";
    }
  }
  return kExitOk;
}

int cmd_validate(const Context& ctx, const std::string& filter) {
  Sink sink(ctx.globals.out_path, ctx.out);
  ctx.header(*sink, "validate");
  dev::set_lambda2_sign_flip(ctx.globals.mutate_lambda2);
  AcceptanceOptions options;
  options.seed = ctx.globals.seed;
  options.filter = filter;
  std::vector<CriterionResult> results;
  try {
    results = run_acceptance(options);
  } catch (...) {
    dev::set_lambda2_sign_flip(false);
    throw;
  }
  dev::set_lambda2_sign_flip(false);
  int passed = 0;
  for (const auto& r : results) {
    *sink << format_result(r) << "\n";
    if (r.passed) ++passed;
  }
  *sink << "# " << passed << "/" << results.size() << " passed"
        << (ctx.globals.mutate_lambda2 ? " (lambda2 sign mutated)" : "") << "\n";
  if (results.empty()) {
    ctx.err << "no criterion matches filter '" << filter << "'\n";
    return kExitInvalidInput;
  }
  return passed == static_cast<int>(results.size()) ? kExitOk : kExitValidateFailed;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Basic reproduction numbers of structured population models", "r0kit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  Globals globals;
  app.add_option("--grid-n", globals.grid_n, "Number of grid cells")
      ->check(CLI::Range(16, 1 << 24))
      ->capture_default_str();
  app.add_option("--tol", globals.tol, "Agreement tolerance between routes")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--family", globals.family, "Concentrating offspring densities")
      ->check(CLI::IsMember({"uniform", "bump", "triangular"}))
      ->capture_default_str();
  app.add_option("--out", globals.out_path, "Write CSV to this file instead of stdout");
  app.add_option("--seed", globals.seed, "Seed for randomized checks in validate")
      ->capture_default_str();
  app.add_flag("--dev-mutate-lambda2", globals.mutate_lambda2)->group("");

  std::string model_path;
  std::string method = "all";
  std::vector<int> k_list = default_k_schedule();
  auto* compute = app.add_subcommand("compute", "R0 of a model by one or all routes");
  compute->add_option("model", model_path, "Model file")->required();
  compute->add_option("--method", method, "Route")
      ->check(CLI::IsMember({"analytic", "green-limit", "time-domain", "all"}))
      ->capture_default_str();
  compute->add_option("--k", k_list, "k schedule for the green-limit route")->delimiter(',');

  auto* converge = app.add_subcommand("converge", "Table of R0_k and its extrapolated limit");
  converge->add_option("model", model_path, "Model file")->required();
  converge->add_option("--k", k_list, "k schedule")->delimiter(',');

  double d_min = 1e-3;
  double d_max = 1e3;
  int n_points = 61;
  bool linear = false;
  auto* sweep = app.add_subcommand("sweep-d", "R0 of the age-diffusion model against D");
  sweep->add_option("model", model_path, "Model file")->required();
  sweep->add_option("--d-min", d_min)->capture_default_str();
  sweep->add_option("--d-max", d_max)->capture_default_str();
  sweep->add_option("--n-points", n_points)->capture_default_str();
  sweep->add_flag("--linear", linear, "Linear instead of logarithmic spacing");

  int sim_k = 64;
  std::optional<double> t_end;
  double dt = 0.01;
  std::string scheme = "implicit-euler";
  int every = 10;
  auto* simulate = app.add_subcommand("simulate", "Time-domain run; emits the mass history");
  simulate->add_option("model", model_path, "Model file")->required();
  simulate->add_option("--k", sim_k)->capture_default_str();
  simulate->add_option("--t-end", t_end, "Final time (default 50/mu_min)");
  simulate->add_option("--dt", dt)->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--scheme", scheme)
      ->check(CLI::IsMember({"implicit-euler", "crank-nicolson"}))
      ->capture_default_str();
  simulate->add_option("--every", every, "Output every n-th step")->capture_default_str();

  std::string filter;
  auto* validate = app.add_subcommand("validate", "Run the cross-route acceptance checks");
  validate->add_option("--filter", filter, "Tag or criterion number");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalidInput;
  }

  std::string invocation;
  for (int i = 1; i < argc; ++i) invocation += (i > 1 ? " " : "") + std::string(argv[i]);
  const Context ctx{globals, invocation, out, err};

  try {
    if (*compute) return cmd_compute(ctx, model_path, method, k_list);
    if (*converge) return cmd_converge(ctx, model_path, k_list);
    if (*sweep) return cmd_sweep_d(ctx, model_path, d_min, d_max, n_points, linear);
    if (*simulate) return cmd_simulate(ctx, model_path, sim_k, t_end, dt, scheme, every);
    if (*validate) return cmd_validate(ctx, filter);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const GridTooCoarse& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const std::exception& e) {
    err << "solver failure: " << e.what() << "\n";
    return kExitSolverFailure;
  }
  return kExitInvalidInput;
}

}  // namespace r0kit

// Subcommand implementations behind the CLI: exit code 0 on success, 1 on
// configuration/hypothesis failure, 2 on solver failure, 3 on certificate
// failure.

#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include "io.hpp"

namespace gaskpl {

struct CliOverrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> level;
  std::optional<int> starts;
  std::optional<double> tol;
  std::optional<double> k_override;
};

// Resolved problem + context for one run; shared by solve/constants/sweep.
// The graph lives behind a stable pointer because the context refers to it.
struct ResolvedRun {
  std::shared_ptr<GasketGraph> graph;
  EnergyContext ctx;
  ProblemSpec spec;
  Constants constants;
  RunConfig cfg;
  const GasketGraph& g() const { return *graph; }
};

// Builds graph/fields/context, estimates (or takes) r_p and K, computes the
// constants and resolves relative lambda/gamma.  Throws on bad input.
ResolvedRun resolve_run(const RunConfig& cfg);

int cmd_solve(const std::string& config_path, const CliOverrides& ov, std::ostream& out,
              std::ostream& err);
int cmd_rp(double p, int max_level, double tol, std::ostream& out, std::ostream& err);
int cmd_constants(const std::string& config_path, const CliOverrides& ov, std::ostream& out,
                  std::ostream& err);
int cmd_sweep(const std::string& config_path, const CliOverrides& ov, double lambda_min,
              double lambda_max, double gamma_min, double gamma_max, int n_lambda, int n_gamma,
              int jobs, std::ostream& out, std::ostream& err);
int cmd_render(const std::string& solution_path, const std::string& out_path,
               const std::string& field, std::ostream& out, std::ostream& err);

}  // namespace gaskpl

// File formats: per-vertex field files (one value per line, id order),
// solution tables (header + one row per vertex), certificate JSON, and the
// run configuration.

#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "field.hpp"
#include "gasket.hpp"
#include "solver.hpp"
#include "verify.hpp"

namespace gaskpl {

// One real per vertex in id order; validates the count and, when
// require_nonnegative, rejects negative entries.
VertexField read_field_file(const std::string& path, const GasketGraph& g,
                            bool require_nonnegative);
void write_field_file(const std::string& path, const VertexField& f);

// Coefficient presets: "one", "bump" / "bump:WORD" (1 on the vertices of the
// order-|WORD| cell, 0 elsewhere), "file:PATH".
VertexField coefficient_field(const std::string& spec_text, const GasketGraph& g);

struct SolutionTable {
  std::vector<int> ids;
  std::vector<std::string> words;
  std::vector<double> x, y, weight;
  VertexField u, v;
};

// Header "id word x y weight u v", then one row per vertex; doubles are
// written with max_digits10 so re-reading reproduces them bit-exactly.
void write_solution_table(const std::string& path, const GasketGraph& g, const VertexField& u,
                          const VertexField& v);
SolutionTable read_solution_table(const std::string& path);

nlohmann::ordered_json certificate_to_json(const Certificate& cert);
void write_certificate(const std::string& path, const Certificate& cert);

struct RunConfig {
  // problem
  double p = 2.0, q = 1.5, alpha = 1.5, beta = 1.5;
  int level = 4;
  std::optional<double> lambda, gamma;          // absolute values
  std::optional<double> lambda_rel, gamma_rel;  // lambda = rel * kappa0 / ||a||_1
  std::string a = "one", b = "one", h = "one";
  // solver
  SolverConfig solver;
  // renormalization factor
  int rp_max_level = 6;
  double rp_tol = 1e-8;
  std::optional<double> rp_override;
  // constants
  std::optional<double> k_override;
  // verification sampling
  SamplingConfig sampling;
  VerifyTolerances tolerances;
  // output
  std::string out_dir = "out";
  bool render = false;
};

RunConfig load_run_config(const std::string& path);
nlohmann::ordered_json run_config_to_json(const RunConfig& cfg);

}  // namespace gaskpl

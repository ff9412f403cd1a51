// Two-branch Nehari minimization.  Each start draws a random zero-trace
// direction pair meeting the branch's sign precondition, projects it onto the
// branch through the root map, then runs projected descent: backtracking step
// along the (ray-orthogonalized) negative Euler gradient in the ambient pair
// space, re-projection onto the branch after every accepted step, stop when
// the interior sup-norm of the gradient drops below grad_tol.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fibering.hpp"
#include "functional.hpp"

namespace gaskpl {

struct SolverConfig {
  int starts = 16;
  long max_outer_iters = 50000;
  double grad_tol = 1e-6;     // stopping tolerance on the weak-form defect
  double armijo_c = 1e-4;
  double shrink = 0.5;
  double initial_step = 1.0;
  // Barzilai-Borwein trial step for the backtracking search; with a fixed
  // unit trial the deep-level problems stall short of grad_tol.
  bool bb_trial = true;
  int jobs = 0;               // concurrent starts; 0 = hardware
  std::uint64_t seed = 1;
  bool record_trace = false;  // keep per-iteration I values (tests)
};

struct Solution {
  Branch branch = Branch::plus;
  VertexField u, v;
  double I_value = 0.0;
  double phi1 = 0.0;           // Phi'(1) residual
  double phi2 = 0.0;           // Phi''(1)
  double grad_dual_norm = 0.0; // interior sup-norm of the Euler gradient
  long iterations = 0;
  int start_index = -1;
  bool converged = false;
};

struct ProjectResult {
  VertexField u, v;
  double t = 0.0;
};

// Scales (u,v) onto M^+ via the plus-labeled Nehari root; absent when no such
// root exists (X <= 0, or the degenerate X >= M(t_max) window).
std::optional<ProjectResult> project_plus(const ProblemSpec& spec, const EnergyContext& ctx,
                                          const VertexField& u, const VertexField& v);
// Same for M^- (needs H > 0).
std::optional<ProjectResult> project_minus(const ProblemSpec& spec, const EnergyContext& ctx,
                                           const VertexField& u, const VertexField& v);

enum class SolveStatus { ok, unconverged, no_admissible_start };

struct BranchResult {
  SolveStatus status = SolveStatus::no_admissible_start;
  std::optional<Solution> solution;  // best over starts; present unless no start was admissible
  std::string message;
  std::vector<double> trace;  // I per accepted iteration of the winning start
};

BranchResult minimize_branch(const ProblemSpec& spec, const EnergyContext& ctx, Branch branch,
                             const Constants& constants, const SolverConfig& config);

struct SystemResult {
  BranchResult plus;
  BranchResult minus;
  bool both_ok() const { return plus.status == SolveStatus::ok && minus.status == SolveStatus::ok; }
};

// Both branches for one problem; hypotheses (H1, H3, H2 against kappa_0) are
// re-checked and failures throw std::invalid_argument.
SystemResult solve_system(const ProblemSpec& spec, const EnergyContext& ctx,
                          const Constants& constants, const SolverConfig& config);

// Scales t_eps projecting (u + eps w1, v + eps w2) back onto the solution's
// branch, one entry per epsilon; absent entries mark failed projections.
std::vector<std::optional<double>> perturbation_scales(const ProblemSpec& spec,
                                                       const EnergyContext& ctx,
                                                       const Solution& sol,
                                                       const VertexField& w1,
                                                       const VertexField& w2,
                                                       const std::vector<double>& epsilons);

}  // namespace gaskpl

// Binds solver output to the inequalities the existence argument runs on:
// weak-solution residual, the branch membership margins, the two Nehari
// identities, the separating chain I+ < 0 < d0 < I-, and sampled checks of
// degenerate-set emptiness and coercivity.  Everything lands in a
// machine-readable Certificate whose pass flags are pure functions of the
// recorded numbers.

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fibering.hpp"
#include "functional.hpp"
#include "solver.hpp"

namespace gaskpl {

struct SamplingConfig {
  int mzero_samples = 1000;      // random pairs for the M^0 emptiness sweep
  int coercivity_samples = 200;  // Nehari-projected pairs for the coercivity bound
  int holder_fields = 8;         // random fields joining the solution fields
  double holder_cap = 10.0;      // single-constant bound for the Holder ratios
  std::uint64_t seed = 7;
};

struct VerifyTolerances {
  double on_manifold_rel = 1e-8;  // |Phi'(1)| <= tol * ||(u,v)||^p
  double identity_rel = 1e-8;     // Nehari identity defects
  double margin_abs = 1e-10;      // strict inequalities must clear this
  double residual = 1e-6;         // weak residual pass level
};

// Interior sup-norm of the Euler gradient: the maximal weak-form defect over
// the coordinate test basis of the zero-trace space.
double weak_residual(const ProblemSpec& spec, const EnergyContext& ctx, const Solution& sol);

// Branch membership margins (X - ((ab-p)/(ab-q)) N, H - ((p-q)/(ab-q)) N);
// the first must be positive on M^+, the second on M^-, both vanish on M^0.
std::pair<double, double> branch_membership_margins(const ProblemSpec& spec,
                                                    const EnergyContext& ctx, const Solution& sol);

struct CertificateItem {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct BranchReport {
  std::string branch;
  double I_value = 0.0;
  double phi1 = 0.0;
  double phi2 = 0.0;
  double grad_dual_norm = 0.0;
  double weak_res = 0.0;
  double norm_p = 0.0;
  double membership_margin = 0.0;
  double identity_concave_err = 0.0;  // I vs (1/p-1/ab)N - (1/q-1/ab)X, relative
  double identity_coupling_err = 0.0; // I vs (1/p-1/q)N + (1/q-1/ab)H, relative
  long iterations = 0;
  int start_index = -1;
};

struct Certificate {
  // Problem echo
  double p = 0, q = 0, alpha = 0, beta = 0, lambda = 0, gamma = 0;
  int level = 0;
  double rp = 0;
  std::uint64_t solver_seed = 0;
  int solver_starts = 0;
  double solver_grad_tol = 0;

  Constants constants;
  BranchReport plus, minus;

  double mzero_min_rel_phi2 = 0.0;  // min |Phi''(1)|/N over Nehari-projected samples
  int mzero_hits = 0;
  int coercivity_violations = 0;
  double coercivity_min_slack = 0.0;
  HolderReport holder;

  std::vector<CertificateItem> items;
  bool pass = false;
};

Certificate certify(const ProblemSpec& spec, const EnergyContext& ctx, const Constants& constants,
                    const Solution& plus, const Solution& minus, const SolverConfig& solver_cfg,
                    const SamplingConfig& sampling = {}, const VerifyTolerances& tol = {});

}  // namespace gaskpl

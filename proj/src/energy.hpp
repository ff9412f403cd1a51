// Discrete p-energy on the gasket: the cell functional A_p, crude and
// renormalized energies, p-harmonic extension, the renormalization factor
// r_p, energy gradients, and the Holder / sup-norm embedding constants.
//
// The cell energy is A_p(a1,a2,a3) = sum_{i<j} |a_i - a_j|^p, which is convex,
// degree-p homogeneous, permutation and translation invariant and Markov; at
// p = 2 it is the classical Dirichlet cell energy with r_2 = 3/5.  The m-th
// level crude energy sums A_p over all 3^m cells and the renormalized energy
// is r_p^{-m} times that.

#pragma once

#include <array>
#include <optional>
#include <vector>

#include "field.hpp"
#include "gasket.hpp"

namespace gaskpl {

struct ApModel {
  double p = 2.0;

  double eval(double a1, double a2, double a3) const;
  std::array<double, 3> grad(double a1, double a2, double a3) const;
  // The generating even function g(x) = A_p(-1, x, 1) on [-1, 1].
  double g_view(double x) const;
};

struct EnergyContext {
  const GasketGraph* graph = nullptr;
  ApModel model;
  double rp = 0.6;
  double scale = 1.0;  // rp^{-level}
};

EnergyContext make_context(const GasketGraph& g, const ApModel& model, double rp);

double ap_eval(const ApModel& model, double a1, double a2, double a3);
double crude_energy(const EnergyContext& ctx, const VertexField& u);
double renormalized_energy(const EnergyContext& ctx, const VertexField& u);
// Gradient of the renormalized energy; boundary entries are included and the
// caller masks them when working in the zero-trace space.
VertexField energy_gradient(const EnergyContext& ctx, const VertexField& u);
// (E_p(u) + E_p(v))^{1/p}.
double pair_norm(const EnergyContext& ctx, const VertexField& u, const VertexField& v);

struct MinimizeOptions {
  double grad_tol = 1e-10;  // sup-norm of the free gradient
  long max_iters = 100000;
};

struct MinimizeResult {
  VertexField field;
  double crude = 0.0;
  double grad_sup = 0.0;
  long iters = 0;
  bool converged = false;
};

// Minimizes the crude energy over fields with the given entries pinned.  The
// energy is strictly convex modulo constants for p > 1, so with at least one
// pinned vertex the minimizer is unique.  p = 2 is solved exactly (sparse
// Cholesky); otherwise gradient descent with backtracking line search.
MinimizeResult minimize_crude_energy(const GasketGraph& g, const ApModel& model,
                                     const std::vector<int>& fixed_ids,
                                     const std::vector<double>& fixed_values,
                                     const VertexField* warm_start = nullptr,
                                     const MinimizeOptions& opts = {});

// Extends `coarse` (all its vertices pinned) to the minimal-crude-energy
// field on `fine`.  Throws std::runtime_error if the inner minimizer fails.
VertexField p_harmonic_extension(const ApModel& model, const GasketGraph& coarse_g,
                                 const VertexField& coarse, const GasketGraph& fine_g,
                                 const MinimizeOptions& opts = {});
// Corner-data form: the three values are the level-`from_level` data (only
// meaningful pinned set for three reals is the corners, i.e. from_level = 0).
VertexField p_harmonic_extension(const ApModel& model, const std::array<double, 3>& corner_values,
                                 int from_level, int to_level, const MinimizeOptions& opts = {});

// One-level minimal extension; decomposes into an independent 3-variable
// convex problem per coarse cell (closed form at p = 2, the 2/5-2/5-1/5 rule).
VertexField one_level_extension(const ApModel& model, const GasketGraph& coarse_g,
                                const VertexField& coarse, const GasketGraph& fine_g);

struct RpEstimate {
  double value = 0.0;    // last ratio rho_{m+1}/rho_m
  double spread = 0.0;   // |last ratio - previous ratio|
  bool converged = false;
  int levels_used = 0;
  std::vector<double> ratios;
};

// Successive minimal-energy ratios for the fixed boundary data (0, 1/2, 1);
// converged when two consecutive ratios agree to tol.  At p = 2 every ratio
// is exactly 3/5.
RpEstimate estimate_rp(const ApModel& model, int max_level, double tol,
                       const MinimizeOptions& opts = {});

// Discrete sharp constant of ||u||_inf <= K ||u||_{E_p} over zero-trace
// fields: per interior vertex, maximize u(x) at unit energy (equivalently
// K(x) = rho(x)^{-1/p} with rho(x) the minimal renormalized energy subject to
// u(x) = 1); K is the max over x.  Exact at p = 2 via the diagonal of the
// inverse interior energy matrix.
double estimate_embedding_K(const EnergyContext& ctx, const MinimizeOptions& opts = {});

struct HolderReport {
  std::vector<int> orders;
  std::vector<double> ratios;  // per order: max |u(x)-u(y)| / (E^{1/p} rp^{m'/p})
  double max_ratio = 0.0;
};

HolderReport holder_constant_check(const EnergyContext& ctx, const VertexField& u,
                                   const std::vector<int>& orders);

}  // namespace gaskpl

// Fibering-map analysis on the Nehari set.
//
// For a direction pair (u,v) everything reduces to three scalars
//   N = ||(u,v)||^p,  X = lambda int a|u|^q + gamma int b|v|^q,
//   H = int h|u|^alpha |v|^beta,
// through  Phi(t) = I(tu,tv) = (t^p/p)N - (t^q/q)X - (t^{a+b}/(a+b))H  and
//   M(t) = t^{p-q} N - t^{a+b-q} H.
// Scalings t with (tu,tv) on the Nehari set are exactly the solutions of
// M(t) = X; when H > 0, M peaks at
//   t_max = ((p-q)N / ((a+b-q)H))^{1/(a+b-p)}
// and the root portrait splits by the signs of X and H (the four fibering
// cases).  kappa, kappa_0 = (q/p) kappa and d_0 are the explicit constants
// bounding the admissible (lambda,gamma) region.

#pragma once

#include <optional>
#include <vector>

#include "energy.hpp"
#include "field.hpp"
#include "functional.hpp"

namespace gaskpl {

enum class Branch { plus, minus };

struct FiberingScalars {
  double Eu = 0.0;  // E_p(u)
  double Ev = 0.0;  // E_p(v)
  double X = 0.0;
  double H = 0.0;
  double p = 2.0, q = 1.5, ab = 3.0;

  double norm_p() const { return Eu + Ev; }
  FiberingScalars scaled(double t) const;  // scalars of (tu, tv)
};

FiberingScalars fibering_scalars(const ProblemSpec& spec, const EnergyContext& ctx,
                                 const VertexField& u, const VertexField& v);

double phi(const FiberingScalars& s, double t);
double phi_prime(const FiberingScalars& s, double t);
double phi_double_prime(const FiberingScalars& s, double t);
double m_function(const FiberingScalars& s, double t);
double m_prime(const FiberingScalars& s, double t);

// Peak of M; absent unless H > 0.
std::optional<double> t_max(const FiberingScalars& s);
// Lower bound for M(t_max) in terms of ||(u,v)||^q, ||h||_1 and the embedding
// constant (the chain closing the two-root argument).
double m_at_tmax_lower_bound(const FiberingScalars& s, double h_l1, double K);

enum class FiberingCase {
  x_le0_h_le0,  // Phi increasing, no root
  x_le0_h_pos,  // one root on the decreasing side (minus branch)
  x_pos_h_le0,  // one root (plus branch)
  x_pos_h_pos   // two roots, tangency, or none depending on X vs M(t_max)
};

enum class RootDegeneracy { none, tangent, above_peak };

struct NehariRoot {
  double t = 0.0;
  Branch branch = Branch::plus;
};

struct FiberingDiagnostics {
  FiberingScalars scalars;
  std::optional<double> tmax;
  std::optional<double> m_at_tmax;
  std::vector<NehariRoot> roots;  // at most two, ordered by t
  FiberingCase case_tag = FiberingCase::x_le0_h_le0;
  RootDegeneracy degeneracy = RootDegeneracy::none;
};

// Solves M(t) = X by bisection on the monotone bracket(s); the degenerate
// X ~ M(t_max) tangency is reported, never forced into two roots.
FiberingDiagnostics nehari_roots(const FiberingScalars& s);

FiberingDiagnostics fibering_diagnostics(const ProblemSpec& spec, const EnergyContext& ctx,
                                         const VertexField& u, const VertexField& v);

enum class Classification { m_plus, m_zero, m_minus, off_manifold };

Classification classify_scalars(const FiberingScalars& s, double tol);
Classification classify(const ProblemSpec& spec, const EnergyContext& ctx, const VertexField& u,
                        const VertexField& v, double tol = 1e-8);

struct Constants {
  double K = 0.0;
  double kappa = 0.0;
  double kappa0 = 0.0;
  double d0 = 0.0;
  double a_l1 = 0.0, b_l1 = 0.0, h_l1 = 0.0;
  double strength_abs = 0.0;     // |lambda| ||a||_1 + |gamma| ||b||_1
  double strength_signed = 0.0;  // lambda ||a||_1 + gamma ||b||_1
};

// kappa = ((ab-p)/(ab-q)) K^{-q} ((p-q)/((ab-q) K^{ab} ||h||_1))^{(p-q)/(ab-p)},
// kappa_0 = (q/p) kappa, and d_0 from the minus-branch lower bound; d_0 > 0
// exactly when the absolute strength stays below kappa_0.
Constants compute_constants(const ProblemSpec& spec, const EnergyContext& ctx,
                            std::optional<double> K_override = std::nullopt,
                            const MinimizeOptions& opts = {});

enum class LambdaRegion { inside_lambda0, inside_lambda_only, outside };

// Membership uses the absolute-value strength; the signed value is carried in
// Constants for reporting.
LambdaRegion lambda_region(const Constants& c);

}  // namespace gaskpl

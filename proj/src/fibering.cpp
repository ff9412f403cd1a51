#include "fibering.hpp"

#include <cmath>
#include <stdexcept>

namespace gaskpl {

namespace {

void require_positive_t(double t) {
  if (!(t > 0.0)) throw std::domain_error("fibering maps are defined for t > 0");
}

// Bisection for M(t) = X on a bracket where M - X changes sign monotonically.
double bisect_root(const FiberingScalars& s, double lo, double hi, double tol_abs) {
  double flo = m_function(s, lo) - s.X;
  for (int it = 0; it < 220 && hi - lo > tol_abs; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = m_function(s, mid) - s.X;
    if ((fmid <= 0.0) == (flo <= 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

FiberingScalars FiberingScalars::scaled(double t) const {
  FiberingScalars out = *this;
  out.Eu = std::pow(t, p) * Eu;
  out.Ev = std::pow(t, p) * Ev;
  out.X = std::pow(t, q) * X;
  out.H = std::pow(t, ab) * H;
  return out;
}

FiberingScalars fibering_scalars(const ProblemSpec& spec, const EnergyContext& ctx,
                                 const VertexField& u, const VertexField& v) {
  FiberingScalars s;
  s.Eu = renormalized_energy(ctx, u);
  s.Ev = renormalized_energy(ctx, v);
  s.X = term_concave(spec, *ctx.graph, u, v);
  s.H = term_coupling(spec, *ctx.graph, u, v);
  s.p = spec.p;
  s.q = spec.q;
  s.ab = spec.ab();
  return s;
}

double phi(const FiberingScalars& s, double t) {
  require_positive_t(t);
  return std::pow(t, s.p) / s.p * s.norm_p() - std::pow(t, s.q) / s.q * s.X -
         std::pow(t, s.ab) / s.ab * s.H;
}

double phi_prime(const FiberingScalars& s, double t) {
  require_positive_t(t);
  return std::pow(t, s.p - 1.0) * s.norm_p() - std::pow(t, s.q - 1.0) * s.X -
         std::pow(t, s.ab - 1.0) * s.H;
}

double phi_double_prime(const FiberingScalars& s, double t) {
  require_positive_t(t);
  return (s.p - 1.0) * std::pow(t, s.p - 2.0) * s.norm_p() -
         (s.q - 1.0) * std::pow(t, s.q - 2.0) * s.X -
         (s.ab - 1.0) * std::pow(t, s.ab - 2.0) * s.H;
}

double m_function(const FiberingScalars& s, double t) {
  require_positive_t(t);
  return std::pow(t, s.p - s.q) * s.norm_p() - std::pow(t, s.ab - s.q) * s.H;
}

double m_prime(const FiberingScalars& s, double t) {
  require_positive_t(t);
  return (s.p - s.q) * std::pow(t, s.p - s.q - 1.0) * s.norm_p() -
         (s.ab - s.q) * std::pow(t, s.ab - s.q - 1.0) * s.H;
}

std::optional<double> t_max(const FiberingScalars& s) {
  if (!(s.H > 0.0)) return std::nullopt;
  return std::pow((s.p - s.q) * s.norm_p() / ((s.ab - s.q) * s.H), 1.0 / (s.ab - s.p));
}

double m_at_tmax_lower_bound(const FiberingScalars& s, double h_l1, double K) {
  const double r = (s.p - s.q) / (s.ab - s.q);
  const double e = (s.p - s.q) / (s.ab - s.p);
  return std::pow(s.norm_p(), s.q / s.p) * std::pow(r, e) * ((s.ab - s.p) / (s.ab - s.q)) *
         std::pow(1.0 / (h_l1 * std::pow(K, s.ab)), e);
}

FiberingDiagnostics nehari_roots(const FiberingScalars& s) {
  FiberingDiagnostics d;
  d.scalars = s;
  const double N = s.norm_p();
  if (!(N > 0.0)) throw std::invalid_argument("nehari_roots: zero pair");

  if (s.H <= 0.0) {
    if (s.X <= 0.0) {
      d.case_tag = FiberingCase::x_le0_h_le0;  // M > 0 >= X on (0,inf): no root
      return d;
    }
    d.case_tag = FiberingCase::x_pos_h_le0;
    // M increases from 0 to +infinity; single crossing, plus branch.
    double lo = 1.0, hi = 1.0;
    while (m_function(s, lo) >= s.X) lo *= 0.5;
    while (m_function(s, hi) <= s.X) hi *= 2.0;
    const double t = bisect_root(s, lo, hi, 1e-12 * std::max(1.0, hi));
    d.roots.push_back({t, Branch::plus});
    return d;
  }

  const double tm = *t_max(s);
  d.tmax = tm;
  const double mt = m_function(s, tm);
  d.m_at_tmax = mt;

  if (s.X <= 0.0) {
    d.case_tag = FiberingCase::x_le0_h_pos;
    // Single crossing on the decreasing side of the peak.
    double hi = 2.0 * tm;
    while (m_function(s, hi) >= s.X) hi *= 2.0;
    const double t = bisect_root(s, tm, hi, 1e-12 * std::max(1.0, tm));
    d.roots.push_back({t, Branch::minus});
    return d;
  }

  d.case_tag = FiberingCase::x_pos_h_pos;
  if (std::abs(s.X - mt) <= 1e-12 * std::max(std::abs(s.X), mt)) {
    d.degeneracy = RootDegeneracy::tangent;
    d.roots.push_back({tm, Branch::plus});  // tangent root at the peak, M' = 0
    return d;
  }
  if (s.X > mt) {
    d.degeneracy = RootDegeneracy::above_peak;
    return d;
  }

  const double tol = 1e-12 * std::max(1.0, tm);
  double lo = tm;
  while (m_function(s, lo) >= s.X) lo *= 0.5;
  const double t0 = bisect_root(s, lo, tm, tol);
  double hi = 2.0 * tm;
  while (m_function(s, hi) >= s.X) hi *= 2.0;
  const double t1 = bisect_root(s, tm, hi, tol);
  d.roots.push_back({t0, Branch::plus});
  d.roots.push_back({t1, Branch::minus});
  return d;
}

FiberingDiagnostics fibering_diagnostics(const ProblemSpec& spec, const EnergyContext& ctx,
                                         const VertexField& u, const VertexField& v) {
  return nehari_roots(fibering_scalars(spec, ctx, u, v));
}

Classification classify_scalars(const FiberingScalars& s, double tol) {
  const double N = s.norm_p();
  if (!(N > 0.0)) throw std::invalid_argument("classify: zero pair");
  const double p1 = phi_prime(s, 1.0);
  if (std::abs(p1) > tol * N) return Classification::off_manifold;
  const double p2 = phi_double_prime(s, 1.0);
  if (std::abs(p2) <= tol * N) return Classification::m_zero;
  return p2 > 0.0 ? Classification::m_plus : Classification::m_minus;
}

Classification classify(const ProblemSpec& spec, const EnergyContext& ctx, const VertexField& u,
                        const VertexField& v, double tol) {
  return classify_scalars(fibering_scalars(spec, ctx, u, v), tol);
}

Constants compute_constants(const ProblemSpec& spec, const EnergyContext& ctx,
                            std::optional<double> K_override, const MinimizeOptions& opts) {
  const GasketGraph& g = *ctx.graph;
  Constants c;
  c.a_l1 = l1_norm(g, spec.a);
  c.b_l1 = l1_norm(g, spec.b);
  c.h_l1 = l1_norm(g, spec.h);
  if (!(c.h_l1 > 0.0)) throw std::invalid_argument("compute_constants: ||h||_1 must be positive");

  c.K = K_override ? *K_override : estimate_embedding_K(ctx, opts);

  const double p = spec.p, q = spec.q, ab = spec.ab();
  const double B = (p - q) / ((ab - q) * std::pow(c.K, ab) * c.h_l1);
  c.kappa = ((ab - p) / (ab - q)) * std::pow(c.K, -q) * std::pow(B, (p - q) / (ab - p));
  c.kappa0 = (q / p) * c.kappa;

  c.strength_abs = std::abs(spec.lambda) * c.a_l1 + std::abs(spec.gamma) * c.b_l1;
  c.strength_signed = spec.lambda * c.a_l1 + spec.gamma * c.b_l1;
  c.d0 = std::pow(B, q / (ab - p)) *
         ((1.0 / p - 1.0 / ab) * std::pow(B, (p - q) / (ab - p)) -
          (1.0 / q - 1.0 / ab) * std::pow(c.K, q) * c.strength_abs);
  return c;
}

LambdaRegion lambda_region(const Constants& c) {
  if (c.strength_abs < c.kappa0) return LambdaRegion::inside_lambda0;
  if (c.strength_abs < c.kappa) return LambdaRegion::inside_lambda_only;
  return LambdaRegion::outside;
}

}  // namespace gaskpl

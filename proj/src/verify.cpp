#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace gaskpl {

double weak_residual(const ProblemSpec& spec, const EnergyContext& ctx, const Solution& sol) {
  auto [gu, gv] = euler_gradient(spec, ctx, sol.u, sol.v);
  return std::max(sup_norm(gu), sup_norm(gv));
}

std::pair<double, double> branch_membership_margins(const ProblemSpec& spec,
                                                    const EnergyContext& ctx, const Solution& sol) {
  const FiberingScalars s = fibering_scalars(spec, ctx, sol.u, sol.v);
  const double N = s.norm_p();
  if (std::abs(phi_prime(s, 1.0)) > 1e-6 * N)
    throw std::invalid_argument("branch_membership_margins: pair is off the Nehari set");
  const double x_margin = s.X - (s.ab - s.p) / (s.ab - s.q) * N;
  const double h_margin = s.H - (s.p - s.q) / (s.ab - s.q) * N;
  return {x_margin, h_margin};
}

namespace {

BranchReport make_branch_report(const ProblemSpec& spec, const EnergyContext& ctx,
                                const Solution& sol) {
  BranchReport r;
  r.branch = sol.branch == Branch::plus ? "plus" : "minus";
  const FiberingScalars s = fibering_scalars(spec, ctx, sol.u, sol.v);
  r.norm_p = s.norm_p();
  r.I_value = s.norm_p() / s.p - s.X / s.q - s.H / s.ab;
  r.phi1 = phi_prime(s, 1.0);
  r.phi2 = phi_double_prime(s, 1.0);
  r.grad_dual_norm = sol.grad_dual_norm;
  r.weak_res = weak_residual(spec, ctx, sol);
  r.iterations = sol.iterations;
  r.start_index = sol.start_index;

  const auto margins = branch_membership_margins(spec, ctx, sol);
  r.membership_margin = sol.branch == Branch::plus ? margins.first : margins.second;

  const double id_concave = (1.0 / s.p - 1.0 / s.ab) * r.norm_p - (1.0 / s.q - 1.0 / s.ab) * s.X;
  const double id_coupling = (1.0 / s.p - 1.0 / s.q) * r.norm_p + (1.0 / s.q - 1.0 / s.ab) * s.H;
  const double iref =
      std::max({std::abs(r.I_value), std::abs(id_concave), std::abs(id_coupling), 1e-300});
  r.identity_concave_err = std::abs(r.I_value - id_concave) / iref;
  r.identity_coupling_err = std::abs(r.I_value - id_coupling) / iref;
  return r;
}

}  // namespace

Certificate certify(const ProblemSpec& spec, const EnergyContext& ctx, const Constants& constants,
                    const Solution& plus, const Solution& minus, const SolverConfig& solver_cfg,
                    const SamplingConfig& sampling, const VerifyTolerances& tol) {
  if (plus.branch != Branch::plus || minus.branch != Branch::minus)
    throw std::invalid_argument("certify: solutions passed on the wrong branches");
  const GasketGraph& g = *ctx.graph;

  Certificate cert;
  cert.p = spec.p;
  cert.q = spec.q;
  cert.alpha = spec.alpha;
  cert.beta = spec.beta;
  cert.lambda = spec.lambda;
  cert.gamma = spec.gamma;
  cert.level = spec.level;
  cert.rp = ctx.rp;
  cert.solver_seed = solver_cfg.seed;
  cert.solver_starts = solver_cfg.starts;
  cert.solver_grad_tol = solver_cfg.grad_tol;
  cert.constants = constants;
  cert.plus = make_branch_report(spec, ctx, plus);
  cert.minus = make_branch_report(spec, ctx, minus);

  auto item = [&cert](const std::string& name, bool pass, double value, double threshold,
                      const std::string& detail) {
    cert.items.push_back({name, pass, value, threshold, detail});
  };

  const auto hyp = check_hypotheses(spec, g, constants.kappa0);
  item("H1_exponent_order", hyp.h1.pass, 0.0, 0.0, hyp.h1.detail);
  item("H2_parameter_strength", hyp.h2.pass, constants.strength_abs, constants.kappa0,
       hyp.h2.detail);
  item("H3_coefficients", hyp.h3.pass, constants.h_l1, 0.0, hyp.h3.detail);
  item("d0_positive", constants.d0 > tol.margin_abs, constants.d0, tol.margin_abs,
       "minus-branch infimum lower bound");

  for (const BranchReport* br : {&cert.plus, &cert.minus}) {
    const bool is_plus = br == &cert.plus;
    const std::string tag = br->branch + "_";
    item(tag + "on_manifold", std::abs(br->phi1) <= tol.on_manifold_rel * br->norm_p,
         std::abs(br->phi1), tol.on_manifold_rel * br->norm_p, "|Phi'(1)| against tol*||(u,v)||^p");
    item(tag + "second_derivative_sign", is_plus ? br->phi2 > 0.0 : br->phi2 < 0.0, br->phi2, 0.0,
         is_plus ? "Phi''(1) > 0 on M^+" : "Phi''(1) < 0 on M^-");
    item(tag + "weak_residual", br->weak_res <= tol.residual, br->weak_res, tol.residual,
         "interior sup-norm of the Euler gradient");
    item(tag + "membership_margin", br->membership_margin > tol.margin_abs, br->membership_margin,
         tol.margin_abs,
         is_plus ? "X - ((ab-p)/(ab-q))||(u,v)||^p > 0" : "H - ((p-q)/(ab-q))||(u,v)||^p > 0");
    item(tag + "identity_concave", br->identity_concave_err <= tol.identity_rel,
         br->identity_concave_err, tol.identity_rel, "I vs (1/p-1/ab)N - (1/q-1/ab)X");
    item(tag + "identity_coupling", br->identity_coupling_err <= tol.identity_rel,
         br->identity_coupling_err, tol.identity_rel, "I vs (1/p-1/q)N + (1/q-1/ab)H");
  }

  item("plus_I_negative", cert.plus.I_value < -tol.margin_abs, cert.plus.I_value, -tol.margin_abs,
       "inf over M^+ is negative");
  item("minus_I_above_d0", cert.minus.I_value > constants.d0 + tol.margin_abs, cert.minus.I_value,
       constants.d0, "I on M^- stays above d_0");
  item("separating_chain",
       cert.plus.I_value < 0.0 && 0.0 < constants.d0 && constants.d0 < cert.minus.I_value,
       cert.minus.I_value - cert.plus.I_value, 0.0, "I+ < 0 < d0 < I-");

  // Minus-branch norm floor evaluated with the level-m constants.
  {
    const FiberingScalars s = fibering_scalars(spec, ctx, minus.u, minus.v);
    const double B = (s.p - s.q) / ((s.ab - s.q) * std::pow(constants.K, s.ab) * constants.h_l1);
    const double floor_norm = std::pow(B, 1.0 / (s.ab - s.p));
    const double norm = std::pow(s.norm_p(), 1.0 / s.p);
    item("minus_norm_floor", norm + tol.margin_abs >= floor_norm, norm, floor_norm,
         "||(u,v)|| >= ((p-q)/((ab-q)K^{ab}||h||_1))^{1/(ab-p)} on M^-");
  }

  // Sampled emptiness of M^0 and coercivity over Nehari-projected pairs.
  {
    std::mt19937_64 rng(sampling.seed);
    double min_rel_phi2 = std::numeric_limits<double>::infinity();
    int mzero = 0;
    int coercivity_viol = 0;
    double min_slack = std::numeric_limits<double>::infinity();
    int projected = 0;
    for (int k = 0; k < sampling.mzero_samples; ++k) {
      VertexField ru = random_zero_trace_field(g, rng);
      VertexField rv = random_zero_trace_field(g, rng);
      const FiberingScalars s = fibering_scalars(spec, ctx, ru, rv);
      if (!(s.norm_p() > 0.0)) continue;
      const auto diag = nehari_roots(s);
      for (const auto& root : diag.roots) {
        const FiberingScalars sc = s.scaled(root.t);
        const double rel = std::abs(phi_double_prime(sc, 1.0)) / sc.norm_p();
        min_rel_phi2 = std::min(min_rel_phi2, rel);
        if (classify_scalars(sc, tol.on_manifold_rel) == Classification::m_zero) ++mzero;
        ++projected;
        if (projected <= sampling.coercivity_samples) {
          const double I = sc.norm_p() / sc.p - sc.X / sc.q - sc.H / sc.ab;
          const double nu = std::pow(sc.Eu, 1.0 / sc.p);
          const double nv = std::pow(sc.Ev, 1.0 / sc.p);
          const double bound = (1.0 / sc.p - 1.0 / sc.ab) * sc.norm_p() -
                               (1.0 / sc.q - 1.0 / sc.ab) * std::pow(constants.K, sc.q) *
                                   constants.strength_abs * std::pow(nu + nv, sc.q);
          const double slack = I - bound;
          min_slack = std::min(min_slack, slack);
          if (slack < -tol.margin_abs - 1e-8 * std::abs(I)) ++coercivity_viol;
        }
      }
    }
    cert.mzero_min_rel_phi2 = std::isfinite(min_rel_phi2) ? min_rel_phi2 : 0.0;
    cert.mzero_hits = mzero;
    cert.coercivity_violations = coercivity_viol;
    cert.coercivity_min_slack = std::isfinite(min_slack) ? min_slack : 0.0;
    item("no_degenerate_points", mzero == 0 && cert.mzero_min_rel_phi2 > 0.0,
         cert.mzero_min_rel_phi2, 0.0,
         "no Nehari-projected sample classifies M^0; min |Phi''(1)|/N reported");
    item("coercivity_bound", coercivity_viol == 0, cert.coercivity_min_slack, 0.0,
         "I >= (1/p-1/ab)N - (1/q-1/ab)K^q(|l|||a||+|g|||b||)(||u||+||v||)^q on samples");
  }

  // Holder ratios of the solution fields plus a few random fields, all orders.
  {
    std::vector<int> orders(static_cast<size_t>(g.level) + 1);
    for (int m = 0; m <= g.level; ++m) orders[static_cast<size_t>(m)] = m;
    std::mt19937_64 rng(sampling.seed + 1);
    std::vector<VertexField> extra;
    extra.reserve(static_cast<size_t>(sampling.holder_fields));
    for (int k = 0; k < sampling.holder_fields; ++k)
      extra.push_back(random_zero_trace_field(g, rng));
    std::vector<const VertexField*> fields = {&plus.u, &plus.v, &minus.u, &minus.v};
    for (const auto& f : extra) fields.push_back(&f);

    HolderReport worst;
    worst.orders = orders;
    worst.ratios.assign(orders.size(), 0.0);
    for (const VertexField* f : fields) {
      if (!(renormalized_energy(ctx, *f) > 0.0)) continue;
      const HolderReport rep = holder_constant_check(ctx, *f, orders);
      for (size_t i = 0; i < rep.ratios.size(); ++i)
        worst.ratios[i] = std::max(worst.ratios[i], rep.ratios[i]);
      worst.max_ratio = std::max(worst.max_ratio, rep.max_ratio);
    }
    cert.holder = worst;
    item("holder_ratios_bounded", worst.max_ratio <= sampling.holder_cap, worst.max_ratio,
         sampling.holder_cap, "empirical Holder constants across orders 0..level");
  }

  cert.pass = true;
  for (const auto& it : cert.items) cert.pass = cert.pass && it.pass;
  return cert;
}

}  // namespace gaskpl

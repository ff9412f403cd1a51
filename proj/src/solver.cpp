#include "solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>
#include <sstream>
#include <stdexcept>

namespace gaskpl {

namespace {

struct PairState {
  VertexField u, v;
  FiberingScalars s;
};

double i_value(const FiberingScalars& s) {
  return s.norm_p() / s.p - s.X / s.q - s.H / s.ab;
}

std::optional<NehariRoot> branch_root(const FiberingDiagnostics& d, Branch branch) {
  if (d.degeneracy == RootDegeneracy::tangent) return std::nullopt;  // M^0, never usable
  for (const auto& r : d.roots)
    if (r.branch == branch) return r;
  return std::nullopt;
}

std::optional<PairState> project_onto(const ProblemSpec& spec, const EnergyContext& ctx,
                                      const VertexField& u, const VertexField& v, Branch branch) {
  const FiberingScalars s = fibering_scalars(spec, ctx, u, v);
  if (!(s.norm_p() > 0.0)) return std::nullopt;
  const auto root = branch_root(nehari_roots(s), branch);
  if (!root) return std::nullopt;
  PairState st;
  st.u = u;
  st.v = v;
  for (auto& x : st.u.values) x *= root->t;
  for (auto& x : st.v.values) x *= root->t;
  st.s = s.scaled(root->t);
  return st;
}

}  // namespace

std::optional<ProjectResult> project_plus(const ProblemSpec& spec, const EnergyContext& ctx,
                                          const VertexField& u, const VertexField& v) {
  const FiberingScalars s = fibering_scalars(spec, ctx, u, v);
  if (!(s.norm_p() > 0.0)) return std::nullopt;
  const auto root = branch_root(nehari_roots(s), Branch::plus);
  if (!root) return std::nullopt;
  ProjectResult r;
  r.t = root->t;
  r.u = u;
  r.v = v;
  for (auto& x : r.u.values) x *= r.t;
  for (auto& x : r.v.values) x *= r.t;
  return r;
}

std::optional<ProjectResult> project_minus(const ProblemSpec& spec, const EnergyContext& ctx,
                                           const VertexField& u, const VertexField& v) {
  const FiberingScalars s = fibering_scalars(spec, ctx, u, v);
  if (!(s.norm_p() > 0.0)) return std::nullopt;
  const auto root = branch_root(nehari_roots(s), Branch::minus);
  if (!root) return std::nullopt;
  ProjectResult r;
  r.t = root->t;
  r.u = u;
  r.v = v;
  for (auto& x : r.u.values) x *= r.t;
  for (auto& x : r.v.values) x *= r.t;
  return r;
}

namespace {

struct StartDraw {
  bool admissible = false;
  std::string why_not;
  VertexField u, v;
};

StartDraw draw_start(const ProblemSpec& spec, const EnergyContext& ctx, Branch branch,
                     std::mt19937_64& rng) {
  const GasketGraph& g = *ctx.graph;
  StartDraw d;
  for (int attempt = 0; attempt < 4; ++attempt) {
    VertexField u = random_zero_trace_field(g, rng);
    VertexField v = random_zero_trace_field(g, rng);
    // Nonnegative directions meet the sign preconditions generically under H3.
    for (auto& x : u.values) x = std::abs(x);
    for (auto& x : v.values) x = std::abs(x);
    zero_boundary(g, u);
    zero_boundary(g, v);

    if (branch == Branch::plus) {
      double X = term_concave(spec, g, u, v);
      if (X <= 0.0) {
        if (spec.lambda > 0.0) {
          for (int k = 0; k < 200 && X <= 0.0; ++k) {
            for (auto& x : v.values) x *= 0.5;
            X = term_concave(spec, g, u, v);
          }
        } else if (spec.gamma > 0.0) {
          for (int k = 0; k < 200 && X <= 0.0; ++k) {
            for (auto& x : u.values) x *= 0.5;
            X = term_concave(spec, g, u, v);
          }
        }
      }
      if (X <= 0.0) {
        d.why_not = "X = lambda int a|u|^q + gamma int b|v|^q cannot be made positive "
                    "(plus branch requires X > 0)";
        continue;
      }
    } else {
      const double H = term_coupling(spec, g, u, v);
      if (H <= 0.0) {
        d.why_not = "H = int h|u|^alpha|v|^beta is not positive "
                    "(minus branch requires H > 0)";
        continue;
      }
    }
    d.admissible = true;
    d.u = std::move(u);
    d.v = std::move(v);
    return d;
  }
  return d;
}

struct StartOutcome {
  bool ran = false;
  Solution sol;
  std::vector<double> trace;
  std::string why_not;
};

StartOutcome run_start(const ProblemSpec& spec, const EnergyContext& ctx, Branch branch,
                       const SolverConfig& cfg, int start_index) {
  const GasketGraph& g = *ctx.graph;
  std::mt19937_64 rng(cfg.seed + 1000003ULL * static_cast<std::uint64_t>(start_index));

  StartOutcome out;
  StartDraw draw = draw_start(spec, ctx, branch, rng);
  if (!draw.admissible) {
    out.why_not = draw.why_not;
    return out;
  }
  auto st0 = project_onto(spec, ctx, draw.u, draw.v, branch);
  if (!st0) {
    out.why_not = "projection onto the branch failed for the start direction";
    return out;
  }
  PairState st = std::move(*st0);
  double I = i_value(st.s);
  if (cfg.record_trace) out.trace.push_back(I);

  const size_t n = st.u.values.size();
  bool converged = false;
  double gsup = 0.0;
  long it = 0;
  std::vector<double> prev_x, prev_g;
  double last_step = cfg.initial_step;
  for (; it < cfg.max_outer_iters; ++it) {
    auto [gu, gv] = euler_gradient(spec, ctx, st.u, st.v);
    gsup = std::max(sup_norm(gu), sup_norm(gv));
    if (gsup <= cfg.grad_tol) {
      converged = true;
      break;
    }

    // Remove the ray component; on the manifold it vanishes to first order
    // anyway (Phi'(1) = 0) but the projection keeps line-search steps angular.
    double gz = 0.0, zz = 0.0;
    for (size_t i = 0; i < n; ++i) {
      gz += gu.values[i] * st.u.values[i] + gv.values[i] * st.v.values[i];
      zz += st.u.values[i] * st.u.values[i] + st.v.values[i] * st.v.values[i];
    }
    const double ray = zz > 0.0 ? gz / zz : 0.0;
    double gnorm2 = 0.0;
    for (size_t i = 0; i < n; ++i) {
      gu.values[i] -= ray * st.u.values[i];
      gv.values[i] -= ray * st.v.values[i];
      gnorm2 += gu.values[i] * gu.values[i] + gv.values[i] * gv.values[i];
    }
    if (!(gnorm2 > 0.0)) break;

    double step = cfg.initial_step;
    if (cfg.bb_trial) {
      if (prev_x.empty()) {
        step = cfg.initial_step;
      } else {
        double sy = 0.0, yy = 0.0;
        size_t k = 0;
        for (size_t i = 0; i < n; ++i, ++k) {
          const double dx = st.u.values[i] - prev_x[k];
          const double dg = gu.values[i] - prev_g[k];
          sy += dx * dg;
          yy += dg * dg;
        }
        for (size_t i = 0; i < n; ++i, ++k) {
          const double dx = st.v.values[i] - prev_x[k];
          const double dg = gv.values[i] - prev_g[k];
          sy += dx * dg;
          yy += dg * dg;
        }
        step = (sy > 0.0 && yy > 0.0) ? sy / yy : 4.0 * last_step;
        step = std::clamp(step, 1e-14, 1e14);
      }
      prev_x.resize(2 * n);
      prev_g.resize(2 * n);
      for (size_t i = 0; i < n; ++i) {
        prev_x[i] = st.u.values[i];
        prev_x[n + i] = st.v.values[i];
        prev_g[i] = gu.values[i];
        prev_g[n + i] = gv.values[i];
      }
    }

    bool accepted = false;
    VertexField cu = st.u, cv = st.v;
    for (int bt = 0; bt < 60; ++bt) {
      for (size_t i = 0; i < n; ++i) {
        cu.values[i] = st.u.values[i] - step * gu.values[i];
        cv.values[i] = st.v.values[i] - step * gv.values[i];
      }
      auto cand = project_onto(spec, ctx, cu, cv, branch);
      if (cand) {
        const double Ic = i_value(cand->s);
        // The epsilon allowance keeps the search alive once the true descent
        // per step drops below the floating-point resolution of I.
        const double noise = 8.0 * std::numeric_limits<double>::epsilon() *
                             (std::abs(I) + std::abs(Ic));
        if (Ic <= I - cfg.armijo_c * step * gnorm2 + noise) {
          st = std::move(*cand);
          I = Ic;
          accepted = true;
          last_step = step;
          break;
        }
      }
      step *= cfg.shrink;
    }
    if (!accepted) break;  // no acceptable step left at this scale
    if (cfg.record_trace) out.trace.push_back(I);
  }

  if (std::pow(st.s.norm_p(), 1.0 / st.s.p) <= 1e-10) {
    out.why_not = "iterates collapsed to the trivial pair";
    return out;
  }

  out.ran = true;
  out.sol.branch = branch;
  out.sol.u = std::move(st.u);
  out.sol.v = std::move(st.v);
  out.sol.I_value = I;
  out.sol.phi1 = phi_prime(st.s, 1.0);
  out.sol.phi2 = phi_double_prime(st.s, 1.0);
  out.sol.grad_dual_norm = gsup;
  out.sol.iterations = it;
  out.sol.start_index = start_index;
  out.sol.converged = converged;
  return out;
}

}  // namespace

BranchResult minimize_branch(const ProblemSpec& spec, const EnergyContext& ctx, Branch branch,
                             const Constants& constants, const SolverConfig& config) {
  const LambdaRegion region = lambda_region(constants);
  if (branch == Branch::minus && region != LambdaRegion::inside_lambda0)
    throw std::invalid_argument("minimize_branch: minus branch requires (lambda,gamma) in Lambda_0");
  if (branch == Branch::plus && region == LambdaRegion::outside)
    throw std::invalid_argument("minimize_branch: plus branch requires (lambda,gamma) in Lambda");
  if (config.starts < 1) throw std::invalid_argument("minimize_branch: starts must be >= 1");

  // Starts are independent; run them concurrently and reduce in index order
  // so the outcome never depends on scheduling.
  std::vector<StartOutcome> outcomes(static_cast<size_t>(config.starts));
  {
    int jobs = config.jobs > 0 ? config.jobs
                               : static_cast<int>(std::thread::hardware_concurrency());
    jobs = std::max(1, std::min(jobs, config.starts));
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int s = next.fetch_add(1); s < config.starts; s = next.fetch_add(1))
        outcomes[static_cast<size_t>(s)] = run_start(spec, ctx, branch, config, s);
    };
    if (jobs == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<size_t>(jobs));
      for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
  }

  BranchResult result;
  std::string last_reason;
  for (auto& out : outcomes) {
    if (!out.ran) {
      last_reason = out.why_not;
      continue;
    }
    const bool better =
        !result.solution ||
        (out.sol.converged && !result.solution->converged) ||
        (out.sol.converged == result.solution->converged && out.sol.I_value < result.solution->I_value);
    if (better) {
      result.solution = std::move(out.sol);
      result.trace = std::move(out.trace);
    }
  }

  if (!result.solution) {
    result.status = SolveStatus::no_admissible_start;
    result.message = last_reason.empty() ? "no admissible start" : last_reason;
  } else if (!result.solution->converged) {
    result.status = SolveStatus::unconverged;
    std::ostringstream os;
    os << "best start stopped at gradient sup-norm " << result.solution->grad_dual_norm
       << " after " << result.solution->iterations << " iterations (tol " << config.grad_tol << ")";
    result.message = os.str();
  } else {
    result.status = SolveStatus::ok;
  }
  return result;
}

SystemResult solve_system(const ProblemSpec& spec, const EnergyContext& ctx,
                          const Constants& constants, const SolverConfig& config) {
  const auto hyp = check_hypotheses(spec, *ctx.graph, constants.kappa0);
  if (!hyp.all_pass()) {
    std::string what = "solve_system: hypotheses fail:";
    if (!hyp.h1.pass) what += " [H1 " + hyp.h1.detail + "]";
    if (!hyp.h2.pass) what += " [H2 " + hyp.h2.detail + "]";
    if (!hyp.h3.pass) what += " [H3 " + hyp.h3.detail + "]";
    throw std::invalid_argument(what);
  }
  SystemResult res;
  res.plus = minimize_branch(spec, ctx, Branch::plus, constants, config);
  res.minus = minimize_branch(spec, ctx, Branch::minus, constants, config);
  return res;
}

std::vector<std::optional<double>> perturbation_scales(const ProblemSpec& spec,
                                                       const EnergyContext& ctx,
                                                       const Solution& sol,
                                                       const VertexField& w1,
                                                       const VertexField& w2,
                                                       const std::vector<double>& epsilons) {
  std::vector<std::optional<double>> scales;
  scales.reserve(epsilons.size());
  VertexField pu = sol.u, pv = sol.v;
  for (double eps : epsilons) {
    for (size_t i = 0; i < pu.values.size(); ++i) {
      pu.values[i] = sol.u.values[i] + eps * w1.values[i];
      pv.values[i] = sol.v.values[i] + eps * w2.values[i];
    }
    const auto res = sol.branch == Branch::plus ? project_plus(spec, ctx, pu, pv)
                                                : project_minus(spec, ctx, pu, pv);
    scales.push_back(res ? std::optional<double>(res->t) : std::nullopt);
  }
  return scales;
}

}  // namespace gaskpl

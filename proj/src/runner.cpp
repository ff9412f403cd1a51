#include "runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "render.hpp"

namespace gaskpl {

namespace {

void apply_overrides(RunConfig& cfg, const CliOverrides& ov) {
  if (ov.out_dir) cfg.out_dir = *ov.out_dir;
  if (ov.seed) cfg.solver.seed = *ov.seed;
  if (ov.level) cfg.level = *ov.level;
  if (ov.starts) cfg.solver.starts = *ov.starts;
  if (ov.tol) cfg.solver.grad_tol = *ov.tol;
  if (ov.k_override) cfg.k_override = *ov.k_override;
}

const char* region_name(LambdaRegion r) {
  switch (r) {
    case LambdaRegion::inside_lambda0: return "inside_Lambda0";
    case LambdaRegion::inside_lambda_only: return "inside_Lambda_only";
    default: return "outside";
  }
}

}  // namespace

ResolvedRun resolve_run(const RunConfig& cfg) {
  ResolvedRun run;
  run.cfg = cfg;
  run.graph = std::make_shared<GasketGraph>(build_gasket(cfg.level));

  ApModel model{cfg.p};
  double rp;
  if (cfg.rp_override) {
    rp = *cfg.rp_override;
  } else {
    const auto est = estimate_rp(model, cfg.rp_max_level, cfg.rp_tol);
    rp = est.value;
    if (!est.converged)
      std::cerr << "note: r_p ratios not converged (spread " << est.spread << " at level "
                << est.levels_used << "); using the last ratio\n";
  }
  run.ctx = make_context(*run.graph, model, rp);

  run.spec.p = cfg.p;
  run.spec.q = cfg.q;
  run.spec.alpha = cfg.alpha;
  run.spec.beta = cfg.beta;
  run.spec.level = cfg.level;
  run.spec.a = coefficient_field(cfg.a, *run.graph);
  run.spec.b = coefficient_field(cfg.b, *run.graph);
  run.spec.h = coefficient_field(cfg.h, *run.graph);
  run.spec.lambda = cfg.lambda.value_or(0.0);
  run.spec.gamma = cfg.gamma.value_or(0.0);

  run.constants = compute_constants(run.spec, run.ctx, cfg.k_override);

  // Relative parameters: lambda = rel * kappa0 / ||a||_1 keeps the strength
  // |lambda|||a||_1 + |gamma|||b||_1 an exact fraction of kappa0.
  if (cfg.lambda_rel) run.spec.lambda = *cfg.lambda_rel * run.constants.kappa0 / run.constants.a_l1;
  if (cfg.gamma_rel) run.spec.gamma = *cfg.gamma_rel * run.constants.kappa0 / run.constants.b_l1;
  if (cfg.lambda_rel || cfg.gamma_rel)
    run.constants = compute_constants(run.spec, run.ctx, run.constants.K);
  return run;
}

int cmd_solve(const std::string& config_path, const CliOverrides& ov, std::ostream& out,
              std::ostream& err) {
  RunConfig cfg;
  ResolvedRun run;
  try {
    cfg = load_run_config(config_path);
    apply_overrides(cfg, ov);
    run = resolve_run(cfg);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  }

  const auto hyp = check_hypotheses(run.spec, run.g(), run.constants.kappa0);
  if (!hyp.all_pass()) {
    if (!hyp.h1.pass) err << "hypothesis H1 failed: " << hyp.h1.detail << "\n";
    if (!hyp.h2.pass) err << "hypothesis H2 failed: " << hyp.h2.detail << "\n";
    if (!hyp.h3.pass) err << "hypothesis H3 failed: " << hyp.h3.detail << "\n";
    return 1;
  }

  SystemResult sys;
  try {
    sys = solve_system(run.spec, run.ctx, run.constants, cfg.solver);
  } catch (const std::exception& e) {
    err << "solver error: " << e.what() << "\n";
    return 2;
  }
  for (const BranchResult* br : {&sys.plus, &sys.minus}) {
    if (br->status == SolveStatus::no_admissible_start || !br->solution) {
      err << "solver failed (" << (br == &sys.plus ? "plus" : "minus") << " branch): "
          << br->message << "\n";
      return 2;
    }
    if (br->status == SolveStatus::unconverged)
      err << "warning (" << (br == &sys.plus ? "plus" : "minus") << " branch): " << br->message
          << "\n";
  }

  const Certificate cert = certify(run.spec, run.ctx, run.constants, *sys.plus.solution,
                                   *sys.minus.solution, cfg.solver, cfg.sampling, cfg.tolerances);

  std::filesystem::create_directories(cfg.out_dir);
  const auto path = [&cfg](const std::string& name) {
    return (std::filesystem::path(cfg.out_dir) / name).string();
  };
  write_solution_table(path("solution_plus.txt"), run.g(), sys.plus.solution->u,
                       sys.plus.solution->v);
  write_solution_table(path("solution_minus.txt"), run.g(), sys.minus.solution->u,
                       sys.minus.solution->v);
  {
    // The certificate file embeds the fully resolved configuration so a run
    // is reproducible from its artifacts alone.
    nlohmann::ordered_json j = certificate_to_json(cert);
    RunConfig resolved = cfg;
    resolved.lambda = run.spec.lambda;
    resolved.gamma = run.spec.gamma;
    resolved.lambda_rel.reset();
    resolved.gamma_rel.reset();
    resolved.rp_override = run.ctx.rp;
    resolved.k_override = run.constants.K;
    j["resolved_config"] = run_config_to_json(resolved);
    std::ofstream f(path("certificate.json"));
    f << j.dump(2) << "\n";
  }
  if (cfg.render) {
    write_svg(path("plus_u.svg"), run.g(), sys.plus.solution->u, "u (plus branch)");
    write_svg(path("plus_v.svg"), run.g(), sys.plus.solution->v, "v (plus branch)");
    write_svg(path("minus_u.svg"), run.g(), sys.minus.solution->u, "u (minus branch)");
    write_svg(path("minus_v.svg"), run.g(), sys.minus.solution->v, "v (minus branch)");
  }

  out << "lambda=" << run.spec.lambda << " gamma=" << run.spec.gamma
      << " region=" << region_name(lambda_region(run.constants)) << "\n";
  out << "K=" << run.constants.K << " kappa=" << run.constants.kappa
      << " kappa0=" << run.constants.kappa0 << " d0=" << run.constants.d0 << "\n";
  out << "I_plus=" << cert.plus.I_value << " (residual " << cert.plus.weak_res << ")\n";
  out << "I_minus=" << cert.minus.I_value << " (residual " << cert.minus.weak_res << ")\n";
  for (const auto& it : cert.items)
    if (!it.pass)
      err << "certificate item failed: " << it.name << " (value " << it.value << ", threshold "
          << it.threshold << ")\n";
  out << "certificate: " << (cert.pass ? "pass" : "FAIL") << " -> " << path("certificate.json")
      << "\n";
  return cert.pass ? 0 : 3;
}

int cmd_rp(double p, int max_level, double tol, std::ostream& out, std::ostream& err) {
  try {
    const auto est = estimate_rp(ApModel{p}, max_level, tol);
    out << std::setprecision(12);
    out << "r_p estimate: " << est.value << "\n";
    out << "ratio spread: " << est.spread << (est.converged ? " (converged)" : " (NOT converged)")
        << ", levels used: " << est.levels_used << "\n";
    out << "ratios:";
    for (double r : est.ratios) out << ' ' << r;
    out << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "rp error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_constants(const std::string& config_path, const CliOverrides& ov, std::ostream& out,
                  std::ostream& err) {
  try {
    RunConfig cfg = load_run_config(config_path);
    apply_overrides(cfg, ov);
    ResolvedRun run = resolve_run(cfg);
    const auto& c = run.constants;
    out << std::setprecision(12);
    out << "level=" << cfg.level << " p=" << cfg.p << " q=" << cfg.q << " alpha=" << cfg.alpha
        << " beta=" << cfg.beta << " rp=" << run.ctx.rp << "\n";
    out << "K=" << c.K << "\n";
    out << "kappa=" << c.kappa << "\n";
    out << "kappa0=" << c.kappa0 << "\n";
    out << "d0=" << c.d0 << "\n";
    out << "a_l1=" << c.a_l1 << " b_l1=" << c.b_l1 << " h_l1=" << c.h_l1 << "\n";
    out << "lambda=" << run.spec.lambda << " gamma=" << run.spec.gamma
        << " strength_abs=" << c.strength_abs << " strength_signed=" << c.strength_signed << "\n";
    out << "region=" << region_name(lambda_region(c)) << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "constants error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_sweep(const std::string& config_path, const CliOverrides& ov, double lambda_min,
              double lambda_max, double gamma_min, double gamma_max, int n_lambda, int n_gamma,
              int jobs, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  ResolvedRun base;
  try {
    cfg = load_run_config(config_path);
    apply_overrides(cfg, ov);
    cfg.lambda_rel.reset();
    cfg.gamma_rel.reset();
    base = resolve_run(cfg);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  }

  out << "lambda,gamma,I_plus,I_minus,d0,pass\n";
  if (n_lambda <= 0 || n_gamma <= 0) return 0;

  struct Row {
    double lambda, gamma, iplus = 0, iminus = 0, d0 = 0;
    std::string status;
  };
  std::vector<Row> rows(static_cast<size_t>(n_lambda) * static_cast<size_t>(n_gamma));

  auto grid_value = [](double lo, double hi, int n, int i) {
    return n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  };

  auto run_point = [&](int idx) {
    const int i = idx / n_gamma;
    const int j = idx % n_gamma;
    Row row;
    row.lambda = grid_value(lambda_min, lambda_max, n_lambda, i);
    row.gamma = grid_value(gamma_min, gamma_max, n_gamma, j);

    ProblemSpec spec = base.spec;
    spec.lambda = row.lambda;
    spec.gamma = row.gamma;
    Constants c = compute_constants(spec, base.ctx, base.constants.K);
    row.d0 = c.d0;
    if (lambda_region(c) != LambdaRegion::inside_lambda0) {
      row.status = "H2-fail";
      rows[static_cast<size_t>(idx)] = row;
      return;
    }
    try {
      const SystemResult sys = solve_system(spec, base.ctx, c, cfg.solver);
      if (!sys.both_ok() || !sys.plus.solution || !sys.minus.solution) {
        row.status = "solver-fail";
      } else {
        const Certificate cert = certify(spec, base.ctx, c, *sys.plus.solution,
                                         *sys.minus.solution, cfg.solver, cfg.sampling,
                                         cfg.tolerances);
        row.iplus = cert.plus.I_value;
        row.iminus = cert.minus.I_value;
        row.status = cert.pass ? "pass" : "cert-fail";
      }
    } catch (const std::exception&) {
      row.status = "solver-fail";
    }
    rows[static_cast<size_t>(idx)] = row;
  };

  const int total = n_lambda * n_gamma;
  if (jobs <= 1) {
    for (int idx = 0; idx < total; ++idx) run_point(idx);
  } else {
    std::vector<std::future<void>> pending;
    for (int idx = 0; idx < total; ++idx) {
      pending.push_back(std::async(std::launch::async, run_point, idx));
      if (static_cast<int>(pending.size()) >= jobs) {
        pending.front().get();
        pending.erase(pending.begin());
      }
    }
    for (auto& f : pending) f.get();
  }

  out << std::setprecision(12);
  bool all_ok = true;
  for (const auto& row : rows) {
    out << row.lambda << ',' << row.gamma << ',';
    if (row.status == "pass" || row.status == "cert-fail")
      out << row.iplus << ',' << row.iminus << ',';
    else
      out << ",,";
    out << row.d0 << ',' << row.status << "\n";
    if (row.status == "cert-fail" || row.status == "solver-fail") all_ok = false;
  }
  return all_ok ? 0 : 3;
}

int cmd_render(const std::string& solution_path, const std::string& out_path,
               const std::string& field, std::ostream& out, std::ostream& err) {
  try {
    const SolutionTable table = read_solution_table(solution_path);
    const GasketGraph g = build_gasket(table.u.level);
    const VertexField& f = field == "v" ? table.v : table.u;
    std::ofstream o(out_path);
    if (!o) throw std::runtime_error("cannot write SVG: " + out_path);
    o << render_svg(g, table.x, table.y, f, field == "v" ? "v" : "u");
    out << "wrote " << out_path << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "render error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace gaskpl

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"coupled p-Laplacian system on the Sierpinski gasket: two-branch "
               "Nehari solver and certificate tool"};
  app.require_subcommand(1);

  gaskpl::CliOverrides ov;
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int level = 0, starts = 0;
  double tol = 0.0, k_override = 0.0;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* copt = cmd->add_option("--config", config_path, "run configuration file (JSON)");
    if (needs_config) copt->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out_dir, "output directory")->each([&](const std::string& s) {
      ov.out_dir = s;
    });
    cmd->add_option("--seed", seed, "solver seed")->each([&](const std::string&) { ov.seed = seed; });
    cmd->add_option("--level", level, "graph level override")->each([&](const std::string&) {
      ov.level = level;
    });
    cmd->add_option("--starts", starts, "multistart count")->each([&](const std::string&) {
      ov.starts = starts;
    });
    cmd->add_option("--tol", tol, "solver gradient tolerance")->each([&](const std::string&) {
      ov.tol = tol;
    });
    cmd->add_option("--k-override", k_override, "use this embedding constant K instead of estimating")
        ->each([&](const std::string&) { ov.k_override = k_override; });
  };

  auto* solve = app.add_subcommand("solve", "solve both Nehari branches and certify");
  add_common(solve, true);

  auto* rp = app.add_subcommand("rp", "estimate the renormalization factor r_p");
  double rp_p = 2.0;
  int rp_max_level = 6;
  double rp_tol = 1e-8;
  rp->add_option("--p", rp_p, "energy exponent p")->required();
  rp->add_option("--level", rp_max_level, "maximum level for the ratio iteration");
  rp->add_option("--tol", rp_tol, "ratio convergence tolerance");

  auto* constants = app.add_subcommand("constants", "print K, kappa, kappa0, d0 and region membership");
  add_common(constants, true);

  auto* sweep = app.add_subcommand("sweep", "grid sweep over (lambda, gamma), CSV to stdout or --csv");
  add_common(sweep, true);
  double lmin = 0.0, lmax = 0.0, gmin = 0.0, gmax = 0.0;
  int nl = 0, ng = 0, jobs = 1;
  std::string csv_path;
  sweep->add_option("--lambda-min", lmin)->required();
  sweep->add_option("--lambda-max", lmax)->required();
  sweep->add_option("--gamma-min", gmin)->required();
  sweep->add_option("--gamma-max", gmax)->required();
  sweep->add_option("--n-lambda", nl, "grid points along lambda")->required();
  sweep->add_option("--n-gamma", ng, "grid points along gamma")->required();
  sweep->add_option("--jobs", jobs, "concurrent grid points");
  sweep->add_option("--csv", csv_path, "write CSV here instead of stdout");

  auto* render = app.add_subcommand("render", "render a solution table to SVG");
  std::string solution_path, svg_path, field = "u";
  render->add_option("solution", solution_path, "solution table file")->required();
  render->add_option("--out", svg_path, "output SVG path")->required();
  render->add_option("--field", field, "which field to color (u or v)")
      ->check(CLI::IsMember({"u", "v"}));

  CLI11_PARSE(app, argc, argv);

  if (solve->parsed()) return gaskpl::cmd_solve(config_path, ov, std::cout, std::cerr);
  if (rp->parsed()) return gaskpl::cmd_rp(rp_p, rp_max_level, rp_tol, std::cout, std::cerr);
  if (constants->parsed()) return gaskpl::cmd_constants(config_path, ov, std::cout, std::cerr);
  if (sweep->parsed()) {
    if (!csv_path.empty()) {
      std::ofstream csv(csv_path);
      if (!csv) {
        std::cerr << "cannot write CSV: " << csv_path << "\n";
        return 1;
      }
      return gaskpl::cmd_sweep(config_path, ov, lmin, lmax, gmin, gmax, nl, ng, jobs, csv,
                               std::cerr);
    }
    return gaskpl::cmd_sweep(config_path, ov, lmin, lmax, gmin, gmax, nl, ng, jobs, std::cout,
                             std::cerr);
  }
  if (render->parsed()) return gaskpl::cmd_render(solution_path, svg_path, field, std::cout,
                                                  std::cerr);
  return 1;
}

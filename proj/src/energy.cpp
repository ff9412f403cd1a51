#include "energy.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gaskpl {

namespace {

double odd_pow(double t, double expo) {
  if (t == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(t), expo), t);
}

}  // namespace

double ApModel::eval(double a1, double a2, double a3) const {
  return std::pow(std::abs(a1 - a2), p) + std::pow(std::abs(a1 - a3), p) +
         std::pow(std::abs(a2 - a3), p);
}

std::array<double, 3> ApModel::grad(double a1, double a2, double a3) const {
  const double g12 = p * odd_pow(a1 - a2, p - 1.0);
  const double g13 = p * odd_pow(a1 - a3, p - 1.0);
  const double g23 = p * odd_pow(a2 - a3, p - 1.0);
  return {g12 + g13, -g12 + g23, -g13 - g23};
}

double ApModel::g_view(double x) const { return eval(-1.0, x, 1.0); }

double ap_eval(const ApModel& model, double a1, double a2, double a3) {
  return model.eval(a1, a2, a3);
}

EnergyContext make_context(const GasketGraph& g, const ApModel& model, double rp) {
  if (!(rp > 0.0 && rp < 1.0)) throw std::invalid_argument("rp must lie in (0,1)");
  if (!(model.p > 1.0)) throw std::invalid_argument("p must exceed 1");
  EnergyContext ctx;
  ctx.graph = &g;
  ctx.model = model;
  ctx.rp = rp;
  ctx.scale = std::pow(rp, -static_cast<double>(g.level));
  return ctx;
}

double crude_energy(const EnergyContext& ctx, const VertexField& u) {
  const GasketGraph& g = *ctx.graph;
  check_field(g, u, "crude_energy");
  double sum = 0.0;
  for (const auto& cell : g.cells)
    sum += ctx.model.eval(u.values[static_cast<size_t>(cell[0])],
                          u.values[static_cast<size_t>(cell[1])],
                          u.values[static_cast<size_t>(cell[2])]);
  return sum;
}

double renormalized_energy(const EnergyContext& ctx, const VertexField& u) {
  return ctx.scale * crude_energy(ctx, u);
}

VertexField energy_gradient(const EnergyContext& ctx, const VertexField& u) {
  const GasketGraph& g = *ctx.graph;
  check_field(g, u, "energy_gradient");
  VertexField grad = zero_field(g);
  for (const auto& cell : g.cells) {
    const auto gc = ctx.model.grad(u.values[static_cast<size_t>(cell[0])],
                                   u.values[static_cast<size_t>(cell[1])],
                                   u.values[static_cast<size_t>(cell[2])]);
    grad.values[static_cast<size_t>(cell[0])] += gc[0];
    grad.values[static_cast<size_t>(cell[1])] += gc[1];
    grad.values[static_cast<size_t>(cell[2])] += gc[2];
  }
  for (double& v : grad.values) v *= ctx.scale;
  return grad;
}

double pair_norm(const EnergyContext& ctx, const VertexField& u, const VertexField& v) {
  const double e = renormalized_energy(ctx, u) + renormalized_energy(ctx, v);
  return std::pow(e, 1.0 / ctx.model.p);
}

namespace {

// Crude-energy value and free-entry gradient for the pinned problem.
struct CrudeProblem {
  const GasketGraph* g;
  const ApModel* model;
  std::vector<char> fixed;  // per vertex

  double value(const std::vector<double>& x) const {
    double sum = 0.0;
    for (const auto& cell : g->cells)
      sum += model->eval(x[static_cast<size_t>(cell[0])], x[static_cast<size_t>(cell[1])],
                         x[static_cast<size_t>(cell[2])]);
    return sum;
  }

  void gradient(const std::vector<double>& x, std::vector<double>& grad) const {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (const auto& cell : g->cells) {
      const auto gc = model->grad(x[static_cast<size_t>(cell[0])], x[static_cast<size_t>(cell[1])],
                                  x[static_cast<size_t>(cell[2])]);
      grad[static_cast<size_t>(cell[0])] += gc[0];
      grad[static_cast<size_t>(cell[1])] += gc[1];
      grad[static_cast<size_t>(cell[2])] += gc[2];
    }
    for (size_t i = 0; i < grad.size(); ++i)
      if (fixed[i]) grad[i] = 0.0;
  }
};

MinimizeResult solve_quadratic_exact(const GasketGraph& g, const std::vector<char>& fixed,
                                     const std::vector<double>& x0) {
  const int n = g.vertex_count();
  std::vector<int> free_index(static_cast<size_t>(n), -1);
  int nfree = 0;
  for (int i = 0; i < n; ++i)
    if (!fixed[static_cast<size_t>(i)]) free_index[static_cast<size_t>(i)] = nfree++;

  // Edge Laplacian of the cell graph: energy = sum_edges (u_i - u_j)^2.
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nfree);
  auto add_edge = [&](int a, int b) {
    const int fa = free_index[static_cast<size_t>(a)];
    const int fb = free_index[static_cast<size_t>(b)];
    if (fa >= 0) trips.emplace_back(fa, fa, 1.0);
    if (fb >= 0) trips.emplace_back(fb, fb, 1.0);
    if (fa >= 0 && fb >= 0) {
      trips.emplace_back(fa, fb, -1.0);
      trips.emplace_back(fb, fa, -1.0);
    } else if (fa >= 0) {
      rhs[fa] += x0[static_cast<size_t>(b)];
    } else if (fb >= 0) {
      rhs[fb] += x0[static_cast<size_t>(a)];
    }
  };
  for (const auto& cell : g.cells) {
    add_edge(cell[0], cell[1]);
    add_edge(cell[0], cell[2]);
    add_edge(cell[1], cell[2]);
  }

  MinimizeResult res;
  res.field = VertexField(g.level, x0);
  if (nfree > 0) {
    Eigen::SparseMatrix<double> A(nfree, nfree);
    A.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(A);
    if (chol.info() != Eigen::Success) throw std::runtime_error("interior energy matrix factorization failed");
    Eigen::VectorXd sol = chol.solve(rhs);
    for (int i = 0; i < n; ++i)
      if (free_index[static_cast<size_t>(i)] >= 0)
        res.field.values[static_cast<size_t>(i)] = sol[free_index[static_cast<size_t>(i)]];
  }
  CrudeProblem prob{&g, nullptr, fixed};
  ApModel quad{2.0};
  prob.model = &quad;
  res.crude = prob.value(res.field.values);
  std::vector<double> grad(static_cast<size_t>(n), 0.0);
  prob.gradient(res.field.values, grad);
  res.grad_sup = 0.0;
  for (double v : grad) res.grad_sup = std::max(res.grad_sup, std::abs(v));
  res.iters = 1;
  res.converged = true;
  return res;
}

}  // namespace

MinimizeResult minimize_crude_energy(const GasketGraph& g, const ApModel& model,
                                     const std::vector<int>& fixed_ids,
                                     const std::vector<double>& fixed_values,
                                     const VertexField* warm_start, const MinimizeOptions& opts) {
  if (fixed_ids.size() != fixed_values.size())
    throw std::invalid_argument("fixed ids/values size mismatch");
  if (fixed_ids.empty()) throw std::invalid_argument("at least one vertex must be pinned");
  const int n = g.vertex_count();
  std::vector<char> fixed(static_cast<size_t>(n), 0);

  double mean = 0.0;
  for (double v : fixed_values) mean += v;
  mean /= static_cast<double>(fixed_values.size());

  std::vector<double> x(static_cast<size_t>(n), mean);
  if (warm_start) {
    check_field(g, *warm_start, "minimize_crude_energy warm start");
    x = warm_start->values;
  }
  for (size_t k = 0; k < fixed_ids.size(); ++k) {
    const int id = fixed_ids[k];
    if (id < 0 || id >= n) throw std::invalid_argument("fixed id out of range");
    fixed[static_cast<size_t>(id)] = 1;
    x[static_cast<size_t>(id)] = fixed_values[k];
  }

  if (model.p == 2.0) return solve_quadratic_exact(g, fixed, x);

  CrudeProblem prob{&g, &model, fixed};
  std::vector<double> grad(static_cast<size_t>(n), 0.0);
  std::vector<double> xnew(static_cast<size_t>(n), 0.0);

  double f = prob.value(x);
  prob.gradient(x, grad);

  // Non-monotone Armijo window keeps the Barzilai-Borwein trial steps from
  // collapsing on ill-conditioned levels.
  constexpr int kWindow = 10;
  std::vector<double> recent(kWindow, f);
  int recent_pos = 0;

  double step = 0.0;
  std::vector<double> x_prev, g_prev;
  MinimizeResult res;
  res.converged = false;

  long it = 0;
  for (; it < opts.max_iters; ++it) {
    double gsup = 0.0, gnorm2 = 0.0;
    for (double v : grad) {
      gsup = std::max(gsup, std::abs(v));
      gnorm2 += v * v;
    }
    if (gsup < opts.grad_tol) {
      res.converged = true;
      break;
    }

    if (x_prev.empty()) {
      step = 0.1 * (1.0 + std::abs(mean)) / (1.0 + gsup);
    } else {
      double ss = 0.0, sy = 0.0, yy = 0.0;
      for (size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - x_prev[i];
        const double dg = grad[i] - g_prev[i];
        ss += dx * dx;
        sy += dx * dg;
        yy += dg * dg;
      }
      // Alternate the two Barzilai-Borwein trial steps; the long step breaks
      // the plateaus the short one alone gets stuck on.
      double bb = 0.0;
      if (sy > 0.0) bb = (it % 2 == 0 && yy > 0.0) ? sy / yy : ss / sy;
      step = bb > 0.0 ? bb : std::max(step, 1e-12);
      step = std::clamp(step, 1e-14, 1e14);
    }

    const double fref = *std::max_element(recent.begin(), recent.end());
    double fnew = f;
    bool accepted = false;
    for (int bt = 0; bt < 70; ++bt) {
      for (size_t i = 0; i < x.size(); ++i) xnew[i] = x[i] - step * grad[i];
      fnew = prob.value(xnew);
      const double noise =
          8.0 * std::numeric_limits<double>::epsilon() * (std::abs(fref) + std::abs(fnew));
      if (fnew <= fref - 1e-4 * step * gnorm2 + noise) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // line search exhausted; gradient is noise-level

    x_prev = x;
    g_prev = grad;
    x.swap(xnew);
    f = fnew;
    prob.gradient(x, grad);
    recent[static_cast<size_t>(recent_pos)] = f;
    recent_pos = (recent_pos + 1) % kWindow;
  }

  res.field = VertexField(g.level, std::move(x));
  res.crude = f;
  res.grad_sup = 0.0;
  for (double v : grad) res.grad_sup = std::max(res.grad_sup, std::abs(v));
  res.iters = it;
  res.converged = res.converged || res.grad_sup < opts.grad_tol;
  return res;
}

namespace {

// Minimal extension of one cell: values (c1,c2,c3) at the corners, midpoint
// values (m12,m13,m23) minimizing the three sub-cell energies.
std::array<double, 3> extend_cell(const ApModel& model, double c1, double c2, double c3) {
  std::array<double, 3> m{(2 * c1 + 2 * c2 + c3) / 5.0, (2 * c1 + c2 + 2 * c3) / 5.0,
                          (c1 + 2 * c2 + 2 * c3) / 5.0};
  if (model.p == 2.0) return m;

  auto value = [&](const std::array<double, 3>& y) {
    return model.eval(c1, y[0], y[1]) + model.eval(y[0], c2, y[2]) + model.eval(y[1], y[2], c3);
  };
  auto gradient = [&](const std::array<double, 3>& y) {
    const auto g1 = model.grad(c1, y[0], y[1]);
    const auto g2 = model.grad(y[0], c2, y[2]);
    const auto g3 = model.grad(y[1], y[2], c3);
    return std::array<double, 3>{g1[1] + g2[0], g1[2] + g3[0], g2[2] + g3[1]};
  };

  double f = value(m);
  auto g = gradient(m);
  std::array<double, 3> mp{}, gp{};
  double step = 0.0;
  bool have_prev = false;
  for (int it = 0; it < 2000; ++it) {
    double gsup = std::max({std::abs(g[0]), std::abs(g[1]), std::abs(g[2])});
    if (gsup < 1e-13 * (1.0 + std::abs(f))) break;
    if (!have_prev) {
      step = 0.1 / (1.0 + gsup);
    } else {
      double sy = 0.0, yy = 0.0;
      for (int i = 0; i < 3; ++i) {
        sy += (m[i] - mp[i]) * (g[i] - gp[i]);
        yy += (g[i] - gp[i]) * (g[i] - gp[i]);
      }
      step = (sy > 0.0 && yy > 0.0) ? sy / yy : step;
      step = std::clamp(step, 1e-14, 1e14);
    }
    const double gnorm2 = g[0] * g[0] + g[1] * g[1] + g[2] * g[2];
    bool ok = false;
    std::array<double, 3> trial{};
    double ftrial = f;
    for (int bt = 0; bt < 60; ++bt) {
      for (int i = 0; i < 3; ++i) trial[i] = m[i] - step * g[i];
      ftrial = value(trial);
      const double noise =
          8.0 * std::numeric_limits<double>::epsilon() * (std::abs(f) + std::abs(ftrial));
      if (ftrial <= f - 1e-4 * step * gnorm2 + noise) {
        ok = true;
        break;
      }
      step *= 0.5;
    }
    if (!ok) break;
    mp = m;
    gp = g;
    m = trial;
    f = ftrial;
    g = gradient(m);
    have_prev = true;
  }
  return m;
}

}  // namespace

VertexField one_level_extension(const ApModel& model, const GasketGraph& coarse_g,
                                const VertexField& coarse, const GasketGraph& fine_g) {
  check_field(coarse_g, coarse, "one_level_extension");
  if (fine_g.level != coarse_g.level + 1)
    throw std::invalid_argument("one_level_extension: fine level must be coarse level + 1");
  const auto c2f = coarse_to_fine_ids(coarse_g, fine_g);
  VertexField fine = zero_field(fine_g);
  for (size_t v = 0; v < c2f.size(); ++v)
    fine.values[static_cast<size_t>(c2f[v])] = coarse.values[v];

  for (int c = 0; c < coarse_g.cell_count(); ++c) {
    const auto& tri = coarse_g.cells[static_cast<size_t>(c)];
    const double c1 = coarse.values[static_cast<size_t>(tri[0])];
    const double c2 = coarse.values[static_cast<size_t>(tri[1])];
    const double c3 = coarse.values[static_cast<size_t>(tri[2])];
    const auto m = extend_cell(model, c1, c2, c3);
    // Sub-cell i shares corner i with the parent; its other corners are the
    // midpoints toward the remaining parent corners.
    const auto& sub1 = fine_g.cells[static_cast<size_t>(3 * c + 0)];
    const auto& sub2 = fine_g.cells[static_cast<size_t>(3 * c + 1)];
    fine.values[static_cast<size_t>(sub1[1])] = m[0];  // midpoint(c1,c2)
    fine.values[static_cast<size_t>(sub1[2])] = m[1];  // midpoint(c1,c3)
    fine.values[static_cast<size_t>(sub2[2])] = m[2];  // midpoint(c2,c3)
  }
  return fine;
}

VertexField p_harmonic_extension(const ApModel& model, const GasketGraph& coarse_g,
                                 const VertexField& coarse, const GasketGraph& fine_g,
                                 const MinimizeOptions& opts) {
  check_field(coarse_g, coarse, "p_harmonic_extension");
  if (fine_g.level < coarse_g.level)
    throw std::invalid_argument("p_harmonic_extension: to_level must be >= from_level");
  if (fine_g.level == coarse_g.level) return coarse;

  const auto fixed_ids = coarse_to_fine_ids(coarse_g, fine_g);

  // Level-by-level local extensions give a cheap warm start (and the exact
  // answer at p = 2, where the exact solve below replaces it anyway).
  VertexField warm = coarse;
  GasketGraph cur = coarse_g;
  for (int lvl = coarse_g.level; lvl < fine_g.level; ++lvl) {
    GasketGraph next = lvl + 1 == fine_g.level ? fine_g : build_gasket(lvl + 1);
    warm = one_level_extension(model, cur, warm, next);
    cur = std::move(next);
  }
  if (model.p == 2.0) return warm;

  auto res = minimize_crude_energy(fine_g, model, fixed_ids, coarse.values, &warm, opts);
  if (!res.converged)
    throw std::runtime_error("p_harmonic_extension: inner minimizer did not converge");
  return res.field;
}

VertexField p_harmonic_extension(const ApModel& model, const std::array<double, 3>& corner_values,
                                 int from_level, int to_level, const MinimizeOptions& opts) {
  if (from_level < 0 || to_level < from_level)
    throw std::invalid_argument("p_harmonic_extension: need 0 <= from_level <= to_level");
  GasketGraph g0 = build_gasket(0);
  VertexField data(0, {corner_values[0], corner_values[1], corner_values[2]});
  if (from_level == 0) {
    GasketGraph fine = build_gasket(to_level);
    return p_harmonic_extension(model, g0, data, fine, opts);
  }
  GasketGraph gf = build_gasket(from_level);
  VertexField coarse = p_harmonic_extension(model, g0, data, gf, opts);
  GasketGraph fine = build_gasket(to_level);
  return p_harmonic_extension(model, gf, coarse, fine, opts);
}

RpEstimate estimate_rp(const ApModel& model, int max_level, double tol,
                       const MinimizeOptions& opts) {
  if (max_level < 2) throw std::invalid_argument("estimate_rp: max_level must be >= 2");
  if (!(tol > 0.0)) throw std::invalid_argument("estimate_rp: tol must be positive");
  // Non-symmetric data avoids the degenerate all-equal case.
  const std::array<double, 3> data{0.0, 0.5, 1.0};

  RpEstimate est;
  GasketGraph cur = build_gasket(0);
  VertexField field(0, {data[0], data[1], data[2]});
  ApModel m = model;
  double rho_prev = m.eval(data[0], data[1], data[2]);

  for (int lvl = 1; lvl <= max_level; ++lvl) {
    GasketGraph next = build_gasket(lvl);
    VertexField warm = one_level_extension(m, cur, field, next);
    std::vector<int> corners(next.boundary_ids.begin(), next.boundary_ids.end());
    auto res = minimize_crude_energy(next, m, corners, {data[0], data[1], data[2]}, &warm, opts);
    if (!res.converged && m.p != 2.0)
      throw std::runtime_error("estimate_rp: inner minimizer did not converge at level " +
                               std::to_string(lvl));
    const double rho = res.crude;
    est.ratios.push_back(rho / rho_prev);
    rho_prev = rho;
    field = std::move(res.field);
    cur = std::move(next);
    est.levels_used = lvl;
    const size_t k = est.ratios.size();
    if (k >= 2) {
      est.spread = std::abs(est.ratios[k - 1] - est.ratios[k - 2]);
      if (est.spread < tol) {
        est.converged = true;
        break;
      }
    }
  }
  est.value = est.ratios.back();
  return est;
}

double estimate_embedding_K(const EnergyContext& ctx, const MinimizeOptions& opts) {
  const GasketGraph& g = *ctx.graph;
  if (g.level < 1) throw std::invalid_argument("estimate_embedding_K: level must be >= 1");
  const int n = g.vertex_count();

  std::vector<int> interior;
  interior.reserve(static_cast<size_t>(n - 3));
  for (int i = 0; i < n; ++i)
    if (!g.is_boundary(i)) interior.push_back(i);

  // p = 2: K(x)^2 is the x-diagonal of the inverse interior energy matrix.
  std::vector<int> free_index(static_cast<size_t>(n), -1);
  for (size_t k = 0; k < interior.size(); ++k) free_index[static_cast<size_t>(interior[k])] = static_cast<int>(k);
  const int nfree = static_cast<int>(interior.size());
  std::vector<Eigen::Triplet<double>> trips;
  auto add_edge = [&](int a, int b) {
    const int fa = free_index[static_cast<size_t>(a)];
    const int fb = free_index[static_cast<size_t>(b)];
    if (fa >= 0) trips.emplace_back(fa, fa, 1.0);
    if (fb >= 0) trips.emplace_back(fb, fb, 1.0);
    if (fa >= 0 && fb >= 0) {
      trips.emplace_back(fa, fb, -1.0);
      trips.emplace_back(fb, fa, -1.0);
    }
  };
  for (const auto& cell : g.cells) {
    add_edge(cell[0], cell[1]);
    add_edge(cell[0], cell[2]);
    add_edge(cell[1], cell[2]);
  }
  Eigen::SparseMatrix<double> L(nfree, nfree);
  L.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(L);
  if (chol.info() != Eigen::Success) throw std::runtime_error("interior energy matrix factorization failed");

  // The corner-permutation isometries act on barycentric keys by coordinate
  // permutation and leave energy, weights and the boundary invariant, so
  // rho(x) only depends on the orbit of x; one pinned solve per orbit.
  std::vector<int> reps;
  {
    std::vector<std::array<std::int64_t, 3>> seen;
    for (int x : interior) {
      std::array<std::int64_t, 3> key = g.vertex_key[static_cast<size_t>(x)];
      std::sort(key.begin(), key.end());
      if (std::find(seen.begin(), seen.end(), key) == seen.end()) {
        seen.push_back(key);
        reps.push_back(x);
      }
    }
  }

  double K = 0.0;
  for (int x : reps) {
    const int k = free_index[static_cast<size_t>(x)];
    if (ctx.model.p == 2.0) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(nfree);
      e[k] = 1.0;
      const double diag = chol.solve(e)[k];  // (L_ff^{-1})_{xx}
      K = std::max(K, std::sqrt(diag / ctx.scale));
      continue;
    }
    std::vector<int> fixed = {g.boundary_ids[0], g.boundary_ids[1], g.boundary_ids[2], x};
    std::vector<double> values = {0.0, 0.0, 0.0, 1.0};
    auto res = minimize_crude_energy(g, ctx.model, fixed, values, nullptr, opts);
    if (!res.converged) {
      // Second chance from the scaled p = 2 profile.
      Eigen::VectorXd e = Eigen::VectorXd::Zero(nfree);
      e[k] = 1.0;
      Eigen::VectorXd col = chol.solve(e);
      VertexField warm = zero_field(g);
      for (int j = 0; j < nfree; ++j)
        warm.values[static_cast<size_t>(interior[static_cast<size_t>(j)])] = col[j] / col[k];
      res = minimize_crude_energy(g, ctx.model, fixed, values, &warm, opts);
      if (!res.converged)
        throw std::runtime_error("estimate_embedding_K: inner minimizer did not converge");
    }
    const double rho = ctx.scale * res.crude;
    K = std::max(K, std::pow(rho, -1.0 / ctx.model.p));
  }
  return K;
}

HolderReport holder_constant_check(const EnergyContext& ctx, const VertexField& u,
                                   const std::vector<int>& orders) {
  const GasketGraph& g = *ctx.graph;
  check_field(g, u, "holder_constant_check");
  const double energy = renormalized_energy(ctx, u);
  if (!(energy > 0.0)) throw std::invalid_argument("holder_constant_check: energy must be positive");
  const double enorm = std::pow(energy, 1.0 / ctx.model.p);

  HolderReport report;
  report.orders = orders;
  for (int order : orders) {
    const auto pairs = same_or_adjacent_cell_pairs(g, order);
    double maxdiff = 0.0;
    for (const auto& [a, b] : pairs)
      maxdiff = std::max(maxdiff, std::abs(u.values[static_cast<size_t>(a)] -
                                           u.values[static_cast<size_t>(b)]));
    const double denom = enorm * std::pow(ctx.rp, static_cast<double>(order) / ctx.model.p);
    const double ratio = maxdiff / denom;
    report.ratios.push_back(ratio);
    report.max_ratio = std::max(report.max_ratio, ratio);
  }
  return report;
}

}  // namespace gaskpl

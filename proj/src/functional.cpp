#include "functional.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gaskpl {

namespace {

double odd_pow(double t, double expo) {
  if (t == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(t), expo), t);
}

void check_problem(const ProblemSpec& spec, const GasketGraph& g) {
  if (spec.level != g.level) throw std::invalid_argument("problem level does not match the graph");
  check_field(g, spec.a, "coefficient a");
  check_field(g, spec.b, "coefficient b");
  check_field(g, spec.h, "coefficient h");
}

}  // namespace

double integrate(const GasketGraph& g, const VertexField& f) {
  check_field(g, f, "integrate");
  double sum = 0.0;
  for (size_t i = 0; i < f.values.size(); ++i) sum += f.values[i] * g.vertex_weight[i];
  return sum;
}

double l1_norm(const GasketGraph& g, const VertexField& f) {
  check_field(g, f, "l1_norm");
  double sum = 0.0;
  for (size_t i = 0; i < f.values.size(); ++i) sum += std::abs(f.values[i]) * g.vertex_weight[i];
  return sum;
}

double term_concave(const ProblemSpec& spec, const GasketGraph& g, const VertexField& u,
                    const VertexField& v) {
  check_problem(spec, g);
  check_field(g, u, "term_concave u");
  check_field(g, v, "term_concave v");
  double ia = 0.0, ib = 0.0;
  for (size_t i = 0; i < u.values.size(); ++i) {
    const double w = g.vertex_weight[i];
    ia += spec.a.values[i] * std::pow(std::abs(u.values[i]), spec.q) * w;
    ib += spec.b.values[i] * std::pow(std::abs(v.values[i]), spec.q) * w;
  }
  return spec.lambda * ia + spec.gamma * ib;
}

double term_coupling(const ProblemSpec& spec, const GasketGraph& g, const VertexField& u,
                     const VertexField& v) {
  check_problem(spec, g);
  check_field(g, u, "term_coupling u");
  check_field(g, v, "term_coupling v");
  double sum = 0.0;
  for (size_t i = 0; i < u.values.size(); ++i)
    sum += spec.h.values[i] * std::pow(std::abs(u.values[i]), spec.alpha) *
           std::pow(std::abs(v.values[i]), spec.beta) * g.vertex_weight[i];
  return sum;
}

double euler_functional(const ProblemSpec& spec, const EnergyContext& ctx, const VertexField& u,
                        const VertexField& v) {
  const GasketGraph& g = *ctx.graph;
  const double norm_p = renormalized_energy(ctx, u) + renormalized_energy(ctx, v);
  const double X = term_concave(spec, g, u, v);
  const double H = term_coupling(spec, g, u, v);
  return norm_p / spec.p - X / spec.q - H / spec.ab();
}

std::pair<VertexField, VertexField> euler_gradient(const ProblemSpec& spec,
                                                   const EnergyContext& ctx, const VertexField& u,
                                                   const VertexField& v) {
  const GasketGraph& g = *ctx.graph;
  check_problem(spec, g);
  check_field(g, u, "euler_gradient u");
  check_field(g, v, "euler_gradient v");

  VertexField gu = energy_gradient(ctx, u);
  VertexField gv = energy_gradient(ctx, v);
  const double inv_p = 1.0 / spec.p;
  const double ca = spec.alpha / spec.ab();
  const double cb = spec.beta / spec.ab();
  for (size_t i = 0; i < u.values.size(); ++i) {
    const double w = g.vertex_weight[i];
    const double ui = u.values[i];
    const double vi = v.values[i];
    gu.values[i] = inv_p * gu.values[i] - spec.lambda * spec.a.values[i] * odd_pow(ui, spec.q - 1.0) * w -
                   ca * spec.h.values[i] * odd_pow(ui, spec.alpha - 1.0) *
                       std::pow(std::abs(vi), spec.beta) * w;
    gv.values[i] = inv_p * gv.values[i] - spec.gamma * spec.b.values[i] * odd_pow(vi, spec.q - 1.0) * w -
                   cb * spec.h.values[i] * std::pow(std::abs(ui), spec.alpha) *
                       odd_pow(vi, spec.beta - 1.0) * w;
  }
  zero_boundary(g, gu);
  zero_boundary(g, gv);
  return {std::move(gu), std::move(gv)};
}

HypothesesReport check_hypotheses(const ProblemSpec& spec, const GasketGraph& g,
                                  std::optional<double> kappa0) {
  check_problem(spec, g);
  HypothesesReport rep;

  {
    std::ostringstream os;
    rep.h1.pass = 1.0 < spec.q && spec.q < spec.p && spec.p < spec.ab();
    os << "1 < q=" << spec.q << " < p=" << spec.p << " < alpha+beta=" << spec.ab();
    rep.h1.detail = os.str();
  }

  {
    auto nonneg = [](const VertexField& f) {
      for (double x : f.values)
        if (x < 0.0) return false;
      return true;
    };
    auto nonzero = [](const VertexField& f) {
      for (double x : f.values)
        if (x != 0.0) return true;
      return false;
    };
    rep.a_l1 = l1_norm(g, spec.a);
    rep.b_l1 = l1_norm(g, spec.b);
    rep.h_l1 = l1_norm(g, spec.h);
    std::ostringstream os;
    rep.h3.pass = true;
    if (!nonneg(spec.a) || !nonneg(spec.b) || !nonneg(spec.h)) {
      rep.h3.pass = false;
      os << "a, b, h must be nonnegative; ";
    }
    if (!nonzero(spec.a)) {
      rep.h3.pass = false;
      os << "a is identically zero; ";
    }
    if (!nonzero(spec.b)) {
      rep.h3.pass = false;
      os << "b is identically zero; ";
    }
    if (!(rep.h_l1 > 0.0)) {
      rep.h3.pass = false;
      os << "||h||_1 must be positive; ";
    }
    os << "||a||_1=" << rep.a_l1 << " ||b||_1=" << rep.b_l1 << " ||h||_1=" << rep.h_l1;
    rep.h3.detail = os.str();
  }

  rep.strength_abs = std::abs(spec.lambda) * rep.a_l1 + std::abs(spec.gamma) * rep.b_l1;
  rep.strength_signed = spec.lambda * rep.a_l1 + spec.gamma * rep.b_l1;
  {
    std::ostringstream os;
    if (kappa0) {
      rep.h2.pass = rep.strength_abs < *kappa0;
      os << "|lambda|||a||_1 + |gamma|||b||_1 = " << rep.strength_abs << " vs kappa_0 = " << *kappa0;
    } else {
      rep.h2.pass = true;
      os << "kappa_0 not supplied; H2 not evaluated";
    }
    rep.h2.detail = os.str();
  }
  return rep;
}

}  // namespace gaskpl

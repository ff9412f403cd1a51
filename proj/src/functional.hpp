// The Euler functional of the coupled system and its ingredients: quadrature
// against the normalized self-similar measure, the concave q-power term, the
// (alpha+beta)-power coupling term, the gradient, and the H1-H3 hypothesis
// checks.
//
//   I(u,v) = (1/p)||(u,v)||^p - (1/q)(lambda int a|u|^q + gamma int b|v|^q)
//            - (1/(alpha+beta)) int h|u|^alpha |v|^beta

#pragma once

#include <optional>
#include <string>
#include <utility>

#include "energy.hpp"
#include "field.hpp"
#include "gasket.hpp"

namespace gaskpl {

struct ProblemSpec {
  double p = 2.0;
  double q = 1.5;
  double alpha = 1.5;
  double beta = 1.5;
  double lambda = 0.0;
  double gamma = 0.0;
  VertexField a, b, h;  // nonnegative coefficient fields
  int level = 0;

  double ab() const { return alpha + beta; }
};

// Quadrature: sum of f against the vertex weights (each level-m cell carries
// measure 3^{-m}, split equally over its corners).
double integrate(const GasketGraph& g, const VertexField& f);
double l1_norm(const GasketGraph& g, const VertexField& f);

// X = lambda int a|u|^q + gamma int b|v|^q  (the concave term of the case split).
double term_concave(const ProblemSpec& spec, const GasketGraph& g, const VertexField& u,
                    const VertexField& v);
// H = int h|u|^alpha |v|^beta  (nonnegative under H3).
double term_coupling(const ProblemSpec& spec, const GasketGraph& g, const VertexField& u,
                     const VertexField& v);

double euler_functional(const ProblemSpec& spec, const EnergyContext& ctx, const VertexField& u,
                        const VertexField& v);

// Interior-masked partial derivatives of the Euler functional; the |t|^{s}t
// kernels are evaluated in composite form so exponents below one never hit
// 0^{negative}.
std::pair<VertexField, VertexField> euler_gradient(const ProblemSpec& spec,
                                                   const EnergyContext& ctx, const VertexField& u,
                                                   const VertexField& v);

struct HypothesisItem {
  bool pass = false;
  std::string detail;
};

struct HypothesesReport {
  HypothesisItem h1;  // 1 < q < p < alpha+beta
  HypothesisItem h2;  // |lambda|||a||_1 + |gamma|||b||_1 < kappa_0 (when kappa_0 given)
  HypothesisItem h3;  // a,b,h >= 0, none identically zero, ||h||_1 > 0
  double a_l1 = 0.0, b_l1 = 0.0, h_l1 = 0.0;
  double strength_abs = 0.0;     // |lambda|||a||_1 + |gamma|||b||_1
  double strength_signed = 0.0;  // lambda||a||_1 + gamma||b||_1 (as printed in the Lambda sets)
  bool all_pass() const { return h1.pass && h2.pass && h3.pass; }
};

// Report-only: never throws on failed hypotheses.  kappa0 absent marks H2 as
// not evaluated (passes vacuously with a note).
HypothesesReport check_hypotheses(const ProblemSpec& spec, const GasketGraph& g,
                                  std::optional<double> kappa0);

}  // namespace gaskpl

#include "io.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace gaskpl {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

}  // namespace

VertexField read_field_file(const std::string& path, const GasketGraph& g,
                            bool require_nonnegative) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open field file: " + path);
  std::vector<double> values;
  values.reserve(static_cast<size_t>(g.vertex_count()));
  double v;
  while (in >> v) values.push_back(v);
  if (static_cast<int>(values.size()) != g.vertex_count()) {
    std::ostringstream os;
    os << "field file " << path << " has " << values.size() << " values, expected "
       << g.vertex_count();
    throw std::runtime_error(os.str());
  }
  if (require_nonnegative)
    for (double x : values)
      if (x < 0.0) throw std::runtime_error("field file " + path + " contains negative entries");
  return VertexField(g.level, std::move(values));
}

void write_field_file(const std::string& path, const VertexField& f) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write field file: " + path);
  for (double v : f.values) out << fmt(v) << "\n";
}

VertexField coefficient_field(const std::string& spec_text, const GasketGraph& g) {
  if (spec_text == "one") {
    VertexField f = zero_field(g);
    for (auto& v : f.values) v = 1.0;
    return f;
  }
  if (spec_text == "bump" || spec_text.rfind("bump:", 0) == 0) {
    const std::string word = spec_text == "bump" ? "1" : spec_text.substr(5);
    for (char c : word)
      if (c < '1' || c > '3')
        throw std::runtime_error("bump word must use symbols 1, 2, 3: " + spec_text);
    if (static_cast<int>(word.size()) > g.level)
      throw std::runtime_error("bump word longer than the level: " + spec_text);
    int idx = 0;
    for (char c : word) idx = idx * 3 + (c - '1');
    VertexField f = zero_field(g);
    for (int id : order_cell_vertices(g, static_cast<int>(word.size()), idx))
      f.values[static_cast<size_t>(id)] = 1.0;
    return f;
  }
  if (spec_text.rfind("file:", 0) == 0)
    return read_field_file(spec_text.substr(5), g, /*require_nonnegative=*/true);
  throw std::runtime_error("unknown coefficient preset: " + spec_text);
}

void write_solution_table(const std::string& path, const GasketGraph& g, const VertexField& u,
                          const VertexField& v) {
  check_field(g, u, "write_solution_table u");
  check_field(g, v, "write_solution_table v");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write solution table: " + path);
  out << "id word x y weight u v\n";
  for (int i = 0; i < g.vertex_count(); ++i) {
    const size_t k = static_cast<size_t>(i);
    out << i << ' ' << vertex_generating_word(g, i) << ' ' << fmt(g.vertices[k].x) << ' '
        << fmt(g.vertices[k].y) << ' ' << fmt(g.vertex_weight[k]) << ' ' << fmt(u.values[k]) << ' '
        << fmt(v.values[k]) << "\n";
  }
}

SolutionTable read_solution_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open solution table: " + path);
  std::string header;
  if (!std::getline(in, header) || header != "id word x y weight u v")
    throw std::runtime_error("solution table " + path + " has an unexpected header");
  SolutionTable t;
  int id;
  std::string word;
  double x, y, w, uu, vv;
  while (in >> id >> word >> x >> y >> w >> uu >> vv) {
    t.ids.push_back(id);
    t.words.push_back(word);
    t.x.push_back(x);
    t.y.push_back(y);
    t.weight.push_back(w);
    t.u.values.push_back(uu);
    t.v.values.push_back(vv);
  }
  // Infer the level from the vertex count: V = (3^{m+1} + 3) / 2.
  const std::int64_t target = 2 * static_cast<std::int64_t>(t.ids.size()) - 3;
  int level = -1;
  std::int64_t pw = 3;
  for (int m = 0; m <= 19; ++m, pw *= 3)
    if (pw == target) {
      level = m;
      break;
    }
  if (level < 0) throw std::runtime_error("solution table " + path + " has a non-gasket vertex count");
  for (size_t i = 0; i < t.ids.size(); ++i)
    if (t.ids[i] != static_cast<int>(i))
      throw std::runtime_error("solution table " + path + " rows are not in id order");
  t.u.level = level;
  t.v.level = level;
  return t;
}

namespace {

nlohmann::ordered_json branch_to_json(const BranchReport& b) {
  return {{"branch", b.branch},
          {"I_value", b.I_value},
          {"phi1", b.phi1},
          {"phi2", b.phi2},
          {"grad_dual_norm", b.grad_dual_norm},
          {"weak_residual", b.weak_res},
          {"norm_p", b.norm_p},
          {"membership_margin", b.membership_margin},
          {"identity_concave_err", b.identity_concave_err},
          {"identity_coupling_err", b.identity_coupling_err},
          {"iterations", b.iterations},
          {"start_index", b.start_index}};
}

}  // namespace

nlohmann::ordered_json certificate_to_json(const Certificate& cert) {
  nlohmann::ordered_json j;
  j["problem"] = {{"p", cert.p},       {"q", cert.q},           {"alpha", cert.alpha},
                  {"beta", cert.beta}, {"lambda", cert.lambda}, {"gamma", cert.gamma},
                  {"level", cert.level}, {"rp", cert.rp}};
  j["solver"] = {{"seed", cert.solver_seed},
                 {"starts", cert.solver_starts},
                 {"grad_tol", cert.solver_grad_tol}};
  j["constants"] = {{"K", cert.constants.K},
                    {"kappa", cert.constants.kappa},
                    {"kappa0", cert.constants.kappa0},
                    {"d0", cert.constants.d0},
                    {"a_l1", cert.constants.a_l1},
                    {"b_l1", cert.constants.b_l1},
                    {"h_l1", cert.constants.h_l1},
                    {"strength_abs", cert.constants.strength_abs},
                    {"strength_signed", cert.constants.strength_signed}};
  j["plus"] = branch_to_json(cert.plus);
  j["minus"] = branch_to_json(cert.minus);
  j["sampling"] = {{"mzero_min_rel_phi2", cert.mzero_min_rel_phi2},
                   {"mzero_hits", cert.mzero_hits},
                   {"coercivity_violations", cert.coercivity_violations},
                   {"coercivity_min_slack", cert.coercivity_min_slack}};
  {
    nlohmann::ordered_json h;
    h["orders"] = cert.holder.orders;
    h["ratios"] = cert.holder.ratios;
    h["max_ratio"] = cert.holder.max_ratio;
    j["holder"] = h;
  }
  nlohmann::ordered_json items = nlohmann::ordered_json::array();
  for (const auto& it : cert.items)
    items.push_back({{"name", it.name},
                     {"pass", it.pass},
                     {"value", it.value},
                     {"threshold", it.threshold},
                     {"detail", it.detail}});
  j["items"] = items;
  j["pass"] = cert.pass;
  return j;
}

void write_certificate(const std::string& path, const Certificate& cert) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write certificate: " + path);
  out << certificate_to_json(cert).dump(2) << "\n";
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("config " + path + ": " + e.what());
  }

  RunConfig cfg;
  if (j.contains("problem")) {
    const auto& p = j["problem"];
    cfg.p = p.value("p", cfg.p);
    cfg.q = p.value("q", cfg.q);
    cfg.alpha = p.value("alpha", cfg.alpha);
    cfg.beta = p.value("beta", cfg.beta);
    cfg.level = p.value("level", cfg.level);
    if (p.contains("lambda")) cfg.lambda = p["lambda"].get<double>();
    if (p.contains("gamma")) cfg.gamma = p["gamma"].get<double>();
    if (p.contains("lambda_rel")) cfg.lambda_rel = p["lambda_rel"].get<double>();
    if (p.contains("gamma_rel")) cfg.gamma_rel = p["gamma_rel"].get<double>();
    cfg.a = p.value("a", cfg.a);
    cfg.b = p.value("b", cfg.b);
    cfg.h = p.value("h", cfg.h);
  }
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    cfg.solver.starts = s.value("starts", cfg.solver.starts);
    cfg.solver.max_outer_iters = s.value("max_outer_iters", cfg.solver.max_outer_iters);
    cfg.solver.grad_tol = s.value("grad_tol", cfg.solver.grad_tol);
    cfg.solver.armijo_c = s.value("armijo_c", cfg.solver.armijo_c);
    cfg.solver.shrink = s.value("shrink", cfg.solver.shrink);
    cfg.solver.initial_step = s.value("initial_step", cfg.solver.initial_step);
    cfg.solver.seed = s.value("seed", cfg.solver.seed);
  }
  if (j.contains("rp")) {
    const auto& r = j["rp"];
    cfg.rp_max_level = r.value("max_level", cfg.rp_max_level);
    cfg.rp_tol = r.value("tol", cfg.rp_tol);
    if (r.contains("override") && !r["override"].is_null())
      cfg.rp_override = r["override"].get<double>();
  }
  if (j.contains("constants")) {
    const auto& c = j["constants"];
    if (c.contains("k_override") && !c["k_override"].is_null())
      cfg.k_override = c["k_override"].get<double>();
  }
  if (j.contains("verify")) {
    const auto& v = j["verify"];
    cfg.sampling.mzero_samples = v.value("mzero_samples", cfg.sampling.mzero_samples);
    cfg.sampling.coercivity_samples = v.value("coercivity_samples", cfg.sampling.coercivity_samples);
    cfg.sampling.holder_fields = v.value("holder_fields", cfg.sampling.holder_fields);
    cfg.sampling.holder_cap = v.value("holder_cap", cfg.sampling.holder_cap);
    cfg.sampling.seed = v.value("seed", cfg.sampling.seed);
    cfg.tolerances.residual = v.value("residual_tol", cfg.tolerances.residual);
    cfg.tolerances.on_manifold_rel = v.value("on_manifold_rel", cfg.tolerances.on_manifold_rel);
    cfg.tolerances.identity_rel = v.value("identity_rel", cfg.tolerances.identity_rel);
  }
  if (j.contains("output")) {
    const auto& o = j["output"];
    cfg.out_dir = o.value("dir", cfg.out_dir);
    cfg.render = o.value("render", cfg.render);
  }
  return cfg;
}

nlohmann::ordered_json run_config_to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json prob = {{"p", cfg.p},     {"q", cfg.q},         {"alpha", cfg.alpha},
                                 {"beta", cfg.beta}, {"level", cfg.level}, {"a", cfg.a},
                                 {"b", cfg.b},     {"h", cfg.h}};
  if (cfg.lambda) prob["lambda"] = *cfg.lambda;
  if (cfg.gamma) prob["gamma"] = *cfg.gamma;
  if (cfg.lambda_rel) prob["lambda_rel"] = *cfg.lambda_rel;
  if (cfg.gamma_rel) prob["gamma_rel"] = *cfg.gamma_rel;
  j["problem"] = prob;
  j["solver"] = {{"starts", cfg.solver.starts},
                 {"max_outer_iters", cfg.solver.max_outer_iters},
                 {"grad_tol", cfg.solver.grad_tol},
                 {"armijo_c", cfg.solver.armijo_c},
                 {"shrink", cfg.solver.shrink},
                 {"initial_step", cfg.solver.initial_step},
                 {"seed", cfg.solver.seed}};
  nlohmann::ordered_json rp = {{"max_level", cfg.rp_max_level}, {"tol", cfg.rp_tol}};
  if (cfg.rp_override) rp["override"] = *cfg.rp_override;
  j["rp"] = rp;
  if (cfg.k_override) j["constants"] = {{"k_override", *cfg.k_override}};
  j["verify"] = {{"mzero_samples", cfg.sampling.mzero_samples},
                 {"coercivity_samples", cfg.sampling.coercivity_samples},
                 {"holder_fields", cfg.sampling.holder_fields},
                 {"holder_cap", cfg.sampling.holder_cap},
                 {"seed", cfg.sampling.seed},
                 {"residual_tol", cfg.tolerances.residual}};
  j["output"] = {{"dir", cfg.out_dir}, {"render", cfg.render}};
  return j;
}

}  // namespace gaskpl

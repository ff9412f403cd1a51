// Real-valued functions on the vertices of a level-m gasket graph.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gasket.hpp"

namespace gaskpl {

struct VertexField {
  int level = 0;
  std::vector<double> values;

  VertexField() = default;
  VertexField(int lvl, std::vector<double> vals) : level(lvl), values(std::move(vals)) {}

  double operator[](size_t i) const { return values[i]; }
  double& operator[](size_t i) { return values[i]; }
  size_t size() const { return values.size(); }
};

inline VertexField zero_field(const GasketGraph& g) {
  return VertexField(g.level, std::vector<double>(static_cast<size_t>(g.vertex_count()), 0.0));
}

inline void check_field(const GasketGraph& g, const VertexField& f, const char* what) {
  if (f.level != g.level || static_cast<int>(f.values.size()) != g.vertex_count())
    throw std::invalid_argument(std::string(what) + ": field level/size does not match the graph");
}

inline void zero_boundary(const GasketGraph& g, VertexField& f) {
  for (int id : g.boundary_ids) f.values[static_cast<size_t>(id)] = 0.0;
}

inline bool has_zero_trace(const GasketGraph& g, const VertexField& f) {
  for (int id : g.boundary_ids)
    if (f.values[static_cast<size_t>(id)] != 0.0) return false;
  return true;
}

inline double sup_norm(const VertexField& f) {
  double m = 0.0;
  for (double v : f.values) {
    double a = v < 0 ? -v : v;
    if (a > m) m = a;
  }
  return m;
}

// Deterministic uniform draw in [0,1); independent of stdlib distribution
// internals so seeded runs reproduce everywhere.
template <class Rng>
double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <class Rng>
VertexField random_zero_trace_field(const GasketGraph& g, Rng& rng) {
  VertexField f = zero_field(g);
  for (size_t i = 0; i < f.values.size(); ++i) f.values[i] = 2.0 * uniform01(rng) - 1.0;
  zero_boundary(g, f);
  return f;
}

}  // namespace gaskpl

// Level-m graph approximation of the Sierpinski gasket: cells, vertices,
// boundary, adjacency and quadrature weights.
//
// The gasket is the attractor of the three contractions
//   F_i(x) = (x - q_i)/2 + q_i,   i = 1,2,3,
// and the level-m graph carries one cell per word w in {1,2,3}^m, with cell
// corners F_w(q_1), F_w(q_2), F_w(q_3).  Vertices are deduplicated exactly
// through integer barycentric coordinates (i1,i2,i3)/2^m, so the combinatorics
// never depend on floating-point geometry.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace gaskpl {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// Word over the alphabet {1,2,3}; length equals the level it indexes into.
// The empty word addresses the single level-0 cell.
struct CellAddress {
  std::string word;
};

struct GasketGraph {
  int level = 0;
  std::vector<Point2> vertices;
  // Integer barycentric coordinates w.r.t. the three corners; each triple sums
  // to 2^level.  These are the exact identity of a vertex.
  std::vector<std::array<std::int64_t, 3>> vertex_key;
  // One entry per cell, in lexicographic word order (word "11..1" first);
  // entry k of a triple is the id of F_w(q_k).
  std::vector<std::array<int, 3>> cells;
  std::array<int, 3> boundary_ids{0, 1, 2};
  std::vector<double> vertex_weight;
  // Cells containing each vertex; -1 padded (boundary vertices sit in one
  // cell, interior vertices in exactly two).
  std::vector<std::array<int, 2>> vertex_cells;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int cell_count() const { return static_cast<int>(cells.size()); }
  bool is_boundary(int id) const {
    return id == boundary_ids[0] || id == boundary_ids[1] || id == boundary_ids[2];
  }

  // Id of the vertex with the given barycentric key, or -1.
  int find_vertex(const std::array<std::int64_t, 3>& key) const;

  // Word of a cell (digits '1'..'3'); inverse of lexicographic enumeration.
  std::string cell_word(int cell_index) const;
  int cell_index(const CellAddress& addr) const;

 private:
  friend GasketGraph build_gasket(int, const std::array<Point2, 3>&);
  std::vector<std::pair<std::array<std::int64_t, 3>, int>> key_index_;  // sorted
};

// Default equilateral embedding with unit side.
std::array<Point2, 3> equilateral_corners();

// Builds the level graph.  Throws std::invalid_argument on negative level,
// coincident corners, or a level whose cell count overflows the index space.
GasketGraph build_gasket(int level, const std::array<Point2, 3>& corners = equilateral_corners());

// Ids (F_w q_1, F_w q_2, F_w q_3) for a word of length g.level.
std::array<int, 3> cell_vertex_ids(const GasketGraph& g, const CellAddress& addr);

// All unordered vertex pairs lying in one order-m' cell or in two order-m'
// cells that share a vertex (the pair set of the Holder estimate).
std::vector<std::pair<int, int>> same_or_adjacent_cell_pairs(const GasketGraph& g, int order);

// Ids of the level-g vertices inside the order-m' cell with the given index.
std::vector<int> order_cell_vertices(const GasketGraph& g, int order, int order_cell_index);

// For each vertex of `coarse` (a lower or equal level of the same gasket),
// the id of the geometrically identical vertex in `fine`.
std::vector<int> coarse_to_fine_ids(const GasketGraph& coarse, const GasketGraph& fine);

// Generating word of a vertex: word of the first cell (in enumeration order)
// containing it, plus the corner slot, e.g. "112:3".  Level 0 uses "-".
std::string vertex_generating_word(const GasketGraph& g, int vertex_id);

}  // namespace gaskpl

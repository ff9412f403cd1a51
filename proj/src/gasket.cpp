#include "gasket.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace gaskpl {

namespace {

std::int64_t pow3(int n) {
  std::int64_t r = 1;
  for (int i = 0; i < n; ++i) r *= 3;
  return r;
}

}  // namespace

std::array<Point2, 3> equilateral_corners() {
  return {Point2{0.0, 0.0}, Point2{1.0, 0.0}, Point2{0.5, std::sqrt(3.0) / 2.0}};
}

int GasketGraph::find_vertex(const std::array<std::int64_t, 3>& key) const {
  auto it = std::lower_bound(key_index_.begin(), key_index_.end(), key,
                             [](const auto& a, const auto& b) { return a.first < b; });
  if (it == key_index_.end() || it->first != key) return -1;
  return it->second;
}

std::string GasketGraph::cell_word(int cell_index) const {
  if (cell_index < 0 || cell_index >= cell_count()) throw std::out_of_range("cell index");
  std::string w(static_cast<size_t>(level), '1');
  int c = cell_index;
  for (int k = level - 1; k >= 0; --k) {
    w[static_cast<size_t>(k)] = static_cast<char>('1' + c % 3);
    c /= 3;
  }
  return w;
}

int GasketGraph::cell_index(const CellAddress& addr) const {
  if (static_cast<int>(addr.word.size()) != level)
    throw std::invalid_argument("cell word length must equal the graph level");
  int c = 0;
  for (char ch : addr.word) {
    if (ch < '1' || ch > '3') throw std::invalid_argument("cell word symbols must be 1, 2 or 3");
    c = c * 3 + (ch - '1');
  }
  return c;
}

GasketGraph build_gasket(int level, const std::array<Point2, 3>& corners) {
  if (level < 0) throw std::invalid_argument("level must be nonnegative");
  // Cells are indexed by int; 3^20 overflows the 31-bit range.
  if (level > 19) throw std::invalid_argument("level too large: 3^level overflows the cell index space");
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (corners[i].x == corners[j].x && corners[i].y == corners[j].y)
        throw std::invalid_argument("corners must be pairwise distinct");

  GasketGraph g;
  g.level = level;
  const std::int64_t ncells = pow3(level);
  const std::int64_t denom = std::int64_t{1} << level;

  std::map<std::array<std::int64_t, 3>, int> index;
  auto intern = [&](const std::array<std::int64_t, 3>& key) {
    auto [it, fresh] = index.try_emplace(key, static_cast<int>(g.vertices.size()));
    if (fresh) {
      g.vertex_key.push_back(key);
      const double d = static_cast<double>(denom);
      g.vertices.push_back(Point2{
          (key[0] * corners[0].x + key[1] * corners[1].x + key[2] * corners[2].x) / d,
          (key[0] * corners[0].y + key[1] * corners[1].y + key[2] * corners[2].y) / d});
    }
    return it->second;
  };

  // Boundary first: q_1, q_2, q_3 get ids 0, 1, 2.
  for (int j = 0; j < 3; ++j) {
    std::array<std::int64_t, 3> key{0, 0, 0};
    key[j] = denom;
    g.boundary_ids[j] = intern(key);
  }

  g.cells.reserve(static_cast<size_t>(ncells));
  std::vector<int> digits(static_cast<size_t>(level), 0);
  for (std::int64_t c = 0; c < ncells; ++c) {
    std::int64_t t = c;
    for (int k = level - 1; k >= 0; --k) {
      digits[static_cast<size_t>(k)] = static_cast<int>(t % 3);
      t /= 3;
    }
    std::array<int, 3> tri{};
    for (int j = 0; j < 3; ++j) {
      // F_w q_j applied innermost-first; each map halves and shifts toward q_i.
      std::array<std::int64_t, 3> key{0, 0, 0};
      key[j] = 1;
      std::int64_t scale = 1;
      for (int k = level - 1; k >= 0; --k) {
        key[static_cast<size_t>(digits[static_cast<size_t>(k)])] += scale;
        scale <<= 1;
      }
      tri[j] = intern(key);
    }
    g.cells.push_back(tri);
  }

  g.vertex_cells.assign(g.vertices.size(), {-1, -1});
  for (int c = 0; c < g.cell_count(); ++c) {
    for (int j = 0; j < 3; ++j) {
      auto& slots = g.vertex_cells[static_cast<size_t>(g.cells[static_cast<size_t>(c)][static_cast<size_t>(j)])];
      if (slots[0] < 0)
        slots[0] = c;
      else if (slots[1] < 0)
        slots[1] = c;
      else
        throw std::logic_error("vertex in more than two cells");
    }
  }

  // Each cell carries measure 3^{-m} split equally over its three corners.
  const double share = 1.0 / (3.0 * static_cast<double>(ncells));
  g.vertex_weight.assign(g.vertices.size(), 0.0);
  for (size_t v = 0; v < g.vertices.size(); ++v) {
    int count = (g.vertex_cells[v][0] >= 0) + (g.vertex_cells[v][1] >= 0);
    g.vertex_weight[v] = share * count;
  }

  g.key_index_.assign(index.begin(), index.end());
  return g;
}

std::array<int, 3> cell_vertex_ids(const GasketGraph& g, const CellAddress& addr) {
  const int c = g.cell_index(addr);
  return g.cells[static_cast<size_t>(c)];
}

std::vector<int> order_cell_vertices(const GasketGraph& g, int order, int order_cell_index) {
  if (order < 0 || order > g.level) throw std::invalid_argument("order must lie in [0, level]");
  const std::int64_t block = pow3(g.level - order);
  std::vector<int> ids;
  ids.reserve(static_cast<size_t>(3 * block));
  for (std::int64_t c = order_cell_index * block; c < (order_cell_index + 1) * block; ++c)
    for (int j = 0; j < 3; ++j) ids.push_back(g.cells[static_cast<size_t>(c)][static_cast<size_t>(j)]);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::vector<std::pair<int, int>> same_or_adjacent_cell_pairs(const GasketGraph& g, int order) {
  if (order < 0 || order > g.level) throw std::invalid_argument("order must lie in [0, level]");
  const int nsets = static_cast<int>(pow3(order));
  std::vector<std::vector<int>> sets(static_cast<size_t>(nsets));
  for (int s = 0; s < nsets; ++s) sets[static_cast<size_t>(s)] = order_cell_vertices(g, order, s);

  // Vertices shared by two order-m' cells identify the adjacent set pairs.
  std::vector<std::array<int, 2>> owner(g.vertices.size(), {-1, -1});
  for (int s = 0; s < nsets; ++s)
    for (int v : sets[static_cast<size_t>(s)]) {
      auto& o = owner[static_cast<size_t>(v)];
      if (o[0] < 0)
        o[0] = s;
      else if (o[1] < 0)
        o[1] = s;
    }
  std::set<std::pair<int, int>> adjacent;
  for (const auto& o : owner)
    if (o[1] >= 0) adjacent.insert({std::min(o[0], o[1]), std::max(o[0], o[1])});

  std::set<std::pair<int, int>> pairs;
  auto add = [&pairs](int a, int b) {
    if (a != b) pairs.insert({std::min(a, b), std::max(a, b)});
  };
  for (const auto& set : sets)
    for (size_t i = 0; i < set.size(); ++i)
      for (size_t j = i + 1; j < set.size(); ++j) add(set[i], set[j]);
  for (const auto& [sa, sb] : adjacent)
    for (int a : sets[static_cast<size_t>(sa)])
      for (int b : sets[static_cast<size_t>(sb)]) add(a, b);

  return {pairs.begin(), pairs.end()};
}

std::vector<int> coarse_to_fine_ids(const GasketGraph& coarse, const GasketGraph& fine) {
  if (coarse.level > fine.level) throw std::invalid_argument("coarse level exceeds fine level");
  const std::int64_t factor = std::int64_t{1} << (fine.level - coarse.level);
  std::vector<int> ids(coarse.vertices.size());
  for (size_t v = 0; v < coarse.vertices.size(); ++v) {
    std::array<std::int64_t, 3> key = coarse.vertex_key[v];
    for (auto& k : key) k *= factor;
    const int id = fine.find_vertex(key);
    if (id < 0) throw std::logic_error("coarse vertex missing from fine graph");
    ids[v] = id;
  }
  return ids;
}

std::string vertex_generating_word(const GasketGraph& g, int vertex_id) {
  const auto& slots = g.vertex_cells[static_cast<size_t>(vertex_id)];
  int cell = slots[0];
  if (slots[1] >= 0) cell = std::min(cell, slots[1]);
  const std::string word = g.level == 0 ? std::string("-") : g.cell_word(cell);
  const auto& tri = g.cells[static_cast<size_t>(cell)];
  int corner = 0;
  for (int j = 0; j < 3; ++j)
    if (tri[static_cast<size_t>(j)] == vertex_id) corner = j + 1;
  return word + ":" + std::to_string(corner);
}

}  // namespace gaskpl

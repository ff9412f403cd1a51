#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "gasket.hpp"
#include "test_support.hpp"

using namespace gaskpl;

TEST_CASE("vertex and cell counts follow the recurrence V_{m+1} = 3V_m - 3") {
  long expected_vertices = 3;
  for (int m = 0; m <= 8; ++m) {
    const GasketGraph g = build_gasket(m);
    CHECK(g.vertex_count() == expected_vertices);
    long cells = 1;
    for (int i = 0; i < m; ++i) cells *= 3;
    CHECK(g.cell_count() == cells);
    expected_vertices = 3 * expected_vertices - 3;
  }
  CHECK(build_gasket(0).vertex_count() == 3);
  CHECK(build_gasket(2).vertex_count() == 15);
  CHECK(build_gasket(2).cell_count() == 9);
  CHECK(build_gasket(5).vertex_count() == 366);
  CHECK(build_gasket(5).cell_count() == 243);
}

TEST_CASE("level 0 is a single all-boundary cell") {
  const GasketGraph g = build_gasket(0);
  CHECK(g.cell_count() == 1);
  for (int j = 0; j < 3; ++j) CHECK(g.is_boundary(j));
  const auto ids = cell_vertex_ids(g, CellAddress{""});
  CHECK(ids == std::array<int, 3>{0, 1, 2});
}

TEST_CASE("construction rejects bad input") {
  CHECK_THROWS_AS(build_gasket(-1), std::invalid_argument);
  CHECK_THROWS_AS(build_gasket(20), std::invalid_argument);
  auto corners = equilateral_corners();
  corners[1] = corners[0];
  CHECK_THROWS_AS(build_gasket(2, corners), std::invalid_argument);
}

TEST_CASE("cell membership counts and exact deduplication") {
  for (int m : {1, 2, 3, 4}) {
    const GasketGraph g = build_gasket(m);
    std::map<int, int> appearances;
    for (const auto& cell : g.cells) {
      CHECK(cell[0] != cell[1]);
      CHECK(cell[0] != cell[2]);
      CHECK(cell[1] != cell[2]);
      for (int j = 0; j < 3; ++j) appearances[cell[static_cast<size_t>(j)]]++;
    }
    for (int v = 0; v < g.vertex_count(); ++v) {
      CHECK(appearances.count(v) == 1);  // every vertex covered by some cell
      CHECK(appearances[v] == (g.is_boundary(v) ? 1 : 2));
    }
    // distinct barycentric keys: deduplication is exact
    std::set<std::array<std::int64_t, 3>> keys(g.vertex_key.begin(), g.vertex_key.end());
    CHECK(keys.size() == static_cast<size_t>(g.vertex_count()));
  }
}

TEST_CASE("weights are positive and sum to one at every level") {
  for (int m = 0; m <= 6; ++m) {
    const GasketGraph g = build_gasket(m);
    double sum = 0.0;
    for (double w : g.vertex_weight) {
      CHECK(w > 0.0);
      sum += w;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("cell_vertex_ids matches direct affine map composition") {
  const auto corners = equilateral_corners();
  const std::array<std::array<double, 2>, 3> cs = {
      std::array<double, 2>{corners[0].x, corners[0].y},
      std::array<double, 2>{corners[1].x, corners[1].y},
      std::array<double, 2>{corners[2].x, corners[2].y}};

  SUBCASE("level 1, word 1: corner q1 plus its two midpoints") {
    const GasketGraph g = build_gasket(1);
    const auto ids = cell_vertex_ids(g, CellAddress{"1"});
    CHECK(ids[0] == g.boundary_ids[0]);
    const auto& m12 = g.vertices[static_cast<size_t>(ids[1])];
    CHECK(m12.x == doctest::Approx(0.5 * (cs[0][0] + cs[1][0])).epsilon(1e-15));
    CHECK(m12.y == doctest::Approx(0.5 * (cs[0][1] + cs[1][1])).epsilon(1e-15));
    const auto& m13 = g.vertices[static_cast<size_t>(ids[2])];
    CHECK(m13.x == doctest::Approx(0.5 * (cs[0][0] + cs[2][0])).epsilon(1e-15));
  }

  SUBCASE("level 2, word 12 and self-similarity across level-5 cells") {
    const GasketGraph g2 = build_gasket(2);
    const auto ids = cell_vertex_ids(g2, CellAddress{"12"});
    for (int j = 0; j < 3; ++j) {
      const auto expect = testing::apply_word("12", cs, cs[static_cast<size_t>(j)]);
      const auto& got = g2.vertices[static_cast<size_t>(ids[static_cast<size_t>(j)])];
      CHECK(got.x == doctest::Approx(expect[0]).epsilon(1e-12));
      CHECK(got.y == doctest::Approx(expect[1]).epsilon(1e-12));
    }
    const GasketGraph g5 = build_gasket(5);
    for (int c = 0; c < g5.cell_count(); c += 17) {
      const std::string word = g5.cell_word(c);
      const auto tri = cell_vertex_ids(g5, CellAddress{word});
      for (int j = 0; j < 3; ++j) {
        CHECK(tri[static_cast<size_t>(j)] < g5.vertex_count());
        const auto expect = testing::apply_word(word, cs, cs[static_cast<size_t>(j)]);
        const auto& got = g5.vertices[static_cast<size_t>(tri[static_cast<size_t>(j)])];
        CHECK(std::abs(got.x - expect[0]) < 1e-12);
        CHECK(std::abs(got.y - expect[1]) < 1e-12);
      }
    }
  }

  SUBCASE("wrong word length and bad symbols throw") {
    const GasketGraph g = build_gasket(2);
    CHECK_THROWS_AS(cell_vertex_ids(g, CellAddress{"1"}), std::invalid_argument);
    CHECK_THROWS_AS(cell_vertex_ids(g, CellAddress{"14"}), std::invalid_argument);
  }
}

namespace {

// Enumeration oracle: a pair qualifies iff two intersecting (possibly equal)
// order-m' cells contain the endpoints.  Works from ancestor arithmetic on
// cell indices, not through the production pair generator.
std::set<std::pair<int, int>> pairs_oracle(const GasketGraph& g, int order) {
  long block = 1;
  for (int i = 0; i < g.level - order; ++i) block *= 3;
  const int nsets = static_cast<int>(g.cell_count() / block);
  std::vector<std::set<int>> sets(static_cast<size_t>(nsets));
  for (int c = 0; c < g.cell_count(); ++c)
    for (int j = 0; j < 3; ++j)
      sets[static_cast<size_t>(c / block)].insert(
          g.cells[static_cast<size_t>(c)][static_cast<size_t>(j)]);
  std::set<std::pair<int, int>> out;
  for (int sa = 0; sa < nsets; ++sa)
    for (int sb = sa; sb < nsets; ++sb) {
      bool touch = false;
      for (int v : sets[static_cast<size_t>(sa)])
        if (sets[static_cast<size_t>(sb)].count(v)) {
          touch = true;
          break;
        }
      if (!touch) continue;
      for (int a : sets[static_cast<size_t>(sa)])
        for (int b : sets[static_cast<size_t>(sb)])
          if (a != b) out.insert({std::min(a, b), std::max(a, b)});
    }
  return out;
}

}  // namespace

TEST_CASE("same_or_adjacent_cell_pairs") {
  SUBCASE("order 0 gives all pairs") {
    const GasketGraph g = build_gasket(3);
    const auto pairs = same_or_adjacent_cell_pairs(g, 0);
    const long n = g.vertex_count();
    CHECK(static_cast<long>(pairs.size()) == n * (n - 1) / 2);
  }
  SUBCASE("level 1 order 1: internal pairs plus touching-midpoint cross pairs") {
    const GasketGraph g = build_gasket(1);
    const auto pairs = same_or_adjacent_cell_pairs(g, 1);
    CHECK(pairs.size() == 15);  // 9 internal + 6 across the three touching midpoints
  }
  SUBCASE("matches the enumeration oracle") {
    for (int level : {2, 3}) {
      const GasketGraph g = build_gasket(level);
      for (int order = 0; order <= level; ++order) {
        const auto pairs = same_or_adjacent_cell_pairs(g, order);
        const auto expect = pairs_oracle(g, order);
        CHECK(pairs.size() == expect.size());
        for (const auto& pr : pairs) CHECK(expect.count(pr) == 1);
      }
    }
  }
  SUBCASE("order out of range throws") {
    const GasketGraph g = build_gasket(2);
    CHECK_THROWS_AS(same_or_adjacent_cell_pairs(g, 3), std::invalid_argument);
  }
}

TEST_CASE("coarse vertices embed into finer graphs at the same coordinates") {
  const GasketGraph coarse = build_gasket(2);
  const GasketGraph fine = build_gasket(5);
  const auto ids = coarse_to_fine_ids(coarse, fine);
  REQUIRE(ids.size() == static_cast<size_t>(coarse.vertex_count()));
  for (size_t v = 0; v < ids.size(); ++v) {
    CHECK(fine.vertices[static_cast<size_t>(ids[v])].x == doctest::Approx(coarse.vertices[v].x));
    CHECK(fine.vertices[static_cast<size_t>(ids[v])].y == doctest::Approx(coarse.vertices[v].y));
  }
  for (int j = 0; j < 3; ++j) CHECK(ids[static_cast<size_t>(j)] == j);
}

TEST_CASE("generating words name the first covering cell") {
  const GasketGraph g = build_gasket(3);
  CHECK(vertex_generating_word(g, 0) == "111:1");
  CHECK(vertex_generating_word(g, 1) == "222:2");
  const auto tri = cell_vertex_ids(g, CellAddress{"111"});
  CHECK(vertex_generating_word(g, tri[1]) == "111:2");
  const GasketGraph g0 = build_gasket(0);
  CHECK(vertex_generating_word(g0, 0) == "-:1");
}

TEST_CASE("vertex ids are deterministic for a given level") {
  const GasketGraph a = build_gasket(4);
  const GasketGraph b = build_gasket(4);
  CHECK(a.vertex_key == b.vertex_key);
  CHECK(a.cells == b.cells);
}

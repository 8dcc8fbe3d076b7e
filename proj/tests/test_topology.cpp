#include "oracles.hpp"

#include "cellwlan/errors.hpp"
#include "cellwlan/topology.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

using namespace cellwlan;

namespace {

Deployment line_of(std::initializer_list<double> xs, double rcs = 100.0, double radius = 5.0)
{
  Deployment d;
  d.carrier_sense_range = rcs;
  int id = 1;
  for (double x : xs)
  {
    CellGeom c;
    c.id = id++;
    c.ap_position = {x, 0.0};
    c.radius = radius;
    d.cells.push_back(c);
  }
  return d;
}

std::vector<CellMask> actives(const StateSpace& ss)
{
  std::vector<CellMask> v;
  for (const auto& s : ss.states())
    v.push_back(s.active);
  return v;
}

} // namespace

TEST_CASE("contention graph from geometry")
{
  SUBCASE("co-channel pair at half the sensing range is an edge")
  {
    const auto g = build_contention_graph(line_of({0.0, 50.0}));
    CHECK(g.edge_count() == 1);
    CHECK(g.adjacent(0, 1));
  }
  SUBCASE("different channels never interact")
  {
    auto d = line_of({0.0, 50.0});
    d.num_channels = 2;
    d.cells[1].channel = 2;
    CHECK(build_contention_graph(d).edge_count() == 0);
  }
  SUBCASE("line with 0.8 R spacing is a path")
  {
    const auto g = build_contention_graph(line_of({0.0, 80.0, 160.0}));
    CHECK(g == path_graph(3));
  }
  SUBCASE("distance exactly equal to the sensing range is not an edge")
  {
    CHECK(build_contention_graph(line_of({0.0, 100.0})).edge_count() == 0);
    CHECK(build_contention_graph(line_of({0.0, 99.999})).edge_count() == 1);
  }
  SUBCASE("rigid motions do not change the graph")
  {
    SplitMix64 rng(7);
    for (int trial = 0; trial < 20; ++trial)
    {
      Deployment d;
      d.carrier_sense_range = 100.0;
      for (int k = 0; k < 8; ++k)
      {
        CellGeom c;
        c.id = k + 1;
        c.ap_position = {rng.uniform() * 300.0, rng.uniform() * 300.0};
        c.radius = 3.0;
        d.cells.push_back(c);
      }
      const double th = rng.uniform() * 2.0 * std::numbers::pi;
      const double tx = rng.uniform() * 1000.0 - 500.0, ty = rng.uniform() * 1000.0 - 500.0;
      Deployment moved = d;
      for (auto& c : moved.cells)
      {
        const Point p = c.ap_position;
        c.ap_position = {std::cos(th) * p.x - std::sin(th) * p.y + tx, std::sin(th) * p.x + std::cos(th) * p.y + ty};
      }
      // Pairs within rounding of the boundary could legitimately flip.
      bool near_boundary = false;
      for (std::size_t i = 0; i < d.cells.size(); ++i)
        for (std::size_t j = i + 1; j < d.cells.size(); ++j)
          near_boundary |= std::abs(distance(d.cells[i].ap_position, d.cells[j].ap_position) - 100.0) < 1e-6;
      if (!near_boundary)
        CHECK(build_contention_graph(d) == build_contention_graph(moved));
    }
  }
}

TEST_CASE("deployment validation names the field")
{
  auto d = line_of({0.0, 50.0});
  d.cells[1].channel = 3;
  try
  {
    d.validate();
    FAIL("expected ValidationError");
  }
  catch (const ValidationError& e)
  {
    CHECK(e.field() == "deployment.cells[1].channel");
  }
  auto e = line_of({0.0});
  e.carrier_sense_range = 0.0;
  CHECK_THROWS_AS(e.validate(), ValidationError);
  CHECK_THROWS_AS(Deployment{}.validate(), ValidationError);
  auto dup = line_of({0.0, 1.0});
  dup.cells[1].id = 1;
  CHECK_THROWS_AS(dup.validate(), ValidationError);
}

TEST_CASE("PBD disc test")
{
  const double r = 100.0;
  CellGeom a, b;
  a.radius = b.radius = 0.1 * r;
  a.ap_position = {0.0, 0.0};

  b.ap_position = {0.3 * r, 0.0};
  CHECK(classify_pair(a, b, r) == PairRelation::CompletelyDependent);
  b.ap_position = {3.0 * r, 0.0};
  CHECK(classify_pair(a, b, r) == PairRelation::Independent);

  // Boundary case: nearest node pair 0.6 R apart, farthest 1.4 R apart.
  a.radius = b.radius = 0.2 * r;
  b.ap_position = {r, 0.0};
  CHECK(classify_pair(a, b, r) == PairRelation::Violation);

  // Exact boundaries: d + Ra + Rb == R is not dependent, d - Ra - Rb == R is independent.
  a.radius = b.radius = 10.0;
  b.ap_position = {80.0, 0.0};
  CHECK(classify_pair(a, b, r) == PairRelation::Violation);
  b.ap_position = {120.0, 0.0};
  CHECK(classify_pair(a, b, r) == PairRelation::Independent);

  auto d = line_of({0.0, 100.0, 300.0}, 100.0, 20.0);
  const auto rep = check_pbd(d);
  CHECK_FALSE(rep.pass);
  REQUIRE(rep.violations.size() == 1);
  CHECK(rep.violations[0].cell_a == 1);
  CHECK(rep.violations[0].cell_b == 2);
  CHECK(rep.violations[0].ap_distance == doctest::Approx(100.0));

  CHECK(check_pbd(line_of({0.0, 80.0, 160.0})).pass);
}

TEST_CASE("independent-set goldens")
{
  CHECK(actives(enumerate_independent_sets(path_graph(3))) == std::vector<CellMask>{0b000, 0b001, 0b101, 0b010, 0b100});
  CHECK(actives(enumerate_independent_sets(complete_graph(3))) == std::vector<CellMask>{0b000, 0b001, 0b010, 0b100});
  CHECK(enumerate_independent_sets(edgeless_graph(3)).size() == 8);
  const auto ss = enumerate_independent_sets(path_graph(3));
  CHECK(ss.empty_index() == 0);
  CHECK(ss[0].active == 0);
  CHECK(ss.index_of(0b101) == 2);
  CHECK(ss.index_of(0b011) == StateSpace::npos);
}

TEST_CASE("enumeration equals power-set filter on random graphs")
{
  SplitMix64 rng(11);
  for (int trial = 0; trial < 150; ++trial)
  {
    const auto n = 1 + static_cast<std::size_t>(rng() % 12);
    const auto g = oracle::random_graph(rng, n, 0.1 + 0.8 * rng.uniform());
    const auto ss = enumerate_independent_sets(g);
    REQUIRE(actives(ss) == oracle::independent_sets(g));
    for (const auto& s : ss.states())
    {
      CHECK((s.active & s.blocked) == 0);
      CHECK((s.active & s.backoff) == 0);
      CHECK((s.blocked & s.backoff) == 0);
      CHECK((s.active | s.blocked | s.backoff) == g.all_cells());
    }
    CHECK(ss[0].backoff == g.all_cells());
  }
}

TEST_CASE("state cap")
{
  CHECK_THROWS_AS(enumerate_independent_sets(edgeless_graph(10), 1000), StateSpaceTooLarge);
  CHECK_NOTHROW(enumerate_independent_sets(edgeless_graph(10), 1024));
  try
  {
    enumerate_independent_sets(edgeless_graph(12), 100);
  }
  catch (const StateSpaceTooLarge& e)
  {
    CHECK(e.cap() == 100);
  }
}

TEST_CASE("partition_state")
{
  const auto g = path_graph(3);
  auto s = partition_state(g, 0b001);
  CHECK(s.blocked == 0b010);
  CHECK(s.backoff == 0b100);
  s = partition_state(g, 0b101);
  CHECK(s.blocked == 0b010);
  CHECK(s.backoff == 0);
  s = partition_state(g, 0);
  CHECK(s.blocked == 0);
  CHECK(s.backoff == 0b111);
  CHECK_THROWS_AS(partition_state(g, 0b011), ValidationError);
  CHECK_THROWS_AS(partition_state(g, 0b1000), ValidationError);
}

TEST_CASE("MIS statistics")
{
  auto m = mis_stats(path_graph(3));
  CHECK(m.alpha == 2);
  CHECK(m.eta == 1);
  CHECK(m.eta_per_cell == std::vector<std::uint64_t>{1, 0, 1});
  m = mis_stats(complete_graph(3));
  CHECK(m.alpha == 1);
  CHECK(m.eta == 3);
  CHECK(m.eta_per_cell == std::vector<std::uint64_t>{1, 1, 1});
  m = mis_stats(ContentionGraph{});
  CHECK(m.alpha == 0);
  CHECK(m.eta == 1);

  SplitMix64 rng(5);
  for (int trial = 0; trial < 200; ++trial)
  {
    const auto n = 1 + static_cast<std::size_t>(rng() % 12);
    const auto g = oracle::random_graph(rng, n, rng.uniform());
    const auto got = mis_stats(g);
    const auto want = oracle::maximum_independent_sets(g);
    REQUIRE(got.alpha == want.alpha);
    REQUIRE(got.eta == want.eta);
    REQUIRE(got.eta_per_cell == want.eta_i);
    std::uint64_t sum = 0;
    for (auto v : got.eta_per_cell)
    {
      CHECK(v <= got.eta);
      sum += v;
    }
    CHECK(sum == got.alpha * got.eta);
    CHECK(got.alpha >= 1);
  }
}

TEST_CASE("restrict")
{
  const auto g = path_graph(3);
  const std::vector<std::size_t> ends{0, 2};
  const auto r = restrict(g, std::span<const std::size_t>(ends));
  CHECK(r.size() == 2);
  CHECK(r.edge_count() == 0);
  CHECK(r.labels() == std::vector<int>{1, 3});
  CHECK(restrict(g, CellMask{0}).size() == 0);
  CHECK(restrict(g, g.all_cells()) == g);
  const std::vector<std::size_t> bad{0, 5};
  CHECK_THROWS_AS(restrict(g, std::span<const std::size_t>(bad)), ValidationError);

  SplitMix64 rng(3);
  for (int trial = 0; trial < 50; ++trial)
  {
    const auto g2 = oracle::random_graph(rng, 9, 0.4);
    const CellMask sub = rng() & g2.all_cells();
    const auto r2 = restrict(g2, sub);
    const auto idx = members(sub);
    for (const auto& [a, b] : r2.edges())
      CHECK(g2.adjacent(idx[a], idx[b]));
    CHECK(r2.edge_count() <= g2.edge_count());
  }
}

TEST_CASE("graph construction and export")
{
  ContentionGraph g(3);
  CHECK_THROWS_AS(g.add_edge(1, 1), ValidationError);
  CHECK_THROWS_AS(g.add_edge(0, 3), ValidationError);
  g.add_edge(0, 1);
  g.add_edge(1, 0);
  CHECK(g.edge_count() == 1);
  CHECK(g.neighbors(1) == std::vector<std::size_t>{0});
  const auto p = path_graph(3);
  CHECK(to_adjacency_list(p) == "1: 2\n2: 1 3\n3: 2\n");
  CHECK(to_dot(p, "g") == "graph g {\n  1;\n  2;\n  3;\n  1 -- 2;\n  2 -- 3;\n}\n");
}

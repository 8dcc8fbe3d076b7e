#include "cellwlan/topology.hpp"

#include "cellwlan/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace cellwlan {

double distance(const Point& a, const Point& b)
{
  return std::hypot(a.x - b.x, a.y - b.y);
}

void Deployment::validate() const
{
  if (cells.empty())
    throw ValidationError("deployment.cells", "at least one cell is required");
  if (!(carrier_sense_range > 0.0) || !std::isfinite(carrier_sense_range))
    throw ValidationError("deployment.carrier_sense_range_m", "must be a positive number");
  if (num_channels < 1)
    throw ValidationError("deployment.num_channels", "must be >= 1");

  std::set<int> seen;
  for (std::size_t k = 0; k < cells.size(); ++k)
  {
    const auto& c = cells[k];
    const std::string where = "deployment.cells[" + std::to_string(k) + "]";
    if (c.id < 1)
      throw ValidationError(where + ".id", "cell ids must be positive");
    if (!seen.insert(c.id).second)
      throw ValidationError(where + ".id", "duplicate cell id " + std::to_string(c.id));
    if (c.channel < 1 || c.channel > num_channels)
      throw ValidationError(where + ".channel",
                            "channel " + std::to_string(c.channel) + " outside 1.." + std::to_string(num_channels));
    if (!(c.radius >= 0.0) || !std::isfinite(c.radius))
      throw ValidationError(where + ".radius_m", "must be >= 0");
    if (!std::isfinite(c.ap_position.x) || !std::isfinite(c.ap_position.y))
      throw ValidationError(where, "AP coordinates must be finite");
    if (c.node_count < 1)
      throw ValidationError(where + ".node_count", "must be >= 1");
  }
}

// ---------------------------------------------------------------------------
// ContentionGraph

ContentionGraph::ContentionGraph(std::size_t n) : labels_(n), neighbors_(n)
{
  std::iota(labels_.begin(), labels_.end(), 1);
}

ContentionGraph::ContentionGraph(std::size_t n, std::vector<int> labels)
  : labels_(std::move(labels)), neighbors_(n)
{
  if (labels_.size() != n)
    throw ValidationError("labels", "expected " + std::to_string(n) + " labels");
}

ContentionGraph ContentionGraph::from_edges(std::size_t n,
                                            std::span<const std::pair<std::size_t, std::size_t>> edges)
{
  ContentionGraph g(n);
  for (const auto& [i, j] : edges)
    g.add_edge(i, j);
  return g;
}

void ContentionGraph::add_edge(std::size_t i, std::size_t j)
{
  if (i >= size() || j >= size())
    throw ValidationError("edge", "endpoint out of range");
  if (i == j)
    throw ValidationError("edge", "self-loops are not allowed");
  auto insert_sorted = [](std::vector<std::size_t>& v, std::size_t x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it == v.end() || *it != x)
      v.insert(it, x);
  };
  insert_sorted(neighbors_[i], j);
  insert_sorted(neighbors_[j], i);
}

bool ContentionGraph::adjacent(std::size_t i, std::size_t j) const
{
  const auto& n = neighbors_.at(i);
  return std::binary_search(n.begin(), n.end(), j);
}

std::size_t ContentionGraph::edge_count() const
{
  std::size_t twice = 0;
  for (const auto& n : neighbors_)
    twice += n.size();
  return twice / 2;
}

std::vector<std::pair<std::size_t, std::size_t>> ContentionGraph::edges() const
{
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j : neighbors_[i])
      if (i < j)
        out.emplace_back(i, j);
  return out;
}

CellMask ContentionGraph::neighbor_mask(std::size_t i) const
{
  if (size() > kMaxEnumerableCells)
    throw StateSpaceTooLarge(0, "graph has more than 64 cells; bitmask views are unavailable");
  CellMask m = 0;
  for (std::size_t j : neighbors_.at(i))
    m |= CellMask{1} << j;
  return m;
}

CellMask ContentionGraph::all_cells() const
{
  if (size() > kMaxEnumerableCells)
    throw StateSpaceTooLarge(0, "graph has more than 64 cells; bitmask views are unavailable");
  return size() == 64 ? ~CellMask{0} : (CellMask{1} << size()) - 1;
}

ContentionGraph path_graph(std::size_t n)
{
  ContentionGraph g(n);
  for (std::size_t i = 0; i + 1 < n; ++i)
    g.add_edge(i, i + 1);
  return g;
}

ContentionGraph complete_graph(std::size_t n)
{
  ContentionGraph g(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      g.add_edge(i, j);
  return g;
}

ContentionGraph edgeless_graph(std::size_t n)
{
  return ContentionGraph(n);
}

ContentionGraph build_contention_graph(const Deployment& d)
{
  std::vector<int> labels;
  labels.reserve(d.cells.size());
  for (const auto& c : d.cells)
    labels.push_back(c.id);
  ContentionGraph g(d.cells.size(), std::move(labels));
  for (std::size_t i = 0; i < d.cells.size(); ++i)
    for (std::size_t j = i + 1; j < d.cells.size(); ++j)
    {
      const auto& a = d.cells[i];
      const auto& b = d.cells[j];
      if (a.channel == b.channel && distance(a.ap_position, b.ap_position) < d.carrier_sense_range)
        g.add_edge(i, j);
    }
  return g;
}

// ---------------------------------------------------------------------------
// PBD

PairRelation classify_pair(const CellGeom& a, const CellGeom& b, double carrier_sense_range)
{
  if (a.channel != b.channel)
    return PairRelation::Independent;
  const double d = distance(a.ap_position, b.ap_position);
  // Farthest node pair is at most d + Ra + Rb apart, nearest at least d - Ra - Rb.
  if (d + a.radius + b.radius < carrier_sense_range)
    return PairRelation::CompletelyDependent;
  if (d - a.radius - b.radius >= carrier_sense_range)
    return PairRelation::Independent;
  return PairRelation::Violation;
}

PbdReport check_pbd(const Deployment& d)
{
  PbdReport report;
  for (std::size_t i = 0; i < d.cells.size(); ++i)
    for (std::size_t j = i + 1; j < d.cells.size(); ++j)
    {
      const auto& a = d.cells[i];
      const auto& b = d.cells[j];
      if (classify_pair(a, b, d.carrier_sense_range) == PairRelation::Violation)
        report.violations.push_back({a.id, b.id, distance(a.ap_position, b.ap_position)});
    }
  report.pass = report.violations.empty();
  return report;
}

// ---------------------------------------------------------------------------
// Independent sets

std::vector<std::size_t> members(CellMask mask)
{
  std::vector<std::size_t> out;
  out.reserve(static_cast<std::size_t>(std::popcount(mask)));
  while (mask)
  {
    out.push_back(static_cast<std::size_t>(std::countr_zero(mask)));
    mask &= mask - 1;
  }
  return out;
}

CellMask mask_of(std::span<const std::size_t> cells)
{
  CellMask m = 0;
  for (std::size_t c : cells)
  {
    if (c >= kMaxEnumerableCells)
      throw ValidationError("cells", "cell index " + std::to_string(c) + " exceeds bitmask width");
    m |= CellMask{1} << c;
  }
  return m;
}

namespace {

std::vector<CellMask> neighbor_masks(const ContentionGraph& g)
{
  if (g.size() > kMaxEnumerableCells)
    throw StateSpaceTooLarge(0, "independent-set enumeration supports at most 64 cells, graph has "
                                    + std::to_string(g.size()));
  std::vector<CellMask> nm(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    nm[i] = g.neighbor_mask(i);
  return nm;
}

CellState partition_with(const std::vector<CellMask>& nm, CellMask all, CellMask active)
{
  CellMask reach = 0;
  for (CellMask a = active; a; a &= a - 1)
    reach |= nm[static_cast<std::size_t>(std::countr_zero(a))];
  CellState s;
  s.active = active;
  s.blocked = reach & ~active;
  s.backoff = all & ~active & ~s.blocked;
  return s;
}

// Depth-first walk over independent sets in lexicographic order: every set
// is visited before its extensions by larger vertices. `visit` returns false
// to stop descending.
template <typename Visit>
void walk_independent_sets(const std::vector<CellMask>& nm, CellMask current, std::size_t next,
                           CellMask forbidden, Visit& visit)
{
  if (!visit(current, next, forbidden))
    return;
  for (std::size_t v = next; v < nm.size(); ++v)
  {
    const CellMask bit = CellMask{1} << v;
    if (forbidden & bit)
      continue;
    walk_independent_sets(nm, current | bit, v + 1, forbidden | bit | nm[v], visit);
  }
}

std::string cap_message(std::size_t cap)
{
  return "independent-set state space exceeds the cap of " + std::to_string(cap) + " states";
}

} // namespace

CellState partition_state(const ContentionGraph& g, CellMask active)
{
  const auto nm = neighbor_masks(g);
  const CellMask all = g.all_cells();
  if (active & ~all)
    throw ValidationError("state", "contains cells outside the graph");
  for (CellMask a = active; a; a &= a - 1)
    if (nm[static_cast<std::size_t>(std::countr_zero(a))] & active)
      throw ValidationError("state", "not an independent set");
  return partition_with(nm, all, active);
}

StateSpace::StateSpace(const ContentionGraph& g, std::vector<CellState> states)
  : states_(std::move(states)), neighbor_masks_(neighbor_masks(g))
{
  index_.reserve(states_.size());
  for (std::size_t k = 0; k < states_.size(); ++k)
    index_.emplace(states_[k].active, k);
}

std::size_t StateSpace::index_of(CellMask active) const
{
  auto it = index_.find(active);
  return it == index_.end() ? npos : it->second;
}

StateSpace enumerate_independent_sets(const ContentionGraph& g, std::size_t cap)
{
  const auto nm = neighbor_masks(g);
  const CellMask all = g.all_cells();
  std::vector<CellState> states;
  auto visit = [&](CellMask current, std::size_t, CellMask) {
    if (states.size() >= cap)
      throw StateSpaceTooLarge(cap, cap_message(cap));
    states.push_back(partition_with(nm, all, current));
    return true;
  };
  walk_independent_sets(nm, 0, 0, 0, visit);
  return StateSpace(g, std::move(states));
}

MisStats mis_stats(const ContentionGraph& g, std::size_t cap)
{
  const auto nm = neighbor_masks(g);
  const std::size_t n = g.size();
  MisStats out;
  out.eta_per_cell.assign(n, 0);
  std::size_t visited = 0;
  std::size_t best = 0;
  std::uint64_t count = 0;
  std::vector<std::uint64_t> per_cell(n, 0);

  auto visit = [&](CellMask current, std::size_t next, CellMask forbidden) {
    if (++visited > cap)
      throw StateSpaceTooLarge(cap, cap_message(cap));
    const auto size = static_cast<std::size_t>(std::popcount(current));
    // Bound: even taking every remaining allowed vertex cannot reach `best`.
    const CellMask tail = next >= 64 ? 0 : (~CellMask{0} << next);
    const auto room = static_cast<std::size_t>(std::popcount(tail & ~forbidden & g.all_cells()));
    if (size + room < best)
      return false;
    if (size > best)
    {
      best = size;
      count = 0;
      std::fill(per_cell.begin(), per_cell.end(), 0);
    }
    if (size == best)
    {
      ++count;
      for (CellMask m = current; m; m &= m - 1)
        ++per_cell[static_cast<std::size_t>(std::countr_zero(m))];
    }
    return true;
  };
  walk_independent_sets(nm, 0, 0, 0, visit);
  out.alpha = best;
  out.eta = count;
  out.eta_per_cell = std::move(per_cell);
  return out;
}

ContentionGraph restrict(const ContentionGraph& g, std::span<const std::size_t> cells)
{
  std::vector<std::size_t> keep(cells.begin(), cells.end());
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  for (std::size_t c : keep)
    if (c >= g.size())
      throw ValidationError("subset", "cell index " + std::to_string(c) + " out of range");

  std::vector<int> labels;
  labels.reserve(keep.size());
  for (std::size_t c : keep)
    labels.push_back(g.label(c));
  ContentionGraph out(keep.size(), std::move(labels));
  for (std::size_t a = 0; a < keep.size(); ++a)
    for (std::size_t b = a + 1; b < keep.size(); ++b)
      if (g.adjacent(keep[a], keep[b]))
        out.add_edge(a, b);
  return out;
}

ContentionGraph restrict(const ContentionGraph& g, CellMask cells)
{
  const auto list = members(cells);
  return restrict(g, std::span<const std::size_t>(list));
}

std::string to_adjacency_list(const ContentionGraph& g)
{
  std::ostringstream os;
  for (std::size_t i = 0; i < g.size(); ++i)
  {
    os << g.label(i) << ':';
    for (std::size_t j : g.neighbors(i))
      os << ' ' << g.label(j);
    os << '\n';
  }
  return os.str();
}

std::string to_dot(const ContentionGraph& g, const std::string& name)
{
  std::ostringstream os;
  os << "graph " << name << " {\n";
  for (std::size_t i = 0; i < g.size(); ++i)
    os << "  " << g.label(i) << ";\n";
  for (const auto& [i, j] : g.edges())
    os << "  " << g.label(i) << " -- " << g.label(j) << ";\n";
  os << "}\n";
  return os.str();
}

} // namespace cellwlan

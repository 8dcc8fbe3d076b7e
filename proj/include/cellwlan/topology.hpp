#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace cellwlan {

// Bit i set <=> cell i (0-based local index) is a member.
using CellMask = std::uint64_t;

// State-space enumeration works on bitmasks, so it is limited to graphs of
// at most this many cells. Graph construction itself has no such limit.
inline constexpr std::size_t kMaxEnumerableCells = 64;
inline constexpr std::size_t kDefaultStateCap = std::size_t{1} << 20;

struct Point
{
  double x = 0.0;
  double y = 0.0;
};

double distance(const Point& a, const Point& b);

struct CellGeom
{
  int id = 0;          // user-facing, 1..N
  Point ap_position;   // meters
  double radius = 0.0; // max AP-STA distance, meters
  int channel = 1;     // 1..M
  int node_count = 2;  // AP plus STAs
};

struct Deployment
{
  std::vector<CellGeom> cells;
  double carrier_sense_range = 0.0; // meters
  int num_channels = 1;

  // Throws ValidationError naming the offending field.
  void validate() const;
};

// Cell-level conflict graph. Vertices are local indices 0..size()-1; each
// carries a label (the original cell id) so restrictions stay traceable.
class ContentionGraph
{
public:
  ContentionGraph() = default;
  explicit ContentionGraph(std::size_t n);
  ContentionGraph(std::size_t n, std::vector<int> labels);

  // Edges are given as 0-based local index pairs.
  static ContentionGraph from_edges(std::size_t n, std::span<const std::pair<std::size_t, std::size_t>> edges);

  std::size_t size() const noexcept { return neighbors_.size(); }
  bool empty() const noexcept { return neighbors_.empty(); }

  void add_edge(std::size_t i, std::size_t j);
  bool adjacent(std::size_t i, std::size_t j) const;
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return neighbors_.at(i); }
  std::size_t edge_count() const;
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;

  // Requires size() <= kMaxEnumerableCells.
  CellMask neighbor_mask(std::size_t i) const;
  CellMask all_cells() const;

  int label(std::size_t i) const { return labels_.at(i); }
  const std::vector<int>& labels() const noexcept { return labels_; }

  bool operator==(const ContentionGraph& other) const = default;

private:
  std::vector<int> labels_;
  std::vector<std::vector<std::size_t>> neighbors_; // sorted ascending
};

ContentionGraph path_graph(std::size_t n);
ContentionGraph complete_graph(std::size_t n);
ContentionGraph edgeless_graph(std::size_t n);

// Edge (i,j) iff same channel and AP distance strictly below the carrier
// sensing range. Labels are the deployment's cell ids.
ContentionGraph build_contention_graph(const Deployment& d);

enum class PairRelation
{
  Independent,
  CompletelyDependent,
  Violation,
};

struct PbdViolation
{
  int cell_a = 0;
  int cell_b = 0;
  double ap_distance = 0.0;
};

struct PbdReport
{
  bool pass = true;
  std::vector<PbdViolation> violations;
};

// Disc test for one co-channel pair; cells on different channels are always
// independent.
PairRelation classify_pair(const CellGeom& a, const CellGeom& b, double carrier_sense_range);
PbdReport check_pbd(const Deployment& d);

std::vector<std::size_t> members(CellMask mask);
CellMask mask_of(std::span<const std::size_t> cells);

// One CTMC state: transmitting set plus the induced blocked / backoff sets.
struct CellState
{
  CellMask active = 0;
  CellMask blocked = 0;
  CellMask backoff = 0;
};

// Rejects sets that are not independent in g.
CellState partition_state(const ContentionGraph& g, CellMask active);

// All independent sets of a graph in lexicographic order of their sorted
// member lists (so the empty state is always index 0).
class StateSpace
{
public:
  StateSpace() = default;
  StateSpace(const ContentionGraph& g, std::vector<CellState> states);

  std::size_t n_cells() const noexcept { return neighbor_masks_.size(); }
  std::size_t size() const noexcept { return states_.size(); }
  const std::vector<CellState>& states() const noexcept { return states_; }
  const CellState& operator[](std::size_t k) const { return states_[k]; }
  std::size_t empty_index() const noexcept { return 0; }
  CellMask neighbor_mask(std::size_t i) const { return neighbor_masks_.at(i); }

  // Index of the state whose transmitting set is `active`; npos if absent.
  std::size_t index_of(CellMask active) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
  std::vector<CellState> states_;
  std::vector<CellMask> neighbor_masks_;
  std::unordered_map<CellMask, std::size_t> index_;
};

StateSpace enumerate_independent_sets(const ContentionGraph& g, std::size_t cap = kDefaultStateCap);

struct MisStats
{
  std::size_t alpha = 0;                   // independence number
  std::uint64_t eta = 0;                   // number of maximum independent sets
  std::vector<std::uint64_t> eta_per_cell; // how many of them contain each cell
};

MisStats mis_stats(const ContentionGraph& g, std::size_t cap = kDefaultStateCap);

// Induced subgraph on `cells` (local indices of g, any order; result keeps
// ascending order). Labels are carried over.
ContentionGraph restrict(const ContentionGraph& g, std::span<const std::size_t> cells);
ContentionGraph restrict(const ContentionGraph& g, CellMask cells);

// "label: label label ..." per line, one line per cell.
std::string to_adjacency_list(const ContentionGraph& g);
std::string to_dot(const ContentionGraph& g, const std::string& name = "contention");

} // namespace cellwlan

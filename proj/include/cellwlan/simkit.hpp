#pragma once

#include "cellwlan/topology.hpp"

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace cellwlan {

struct CtmcParams
{
  std::uint64_t seed = 1;
  std::uint64_t transitions = 10'000'000;
};

struct CtmcRun
{
  std::uint64_t seed = 0;
  std::uint64_t transitions = 0;
  double total_time = 0.0;
  std::vector<double> empirical_pi; // occupancy-time fraction, indexed like the state space
  std::vector<double> empirical_x;  // per-cell fraction of time not blocked
};

// Trajectory of the cell-level chain: from state A, each backoff cell j
// activates at rate lambda_j and each active cell i leaves at rate mu_i.
CtmcRun simulate_ctmc(const StateSpace& ss, std::span<const double> lambda, std::span<const double> mu,
                      const CtmcParams& params = {});

double total_variation(std::span<const double> p, std::span<const double> q);

struct SlottedParams
{
  std::uint64_t seed = 1;
  std::uint64_t horizon_slots = 10'000'000;
  double slot_time = 20e-6; // seconds, only used to scale throughput
};

struct SlottedRun
{
  std::uint64_t seed = 0;
  std::uint64_t horizon_slots = 0;
  std::vector<std::uint64_t> attempts;      // A_i, node attempts
  std::vector<std::uint64_t> collisions;    // C_i, attempts that collided
  std::vector<std::uint64_t> successes;     // successful transmissions
  std::vector<std::uint64_t> backoff_slots; // slots cell i spent in backoff
  std::vector<std::uint64_t> unblocked_slots;
  // B_i^A: backoff slots of cell i while the transmitting set was A.
  std::unordered_map<CellMask, std::vector<std::uint64_t>> backoff_slots_by_state;
  std::vector<double> empirical_gamma;           // C_i / A_i, 0 when no attempts
  std::vector<double> empirical_throughput_pkts; // successes per second
  std::vector<double> empirical_x;
  std::uint64_t exclusion_violations = 0; // slots with two neighbours both succeeding
};

// Slot-synchronous cell abstraction. Holds are whole slot counts; the slot in
// which a transmission starts is the first slot of its hold.
SlottedRun simulate_slotted(const ContentionGraph& g, std::span<const int> node_counts, std::span<const double> beta,
                            std::uint32_t success_slots, std::uint32_t collision_slots,
                            const SlottedParams& params = {});

} // namespace cellwlan

#pragma once

#include "cellwlan/multicell.hpp"
#include "cellwlan/topology.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace cellwlan {

// Model1: capacity split by the number of busy neighbours.
// Model2: infinite-access-intensity share on the graph of busy cells.
enum class ServiceModel
{
  Model1,
  Model2,
};

std::string_view to_string(ServiceModel m);

struct FlowParams
{
  std::vector<double> arrival_rates; // nu_i, flows/s
  double mean_flow_size = 0.0;       // E[V], bits of application data
  double single_cell_rate = 0.0;     // Theta, bit/s of application data
  ServiceModel service_model = ServiceModel::Model2;

  void validate(std::size_t cells) const;
  double mean_service_time() const { return mean_flow_size / single_cell_rate; }
};

struct NetworkState
{
  std::vector<std::uint64_t> counts; // z_i, ongoing flows per cell

  CellMask nonempty() const;
};

std::vector<double> service_rates_model1(const NetworkState& z, const ContentionGraph& g, double theta);
std::vector<double> service_rates_model2(const NetworkState& z, const ContentionGraph& g, double theta);

// Same rates keyed only by which cells are non-empty.
std::vector<double> service_rates(ServiceModel model, const ContentionGraph& g, CellMask nonempty, double theta);

struct SimConfig
{
  std::uint64_t seed = 1;
  std::size_t flows_per_cell = 10000; // arrivals per cell whose delays are considered
  std::size_t warmup_flows = 1000;    // leading arrivals per cell that are discarded
  int replications = 20;
  std::size_t runaway_threshold = 100000; // z_i above this marks the cell unstable
  bool check_conservation = false;        // verify work conservation at every event

  void validate() const;
};

struct ReplicationResult
{
  std::vector<double> mean_delay;      // per cell, over measured flows; 0 when none
  std::vector<std::size_t> completed;  // measured flows completed per cell
  std::vector<bool> runaway;           // cell exceeded the runaway threshold
  std::size_t events = 0;
  double end_time = 0.0;
  double max_conservation_error = 0.0; // relative; only tracked when requested
};

struct DelayResult
{
  std::vector<bool> active;                     // nu_i > 0
  std::vector<bool> stable;
  std::vector<std::optional<double>> mean_delay; // seconds; absent for inactive or unstable cells
  std::vector<double> confidence_halfwidth;      // 95%, across replications
  std::vector<double> effective_rates;           // x_hat, analytic path only
};

// One event-driven run of the processor-sharing network.
ReplicationResult simulate_flow_replication(const ContentionGraph& g, const FlowParams& fp, const SimConfig& sc,
                                            std::uint64_t stream_seed);

DelayResult simulate_flow_network(const ContentionGraph& g, const FlowParams& fp, const SimConfig& sc);

// Subset sums run over 2^(N-1) terms per cell.
inline constexpr std::size_t kMaxEffectiveRateCells = 20;

struct EffectiveRates
{
  std::vector<double> x_hat;
  double residual = 0.0;
  int iterations = 0;
};

// Uses tolerance, damping and max_iterations from cfg.
EffectiveRates effective_rate_fixed_point(const ContentionGraph& g, const FlowParams& fp,
                                          const FixedPointConfig& cfg = {});

// One right-hand-side evaluation of the effective-rate equation; exposed for
// checking a candidate x_hat.
std::vector<double> effective_rate_map(const ContentionGraph& g, const FlowParams& fp, std::span<const double> x_hat);

DelayResult mean_delay_analytic(std::span<const double> x_hat, const FlowParams& fp);

} // namespace cellwlan

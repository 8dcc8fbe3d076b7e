#pragma once

#include "cellwlan/dcf.hpp"
#include "cellwlan/topology.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cellwlan {

struct MulticellInput
{
  ContentionGraph graph;
  std::vector<int> node_counts; // n_i, one per cell
  MacPhyParams mac_phy;
  BackoffParams backoff;

  void validate() const;
};

struct FixedPointConfig
{
  double tolerance = 1e-8; // sup-norm of G(Gamma(beta)) - beta
  double damping = 0.5;    // weight on the new iterate, (0, 1]
  int max_iterations = 5000;
  std::vector<double> initial_beta; // empty: 1/b_0 for every cell
  int restarts = 3;                 // random restarts for the uniqueness check; 0 disables
  std::uint64_t seed = 1;           // drives the restart starting points
  std::size_t state_cap = kDefaultStateCap;

  void validate() const;
};

struct MulticellSolution
{
  std::vector<double> beta;
  std::vector<double> gamma;
  std::vector<double> lambda; // activation rate, 1/s
  std::vector<double> mu;     // deactivation rate, 1/s
  std::vector<double> rho;    // access intensity lambda/mu
  std::vector<double> pi;     // over StateSpace order
  std::vector<double> x;      // fraction of time not blocked
  std::vector<double> single_cell_throughput_pkts;
  std::vector<double> cell_throughput_pkts;
  std::vector<double> per_node_throughput_pkts;
  double normalized_network_throughput = 0.0;
  double residual = 0.0;
  int iterations = 0;
  // Largest sup-norm distance between this solution and any restart.
  double restart_spread = 0.0;
  bool unique = true;
};

// lambda_i = (1 - (1 - beta_i)^n_i) / sigma.
double activation_rate(double beta, int n, double slot_time);

// Probability a transmission in the cell is a success (no intra-cell collision).
double cell_success_probability(double beta, int n);

// 1/mu_i = p_succ T_s + (1 - p_succ) T_c. Rejects beta == 0.
double mean_activity_time(double beta, int n, const FrameTimes& t);

// Product form, normalized; evaluated in log space.
std::vector<double> stationary_distribution(const StateSpace& ss, std::span<const double> rho);

// Collision probability seen by a cell-`cell` node attempting in state `state`.
// Throws ValidationError unless the cell is in backoff there.
double per_state_collision(const StateSpace& ss, std::size_t state, std::size_t cell,
                           std::span<const double> beta, std::span<const int> n);

// Backoff-time weighted average of per_state_collision.
std::vector<double> collision_probability(const StateSpace& ss, std::span<const double> pi,
                                          std::span<const double> beta, std::span<const int> n);

std::vector<double> unblocked_fraction(const StateSpace& ss, std::span<const double> pi);

MulticellSolution solve_fixed_point(const MulticellInput& input, const FixedPointConfig& cfg = {});

struct CellThroughputs
{
  std::vector<double> cell_pkts;     // Theta_i
  std::vector<double> per_node_pkts; // theta_i = Theta_i / n_i
};

CellThroughputs saturation_throughputs(std::span<const double> x, std::span<const double> single_cell_base,
                                       std::span<const int> n);

struct TcpLongInput
{
  ContentionGraph graph;
  MacPhyParams mac_phy; // payload_size is ignored; the TCP sizes below are used
  BackoffParams backoff;
  double tcp_data_size = 0.0; // bits, MAC data unit carrying TCP DATA (incl. IP header)
  double tcp_ack_size = 0.0;  // bits, MAC data unit carrying a TCP ACK

  void validate() const;
};

struct TcpLongResult
{
  MulticellSolution solution;              // equivalent saturated model, n_i = 2
  double single_cell_ap_throughput = 0.0;  // packets/s, Theta_2 / 2
  std::vector<double> ap_throughput_pkts;  // x_i * single_cell_ap_throughput
};

TcpLongResult tcp_long_throughputs(const TcpLongInput& input, const FixedPointConfig& cfg = {});

struct InfiniteRhoResult
{
  MisStats stats;
  std::vector<double> x;                     // eta_i / eta
  double normalized_network_throughput = 0.0; // sum x_i == alpha
};

InfiniteRhoResult infinite_rho_x(const ContentionGraph& g, std::size_t cap = kDefaultStateCap);

struct SweepPoint
{
  double payload_size = 0.0; // bits
  bool ok = false;
  std::string error;
  std::vector<double> rho;
  std::vector<double> x;
  MulticellSolution solution;
};

// Solves the fixed point once per payload; failures are recorded per point.
std::vector<SweepPoint> payload_sweep(const MulticellInput& input, std::span<const double> payloads,
                                      const FixedPointConfig& cfg = {});

} // namespace cellwlan

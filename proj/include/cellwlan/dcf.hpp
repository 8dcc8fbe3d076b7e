#pragma once

#include <string_view>
#include <vector>

namespace cellwlan {

enum class AccessMode
{
  Basic,
  RtsCts,
};

// MAC/PHY timing. All durations in seconds, sizes in bits, rates in bit/s.
struct MacPhyParams
{
  double slot_time = 20e-6;
  double sifs = 10e-6;
  double difs = 50e-6;
  double phy_mac_overhead_time = 192e-6; // per-frame preamble + headers
  double data_rate = 11e6;
  double control_rate = 11e6;
  double ack_size = 112;
  double payload_size = 8000;
  AccessMode access_mode = AccessMode::Basic;
  double rts_size = 160;
  double cts_size = 112;

  void validate() const;

  // 802.11b DSSS, 11 Mbit/s data and control rates, long preamble.
  static MacPhyParams dot11b_11mbps(double payload_bits = 8000);
};

// Returns false for unknown names.
bool mac_phy_preset(std::string_view name, MacPhyParams& out);

struct BackoffParams
{
  int retry_limit = 7;
  std::vector<double> mean_backoffs; // b_0..b_K, in backoff slots

  void validate() const;
};

// b_k = (min(2^k cw_min, cw_max) - 1) / 2, k = 0..K.
BackoffParams mean_backoffs(int cw_min, int cw_max, int retry_limit);

// G(gamma) = (1 + gamma + ... + gamma^K) / (b_0 + gamma b_1 + ... + gamma^K b_K).
double attempt_probability(double gamma, const BackoffParams& b);

struct FrameTimes
{
  double success = 0.0;   // T_s: channel hold of a successful exchange incl. DIFS
  double collision = 0.0; // T_c: channel hold of a collided exchange incl. DIFS
};

FrameTimes frame_exchange_times(const MacPhyParams& p);

struct SlotFractions
{
  double idle = 0.0;
  double success = 0.0;
  double collision = 0.0;
};

struct SingleCellSolution
{
  double beta = 0.0;
  double gamma = 0.0;
  double throughput_pkts = 0.0;
  SlotFractions slot_fractions;
  int iterations = 0;
  double residual = 0.0;
};

struct SingleCellSolverConfig
{
  double damping = 0.5;
  double tolerance = 1e-10;
  int max_iterations = 10000;
};

// Slot decomposition for n nodes all attempting with probability beta.
SlotFractions slot_fractions(int n, double beta);

// Renewal-reward throughput in packets/s.
double saturation_throughput(int n, double beta, const FrameTimes& t, double slot_time);

// Isolated cell of n saturated nodes; throws ConvergenceError.
SingleCellSolution solve_single_cell(int n, const MacPhyParams& p, const BackoffParams& b,
                                     const SingleCellSolverConfig& cfg = {});

} // namespace cellwlan

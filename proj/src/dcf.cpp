#include "cellwlan/dcf.hpp"

#include "cellwlan/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cellwlan {

namespace {

void require_positive(double v, const char* field)
{
  if (!(v > 0.0) || !std::isfinite(v))
    throw ValidationError(std::string("mac_phy.") + field, "must be a positive number");
}

bool is_power_of_two(int v)
{
  return v > 0 && (v & (v - 1)) == 0;
}

} // namespace

void MacPhyParams::validate() const
{
  require_positive(slot_time, "slot_us");
  require_positive(sifs, "sifs_us");
  require_positive(difs, "difs_us");
  require_positive(phy_mac_overhead_time, "overhead_us");
  require_positive(data_rate, "data_rate_bps");
  require_positive(control_rate, "control_rate_bps");
  require_positive(ack_size, "ack_bytes");
  require_positive(payload_size, "payload_bytes");
  if (access_mode == AccessMode::RtsCts)
  {
    require_positive(rts_size, "rts_bytes");
    require_positive(cts_size, "cts_bytes");
  }
}

MacPhyParams MacPhyParams::dot11b_11mbps(double payload_bits)
{
  MacPhyParams p;
  p.payload_size = payload_bits;
  return p;
}

bool mac_phy_preset(std::string_view name, MacPhyParams& out)
{
  if (name == "dot11b-11mbps")
  {
    out = MacPhyParams::dot11b_11mbps();
    return true;
  }
  return false;
}

void BackoffParams::validate() const
{
  if (retry_limit < 0)
    throw ValidationError("backoff.retry_limit", "must be >= 0");
  if (mean_backoffs.size() != static_cast<std::size_t>(retry_limit) + 1)
    throw ValidationError("backoff.mean_backoffs", "expected retry_limit + 1 entries");
  for (double b : mean_backoffs)
    if (!(b > 0.0) || !std::isfinite(b))
      throw ValidationError("backoff.mean_backoffs", "every mean backoff must be positive");
}

BackoffParams mean_backoffs(int cw_min, int cw_max, int retry_limit)
{
  if (retry_limit < 0)
    throw ValidationError("backoff.retry_limit", "must be >= 0");
  if (!is_power_of_two(cw_min) || !is_power_of_two(cw_max))
    throw ValidationError("backoff.cw_min", "contention windows must be powers of two");
  if (cw_min > cw_max)
    throw ValidationError("backoff.cw_min", "cw_min exceeds cw_max");

  BackoffParams b;
  b.retry_limit = retry_limit;
  b.mean_backoffs.reserve(static_cast<std::size_t>(retry_limit) + 1);
  double cw = cw_min;
  for (int k = 0; k <= retry_limit; ++k)
  {
    b.mean_backoffs.push_back((std::min(cw, static_cast<double>(cw_max)) - 1.0) / 2.0);
    cw *= 2.0;
  }
  return b;
}

double attempt_probability(double gamma, const BackoffParams& b)
{
  double num = 0.0;
  double den = 0.0;
  double power = 1.0;
  for (double bk : b.mean_backoffs)
  {
    num += power;
    den += power * bk;
    power *= gamma;
  }
  return num / den;
}

FrameTimes frame_exchange_times(const MacPhyParams& p)
{
  const double oh = p.phy_mac_overhead_time;
  const double t_data = oh + p.payload_size / p.data_rate;
  const double t_ack = oh + p.ack_size / p.control_rate;
  FrameTimes t;
  if (p.access_mode == AccessMode::Basic)
  {
    t.success = t_data + p.sifs + t_ack + p.difs;
    t.collision = t_data + p.difs;
  }
  else
  {
    const double t_rts = oh + p.rts_size / p.control_rate;
    const double t_cts = oh + p.cts_size / p.control_rate;
    t.success = t_rts + p.sifs + t_cts + p.sifs + t_data + p.sifs + t_ack + p.difs;
    t.collision = t_rts + p.difs;
  }
  return t;
}

SlotFractions slot_fractions(int n, double beta)
{
  SlotFractions f;
  f.idle = std::pow(1.0 - beta, n);
  f.success = n * beta * std::pow(1.0 - beta, n - 1);
  f.collision = 1.0 - f.idle - f.success;
  return f;
}

double saturation_throughput(int n, double beta, const FrameTimes& t, double slot_time)
{
  const auto f = slot_fractions(n, beta);
  return f.success / (f.idle * slot_time + f.success * t.success + f.collision * t.collision);
}

SingleCellSolution solve_single_cell(int n, const MacPhyParams& p, const BackoffParams& b,
                                     const SingleCellSolverConfig& cfg)
{
  if (n < 1)
    throw ValidationError("node_count", "must be >= 1");
  p.validate();
  b.validate();

  auto collision = [n](double beta) { return 1.0 - std::pow(1.0 - beta, n - 1); };

  double beta = attempt_probability(0.0, b);
  double residual = 0.0;
  int it = 0;
  for (; it < cfg.max_iterations; ++it)
  {
    const double target = attempt_probability(collision(beta), b);
    residual = std::abs(target - beta);
    if (residual < cfg.tolerance)
      break;
    beta = (1.0 - cfg.damping) * beta + cfg.damping * target;
  }
  if (!(residual < cfg.tolerance))
    throw ConvergenceError("single-cell fixed point did not converge", residual, it);

  SingleCellSolution s;
  s.beta = beta;
  s.gamma = collision(beta);
  s.slot_fractions = slot_fractions(n, beta);
  s.throughput_pkts = saturation_throughput(n, beta, frame_exchange_times(p), p.slot_time);
  s.iterations = it;
  s.residual = residual;
  return s;
}

} // namespace cellwlan

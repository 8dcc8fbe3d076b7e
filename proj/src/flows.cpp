#include "cellwlan/flows.hpp"

#include "cellwlan/errors.hpp"
#include "cellwlan/rng.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <queue>
#include <unordered_map>

namespace cellwlan {

std::string_view to_string(ServiceModel m)
{
  return m == ServiceModel::Model1 ? "model1" : "model2";
}

void FlowParams::validate(std::size_t cells) const
{
  if (arrival_rates.size() != cells)
    throw ValidationError("traffic.arrival_rates", "expected one arrival rate per cell");
  for (std::size_t i = 0; i < cells; ++i)
    if (!(arrival_rates[i] >= 0.0) || !std::isfinite(arrival_rates[i]))
      throw ValidationError("traffic.arrival_rates[" + std::to_string(i) + "]", "must be >= 0");
  if (!(mean_flow_size > 0.0))
    throw ValidationError("traffic.mean_flow_size", "must be positive");
  if (!(single_cell_rate > 0.0))
    throw ValidationError("traffic.single_cell_rate", "must be positive");
}

CellMask NetworkState::nonempty() const
{
  if (counts.size() > kMaxEnumerableCells)
    throw ValidationError("state", "more than 64 cells");
  CellMask m = 0;
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (counts[i] > 0)
      m |= CellMask{1} << i;
  return m;
}

std::vector<double> service_rates(ServiceModel model, const ContentionGraph& g, CellMask nonempty, double theta)
{
  std::vector<double> rates(g.size(), 0.0);
  if (model == ServiceModel::Model1)
  {
    for (CellMask m = nonempty; m; m &= m - 1)
    {
      const auto i = static_cast<std::size_t>(std::countr_zero(m));
      const int busy = std::popcount(g.neighbor_mask(i) & nonempty);
      rates[i] = theta / (1.0 + busy);
    }
    return rates;
  }
  if (nonempty == 0)
    return rates;
  const auto busy = members(nonempty);
  const auto sub = restrict(g, std::span<const std::size_t>(busy));
  const auto stats = mis_stats(sub);
  for (std::size_t k = 0; k < busy.size(); ++k)
    rates[busy[k]] = theta * static_cast<double>(stats.eta_per_cell[k]) / static_cast<double>(stats.eta);
  return rates;
}

namespace {

void check_state(const NetworkState& z, const ContentionGraph& g)
{
  if (z.counts.size() != g.size())
    throw ValidationError("state", "expected one flow count per cell");
}

} // namespace

std::vector<double> service_rates_model1(const NetworkState& z, const ContentionGraph& g, double theta)
{
  check_state(z, g);
  return service_rates(ServiceModel::Model1, g, z.nonempty(), theta);
}

std::vector<double> service_rates_model2(const NetworkState& z, const ContentionGraph& g, double theta)
{
  check_state(z, g);
  return service_rates(ServiceModel::Model2, g, z.nonempty(), theta);
}

void SimConfig::validate() const
{
  if (flows_per_cell <= warmup_flows)
    throw ValidationError("sim.flows_per_cell", "must exceed sim.warmup_flows");
  if (replications < 1)
    throw ValidationError("sim.replications", "must be >= 1");
  if (runaway_threshold < 1)
    throw ValidationError("sim.runaway_threshold", "must be >= 1");
}

// ---------------------------------------------------------------------------
// Event-driven processor-sharing simulator
//
// Each cell keeps a virtual clock V_i: the service attained so far by every
// flow present in the cell (all flows in a PS queue receive the same rate).
// A flow arriving with size v finishes when V_i reaches V_i(arrival) + v, so
// the earliest finisher is the heap minimum. Rates only change at events.

namespace {

struct Flow
{
  double finish = 0.0; // virtual finishing tag
  double arrival = 0.0;
  double size = 0.0;
  bool measured = false;
};

struct LaterFinish
{
  bool operator()(const Flow& a, const Flow& b) const { return a.finish > b.finish; }
};

using FlowHeap = std::priority_queue<Flow, std::vector<Flow>, LaterFinish>;

class RateCache
{
public:
  RateCache(const ContentionGraph& g, ServiceModel model, double theta) : g_(g), model_(model), theta_(theta) {}

  const std::vector<double>& get(CellMask nonempty)
  {
    auto it = cache_.find(nonempty);
    if (it == cache_.end())
      it = cache_.emplace(nonempty, service_rates(model_, g_, nonempty, theta_)).first;
    return it->second;
  }

private:
  const ContentionGraph& g_;
  ServiceModel model_;
  double theta_;
  std::unordered_map<CellMask, std::vector<double>> cache_;
};

} // namespace

ReplicationResult simulate_flow_replication(const ContentionGraph& g, const FlowParams& fp, const SimConfig& sc,
                                            std::uint64_t stream_seed)
{
  const std::size_t n = g.size();
  fp.validate(n);
  sc.validate();
  if (n > kMaxEnumerableCells)
    throw ValidationError("graph", "flow simulation supports at most 64 cells");

  constexpr double inf = std::numeric_limits<double>::infinity();
  SplitMix64 rng(stream_seed);
  RateCache cache(g, fp.service_model, fp.single_cell_rate);

  std::vector<FlowHeap> queues(n);
  std::vector<double> clock(n, 0.0);
  std::vector<double> next_arrival(n, inf);
  std::vector<std::size_t> arrivals(n, 0);
  std::vector<double> delay_sum(n, 0.0);

  ReplicationResult out;
  out.mean_delay.assign(n, 0.0);
  out.completed.assign(n, 0);
  out.runaway.assign(n, false);

  const std::size_t measured_target = sc.flows_per_cell - sc.warmup_flows;
  std::size_t cells_pending = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (fp.arrival_rates[i] > 0.0)
    {
      next_arrival[i] = rng.exponential(fp.arrival_rates[i]);
      ++cells_pending;
    }

  // Conservation bookkeeping.
  double work_arrived = 0.0;
  double work_served = 0.0;

  CellMask busy = 0;
  const std::vector<double>* rates = &cache.get(busy);
  double now = 0.0;

  while (cells_pending > 0)
  {
    // Next event: earliest arrival or earliest departure.
    double t_next = inf;
    std::size_t who = 0;
    bool is_arrival = true;
    for (std::size_t i = 0; i < n; ++i)
    {
      if (next_arrival[i] < t_next)
      {
        t_next = next_arrival[i];
        who = i;
        is_arrival = true;
      }
      const double r = (*rates)[i];
      if (!queues[i].empty() && r > 0.0)
      {
        const double z = static_cast<double>(queues[i].size());
        const double t_dep = now + std::max(0.0, queues[i].top().finish - clock[i]) * z / r;
        if (t_dep < t_next)
        {
          t_next = t_dep;
          who = i;
          is_arrival = false;
        }
      }
    }
    if (t_next == inf)
      break; // nothing can ever happen again

    const double dt = t_next - now;
    for (std::size_t i = 0; i < n; ++i)
      if (!queues[i].empty() && (*rates)[i] > 0.0)
      {
        clock[i] += dt * (*rates)[i] / static_cast<double>(queues[i].size());
        work_served += dt * (*rates)[i];
      }
    now = t_next;
    ++out.events;

    if (is_arrival)
    {
      Flow f;
      f.size = rng.exponential(1.0 / fp.mean_flow_size);
      f.arrival = now;
      f.finish = clock[who] + f.size;
      f.measured = arrivals[who] >= sc.warmup_flows && arrivals[who] < sc.flows_per_cell;
      ++arrivals[who];
      work_arrived += f.size;
      queues[who].push(f);
      next_arrival[who] = now + rng.exponential(fp.arrival_rates[who]);
      if (queues[who].size() > sc.runaway_threshold)
      {
        // Saturated: stop feeding it and stop waiting on it. Its backlog stays
        // so neighbours keep seeing a busy cell while the others finish.
        out.runaway[who] = true;
        next_arrival[who] = inf;
        if (out.completed[who] < measured_target)
          --cells_pending;
      }
    }
    else
    {
      const Flow f = queues[who].top();
      queues[who].pop();
      // Snap the clock so float drift never leaves the next tag behind.
      clock[who] = std::max(clock[who], f.finish);
      if (f.measured)
      {
        delay_sum[who] += now - f.arrival;
        if (++out.completed[who] == measured_target && !out.runaway[who])
          --cells_pending;
      }
      if (queues[who].empty())
        clock[who] = 0.0;
    }

    CellMask now_busy = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (!queues[i].empty())
        now_busy |= CellMask{1} << i;
    if (now_busy != busy)
    {
      busy = now_busy;
      rates = &cache.get(busy);
    }

    if (sc.check_conservation)
    {
      double in_flight = 0.0;
      for (std::size_t i = 0; i < n; ++i)
      {
        auto copy = queues[i];
        while (!copy.empty())
        {
          in_flight += copy.top().finish - clock[i];
          copy.pop();
        }
      }
      // Arrived work is either served already or still in the queues.
      const double err = std::abs(work_arrived - work_served - in_flight) / std::max(work_arrived, 1e-300);
      out.max_conservation_error = std::max(out.max_conservation_error, err);
    }
  }

  out.end_time = now;
  for (std::size_t i = 0; i < n; ++i)
    if (out.completed[i] > 0)
      out.mean_delay[i] = delay_sum[i] / static_cast<double>(out.completed[i]);
  return out;
}

DelayResult simulate_flow_network(const ContentionGraph& g, const FlowParams& fp, const SimConfig& sc)
{
  const std::size_t n = g.size();
  fp.validate(n);
  sc.validate();

  DelayResult r;
  r.active.resize(n);
  r.stable.assign(n, true);
  r.mean_delay.assign(n, std::nullopt);
  r.confidence_halfwidth.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    r.active[i] = fp.arrival_rates[i] > 0.0;
  if (std::none_of(r.active.begin(), r.active.end(), [](bool a) { return a; }))
    return r;

  std::vector<std::vector<double>> samples(n);
  for (int rep = 0; rep < sc.replications; ++rep)
  {
    const auto seed = SplitMix64::stream(sc.seed, static_cast<std::uint64_t>(rep))();
    const auto run = simulate_flow_replication(g, fp, sc, seed);
    for (std::size_t i = 0; i < n; ++i)
    {
      if (!r.active[i])
        continue;
      if (run.runaway[i] || run.completed[i] < sc.flows_per_cell - sc.warmup_flows)
        r.stable[i] = false;
      else
        samples[i].push_back(run.mean_delay[i]);
    }
  }

  for (std::size_t i = 0; i < n; ++i)
  {
    if (!r.active[i] || !r.stable[i])
      continue;
    const auto& s = samples[i];
    double mean = 0.0;
    for (double v : s)
      mean += v;
    mean /= static_cast<double>(s.size());
    r.mean_delay[i] = mean;
    if (s.size() >= 2)
    {
      double ss = 0.0;
      for (double v : s)
        ss += (v - mean) * (v - mean);
      const double sd = std::sqrt(ss / static_cast<double>(s.size() - 1));
      boost::math::students_t dist(static_cast<double>(s.size() - 1));
      const double tq = boost::math::quantile(boost::math::complement(dist, 0.025));
      r.confidence_halfwidth[i] = tq * sd / std::sqrt(static_cast<double>(s.size()));
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Effective service rates

namespace {

// ratio(i, S) = eta_i(G[S + i]) / eta(G[S + i]) for every S among the other
// cells. S is stored compressed to N-1 bits (bit i squeezed out).
class ShareTable
{
public:
  explicit ShareTable(const ContentionGraph& g) : n_(g.size()), half_(std::size_t{1} << (n_ - 1))
  {
    table_.assign(n_ * half_, 0.0);
    const CellMask full = CellMask{1} << n_;
    for (CellMask t = 1; t < full; ++t)
    {
      const auto cells = members(t);
      const auto stats = mis_stats(restrict(g, std::span<const std::size_t>(cells)));
      for (std::size_t k = 0; k < cells.size(); ++k)
      {
        const std::size_t i = cells[k];
        table_[i * half_ + squeeze(t, i)] =
          static_cast<double>(stats.eta_per_cell[k]) / static_cast<double>(stats.eta);
      }
    }
  }

  static CellMask squeeze(CellMask t, std::size_t i)
  {
    const CellMask low = t & ((CellMask{1} << i) - 1);
    const CellMask high = (t >> (i + 1)) << i;
    return low | high;
  }

  double operator()(std::size_t i, CellMask compressed) const { return table_[i * half_ + compressed]; }
  std::size_t half() const { return half_; }

private:
  std::size_t n_;
  std::size_t half_;
  std::vector<double> table_;
};

std::vector<double> busy_probabilities(const FlowParams& fp, std::span<const double> x_hat)
{
  std::vector<double> p(x_hat.size());
  for (std::size_t j = 0; j < x_hat.size(); ++j)
  {
    const double offered = fp.arrival_rates[j] * fp.mean_flow_size;
    const double capacity = x_hat[j] * fp.single_cell_rate;
    p[j] = offered <= 0.0 ? 0.0 : (capacity <= 0.0 ? 1.0 : std::min(1.0, offered / capacity));
  }
  return p;
}

std::vector<double> apply_map(const ShareTable& table, const FlowParams& fp, std::span<const double> x_hat)
{
  const std::size_t n = x_hat.size();
  const auto p = busy_probabilities(fp, x_hat);
  std::vector<double> out(n, 0.0);
  std::vector<double> weight;
  for (std::size_t i = 0; i < n; ++i)
  {
    // Product-form probability of each busy subset of the other cells,
    // built one cell at a time in compressed bit order.
    weight.assign(1, 1.0);
    for (std::size_t j = 0; j < n; ++j)
    {
      if (j == i)
        continue;
      const std::size_t len = weight.size();
      weight.resize(2 * len);
      for (std::size_t s = 0; s < len; ++s)
      {
        weight[s + len] = weight[s] * p[j];
        weight[s] *= 1.0 - p[j];
      }
    }
    double acc = 0.0;
    for (std::size_t s = 0; s < weight.size(); ++s)
      if (weight[s] != 0.0)
        acc += weight[s] * table(i, static_cast<CellMask>(s));
    out[i] = acc;
  }
  return out;
}

void check_effective_rate_size(const ContentionGraph& g)
{
  if (g.empty())
    throw ValidationError("graph", "at least one cell is required");
  if (g.size() > kMaxEffectiveRateCells)
    throw StateSpaceTooLarge(std::size_t{1} << (kMaxEffectiveRateCells - 1),
                             "effective-rate subset sums support at most 20 cells");
}

} // namespace

std::vector<double> effective_rate_map(const ContentionGraph& g, const FlowParams& fp, std::span<const double> x_hat)
{
  check_effective_rate_size(g);
  fp.validate(g.size());
  if (x_hat.size() != g.size())
    throw ValidationError("x_hat", "expected one entry per cell");
  return apply_map(ShareTable(g), fp, x_hat);
}

EffectiveRates effective_rate_fixed_point(const ContentionGraph& g, const FlowParams& fp,
                                          const FixedPointConfig& cfg)
{
  check_effective_rate_size(g);
  fp.validate(g.size());
  cfg.validate();

  const ShareTable table(g);
  EffectiveRates r;
  r.x_hat.assign(g.size(), 1.0);
  r.residual = std::numeric_limits<double>::infinity();
  for (int it = 0; it < cfg.max_iterations; ++it)
  {
    const auto next = apply_map(table, fp, r.x_hat);
    double res = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i)
      res = std::max(res, std::abs(next[i] - r.x_hat[i]));
    r.residual = res;
    r.iterations = it;
    if (res < cfg.tolerance)
      return r;
    for (std::size_t i = 0; i < next.size(); ++i)
      r.x_hat[i] = (1.0 - cfg.damping) * r.x_hat[i] + cfg.damping * next[i];
  }
  throw ConvergenceError("effective-rate fixed point did not converge", r.residual, cfg.max_iterations);
}

DelayResult mean_delay_analytic(std::span<const double> x_hat, const FlowParams& fp)
{
  const std::size_t n = x_hat.size();
  fp.validate(n);
  DelayResult r;
  r.active.resize(n);
  r.stable.assign(n, true);
  r.mean_delay.assign(n, std::nullopt);
  r.confidence_halfwidth.assign(n, 0.0);
  r.effective_rates.assign(x_hat.begin(), x_hat.end());
  for (std::size_t i = 0; i < n; ++i)
  {
    r.active[i] = fp.arrival_rates[i] > 0.0;
    if (!r.active[i])
      continue;
    const double capacity = x_hat[i] * fp.single_cell_rate;
    const double offered = fp.arrival_rates[i] * fp.mean_flow_size;
    if (!(offered < capacity))
    {
      r.stable[i] = false;
      continue;
    }
    const double service = fp.mean_flow_size / capacity;
    r.mean_delay[i] = service / (1.0 - offered / capacity);
  }
  return r;
}

} // namespace cellwlan

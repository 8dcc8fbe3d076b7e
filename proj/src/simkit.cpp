#include "cellwlan/simkit.hpp"

#include "cellwlan/errors.hpp"
#include "cellwlan/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace cellwlan {

namespace {

struct Move
{
  std::size_t target;
  double rate;
};

} // namespace

CtmcRun simulate_ctmc(const StateSpace& ss, std::span<const double> lambda, std::span<const double> mu,
                      const CtmcParams& params)
{
  const std::size_t n = ss.n_cells();
  if (lambda.size() != n || mu.size() != n)
    throw ValidationError("rates", "expected one lambda and one mu per cell");
  for (std::size_t i = 0; i < n; ++i)
    if (!(lambda[i] > 0.0) || !(mu[i] > 0.0) || !std::isfinite(lambda[i]) || !std::isfinite(mu[i]))
      throw ValidationError("rates", "rates must be positive and finite");
  if (ss.size() == 0)
    throw ValidationError("state_space", "empty state space");

  // Outgoing transitions and total exit rate of every state.
  std::vector<std::vector<Move>> moves(ss.size());
  std::vector<double> exit_rate(ss.size(), 0.0);
  for (std::size_t k = 0; k < ss.size(); ++k)
  {
    const auto& s = ss[k];
    for (CellMask m = s.backoff; m; m &= m - 1)
    {
      const auto j = static_cast<std::size_t>(std::countr_zero(m));
      moves[k].push_back({ss.index_of(s.active | (CellMask{1} << j)), lambda[j]});
    }
    for (CellMask m = s.active; m; m &= m - 1)
    {
      const auto i = static_cast<std::size_t>(std::countr_zero(m));
      moves[k].push_back({ss.index_of(s.active & ~(CellMask{1} << i)), mu[i]});
    }
    for (const auto& mv : moves[k])
      exit_rate[k] += mv.rate;
  }

  SplitMix64 rng(params.seed);
  std::vector<double> occupancy(ss.size(), 0.0);
  std::size_t cur = ss.empty_index();
  double total = 0.0;
  for (std::uint64_t t = 0; t < params.transitions; ++t)
  {
    if (moves[cur].empty())
      break; // only possible for a graph with no cells
    const double hold = rng.exponential(exit_rate[cur]);
    occupancy[cur] += hold;
    total += hold;
    double u = rng.uniform() * exit_rate[cur];
    std::size_t next = moves[cur].back().target;
    for (const auto& mv : moves[cur])
    {
      if (u < mv.rate)
      {
        next = mv.target;
        break;
      }
      u -= mv.rate;
    }
    cur = next;
  }

  CtmcRun run;
  run.seed = params.seed;
  run.transitions = params.transitions;
  run.total_time = total;
  run.empirical_pi.assign(ss.size(), 0.0);
  run.empirical_x.assign(n, 0.0);
  if (total <= 0.0)
  {
    run.empirical_pi[ss.empty_index()] = 1.0;
    std::fill(run.empirical_x.begin(), run.empirical_x.end(), 1.0);
    return run;
  }
  for (std::size_t k = 0; k < ss.size(); ++k)
  {
    const double p = occupancy[k] / total;
    run.empirical_pi[k] = p;
    for (std::size_t i = 0; i < n; ++i)
      if (!((ss[k].blocked >> i) & 1U))
        run.empirical_x[i] += p;
  }
  return run;
}

double total_variation(std::span<const double> p, std::span<const double> q)
{
  if (p.size() != q.size())
    throw ValidationError("distribution", "length mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k)
    s += std::abs(p[k] - q[k]);
  return 0.5 * s;
}

SlottedRun simulate_slotted(const ContentionGraph& g, std::span<const int> node_counts, std::span<const double> beta,
                            std::uint32_t success_slots, std::uint32_t collision_slots, const SlottedParams& params)
{
  const std::size_t n = g.size();
  if (n > kMaxEnumerableCells)
    throw ValidationError("graph", "slotted simulation supports at most 64 cells");
  if (node_counts.size() != n || beta.size() != n)
    throw ValidationError("cells", "expected one node count and one beta per cell");
  for (std::size_t i = 0; i < n; ++i)
  {
    if (node_counts[i] < 1)
      throw ValidationError("node_counts[" + std::to_string(i) + "]", "must be >= 1");
    if (!(beta[i] > 0.0 && beta[i] < 1.0))
      throw ValidationError("beta[" + std::to_string(i) + "]", "must lie in (0, 1)");
  }
  if (success_slots < 1 || collision_slots < 1)
    throw ValidationError("holds", "hold lengths must be at least one slot");
  if (!(params.slot_time > 0.0))
    throw ValidationError("slot_time", "must be positive");

  // Inverse-CDF tables for the number of attempting nodes in a cell.
  std::vector<std::vector<double>> attempt_cdf(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    const int m = node_counts[i];
    double pk = std::pow(1.0 - beta[i], m);
    double acc = 0.0;
    for (int k = 0; k <= m; ++k)
    {
      acc += pk;
      attempt_cdf[i].push_back(acc);
      pk *= beta[i] / (1.0 - beta[i]) * static_cast<double>(m - k) / static_cast<double>(k + 1);
    }
    attempt_cdf[i].back() = 1.0;
  }

  std::vector<CellMask> nbr(n);
  for (std::size_t i = 0; i < n; ++i)
    nbr[i] = g.neighbor_mask(i);

  SlottedRun run;
  run.seed = params.seed;
  run.horizon_slots = params.horizon_slots;
  run.attempts.assign(n, 0);
  run.collisions.assign(n, 0);
  run.successes.assign(n, 0);
  run.backoff_slots.assign(n, 0);
  run.unblocked_slots.assign(n, 0);

  SplitMix64 rng(params.seed);
  std::vector<std::uint32_t> hold(n, 0);
  std::vector<int> tries(n, 0);
  CellMask transmitting = 0;
  CellMask succeeding = 0;
  CellMask last_state = ~CellMask{0};
  std::vector<std::uint64_t>* bucket = nullptr;

  for (std::uint64_t slot = 0; slot < params.horizon_slots; ++slot)
  {
    CellMask backoff = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (!((transmitting >> i) & 1U) && (nbr[i] & transmitting) == 0)
        backoff |= CellMask{1} << i;

    if (transmitting != last_state)
    {
      last_state = transmitting;
      auto& v = run.backoff_slots_by_state[transmitting];
      if (v.empty())
        v.assign(n, 0);
      bucket = &v;
    }

    CellMask starters = 0;
    for (CellMask m = backoff; m; m &= m - 1)
    {
      const auto i = static_cast<std::size_t>(std::countr_zero(m));
      ++run.backoff_slots[i];
      ++(*bucket)[i];
      const double u = rng.uniform();
      const auto& cdf = attempt_cdf[i];
      int k = 0;
      while (u >= cdf[static_cast<std::size_t>(k)])
        ++k;
      tries[i] = k;
      if (k > 0)
        starters |= CellMask{1} << i;
    }

    for (CellMask m = starters; m; m &= m - 1)
    {
      const auto i = static_cast<std::size_t>(std::countr_zero(m));
      const auto k = static_cast<std::uint64_t>(tries[i]);
      const bool collided = k >= 2 || (nbr[i] & starters) != 0;
      run.attempts[i] += k;
      const CellMask bit = CellMask{1} << i;
      transmitting |= bit;
      if (collided)
      {
        run.collisions[i] += k;
        hold[i] = collision_slots;
        succeeding &= ~bit;
      }
      else
      {
        ++run.successes[i];
        hold[i] = success_slots;
        succeeding |= bit;
      }
    }

    for (std::size_t i = 0; i < n; ++i)
    {
      const CellMask bit = CellMask{1} << i;
      if ((backoff | transmitting) & bit)
        ++run.unblocked_slots[i];
      if ((succeeding & bit) && (nbr[i] & succeeding))
        ++run.exclusion_violations;
    }

    for (CellMask m = transmitting; m; m &= m - 1)
    {
      const auto i = static_cast<std::size_t>(std::countr_zero(m));
      if (--hold[i] == 0)
      {
        transmitting &= ~(CellMask{1} << i);
        succeeding &= ~(CellMask{1} << i);
      }
    }
  }

  run.empirical_gamma.assign(n, 0.0);
  run.empirical_throughput_pkts.assign(n, 0.0);
  run.empirical_x.assign(n, 0.0);
  const double horizon = static_cast<double>(params.horizon_slots);
  for (std::size_t i = 0; i < n; ++i)
  {
    if (run.attempts[i] > 0)
      run.empirical_gamma[i] = static_cast<double>(run.collisions[i]) / static_cast<double>(run.attempts[i]);
    if (horizon > 0.0)
    {
      run.empirical_throughput_pkts[i] = static_cast<double>(run.successes[i]) / (horizon * params.slot_time);
      run.empirical_x[i] = static_cast<double>(run.unblocked_slots[i]) / horizon;
    }
  }
  return run;
}

} // namespace cellwlan

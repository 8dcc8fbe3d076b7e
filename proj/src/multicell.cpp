#include "cellwlan/multicell.hpp"

#include "cellwlan/errors.hpp"
#include "cellwlan/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>

namespace cellwlan {

void MulticellInput::validate() const
{
  if (graph.empty())
    throw ValidationError("graph", "at least one cell is required");
  if (node_counts.size() != graph.size())
    throw ValidationError("traffic.node_counts", "expected one node count per cell");
  for (std::size_t i = 0; i < node_counts.size(); ++i)
    if (node_counts[i] < 1)
      throw ValidationError("traffic.node_counts[" + std::to_string(i) + "]", "must be >= 1");
  mac_phy.validate();
  backoff.validate();
}

void FixedPointConfig::validate() const
{
  if (!(tolerance > 0.0))
    throw ValidationError("solver.tolerance", "must be positive");
  if (!(damping > 0.0 && damping <= 1.0))
    throw ValidationError("solver.damping", "must lie in (0, 1]");
  if (max_iterations < 1)
    throw ValidationError("solver.max_iterations", "must be >= 1");
  if (restarts < 0)
    throw ValidationError("solver.restarts", "must be >= 0");
  for (double b : initial_beta)
    if (!(b > 0.0 && b <= 1.0))
      throw ValidationError("solver.initial_beta", "entries must lie in (0, 1]");
}

double activation_rate(double beta, int n, double slot_time)
{
  return (1.0 - std::pow(1.0 - beta, n)) / slot_time;
}

double cell_success_probability(double beta, int n)
{
  if (!(beta > 0.0))
    throw ValidationError("beta", "attempt probability must be positive");
  return n * beta * std::pow(1.0 - beta, n - 1) / (1.0 - std::pow(1.0 - beta, n));
}

double mean_activity_time(double beta, int n, const FrameTimes& t)
{
  const double ps = cell_success_probability(beta, n);
  return ps * t.success + (1.0 - ps) * t.collision;
}

std::vector<double> stationary_distribution(const StateSpace& ss, std::span<const double> rho)
{
  if (rho.size() != ss.n_cells())
    throw ValidationError("rho", "expected one access intensity per cell");
  std::vector<double> log_rho(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i)
  {
    if (!(rho[i] > 0.0))
      throw ValidationError("rho", "access intensities must be positive");
    log_rho[i] = std::log(rho[i]);
  }

  std::vector<double> pi(ss.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < ss.size(); ++k)
  {
    double w = 0.0;
    for (CellMask a = ss[k].active; a; a &= a - 1)
      w += log_rho[static_cast<std::size_t>(std::countr_zero(a))];
    pi[k] = w;
    top = std::max(top, w);
  }
  double total = 0.0;
  for (double& p : pi)
  {
    p = std::exp(p - top);
    total += p;
  }
  for (double& p : pi)
    p /= total;
  return pi;
}

namespace {

double state_collision(const StateSpace& ss, const CellState& s, std::size_t cell, std::span<const double> beta,
                       std::span<const int> n)
{
  double clear = std::pow(1.0 - beta[cell], n[cell] - 1);
  for (CellMask m = ss.neighbor_mask(cell) & s.backoff; m; m &= m - 1)
  {
    const auto j = static_cast<std::size_t>(std::countr_zero(m));
    clear *= std::pow(1.0 - beta[j], n[j]);
  }
  return 1.0 - clear;
}

void check_sizes(const StateSpace& ss, std::span<const double> beta, std::span<const int> n)
{
  if (beta.size() != ss.n_cells() || n.size() != ss.n_cells())
    throw ValidationError("beta", "expected one attempt probability and node count per cell");
}

} // namespace

double per_state_collision(const StateSpace& ss, std::size_t state, std::size_t cell, std::span<const double> beta,
                           std::span<const int> n)
{
  check_sizes(ss, beta, n);
  if (state >= ss.size() || cell >= ss.n_cells())
    throw ValidationError("state", "index out of range");
  const auto& s = ss[state];
  if (!(s.backoff >> cell & 1))
    throw ValidationError("cell", "cell " + std::to_string(cell + 1) + " is not in backoff in this state");
  return state_collision(ss, s, cell, beta, n);
}

std::vector<double> collision_probability(const StateSpace& ss, std::span<const double> pi,
                                          std::span<const double> beta, std::span<const int> n)
{
  check_sizes(ss, beta, n);
  if (pi.size() != ss.size())
    throw ValidationError("pi", "expected one probability per state");
  const std::size_t cells = ss.n_cells();
  std::vector<double> num(cells, 0.0);
  std::vector<double> den(cells, 0.0);
  for (std::size_t k = 0; k < ss.size(); ++k)
  {
    const auto& s = ss[k];
    for (CellMask m = s.backoff; m; m &= m - 1)
    {
      const auto i = static_cast<std::size_t>(std::countr_zero(m));
      num[i] += pi[k] * state_collision(ss, s, i, beta, n);
      den[i] += pi[k];
    }
  }
  std::vector<double> gamma(cells);
  for (std::size_t i = 0; i < cells; ++i)
  {
    if (!(den[i] > 0.0))
      throw AnalysisError("cell " + std::to_string(i + 1) + " is never in backoff; collision probability undefined");
    gamma[i] = num[i] / den[i];
  }
  return gamma;
}

std::vector<double> unblocked_fraction(const StateSpace& ss, std::span<const double> pi)
{
  if (pi.size() != ss.size())
    throw ValidationError("pi", "expected one probability per state");
  std::vector<double> x(ss.n_cells(), 0.0);
  for (std::size_t k = 0; k < ss.size(); ++k)
    for (CellMask m = ss[k].active | ss[k].backoff; m; m &= m - 1)
      x[static_cast<std::size_t>(std::countr_zero(m))] += pi[k];
  return x;
}

namespace {

// Everything the composite map Gamma produces for one beta vector.
struct Evaluation
{
  std::vector<double> lambda;
  std::vector<double> mu;
  std::vector<double> rho;
  std::vector<double> pi;
  std::vector<double> gamma;
};

Evaluation evaluate(const StateSpace& ss, const MulticellInput& in, const FrameTimes& t,
                    const std::vector<double>& beta)
{
  const std::size_t cells = beta.size();
  Evaluation e;
  e.lambda.resize(cells);
  e.mu.resize(cells);
  e.rho.resize(cells);
  for (std::size_t i = 0; i < cells; ++i)
  {
    e.lambda[i] = activation_rate(beta[i], in.node_counts[i], in.mac_phy.slot_time);
    e.mu[i] = 1.0 / mean_activity_time(beta[i], in.node_counts[i], t);
    e.rho[i] = e.lambda[i] / e.mu[i];
  }
  e.pi = stationary_distribution(ss, e.rho);
  e.gamma = collision_probability(ss, e.pi, beta, in.node_counts);
  return e;
}

struct Iterate
{
  std::vector<double> beta;
  double residual = 0.0;
  int iterations = 0;
};

Iterate iterate(const StateSpace& ss, const MulticellInput& in, const FrameTimes& t, const FixedPointConfig& cfg,
                std::vector<double> beta)
{
  const double w = cfg.damping;
  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < cfg.max_iterations; ++it)
  {
    const auto e = evaluate(ss, in, t, beta);
    residual = 0.0;
    std::vector<double> next(beta.size());
    for (std::size_t i = 0; i < beta.size(); ++i)
    {
      next[i] = attempt_probability(e.gamma[i], in.backoff);
      residual = std::max(residual, std::abs(next[i] - beta[i]));
    }
    if (residual < cfg.tolerance)
      return {std::move(beta), residual, it};
    for (std::size_t i = 0; i < beta.size(); ++i)
      beta[i] = (1.0 - w) * beta[i] + w * next[i];
  }
  throw ConvergenceError("multi-cell fixed point did not converge", residual, it);
}

double sup_distance(const std::vector<double>& a, const std::vector<double>& b)
{
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

} // namespace

MulticellSolution solve_fixed_point(const MulticellInput& input, const FixedPointConfig& cfg)
{
  input.validate();
  cfg.validate();
  const std::size_t cells = input.graph.size();
  if (!cfg.initial_beta.empty() && cfg.initial_beta.size() != cells)
    throw ValidationError("solver.initial_beta", "expected one entry per cell");

  const auto ss = enumerate_independent_sets(input.graph, cfg.state_cap);
  const auto t = frame_exchange_times(input.mac_phy);

  std::vector<double> start = cfg.initial_beta;
  if (start.empty())
    start.assign(cells, attempt_probability(0.0, input.backoff));

  auto main = iterate(ss, input, t, cfg, start);

  MulticellSolution s;
  for (int r = 0; r < cfg.restarts; ++r)
  {
    auto rng = SplitMix64::stream(cfg.seed, static_cast<std::uint64_t>(r));
    std::vector<double> seed_beta(cells);
    for (double& b : seed_beta)
      b = 1e-3 + (1.0 - 1e-3) * rng.uniform();
    const auto other = iterate(ss, input, t, cfg, seed_beta);
    s.restart_spread = std::max(s.restart_spread, sup_distance(main.beta, other.beta));
  }
  s.unique = s.restart_spread <= 100.0 * cfg.tolerance;

  auto e = evaluate(ss, input, t, main.beta);
  s.beta = std::move(main.beta);
  s.residual = main.residual;
  s.iterations = main.iterations;
  s.gamma = std::move(e.gamma);
  s.lambda = std::move(e.lambda);
  s.mu = std::move(e.mu);
  s.rho = std::move(e.rho);
  s.pi = std::move(e.pi);
  s.x = unblocked_fraction(ss, s.pi);

  std::map<int, double> base_by_n;
  s.single_cell_throughput_pkts.resize(cells);
  for (std::size_t i = 0; i < cells; ++i)
  {
    const int n = input.node_counts[i];
    auto it = base_by_n.find(n);
    if (it == base_by_n.end())
      it = base_by_n.emplace(n, solve_single_cell(n, input.mac_phy, input.backoff).throughput_pkts).first;
    s.single_cell_throughput_pkts[i] = it->second;
  }
  auto tp = saturation_throughputs(s.x, s.single_cell_throughput_pkts, input.node_counts);
  s.cell_throughput_pkts = std::move(tp.cell_pkts);
  s.per_node_throughput_pkts = std::move(tp.per_node_pkts);
  s.normalized_network_throughput = 0.0;
  for (double xi : s.x)
    s.normalized_network_throughput += xi;
  return s;
}

CellThroughputs saturation_throughputs(std::span<const double> x, std::span<const double> single_cell_base,
                                       std::span<const int> n)
{
  if (x.size() != single_cell_base.size() || x.size() != n.size())
    throw ValidationError("x", "size mismatch");
  CellThroughputs out;
  out.cell_pkts.resize(x.size());
  out.per_node_pkts.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
  {
    out.cell_pkts[i] = x[i] * single_cell_base[i];
    out.per_node_pkts[i] = out.cell_pkts[i] / n[i];
  }
  return out;
}

void TcpLongInput::validate() const
{
  if (!(tcp_data_size > 0.0))
    throw ValidationError("traffic.tcp_data_bytes", "must be positive");
  if (!(tcp_ack_size > 0.0))
    throw ValidationError("traffic.tcp_ack_bytes", "must be positive");
}

TcpLongResult tcp_long_throughputs(const TcpLongInput& input, const FixedPointConfig& cfg)
{
  input.validate();
  MulticellInput eq;
  eq.graph = input.graph;
  eq.node_counts.assign(input.graph.size(), 2);
  eq.mac_phy = input.mac_phy;
  eq.mac_phy.payload_size = (input.tcp_data_size + input.tcp_ack_size) / 2.0;
  eq.backoff = input.backoff;

  TcpLongResult r;
  r.solution = solve_fixed_point(eq, cfg);
  r.single_cell_ap_throughput = solve_single_cell(2, eq.mac_phy, eq.backoff).throughput_pkts / 2.0;
  r.ap_throughput_pkts.resize(r.solution.x.size());
  for (std::size_t i = 0; i < r.solution.x.size(); ++i)
    r.ap_throughput_pkts[i] = r.solution.x[i] * r.single_cell_ap_throughput;
  return r;
}

InfiniteRhoResult infinite_rho_x(const ContentionGraph& g, std::size_t cap)
{
  InfiniteRhoResult r;
  r.stats = mis_stats(g, cap);
  r.x.resize(g.size());
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < g.size(); ++i)
  {
    r.x[i] = static_cast<double>(r.stats.eta_per_cell[i]) / static_cast<double>(r.stats.eta);
    total += r.stats.eta_per_cell[i];
  }
  // Integer numerator keeps the sum exact: total == alpha * eta.
  r.normalized_network_throughput = static_cast<double>(total) / static_cast<double>(r.stats.eta);
  return r;
}

std::vector<SweepPoint> payload_sweep(const MulticellInput& input, std::span<const double> payloads,
                                      const FixedPointConfig& cfg)
{
  std::vector<SweepPoint> out;
  out.reserve(payloads.size());
  for (double payload : payloads)
  {
    SweepPoint pt;
    pt.payload_size = payload;
    try
    {
      auto in = input;
      in.mac_phy.payload_size = payload;
      pt.solution = solve_fixed_point(in, cfg);
      pt.rho = pt.solution.rho;
      pt.x = pt.solution.x;
      pt.ok = true;
    }
    catch (const std::exception& e)
    {
      pt.error = e.what();
    }
    out.push_back(std::move(pt));
  }
  return out;
}

} // namespace cellwlan

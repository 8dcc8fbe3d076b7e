#include "cellwlan/analyses.hpp"

#include "cellwlan/errors.hpp"

#include <cstdio>

namespace cellwlan {

namespace {

std::int64_t as_int(std::size_t v) { return static_cast<std::int64_t>(v); }

ResultBundle start(std::string_view verb, const AnalysisConfig& cfg, std::uint64_t seed)
{
  ResultBundle b;
  b.verb = verb;
  b.config = cfg.source;
  b.config_hash = config_hash(cfg.source);
  b.seed = seed;
  if (cfg.deployment)
  {
    const auto pbd = check_pbd(*cfg.deployment);
    for (const auto& v : pbd.violations)
    {
      char buf[160];
      std::snprintf(buf, sizeof buf, "PBD violated between cells %d and %d (AP distance %s m)", v.cell_a, v.cell_b,
                    format_number(v.ap_distance).c_str());
      b.warnings.emplace_back(buf);
    }
  }
  return b;
}

void require_mode(const AnalysisConfig& cfg, std::initializer_list<TrafficMode> allowed, std::string_view verb)
{
  for (auto m : allowed)
    if (cfg.traffic.mode == m)
      return;
  throw ValidationError("traffic.mode", std::string(verb) + " does not apply to mode " +
                                          std::string(to_string(cfg.traffic.mode)));
}

MulticellInput saturated_input(const AnalysisConfig& cfg)
{
  MulticellInput in;
  in.graph = cfg.graph;
  in.node_counts = cfg.traffic.node_counts;
  in.mac_phy = cfg.mac_phy;
  in.backoff = cfg.backoff;
  return in;
}

TcpLongInput tcp_input(const AnalysisConfig& cfg, const ContentionGraph& g)
{
  TcpLongInput in;
  in.graph = g;
  in.mac_phy = cfg.mac_phy;
  in.backoff = cfg.backoff;
  in.tcp_data_size = cfg.traffic.tcp_data_size;
  in.tcp_ack_size = cfg.traffic.tcp_ack_size;
  return in;
}

void note_uniqueness(ResultBundle& b, const MulticellSolution& s)
{
  if (!s.unique)
    b.warnings.push_back("fixed point may not be unique: restarts differ by " + format_number(s.restart_spread));
}

Table summary_table(std::string name = "summary") { return Table{std::move(name), {"key", "value"}, {}}; }

Table state_table(const ContentionGraph& g, const StateSpace& ss, const std::vector<double>& pi)
{
  Table t{"states", {"state", "members", "pi"}, {}};
  for (std::size_t k = 0; k < ss.size(); ++k)
    t.add({as_int(k), state_label(g, ss[k].active), pi[k]});
  return t;
}

} // namespace

std::string state_label(const ContentionGraph& g, CellMask active)
{
  std::string s = "{";
  bool first = true;
  for (auto i : members(active))
  {
    if (!first)
      s += ',';
    s += std::to_string(g.label(i));
    first = false;
  }
  return s + "}";
}

ResultBundle run_saturation(const AnalysisConfig& cfg)
{
  require_mode(cfg, {TrafficMode::Saturated}, "saturation");
  auto b = start("saturation", cfg, cfg.solver.seed);
  const auto in = saturated_input(cfg);
  const auto sol = solve_fixed_point(in, cfg.solver);
  note_uniqueness(b, sol);

  Table cells{"cells",
              {"cell", "n", "beta", "gamma", "lambda_per_s", "mu_per_s", "rho", "x", "single_cell_throughput_pkts",
               "cell_throughput_pkts", "per_node_throughput_pkts", "cell_throughput_bps"},
              {}};
  for (std::size_t i = 0; i < cfg.graph.size(); ++i)
    cells.add({std::int64_t{cfg.graph.label(i)}, std::int64_t{in.node_counts[i]}, sol.beta[i], sol.gamma[i],
               sol.lambda[i], sol.mu[i], sol.rho[i], sol.x[i], sol.single_cell_throughput_pkts[i],
               sol.cell_throughput_pkts[i], sol.per_node_throughput_pkts[i],
               sol.cell_throughput_pkts[i] * cfg.mac_phy.payload_size});
  b.tables.push_back(std::move(cells));

  const auto ss = enumerate_independent_sets(cfg.graph, cfg.solver.state_cap);
  b.tables.push_back(state_table(cfg.graph, ss, sol.pi));

  const auto times = frame_exchange_times(cfg.mac_phy);
  auto sum = summary_table();
  sum.add({"payload_bytes", cfg.mac_phy.payload_size / 8.0});
  sum.add({"T_s_us", times.success * 1e6});
  sum.add({"T_c_us", times.collision * 1e6});
  sum.add({"normalized_network_throughput", sol.normalized_network_throughput});
  sum.add({"residual", sol.residual});
  sum.add({"iterations", std::int64_t{sol.iterations}});
  sum.add({"restart_spread", sol.restart_spread});
  sum.add({"unique", sol.unique});
  b.tables.push_back(std::move(sum));
  return b;
}

ResultBundle run_tcp_long(const AnalysisConfig& cfg)
{
  require_mode(cfg, {TrafficMode::TcpLong}, "tcp-long");
  auto b = start("tcp-long", cfg, cfg.solver.seed);
  const auto r = tcp_long_throughputs(tcp_input(cfg, cfg.graph), cfg.solver);
  note_uniqueness(b, r.solution);

  Table cells{"cells", {"cell", "beta", "gamma", "rho", "x", "ap_throughput_pkts", "ap_app_throughput_bps"}, {}};
  for (std::size_t i = 0; i < cfg.graph.size(); ++i)
    cells.add({std::int64_t{cfg.graph.label(i)}, r.solution.beta[i], r.solution.gamma[i], r.solution.rho[i],
               r.solution.x[i], r.ap_throughput_pkts[i], r.ap_throughput_pkts[i] * cfg.traffic.app_data_size});
  b.tables.push_back(std::move(cells));

  auto sum = summary_table();
  sum.add({"tcp_data_bytes", cfg.traffic.tcp_data_size / 8.0});
  sum.add({"tcp_ack_bytes", cfg.traffic.tcp_ack_size / 8.0});
  sum.add({"single_cell_ap_throughput_pkts", r.single_cell_ap_throughput});
  sum.add({"residual", r.solution.residual});
  sum.add({"iterations", std::int64_t{r.solution.iterations}});
  sum.add({"unique", r.solution.unique});
  b.tables.push_back(std::move(sum));
  return b;
}

double tcp_short_single_cell_rate(const AnalysisConfig& cfg)
{
  if (cfg.traffic.single_cell_rate)
    return *cfg.traffic.single_cell_rate;
  const auto single = tcp_long_throughputs(tcp_input(cfg, ContentionGraph(1)), cfg.solver);
  return single.single_cell_ap_throughput * cfg.traffic.app_data_size;
}

ResultBundle run_tcp_short(const AnalysisConfig& cfg)
{
  require_mode(cfg, {TrafficMode::TcpShort}, "tcp-short");
  auto b = start("tcp-short", cfg, cfg.sim.seed);
  const double theta = tcp_short_single_cell_rate(cfg);

  std::vector<double> points = cfg.sweep.mean_service_times;
  if (points.empty())
    points.push_back(cfg.traffic.mean_service_time ? *cfg.traffic.mean_service_time
                                                   : *cfg.traffic.mean_flow_size / theta);

  Table t{"delays",
          {"mean_service_s", "cell", "method", "model", "nu_per_s", "mean_delay_s", "ci_halfwidth_s", "stable",
           "x_hat"},
          {}};
  const bool analytic = cfg.graph.size() <= kMaxEffectiveRateCells;
  if (!analytic)
    b.warnings.push_back("analytic delays skipped: more than " + std::to_string(kMaxEffectiveRateCells) + " cells");

  auto emit = [&](double point, const DelayResult& r, std::string_view method, std::string_view model) {
    for (std::size_t i = 0; i < cfg.graph.size(); ++i)
    {
      if (!r.active[i])
        continue;
      Value delay;
      if (r.mean_delay[i])
        delay = *r.mean_delay[i];
      Value ci;
      if (method == "simulation" && r.stable[i])
        ci = r.confidence_halfwidth[i];
      Value xh;
      if (!r.effective_rates.empty())
        xh = r.effective_rates[i];
      t.add({point, std::int64_t{cfg.graph.label(i)}, std::string(method), std::string(model),
             cfg.traffic.arrival_rates[i], delay, ci, bool(r.stable[i]), xh});
      if (!r.stable[i])
        b.warnings.push_back("cell " + std::to_string(cfg.graph.label(i)) + " unstable (" + std::string(method) +
                             (model.empty() ? "" : ", " + std::string(model)) +
                             ", mean_service_s=" + format_number(point) + ")");
    }
  };

  for (double point : points)
  {
    FlowParams fp;
    fp.arrival_rates = cfg.traffic.arrival_rates;
    fp.single_cell_rate = theta;
    fp.mean_flow_size = point * theta;
    for (auto model : cfg.traffic.service_models)
    {
      fp.service_model = model;
      emit(point, simulate_flow_network(cfg.graph, fp, cfg.sim), "simulation", to_string(model));
    }
    if (analytic)
    {
      const auto xh = effective_rate_fixed_point(cfg.graph, fp, cfg.solver);
      emit(point, mean_delay_analytic(xh.x_hat, fp), "analytic", "");
    }
  }
  b.tables.push_back(std::move(t));

  auto sum = summary_table();
  sum.add({"single_cell_rate_bps", theta});
  sum.add({"app_data_bytes", cfg.traffic.app_data_size / 8.0});
  sum.add({"flows_per_cell", as_int(cfg.sim.flows_per_cell)});
  sum.add({"warmup_flows", as_int(cfg.sim.warmup_flows)});
  sum.add({"replications", std::int64_t{cfg.sim.replications}});
  b.tables.push_back(std::move(sum));
  return b;
}

ResultBundle run_infinite_rho(const AnalysisConfig& cfg)
{
  auto b = start("infinite-rho", cfg, cfg.solver.seed);
  const auto r = infinite_rho_x(cfg.graph, cfg.solver.state_cap);
  Table cells{"cells", {"cell", "eta_i", "x"}, {}};
  for (std::size_t i = 0; i < cfg.graph.size(); ++i)
    cells.add({std::int64_t{cfg.graph.label(i)}, static_cast<std::int64_t>(r.stats.eta_per_cell[i]), r.x[i]});
  b.tables.push_back(std::move(cells));
  auto sum = summary_table();
  sum.add({"alpha", as_int(r.stats.alpha)});
  sum.add({"eta", static_cast<std::int64_t>(r.stats.eta)});
  sum.add({"normalized_network_throughput", r.normalized_network_throughput});
  b.tables.push_back(std::move(sum));
  return b;
}

ResultBundle run_payload_sweep(const AnalysisConfig& cfg, std::span<const double> payloads)
{
  require_mode(cfg, {TrafficMode::Saturated, TrafficMode::TcpLong}, "sweep");
  auto b = start("sweep", cfg, cfg.solver.seed);
  std::vector<double> list(payloads.begin(), payloads.end());
  if (list.empty())
    list = cfg.sweep.payload_sizes;
  if (list.empty())
    throw ValidationError("sweep.payload_bytes", "sweep needs at least one payload");

  const bool tcp = cfg.traffic.mode == TrafficMode::TcpLong;
  auto in = saturated_input(cfg);
  std::vector<double> mac_payloads = list;
  if (tcp)
  {
    in.node_counts.assign(cfg.graph.size(), 2);
    for (auto& p : mac_payloads)
      p = (p + cfg.traffic.tcp_ack_size) / 2.0;
  }
  const auto points = payload_sweep(in, mac_payloads, cfg.solver);

  Table t{"sweep", {"payload_bytes", "cell", "rho", "x", "ok", "error"}, {}};
  for (std::size_t k = 0; k < points.size(); ++k)
  {
    const auto& pt = points[k];
    const double bytes = list[k] / 8.0;
    if (!pt.ok)
    {
      b.warnings.push_back("sweep point " + format_number(bytes) + " bytes failed: " + pt.error);
      for (std::size_t i = 0; i < cfg.graph.size(); ++i)
        t.add({bytes, std::int64_t{cfg.graph.label(i)}, {}, {}, false, pt.error});
      continue;
    }
    note_uniqueness(b, pt.solution);
    for (std::size_t i = 0; i < cfg.graph.size(); ++i)
      t.add({bytes, std::int64_t{cfg.graph.label(i)}, pt.rho[i], pt.x[i], true, std::string()});
  }
  b.tables.push_back(std::move(t));
  return b;
}

ResultBundle run_validate(const AnalysisConfig& cfg)
{
  auto b = start("validate", cfg, cfg.solver.seed);
  Table edges{"graph", {"cell_a", "cell_b"}, {}};
  for (const auto& [i, j] : cfg.graph.edges())
    edges.add({std::int64_t{cfg.graph.label(i)}, std::int64_t{cfg.graph.label(j)}});
  b.tables.push_back(std::move(edges));

  Table pairs{"pbd", {"cell_a", "cell_b", "ap_distance_m"}, {}};
  auto sum = summary_table();
  sum.add({"cells", as_int(cfg.graph.size())});
  sum.add({"edges", as_int(cfg.graph.edge_count())});
  if (cfg.deployment)
  {
    const auto pbd = check_pbd(*cfg.deployment);
    for (const auto& v : pbd.violations)
      pairs.add({std::int64_t{v.cell_a}, std::int64_t{v.cell_b}, v.ap_distance});
    sum.add({"pbd", std::string(pbd.pass ? "pass" : "fail")});
  }
  else
  {
    sum.add({"pbd", std::string("not applicable (custom adjacency)")});
  }
  b.tables.push_back(std::move(pairs));
  b.tables.push_back(std::move(sum));
  return b;
}

ResultBundle run_verb(std::string_view verb, const AnalysisConfig& cfg)
{
  if (verb == "saturation")
    return run_saturation(cfg);
  if (verb == "tcp-long")
    return run_tcp_long(cfg);
  if (verb == "tcp-short")
    return run_tcp_short(cfg);
  if (verb == "infinite-rho")
    return run_infinite_rho(cfg);
  if (verb == "sweep")
    return run_payload_sweep(cfg);
  if (verb == "validate")
    return run_validate(cfg);
  throw ValidationError("verb", "unknown verb '" + std::string(verb) + "'");
}

} // namespace cellwlan

// Acceptance run: one line per criterion, nonzero exit if any fails.

#include "cellwlan/dcf.hpp"
#include "cellwlan/flows.hpp"
#include "cellwlan/multicell.hpp"
#include "cellwlan/simkit.hpp"
#include "cellwlan/topology.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

using namespace cellwlan;
namespace fs = std::filesystem;

namespace {

struct Outcome
{
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args)
{
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b)
{
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

MulticellInput saturated(const ContentionGraph& g, int n, double payload_bytes = 1000)
{
  MulticellInput in;
  in.graph = g;
  in.node_counts.assign(g.size(), n);
  in.mac_phy = MacPhyParams::dot11b_11mbps(payload_bytes * 8);
  in.backoff = mean_backoffs(32, 1024, 7);
  return in;
}

std::vector<CellMask> masks(const StateSpace& ss)
{
  std::vector<CellMask> v;
  for (const auto& s : ss.states())
    v.push_back(s.active);
  return v;
}

Outcome state_goldens()
{
  const auto chain = masks(enumerate_independent_sets(path_graph(3)));
  const auto clique = masks(enumerate_independent_sets(complete_graph(3)));
  const std::vector<CellMask> want_chain{0b000, 0b001, 0b010, 0b100, 0b101};
  const std::vector<CellMask> want_clique{0b000, 0b001, 0b010, 0b100};
  auto sorted = [](std::vector<CellMask> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  const bool ok = chain.front() == 0 && clique.front() == 0 && sorted(chain) == want_chain &&
                  sorted(clique) == want_clique;
  return {ok, fmt("chain %zu states, clique %zu states", chain.size(), clique.size())};
}

Outcome mis_identity()
{
  SplitMix64 rng(2024);
  int bad = 0;
  for (int k = 0; k < 200; ++k)
  {
    const std::size_t n = 4 + rng() % 9;
    const double p = 0.15 + 0.7 * rng.uniform();
    const auto g = oracle::random_graph(rng, n, p);
    const auto r = infinite_rho_x(g);
    const auto want = oracle::maximum_independent_sets(g);
    std::uint64_t total = 0;
    for (auto e : r.stats.eta_per_cell)
      total += e;
    if (total != r.stats.alpha * r.stats.eta || r.stats.alpha != want.alpha || r.stats.eta != want.eta ||
        r.stats.eta_per_cell != want.eta_i || r.normalized_network_throughput != static_cast<double>(r.stats.alpha))
      ++bad;
  }
  return {bad == 0, fmt("200 random graphs, %d mismatches", bad)};
}

Outcome service_goldens()
{
  const double theta = 1.0;
  const auto g = path_graph(3);
  const auto m1 = service_rates(ServiceModel::Model1, g, 0b111, theta);
  const auto m2 = service_rates(ServiceModel::Model2, g, 0b111, theta);
  bool ok = m1 == std::vector<double>{theta / 2, theta / 3, theta / 2} && m2 == std::vector<double>{theta, 0, theta};
  std::size_t states = 0;
  double worst = 0.0;
  for (std::size_t n = 1; n <= 6; ++n)
  {
    const auto k = complete_graph(n);
    for (CellMask z = 1; z < (CellMask{1} << n); ++z)
    {
      worst = std::max(worst, sup_diff(service_rates(ServiceModel::Model1, k, z, theta),
                                       service_rates(ServiceModel::Model2, k, z, theta)));
      ++states;
    }
  }
  ok = ok && worst <= 1e-15;
  return {ok, fmt("chain M1=(%.6g,%.6g,%.6g) M2=(%g,%g,%g); cliques: %zu states, max diff %.2g", m1[0], m1[1], m1[2],
                  m2[0], m2[1], m2[2], states, worst)};
}

Outcome product_form()
{
  SplitMix64 rng(77);
  std::vector<ContentionGraph> graphs{path_graph(3), complete_graph(3), oracle::random_graph(rng, 6, 0.4)};
  double worst_tv = 0.0, worst_db = 0.0;
  std::string detail;
  for (std::size_t k = 0; k < graphs.size(); ++k)
  {
    const auto& g = graphs[k];
    const auto sol = solve_fixed_point(saturated(g, 2));
    const auto ss = enumerate_independent_sets(g);
    CtmcParams p;
    p.seed = 100 + k;
    const auto run = simulate_ctmc(ss, sol.lambda, sol.mu, p);
    const double tv = total_variation(run.empirical_pi, sol.pi);
    worst_tv = std::max(worst_tv, tv);
    // pi(A) lambda_j = pi(A + j) mu_j for every j addable to A.
    for (std::size_t a = 0; a < ss.size(); ++a)
      for (std::size_t j = 0; j < g.size(); ++j)
      {
        const CellMask next = ss[a].active | (CellMask{1} << j);
        if (next == ss[a].active)
          continue;
        const auto b = ss.index_of(next);
        if (b == StateSpace::npos)
          continue;
        const double lhs = sol.pi[a] * sol.lambda[j], rhs = sol.pi[b] * sol.mu[j];
        worst_db = std::max(worst_db, std::abs(lhs - rhs) / std::max(lhs, rhs));
      }
    detail += fmt("%sTV=%.4f", k ? ", " : "", tv);
  }
  return {worst_tv <= 0.01 && worst_db <= 1e-9, detail + fmt("; detailed balance %.2g", worst_db)};
}

Outcome collision_oracle()
{
  const auto in = saturated(path_graph(3), 2);
  const auto sol = solve_fixed_point(in);
  const auto t = frame_exchange_times(in.mac_phy);
  const auto ts = static_cast<std::uint32_t>(std::ceil(t.success / in.mac_phy.slot_time - 1e-9));
  const auto tc = static_cast<std::uint32_t>(std::ceil(t.collision / in.mac_phy.slot_time - 1e-9));
  SlottedParams p;
  p.seed = 5;
  const auto run = simulate_slotted(in.graph, in.node_counts, sol.beta, ts, tc, p);
  const double chain_err = sup_diff(run.empirical_gamma, sol.gamma);

  const std::vector<int> n{2, 5, 10};
  const std::vector<double> beta{0.06, 0.05, 0.038};
  p.seed = 6;
  const auto iso = simulate_slotted(edgeless_graph(3), n, beta, ts, tc, p);
  double iso_err = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    iso_err = std::max(iso_err, std::abs(iso.empirical_gamma[i] - (1 - std::pow(1 - beta[i], n[i] - 1))));
  return {chain_err <= 0.02 && iso_err <= 0.01,
          fmt("chain gamma sim (%.4f,%.4f,%.4f) vs (%.4f,%.4f,%.4f), max err %.4f; edgeless max err %.4f",
              run.empirical_gamma[0], run.empirical_gamma[1], run.empirical_gamma[2], sol.gamma[0], sol.gamma[1],
              sol.gamma[2], chain_err, iso_err)};
}

Outcome fixed_point_robustness()
{
  SplitMix64 rng(31);
  double worst = 0.0;
  for (const auto& g : {path_graph(3), complete_graph(3)})
  {
    const auto in = saturated(g, 2);
    std::vector<std::vector<double>> betas;
    for (int s = 0; s < 5; ++s)
    {
      FixedPointConfig cfg;
      cfg.restarts = 0;
      for (std::size_t i = 0; i < g.size(); ++i)
        cfg.initial_beta.push_back(1e-3 + (1 - 1e-3) * rng.uniform());
      betas.push_back(solve_fixed_point(in, cfg).beta);
    }
    for (const auto& b : betas)
      worst = std::max(worst, sup_diff(b, betas.front()));
  }
  return {worst <= 1e-6, fmt("max spread over 5 starts %.2g", worst)};
}

Outcome starvation()
{
  const auto in = saturated(path_graph(3), 10);
  std::vector<double> payloads;
  for (int b = 100; b <= 2000; b += 100)
    payloads.push_back(b * 8.0);
  const auto pts = payload_sweep(in, payloads);
  bool monotone = true;
  for (std::size_t k = 1; k < pts.size(); ++k)
    for (std::size_t i = 0; i < 3; ++i)
      monotone = monotone && pts[k].ok && pts[k].rho[i] > pts[k - 1].rho[i];

  const auto sol = solve_fixed_point(in);
  const double xerr = sup_diff(sol.x, {1.0, 0.0, 1.0});

  const auto t = frame_exchange_times(in.mac_phy);
  SlottedParams p;
  p.seed = 9;
  const auto run = simulate_slotted(in.graph, in.node_counts, sol.beta,
                                    static_cast<std::uint32_t>(std::ceil(t.success / in.mac_phy.slot_time - 1e-9)),
                                    static_cast<std::uint32_t>(std::ceil(t.collision / in.mac_phy.slot_time - 1e-9)), p);
  const double edge = 0.5 * (run.empirical_throughput_pkts[0] + run.empirical_throughput_pkts[2]);
  const double ratio = run.empirical_throughput_pkts[1] / edge;
  return {monotone && xerr <= 0.05 && ratio <= 0.05,
          fmt("rho monotone over 100..2000 B: %s; x=(%.4f,%.4f,%.4f); slotted middle/edge %.4f",
              monotone ? "yes" : "no", sol.x[0], sol.x[1], sol.x[2], ratio)};
}

Outcome tcp_reduction()
{
  TcpLongInput in;
  in.mac_phy = MacPhyParams::dot11b_11mbps();
  in.backoff = mean_backoffs(32, 1024, 7);
  in.tcp_data_size = 1040 * 8;
  in.tcp_ack_size = 40 * 8;
  in.graph = path_graph(1);
  const auto one = tcp_long_throughputs(in);
  const auto base = solve_single_cell(2, MacPhyParams::dot11b_11mbps(540 * 8), in.backoff);
  const double err = std::abs(one.ap_throughput_pkts[0] - base.throughput_pkts / 2);
  in.graph = edgeless_graph(3);
  const auto many = tcp_long_throughputs(in);
  double spread = 0.0;
  for (double v : many.ap_throughput_pkts)
    spread = std::max(spread, std::abs(v - one.ap_throughput_pkts[0]));
  return {err <= 1e-10 && spread <= 1e-10,
          fmt("isolated %.9g pkt/s vs %.9g, err %.2g; edgeless max diff %.2g", one.ap_throughput_pkts[0],
              base.throughput_pkts / 2, err, spread)};
}

FlowParams flows(std::vector<double> nu, double service_s, ServiceModel m)
{
  FlowParams fp;
  fp.arrival_rates = std::move(nu);
  fp.single_cell_rate = 1e6;
  fp.mean_flow_size = service_s * fp.single_cell_rate;
  fp.service_model = m;
  return fp;
}

Outcome ps_calibration()
{
  SimConfig sc;
  double worst = 0.0;
  std::string detail;
  for (double load : {0.3, 0.5, 0.7})
  {
    const auto r = simulate_flow_network(path_graph(1), flows({load}, 1.0, ServiceModel::Model2), sc);
    const double want = 1.0 / (1.0 - load);
    const double rel = r.mean_delay[0] ? std::abs(*r.mean_delay[0] / want - 1) : 1.0;
    worst = std::max(worst, rel);
    detail += fmt("%sload %.1f: %.4f vs %.4f", detail.empty() ? "" : ", ", load, r.mean_delay[0].value_or(NAN), want);
  }
  return {worst <= 0.03, detail + fmt("; max rel err %.4f", worst)};
}

Outcome delay_cross_validation()
{
  SimConfig sc;
  const auto g = path_graph(3);
  bool analytic_ok = true, ordering_ok = true;
  std::string detail;
  for (double s : {0.5, 1.0, 2.0, 3.0})
  {
    const auto fp2 = flows({0.1, 0.1, 0.1}, s, ServiceModel::Model2);
    const auto fp1 = flows({0.1, 0.1, 0.1}, s, ServiceModel::Model1);
    const auto sim2 = simulate_flow_network(g, fp2, sc);
    const auto sim1 = simulate_flow_network(g, fp1, sc);
    const auto ana = mean_delay_analytic(effective_rate_fixed_point(g, fp2).x_hat, fp2);
    double worst = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
    {
      if (!sim2.stable[i] || !sim2.mean_delay[i])
        continue;
      const double rel = ana.mean_delay[i] ? std::abs(*ana.mean_delay[i] / *sim2.mean_delay[i] - 1) : 1.0;
      worst = std::max(worst, rel);
    }
    analytic_ok = analytic_ok && worst <= 0.15;
    const bool both = sim1.mean_delay[1] && sim2.mean_delay[1];
    const bool order = !sim2.stable[1] || (both && *sim1.mean_delay[1] > *sim2.mean_delay[1]);
    ordering_ok = ordering_ok && order;
    detail += fmt("\n      E[V]/Theta=%.1f: M2 sim (%.3f,%.3f) +-(%.3f,%.3f), analytic (%.3f,%.3f), worst rel %.3f; "
                  "M1 middle %.3f %s M2 middle",
                  s, sim2.mean_delay[0].value_or(NAN), sim2.mean_delay[1].value_or(NAN),
                  sim2.confidence_halfwidth[0], sim2.confidence_halfwidth[1], ana.mean_delay[0].value_or(NAN),
                  ana.mean_delay[1].value_or(NAN), worst, sim1.mean_delay[1].value_or(NAN), order ? ">" : "<=");
  }
  return {analytic_ok && ordering_ok,
          fmt("analytic within 15%%: %s; Model-1 middle above Model-2: %s", analytic_ok ? "yes" : "no",
              ordering_ok ? "yes" : "no") +
              detail};
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args)
{
  const std::string cmd = std::string(CELLWLAN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

Outcome cli_determinism()
{
  const auto root = fs::temp_directory_path() / ("cellwlan_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  const std::vector<std::pair<std::string, std::string>> cases{
    {"saturation", R"({"deployment": {"preset": "three-chain"}, "traffic": {"mode": "saturated", "node_count": 10}})"},
    {"tcp-long", R"({"deployment": {"preset": "three-chain"},
      "traffic": {"mode": "tcp-long", "tcp_data_bytes": 1040, "tcp_ack_bytes": 40}})"},
    {"tcp-short", R"({"deployment": {"preset": "three-chain"},
      "traffic": {"mode": "tcp-short", "arrival_rate": 0.1, "mean_service_s": 1, "service_model": "both"},
      "sim": {"flows_per_cell": 2000, "warmup_flows": 200, "replications": 3}})"},
    {"infinite-rho", R"({"deployment": {"preset": "three-clique"}})"},
    {"sweep", R"({"deployment": {"preset": "three-chain"}, "sweep": {"payload_bytes": [500, 1000, 1500]}})"},
    {"validate", R"({"deployment": {"preset": "two-cell"}})"},
  };
  int mismatched = 0, files = 0;
  std::string failed;
  for (const auto& format : {"csv", "doc"})
    for (const auto& [verb, text] : cases)
    {
      const auto cfg = root / (verb + ".json");
      std::ofstream(cfg) << text;
      const auto a = root / (verb + "_" + format + "_a"), b = root / (verb + "_" + format + "_b");
      const std::string common = verb + " --config " + cfg.string() + " --seed 17 --format " + format + " --out ";
      if (run_cli(common + a.string()) != 0 || run_cli(common + b.string()) != 0)
      {
        ++mismatched;
        failed += " " + verb + "(exit)";
        continue;
      }
      for (const auto& e : fs::directory_iterator(a))
      {
        ++files;
        if (!fs::exists(b / e.path().filename()) || slurp(e.path()) != slurp(b / e.path().filename()))
        {
          ++mismatched;
          failed += " " + verb + "/" + e.path().filename().string();
        }
      }
    }
  run_cli("presets --out " + (root / "p1").string());
  run_cli("presets --out " + (root / "p2").string());
  ++files;
  if (slurp(root / "p1" / "presets.json").empty() || slurp(root / "p1" / "presets.json") != slurp(root / "p2" / "presets.json"))
  {
    ++mismatched;
    failed += " presets";
  }
  fs::remove_all(root);
  return {mismatched == 0 && files > 0,
          fmt("%d files compared across 7 verbs, %d differ", files, mismatched) + failed};
}

} // namespace

int main()
{
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
    {"state-space goldens", state_goldens},
    {"MIS counting identity", mis_identity},
    {"service-model goldens", service_goldens},
    {"product-form validation", product_form},
    {"collision-probability oracle", collision_oracle},
    {"fixed-point robustness", fixed_point_robustness},
    {"starvation and limit behaviour", starvation},
    {"TCP-long reduction", tcp_reduction},
    {"flow simulator calibration", ps_calibration},
    {"delay cross-validation", delay_cross_validation},
    {"CLI determinism", cli_determinism},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k)
  {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try
    {
      o = criteria[k].second();
    }
    catch (const std::exception& e)
    {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += o.pass ? 0 : 1;
    std::printf("[%s] criterion %zu %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}

#include "cellwlan/config.hpp"

#include "cellwlan/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace cellwlan {

using nlohmann::json;

std::string_view to_string(TrafficMode m)
{
  switch (m)
  {
  case TrafficMode::Saturated:
    return "saturated";
  case TrafficMode::TcpLong:
    return "tcp-long";
  case TrafficMode::TcpShort:
    return "tcp-short";
  }
  return "?";
}

namespace {

constexpr double kMicro = 1e-6;

// Walks one JSON object, remembering which keys were read so anything left
// over can be rejected.
class Section
{
public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path))
  {
    if (!j_.is_object())
      throw ValidationError(path_, "must be an object");
  }

  bool has(const char* key) const { return j_.contains(key); }
  std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& raw(const char* key)
  {
    seen_.insert(key);
    return j_.at(key);
  }

  template <class T>
  std::optional<T> opt(const char* key)
  {
    if (!has(key))
      return std::nullopt;
    return convert<T>(raw(key), field(key));
  }

  template <class T>
  T get(const char* key, T fallback)
  {
    auto v = opt<T>(key);
    return v ? *v : fallback;
  }

  template <class T>
  T req(const char* key)
  {
    if (!has(key))
      throw ValidationError(field(key), "is required");
    return *opt<T>(key);
  }

  Section sub(const char* key)
  {
    return Section(raw(key), field(key));
  }

  void finish() const
  {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()))
        throw ValidationError(field(it.key().c_str()), "unknown key");
  }

  template <class T>
  static T convert(const json& v, const std::string& where)
  {
    if constexpr (std::is_same_v<T, bool>)
    {
      if (!v.is_boolean())
        throw ValidationError(where, "must be true or false");
      return v.get<bool>();
    }
    else if constexpr (std::is_same_v<T, std::string>)
    {
      if (!v.is_string())
        throw ValidationError(where, "must be a string");
      return v.get<std::string>();
    }
    else if constexpr (std::is_integral_v<T>)
    {
      if (!v.is_number_integer())
        throw ValidationError(where, "must be an integer");
      if constexpr (std::is_unsigned_v<T>)
      {
        if (v.is_number_unsigned())
          return v.get<T>();
        if (v.get<std::int64_t>() < 0)
          throw ValidationError(where, "must be >= 0");
      }
      return v.get<T>();
    }
    else if constexpr (std::is_floating_point_v<T>)
    {
      if (!v.is_number())
        throw ValidationError(where, "must be a number");
      return v.get<T>();
    }
    else
    {
      // std::vector<E>
      using E = typename T::value_type;
      if (!v.is_array())
        throw ValidationError(where, "must be an array");
      T out;
      for (std::size_t k = 0; k < v.size(); ++k)
        out.push_back(convert<E>(v[k], where + "[" + std::to_string(k) + "]"));
      return out;
    }
  }

private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Deployment chain_like(std::vector<Point> aps)
{
  Deployment d;
  d.carrier_sense_range = 100.0;
  d.num_channels = 1;
  for (std::size_t k = 0; k < aps.size(); ++k)
  {
    CellGeom c;
    c.id = static_cast<int>(k + 1);
    c.ap_position = aps[k];
    c.radius = 5.0;
    d.cells.push_back(c);
  }
  return d;
}

struct DeploymentParse
{
  std::string preset;
  std::optional<Deployment> deployment;
  ContentionGraph graph;
};

DeploymentParse parse_deployment(Section s)
{
  DeploymentParse out;
  if (s.has("preset"))
  {
    out.preset = s.req<std::string>("preset");
    out.deployment = preset_deployment(out.preset);
    if (!out.deployment)
      throw ValidationError(s.field("preset"), "unknown preset '" + out.preset + "'");
  }
  else if (s.has("edges") || s.has("num_cells"))
  {
    const auto n = s.req<int>("num_cells");
    if (n < 1)
      throw ValidationError(s.field("num_cells"), "must be >= 1");
    out.graph = ContentionGraph(static_cast<std::size_t>(n));
    const auto& edges = s.raw("edges");
    if (!edges.is_array())
      throw ValidationError(s.field("edges"), "must be an array of [a, b] cell pairs");
    for (std::size_t k = 0; k < edges.size(); ++k)
    {
      const std::string where = s.field("edges") + "[" + std::to_string(k) + "]";
      const auto pair = Section::convert<std::vector<int>>(edges[k], where);
      if (pair.size() != 2)
        throw ValidationError(where, "must be a pair of cell ids");
      for (int c : pair)
        if (c < 1 || c > n)
          throw ValidationError(where, "cell id " + std::to_string(c) + " outside 1.." + std::to_string(n));
      if (pair[0] == pair[1])
        throw ValidationError(where, "self-loop");
      out.graph.add_edge(static_cast<std::size_t>(pair[0] - 1), static_cast<std::size_t>(pair[1] - 1));
    }
  }
  else
  {
    Deployment d;
    d.carrier_sense_range = s.req<double>("carrier_sense_range_m");
    d.num_channels = s.get<int>("num_channels", 1);
    const auto& cells = s.raw("cells");
    if (!cells.is_array())
      throw ValidationError(s.field("cells"), "must be an array");
    for (std::size_t k = 0; k < cells.size(); ++k)
    {
      Section c(cells[k], s.field("cells") + "[" + std::to_string(k) + "]");
      CellGeom g;
      g.id = c.get<int>("id", static_cast<int>(k + 1));
      g.ap_position.x = c.req<double>("x_m");
      g.ap_position.y = c.req<double>("y_m");
      g.radius = c.req<double>("radius_m");
      g.channel = c.get<int>("channel", 1);
      g.node_count = c.get<int>("node_count", 2);
      c.finish();
      d.cells.push_back(g);
    }
    out.deployment = d;
  }
  s.finish();
  if (out.deployment)
  {
    out.deployment->validate();
    out.graph = build_contention_graph(*out.deployment);
  }
  return out;
}

MacPhyParams parse_mac_phy(Section s)
{
  MacPhyParams p;
  const auto preset = s.get<std::string>("preset", "dot11b-11mbps");
  if (!mac_phy_preset(preset, p))
    throw ValidationError(s.field("preset"), "unknown MAC/PHY preset '" + preset + "'");
  if (auto v = s.opt<double>("slot_us"))
    p.slot_time = *v * kMicro;
  if (auto v = s.opt<double>("sifs_us"))
    p.sifs = *v * kMicro;
  if (auto v = s.opt<double>("difs_us"))
    p.difs = *v * kMicro;
  if (auto v = s.opt<double>("overhead_us"))
    p.phy_mac_overhead_time = *v * kMicro;
  p.data_rate = s.get<double>("data_rate_bps", p.data_rate);
  p.control_rate = s.get<double>("control_rate_bps", p.control_rate);
  if (auto v = s.opt<double>("ack_bytes"))
    p.ack_size = *v * 8.0;
  if (auto v = s.opt<double>("payload_bytes"))
    p.payload_size = *v * 8.0;
  if (auto v = s.opt<double>("rts_bytes"))
    p.rts_size = *v * 8.0;
  if (auto v = s.opt<double>("cts_bytes"))
    p.cts_size = *v * 8.0;
  if (auto v = s.opt<std::string>("access_mode"))
  {
    if (*v == "basic")
      p.access_mode = AccessMode::Basic;
    else if (*v == "rts-cts")
      p.access_mode = AccessMode::RtsCts;
    else
      throw ValidationError(s.field("access_mode"), "must be 'basic' or 'rts-cts'");
  }
  s.finish();
  p.validate();
  return p;
}

std::vector<double> per_cell(Section& s, const char* list_key, const char* scalar_key, std::size_t cells)
{
  if (s.has(list_key) && s.has(scalar_key))
    throw ValidationError(s.field(scalar_key), std::string("conflicts with ") + list_key);
  if (s.has(list_key))
  {
    auto v = s.req<std::vector<double>>(list_key);
    if (v.size() != cells)
      throw ValidationError(s.field(list_key),
                            "expected " + std::to_string(cells) + " entries, got " + std::to_string(v.size()));
    return v;
  }
  if (s.has(scalar_key))
    return std::vector<double>(cells, s.req<double>(scalar_key));
  return {};
}

// Geometry carries per-cell node counts; custom adjacency defaults to 2.
std::vector<int> default_node_counts(const DeploymentParse& dep)
{
  if (!dep.deployment)
    return std::vector<int>(dep.graph.size(), 2);
  std::vector<int> v;
  for (const auto& c : dep.deployment->cells)
    v.push_back(c.node_count);
  return v;
}

TrafficConfig parse_traffic(Section s, const DeploymentParse& dep)
{
  TrafficConfig t;
  const std::size_t cells = dep.graph.size();
  const auto mode = s.req<std::string>("mode");
  if (mode == "saturated")
    t.mode = TrafficMode::Saturated;
  else if (mode == "tcp-long")
    t.mode = TrafficMode::TcpLong;
  else if (mode == "tcp-short")
    t.mode = TrafficMode::TcpShort;
  else
    throw ValidationError(s.field("mode"), "must be one of saturated, tcp-long, tcp-short");

  const auto counts = per_cell(s, "node_counts", "node_count", cells);
  if (!counts.empty())
  {
    for (std::size_t i = 0; i < counts.size(); ++i)
    {
      if (counts[i] < 1 || counts[i] != std::floor(counts[i]))
        throw ValidationError(s.field("node_counts") + "[" + std::to_string(i) + "]", "must be an integer >= 1");
      t.node_counts.push_back(static_cast<int>(counts[i]));
    }
  }
  else
  {
    t.node_counts = default_node_counts(dep);
  }

  const bool tcp = t.mode != TrafficMode::Saturated;
  auto bytes = [&](const char* key, double& out) {
    if (!s.has(key))
      return;
    if (!tcp)
      throw ValidationError(s.field(key), "only valid for tcp-long and tcp-short");
    const double v = s.req<double>(key);
    if (!(v > 0.0))
      throw ValidationError(s.field(key), "must be positive");
    out = v * 8.0;
  };
  if (tcp && (s.has("tcp_data_bytes") != s.has("tcp_ack_bytes")))
    throw ValidationError(s.field(s.has("tcp_data_bytes") ? "tcp_ack_bytes" : "tcp_data_bytes"),
                          "TCP DATA and ACK sizes must be given together");
  bytes("tcp_data_bytes", t.tcp_data_size);
  bytes("tcp_ack_bytes", t.tcp_ack_size);
  bytes("app_data_bytes", t.app_data_size);

  const bool short_flows = t.mode == TrafficMode::TcpShort;
  for (const char* key : {"arrival_rates", "arrival_rate", "mean_flow_bytes", "mean_service_s", "single_cell_rate_bps",
                          "service_model"})
    if (s.has(key) && !short_flows)
      throw ValidationError(s.field(key), "only valid for tcp-short");
  if (short_flows)
  {
    t.arrival_rates = per_cell(s, "arrival_rates", "arrival_rate", cells);
    if (t.arrival_rates.empty())
      throw ValidationError(s.field("arrival_rates"), "is required for tcp-short");
    if (s.has("mean_flow_bytes") && s.has("mean_service_s"))
      throw ValidationError(s.field("mean_service_s"), "conflicts with mean_flow_bytes");
    if (auto v = s.opt<double>("mean_flow_bytes"))
    {
      if (!(*v > 0.0))
        throw ValidationError(s.field("mean_flow_bytes"), "must be positive");
      t.mean_flow_size = *v * 8.0;
    }
    if (auto v = s.opt<double>("mean_service_s"))
    {
      if (!(*v > 0.0))
        throw ValidationError(s.field("mean_service_s"), "must be positive");
      t.mean_service_time = *v;
    }
    if (auto v = s.opt<double>("single_cell_rate_bps"))
    {
      if (!(*v > 0.0))
        throw ValidationError(s.field("single_cell_rate_bps"), "must be positive");
      t.single_cell_rate = *v;
    }
    const auto model = s.get<std::string>("service_model", "model2");
    if (model == "model1")
      t.service_models = {ServiceModel::Model1};
    else if (model == "model2")
      t.service_models = {ServiceModel::Model2};
    else if (model == "both")
      t.service_models = {ServiceModel::Model1, ServiceModel::Model2};
    else
      throw ValidationError(s.field("service_model"), "must be model1, model2 or both");
    for (std::size_t i = 0; i < cells; ++i)
      if (!(t.arrival_rates[i] >= 0.0))
        throw ValidationError(s.field("arrival_rates") + "[" + std::to_string(i) + "]", "must be >= 0");
  }
  s.finish();
  return t;
}

FixedPointConfig parse_solver(Section s)
{
  FixedPointConfig c;
  c.tolerance = s.get<double>("tolerance", c.tolerance);
  c.damping = s.get<double>("damping", c.damping);
  c.max_iterations = s.get<int>("max_iterations", c.max_iterations);
  c.restarts = s.get<int>("restarts", c.restarts);
  c.seed = s.get<std::uint64_t>("seed", c.seed);
  c.state_cap = s.get<std::size_t>("state_cap", c.state_cap);
  c.initial_beta = s.get<std::vector<double>>("initial_beta", {});
  s.finish();
  c.validate();
  return c;
}

SimConfig parse_sim(Section s)
{
  SimConfig c;
  c.seed = s.get<std::uint64_t>("seed", c.seed);
  c.flows_per_cell = s.get<std::size_t>("flows_per_cell", c.flows_per_cell);
  c.warmup_flows = s.get<std::size_t>("warmup_flows", c.warmup_flows);
  c.replications = s.get<int>("replications", c.replications);
  c.runaway_threshold = s.get<std::size_t>("runaway_threshold", c.runaway_threshold);
  s.finish();
  c.validate();
  return c;
}

SweepConfig parse_sweep(Section s)
{
  SweepConfig c;
  for (double b : s.get<std::vector<double>>("payload_bytes", {}))
  {
    if (!(b > 0.0))
      throw ValidationError(s.field("payload_bytes"), "payloads must be positive");
    c.payload_sizes.push_back(b * 8.0);
  }
  c.mean_service_times = s.get<std::vector<double>>("mean_service_s", {});
  for (double v : c.mean_service_times)
    if (!(v > 0.0))
      throw ValidationError(s.field("mean_service_s"), "values must be positive");
  s.finish();
  return c;
}

OutputConfig parse_output(Section s)
{
  OutputConfig c;
  c.dir = s.get<std::string>("dir", c.dir);
  const auto fmt = s.get<std::string>("format", "csv");
  if (fmt == "csv")
    c.format = OutputFormat::Csv;
  else if (fmt == "doc")
    c.format = OutputFormat::Doc;
  else
    throw ValidationError(s.field("format"), "must be csv or doc");
  s.finish();
  return c;
}

} // namespace

AnalysisConfig load_config(const json& input)
{
  const json* docp = &input;
  if (input.is_object() && input.contains("meta") && input.contains("config"))
    docp = &input.at("config");
  const json& doc = *docp;

  Section root(doc, "");
  AnalysisConfig cfg;
  cfg.source = doc;

  if (!root.has("deployment"))
    throw ValidationError("deployment", "is required");
  auto dep = parse_deployment(root.sub("deployment"));
  cfg.preset = dep.preset;
  cfg.deployment = dep.deployment;
  cfg.graph = dep.graph;

  cfg.mac_phy = root.has("mac_phy") ? parse_mac_phy(root.sub("mac_phy")) : MacPhyParams::dot11b_11mbps();

  if (root.has("backoff"))
  {
    auto s = root.sub("backoff");
    cfg.cw_min = s.get<int>("cw_min", cfg.cw_min);
    cfg.cw_max = s.get<int>("cw_max", cfg.cw_max);
    const int k = s.get<int>("retry_limit", 7);
    s.finish();
    cfg.backoff = mean_backoffs(cfg.cw_min, cfg.cw_max, k);
  }
  else
  {
    cfg.backoff = mean_backoffs(cfg.cw_min, cfg.cw_max, 7);
  }

  if (root.has("traffic"))
    cfg.traffic = parse_traffic(root.sub("traffic"), dep);
  else
    cfg.traffic.node_counts = default_node_counts(dep);

  if (root.has("solver"))
    cfg.solver = parse_solver(root.sub("solver"));
  if (root.has("sim"))
    cfg.sim = parse_sim(root.sub("sim"));
  if (root.has("sweep"))
    cfg.sweep = parse_sweep(root.sub("sweep"));
  if (root.has("output"))
    cfg.output = parse_output(root.sub("output"));
  root.finish();

  if (cfg.traffic.mode == TrafficMode::TcpShort && !cfg.traffic.mean_flow_size && !cfg.traffic.mean_service_time &&
      cfg.sweep.mean_service_times.empty())
    throw ValidationError("traffic.mean_service_s", "tcp-short needs mean_flow_bytes, mean_service_s or sweep.mean_service_s");
  if (!cfg.solver.initial_beta.empty() && cfg.solver.initial_beta.size() != cfg.graph.size())
    throw ValidationError("solver.initial_beta", "expected one entry per cell");
  return cfg;
}

json parse_config_text(std::string_view text)
{
  try
  {
    return json::parse(text.begin(), text.end());
  }
  catch (const json::parse_error& e)
  {
    // Translate the byte offset into line:column.
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t k = 0; k < stop; ++k)
    {
      if (text[k] == '\n')
      {
        ++line;
        col = 1;
      }
      else
      {
        ++col;
      }
    }
    throw ValidationError("line " + std::to_string(line) + ", column " + std::to_string(col), "JSON syntax error");
  }
}

AnalysisConfig load_config_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ValidationError(path, "cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  try
  {
    return load_config(parse_config_text(ss.str()));
  }
  catch (const ValidationError& e)
  {
    throw ValidationError(path + ": " + e.field(), e.message());
  }
}

void override_seed(json& doc, std::uint64_t seed)
{
  json* target = &doc;
  if (doc.is_object() && doc.contains("meta") && doc.contains("config"))
    target = &doc["config"];
  if (!target->is_object())
    return;
  (*target)["solver"]["seed"] = seed;
  (*target)["sim"]["seed"] = seed;
}

std::vector<std::string> preset_names()
{
  return {"two-cell", "three-chain", "three-clique"};
}

std::optional<Deployment> preset_deployment(std::string_view name)
{
  if (name == "two-cell")
    return chain_like({{0.0, 0.0}, {50.0, 0.0}});
  if (name == "three-chain")
    return chain_like({{0.0, 0.0}, {80.0, 0.0}, {160.0, 0.0}});
  if (name == "three-clique")
    return chain_like({{0.0, 0.0}, {50.0, 0.0}, {25.0, 25.0 * std::sqrt(3.0)}});
  return std::nullopt;
}

json deployment_to_json(const Deployment& d)
{
  json cells = json::array();
  for (const auto& c : d.cells)
    cells.push_back({{"id", c.id},
                     {"x_m", c.ap_position.x},
                     {"y_m", c.ap_position.y},
                     {"radius_m", c.radius},
                     {"channel", c.channel},
                     {"node_count", c.node_count}});
  return {{"carrier_sense_range_m", d.carrier_sense_range}, {"num_channels", d.num_channels}, {"cells", cells}};
}

std::string config_hash(const json& doc)
{
  const std::string text = doc.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text)
  {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

} // namespace cellwlan

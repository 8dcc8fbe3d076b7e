#pragma once

#include "cellwlan/dcf.hpp"
#include "cellwlan/flows.hpp"
#include "cellwlan/multicell.hpp"
#include "cellwlan/topology.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cellwlan {

enum class TrafficMode
{
  Saturated,
  TcpLong,
  TcpShort,
};

std::string_view to_string(TrafficMode m);

enum class OutputFormat
{
  Csv,
  Doc,
};

struct TrafficConfig
{
  TrafficMode mode = TrafficMode::Saturated;
  std::vector<int> node_counts; // resolved, one per cell
  double tcp_data_size = 1040 * 8.0; // bits, TCP DATA plus IP header
  double tcp_ack_size = 40 * 8.0;    // bits, TCP ACK plus IP header
  double app_data_size = 1000 * 8.0; // bits of application data per TCP DATA packet
  std::vector<double> arrival_rates; // flows/s, one per cell
  std::optional<double> mean_flow_size;     // bits
  std::optional<double> mean_service_time;  // E[V]/Theta, seconds
  std::optional<double> single_cell_rate;   // bits/s override for Theta
  std::vector<ServiceModel> service_models{ServiceModel::Model2};
};

struct SweepConfig
{
  std::vector<double> payload_sizes;      // bits
  std::vector<double> mean_service_times; // seconds
};

struct OutputConfig
{
  std::string dir = "out";
  OutputFormat format = OutputFormat::Csv;
};

struct AnalysisConfig
{
  nlohmann::json source; // normalized config document, hashed and embedded in results
  std::string preset;    // empty unless the deployment is a preset
  std::optional<Deployment> deployment; // absent for custom adjacency
  ContentionGraph graph;
  MacPhyParams mac_phy;
  int cw_min = 32;
  int cw_max = 1024;
  BackoffParams backoff;
  TrafficConfig traffic;
  FixedPointConfig solver;
  SimConfig sim;
  SweepConfig sweep;
  OutputConfig output;
};

// Parses and validates a config document. Unknown keys are rejected; errors
// are ValidationError with a dotted field path. A result document (one that
// carries a "config" member next to "meta") is accepted and its embedded
// config is used.
AnalysisConfig load_config(const nlohmann::json& doc);

// Reads a file; JSON syntax errors are reported with line and column.
AnalysisConfig load_config_file(const std::string& path);
nlohmann::json parse_config_text(std::string_view text);

// Applies a --seed override to the document before loading.
void override_seed(nlohmann::json& doc, std::uint64_t seed);

std::vector<std::string> preset_names();
std::optional<Deployment> preset_deployment(std::string_view name);

// Explicit-geometry form accepted by the "deployment" section.
nlohmann::json deployment_to_json(const Deployment& d);

// FNV-1a over the compact dump of the normalized document.
std::string config_hash(const nlohmann::json& doc);

} // namespace cellwlan

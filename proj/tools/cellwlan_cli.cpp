// cellwlan: cell-level throughput and delay analysis of CSMA WLANs.
#include "cellwlan/analyses.hpp"
#include "cellwlan/config.hpp"
#include "cellwlan/errors.hpp"
#include "cellwlan/report.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitFailure = 2;

nlohmann::json read_doc(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw cellwlan::ValidationError(path, "cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  try
  {
    return cellwlan::parse_config_text(ss.str());
  }
  catch (const cellwlan::ValidationError& e)
  {
    throw cellwlan::ValidationError(path + ": " + e.field(), e.message());
  }
}

int list_presets(const std::string& out_dir)
{
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& name : cellwlan::preset_names())
    doc[name] = cellwlan::deployment_to_json(*cellwlan::preset_deployment(name));
  if (out_dir.empty())
  {
    for (const auto& name : cellwlan::preset_names())
    {
      const auto g = cellwlan::build_contention_graph(*cellwlan::preset_deployment(name));
      std::cout << name << ": " << g.size() << " cells, edges";
      for (const auto& [i, j] : g.edges())
        std::cout << ' ' << g.label(i) << '-' << g.label(j);
      std::cout << '\n';
    }
    std::cout << doc.dump(2) << '\n';
    return 0;
  }
  std::filesystem::create_directories(out_dir);
  std::ofstream(std::filesystem::path(out_dir) / "presets.json", std::ios::binary) << doc.dump(2) << '\n';
  std::cout << (std::filesystem::path(out_dir) / "presets.json").string() << '\n';
  return 0;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Cell-level throughput and flow-delay analysis for multi-cell CSMA WLANs"};
  app.set_version_flag("--version", std::string(cellwlan::kVersion));

  std::string verb;
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string format;
  std::vector<double> payload_bytes;

  app.add_option("verb", verb, "saturation | tcp-long | tcp-short | infinite-rho | sweep | validate | presets")
    ->required()
    ->check(CLI::IsMember(
      {"saturation", "tcp-long", "tcp-short", "infinite-rho", "sweep", "validate", "presets"}));
  app.add_option("--config", config_path, "config document (JSON)");
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--seed", seed, "seed for restarts and flow simulation");
  app.add_option("--format", format, "csv or doc (overrides output.format)")->check(CLI::IsMember({"csv", "doc"}));
  app.add_option("--payload-bytes", payload_bytes, "payload list for sweep (overrides sweep.payload_bytes)")
    ->delimiter(',');

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e)
  {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try
  {
    if (verb == "presets")
      return list_presets(out_dir);
    if (config_path.empty())
      throw cellwlan::ValidationError("--config", "is required for " + verb);

    auto doc = read_doc(config_path);
    if (seed)
      cellwlan::override_seed(doc, *seed);
    cellwlan::AnalysisConfig cfg;
    try
    {
      cfg = cellwlan::load_config(doc);
    }
    catch (const cellwlan::ValidationError& e)
    {
      throw cellwlan::ValidationError(config_path + ": " + e.field(), e.message());
    }
    if (!out_dir.empty())
      cfg.output.dir = out_dir;
    if (!format.empty())
      cfg.output.format = format == "doc" ? cellwlan::OutputFormat::Doc : cellwlan::OutputFormat::Csv;

    cellwlan::ResultBundle bundle;
    if (verb == "sweep" && !payload_bytes.empty())
    {
      for (auto& p : payload_bytes)
        p *= 8.0;
      bundle = cellwlan::run_payload_sweep(cfg, payload_bytes);
    }
    else
    {
      bundle = cellwlan::run_verb(verb, cfg);
    }

    for (const auto& w : bundle.warnings)
      std::cerr << "warning: " << w << '\n';
    for (const auto& p : cellwlan::write_bundle(bundle, cfg.output.dir, cfg.output.format))
      std::cout << p.string() << '\n';
    return 0;
  }
  catch (const cellwlan::ValidationError& e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  catch (const std::exception& e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

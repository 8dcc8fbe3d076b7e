#pragma once

#include "cellwlan/config.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cellwlan {

inline constexpr std::string_view kVersion = "0.1.0";

// Empty cell, flag, integer, real or text.
using Value = std::variant<std::monostate, bool, std::int64_t, double, std::string>;

struct Table
{
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Value>> rows;

  void add(std::vector<Value> row);
  std::size_t column(std::string_view name) const; // throws if absent
};

struct ResultBundle
{
  std::string verb;
  std::string config_hash;
  std::uint64_t seed = 0;
  nlohmann::json config;
  std::vector<std::string> warnings;
  std::vector<Table> tables;

  const Table& table(std::string_view name) const; // throws if absent
};

// Shortest text that reads back to the same double.
std::string format_number(double v);
std::string format_value(const Value& v);

// RFC 4180: fields with commas, quotes or line breaks are quoted; CRLF rows.
std::string csv_field(std::string_view s);
std::string to_csv(const Table& t);

nlohmann::json to_json(const ResultBundle& b);

// Csv: one file per table plus meta.csv, warnings.csv and config.json.
// Doc: a single result.json. Returns the paths written.
std::vector<std::filesystem::path> write_bundle(const ResultBundle& b, const std::filesystem::path& dir,
                                                OutputFormat format);

} // namespace cellwlan

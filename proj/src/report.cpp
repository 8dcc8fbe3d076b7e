#include "cellwlan/report.hpp"

#include "cellwlan/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace cellwlan {

using nlohmann::json;

void Table::add(std::vector<Value> row)
{
  if (row.size() != columns.size())
    throw std::logic_error("table " + name + ": row width " + std::to_string(row.size()) + " != " +
                           std::to_string(columns.size()));
  rows.push_back(std::move(row));
}

std::size_t Table::column(std::string_view col) const
{
  for (std::size_t k = 0; k < columns.size(); ++k)
    if (columns[k] == col)
      return k;
  throw std::out_of_range("table " + name + " has no column " + std::string(col));
}

const Table& ResultBundle::table(std::string_view name) const
{
  for (const auto& t : tables)
    if (t.name == name)
      return t;
  throw std::out_of_range("no table " + std::string(name));
}

std::string format_number(double v)
{
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_value(const Value& v)
{
  struct Visitor
  {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const { return format_number(d); }
    std::string operator()(const std::string& s) const { return s; }
  };
  return std::visit(Visitor{}, v);
}

std::string csv_field(std::string_view s)
{
  if (s.find_first_of(",\"\r\n") == std::string_view::npos)
    return std::string(s);
  std::string out = "\"";
  for (char c : s)
  {
    if (c == '"')
      out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string to_csv(const Table& t)
{
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k)
    {
      if (k)
        out += ',';
      out += csv_field(cells[k]);
    }
    out += "\r\n";
  };
  line(t.columns);
  std::vector<std::string> cells;
  for (const auto& row : t.rows)
  {
    cells.clear();
    for (const auto& v : row)
      cells.push_back(format_value(v));
    line(cells);
  }
  return out;
}

namespace {

json value_json(const Value& v)
{
  struct Visitor
  {
    json operator()(std::monostate) const { return nullptr; }
    json operator()(bool b) const { return b; }
    json operator()(std::int64_t i) const { return i; }
    json operator()(double d) const { return std::isfinite(d) ? json(d) : json(format_number(d)); }
    json operator()(const std::string& s) const { return s; }
  };
  return std::visit(Visitor{}, v);
}

json meta_json(const ResultBundle& b)
{
  return {{"tool", "cellwlan"},
          {"version", std::string(kVersion)},
          {"verb", b.verb},
          {"config_hash", b.config_hash},
          {"seed", b.seed}};
}

void write_file(const std::filesystem::path& p, const std::string& text)
{
  std::ofstream out(p, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write " + p.string());
  out << text;
  if (!out)
    throw std::runtime_error("write failed for " + p.string());
}

} // namespace

json to_json(const ResultBundle& b)
{
  json tables = json::object();
  for (const auto& t : b.tables)
  {
    json rows = json::array();
    for (const auto& r : t.rows)
    {
      json row = json::array();
      for (const auto& v : r)
        row.push_back(value_json(v));
      rows.push_back(std::move(row));
    }
    tables[t.name] = {{"columns", t.columns}, {"rows", std::move(rows)}};
  }
  return {{"meta", meta_json(b)}, {"config", b.config}, {"warnings", b.warnings}, {"tables", std::move(tables)}};
}

std::vector<std::filesystem::path> write_bundle(const ResultBundle& b, const std::filesystem::path& dir,
                                                OutputFormat format)
{
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& name, const std::string& text) {
    written.push_back(dir / name);
    write_file(written.back(), text);
  };

  if (format == OutputFormat::Doc)
  {
    emit("result.json", to_json(b).dump(2) + "\n");
    return written;
  }

  Table meta{"meta", {"key", "value"}, {}};
  const json m = meta_json(b);
  for (const auto& [k, v] : m.items())
    meta.add({k, v.is_string() ? v.get<std::string>() : v.dump()});
  emit("meta.csv", to_csv(meta));

  Table warn{"warnings", {"warning"}, {}};
  for (const auto& w : b.warnings)
    warn.add({w});
  emit("warnings.csv", to_csv(warn));

  emit("config.json", b.config.dump(2) + "\n");
  for (const auto& t : b.tables)
    emit(t.name + ".csv", to_csv(t));
  return written;
}

} // namespace cellwlan

#include "factorbench/report.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>

#include "factorbench/error.hpp"
#include "text.hpp"

namespace fb {

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw DomainError("table '" + name + "': row has " + std::to_string(row.size()) +
                      " cells, expected " + std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

OutputFormat parse_output_format(std::string_view text) {
  if (text == "csv") return OutputFormat::Csv;
  if (text == "json") return OutputFormat::Json;
  throw ConfigError("unknown output format '" + std::string(text) + "' (expected csv|json)");
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string cell_text(const Cell& c) {
  struct Visitor {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(const std::string& s) const { return quote(s); }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return text::sig10(v); }
  };
  return std::visit(Visitor{}, c);
}

nlohmann::ordered_json cell_json(const Cell& c) {
  struct Visitor {
    nlohmann::ordered_json operator()(std::monostate) const { return nullptr; }
    nlohmann::ordered_json operator()(const std::string& s) const { return s; }
    nlohmann::ordered_json operator()(std::int64_t v) const { return v; }
    nlohmann::ordered_json operator()(double v) const {
      if (!std::isfinite(v)) return text::sig10(v);
      // Same rounding as the CSV output.
      return std::stod(text::sig10(v));
    }
  };
  return std::visit(Visitor{}, c);
}

}  // namespace

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out.push_back(',');
    out += quote(table.columns[i]);
  }
  out.push_back('\n');
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out.push_back(',');
      out += cell_text(row[i]);
    }
    out.push_back('\n');
  }
  return out;
}

std::string to_json(const Table& table) {
  nlohmann::ordered_json j;
  j["table"] = table.name;
  j["columns"] = table.columns;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    auto r = nlohmann::ordered_json::array();
    for (const auto& c : row) r.push_back(cell_json(c));
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

std::filesystem::path write_table(const std::filesystem::path& dir, const Table& table,
                                  OutputFormat format) {
  const auto path = dir / (table.name + (format == OutputFormat::Csv ? ".csv" : ".json"));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << (format == OutputFormat::Csv ? to_csv(table) : to_json(table));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
  return path;
}

}  // namespace fb

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace fb {

// Empty cell, text, integer or real. Reals are written with 10 significant
// digits in every format.
using Cell = std::variant<std::monostate, std::string, std::int64_t, double>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
};

enum class OutputFormat { Csv, Json };
[[nodiscard]] OutputFormat parse_output_format(std::string_view text);

[[nodiscard]] std::string to_csv(const Table& table);
[[nodiscard]] std::string to_json(const Table& table);

// Writes <dir>/<name>.csv or .json and returns the path.
std::filesystem::path write_table(const std::filesystem::path& dir, const Table& table,
                                  OutputFormat format);

}  // namespace fb

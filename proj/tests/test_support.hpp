#pragma once

// Test-only helpers: random instances and temporary directories.

#include <Eigen/Dense>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "factorbench/dataset.hpp"
#include "factorbench/estimators.hpp"
#include "factorbench/pipeline.hpp"

namespace fbtest {

inline fb::DesignSystem random_design(std::mt19937_64& rng, Eigen::Index n, Eigen::Index p,
                                      double noise = 0.05) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd X(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < p; ++j) X(i, j) = 0.05 * normal(rng);
  }
  Eigen::VectorXd theta(p);
  for (Eigen::Index j = 0; j < p; ++j) theta(j) = normal(rng);
  Eigen::VectorXd y = X * theta;
  for (Eigen::Index i = 0; i < n; ++i) y(i) += noise * normal(rng);
  return fb::make_design(std::move(y), std::move(X));
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("fbtest_" + tag + "_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  [[nodiscard]] std::filesystem::path operator/(const std::string& leaf) const {
    return path_ / leaf;
  }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

// Consecutive months starting at `first`.
inline std::vector<fb::Month> month_range(fb::Month first, int count) {
  std::vector<fb::Month> out;
  for (int i = 0; i < count; ++i) out.push_back(fb::Month::from_ordinal(first.ordinal() + i));
  return out;
}

inline fb::FactorSeries flat_factors(fb::Month first, int count, double rf = 0.0) {
  fb::FactorSeries f;
  f.months = month_range(first, count);
  for (int i = 0; i < count; ++i) {
    f.mktrf.push_back(0.01 * ((i * 7) % 11 - 5));
    f.smb.push_back(0.003 * ((i * 5) % 7 - 3));
    f.hml.push_back(0.002 * ((i * 3) % 5 - 2));
    f.rf.push_back(rf);
  }
  return f;
}

// Minimal CSV reader for checking emitted tables (handles quoted cells).
inline std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& line : read_lines(path)) {
    std::vector<std::string> cells(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          cells.back().push_back('"');
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          cells.back().push_back(c);
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        cells.emplace_back();
      } else {
        cells.back().push_back(c);
      }
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

// Header line, then per row: first cell followed by N (number), E (empty) or
// S (text) for each remaining cell.
inline std::vector<std::string> table_schema(const std::filesystem::path& csv) {
  const auto rows = read_csv(csv);
  std::vector<std::string> out;
  if (rows.empty()) return out;
  std::string header;
  for (std::size_t i = 0; i < rows[0].size(); ++i) {
    if (i) header += ",";
    header += rows[0][i];
  }
  out.push_back(header);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    std::string line = rows[r][0];
    for (std::size_t c = 1; c < rows[r].size(); ++c) {
      const auto& cell = rows[r][c];
      char kind = 'S';
      if (cell.empty()) {
        kind = 'E';
      } else {
        char* end = nullptr;
        std::strtod(cell.c_str(), &end);
        if (end == cell.c_str() + cell.size()) kind = 'N';
      }
      line += ",";
      line += kind;
    }
    out.push_back(line);
  }
  return out;
}

inline std::vector<std::string> golden_schema(const std::string& name) {
  std::vector<std::string> out;
  for (auto& line : read_lines(std::filesystem::path(FB_TEST_DATA_DIR) / "golden" / name)) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

// Simulated data directory written through the `simulate` command.
inline void simulate_into(const std::filesystem::path& out, const std::string& spec_text) {
  const auto spec = out.parent_path() / (out.filename().string() + ".spec");
  write_file(spec, spec_text);
  fb::RunConfig config;
  config.set("spec", spec.string());
  config.set("out", out.string());
  (void)fb::cmd_simulate(config);
}

// Every regular file under `dir`, relative path -> bytes.
inline std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) {
      out[std::filesystem::relative(e.path(), dir).string()] = read_file(e.path());
    }
  }
  return out;
}

// estimate, rank and both compare protocols over `data`, all into `out`.
inline void run_table_commands(const std::filesystem::path& data,
                               const std::filesystem::path& out) {
  auto base = [&] {
    fb::RunConfig c;
    c.set("data", data.string());
    c.set("out", out.string());
    return c;
  };
  auto estimate = base();
  estimate.set("model", "capm");
  estimate.set("kind", "both");
  (void)fb::cmd_estimate(estimate);
  (void)fb::cmd_rank(base());
  (void)fb::cmd_compare(base());
  auto loocv = base();
  loocv.set("protocol", "loocv");
  (void)fb::cmd_compare(loocv);
}

inline const char* kShapeGoldens[] = {"estimates_summary", "extremes_discrete",
                                      "correlation_discrete", "compare_oos_discrete",
                                      "compare_loocv_discrete"};

}  // namespace fbtest

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "factorbench/dataset.hpp"
#include "factorbench/evaluation.hpp"
#include "factorbench/report.hpp"
#include "factorbench/synth.hpp"

namespace fb {

// Flat key/value settings. Keys are the long CLI flag names without dashes
// ("required-len", "prior-panel", ...). Files hold one `key = value` per
// line; '#' starts a comment.
class RunConfig {
 public:
  void set(std::string key, std::string value);
  // Values already set take precedence over the file.
  void merge_file(const std::filesystem::path& path);

  [[nodiscard]] bool has(std::string_view key) const;
  [[nodiscard]] std::optional<std::string> get(std::string_view key) const;
  [[nodiscard]] std::string require(std::string_view key) const;
  [[nodiscard]] std::string get_or(std::string_view key, std::string fallback) const;
  [[nodiscard]] double get_double(std::string_view key, double fallback) const;
  [[nodiscard]] long long get_int(std::string_view key, long long fallback) const;
  [[nodiscard]] bool get_bool(std::string_view key, bool fallback) const;

  [[nodiscard]] const std::map<std::string, std::string, std::less<>>& values() const {
    return values_;
  }

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

[[nodiscard]] std::map<std::string, std::string, std::less<>> parse_key_values(
    const std::filesystem::path& path);

// Directory written by `ingest` or `simulate`: panel.csv, factors.csv (decimal)
// and meta.cfg with the window bounds.
struct DataDir {
  std::filesystem::path root;
  std::vector<RawRecord> records;
  FactorSeries factors;
  Window window;
  Month split;
  int required_len = 0;

  [[nodiscard]] AlignedPanel panel(ReturnKind kind) const;
  // early = months <= split, late = the rest.
  [[nodiscard]] std::pair<AlignedPanel, AlignedPanel> split_panels(ReturnKind kind) const;
};

[[nodiscard]] DataDir load_data_dir(const std::filesystem::path& dir);
void write_data_dir(const std::filesystem::path& dir, std::span<const RawRecord> records,
                    const FactorSeries& factors, Window window, Month split, int required_len);

[[nodiscard]] SynthSpec synth_spec_from_config(const RunConfig& config);

struct CommandResult {
  int exit_code = 0;
  std::size_t exclusions = 0;
  std::vector<std::filesystem::path> outputs;
};

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitStrictExclusions = 3;

CommandResult cmd_ingest(const RunConfig& config);
CommandResult cmd_estimate(const RunConfig& config);
CommandResult cmd_rank(const RunConfig& config);
CommandResult cmd_compare(const RunConfig& config);
CommandResult cmd_normality(const RunConfig& config);
CommandResult cmd_simulate(const RunConfig& config);

// Dispatches by name; throws ConfigError for an unknown command.
CommandResult run_command(std::string_view name, const RunConfig& config);

// Table builders shared by the commands and their tests.
struct MethodChoice {
  std::string name;  // CLI spelling, e.g. "bayes-leb"
  FitConfig fit;
};
[[nodiscard]] MethodChoice parse_method(std::string_view name, const RunConfig& config);

[[nodiscard]] Table describe_table(const std::string& name,
                                   const std::vector<std::string>& columns,
                                   const std::vector<std::vector<double>>& samples);
[[nodiscard]] Table histogram_table(const std::string& name, std::span<const double> values);
[[nodiscard]] Table comparison_summary_table(const std::string& name,
                                             const std::vector<ComparisonReport>& reports);

}  // namespace fb

#pragma once

#include <Eigen/Dense>
#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "factorbench/returns.hpp"

namespace fb {

struct RawRecord {
  Month month;
  std::string ticker;
  std::string permno;
  std::string cusip;
  double ret = 0.0;     // decimal discrete return
  std::size_t line = 0; // source line, 0 when constructed in memory
};

struct IdentityKey {
  std::string permno;
  std::string cusip;
  auto operator<=>(const IdentityKey&) const = default;
};

struct Identity {
  std::string label;
  IdentityKey key;
  bool operator==(const Identity&) const = default;
};

struct FactorSeries {
  std::vector<Month> months;
  std::vector<double> mktrf;
  std::vector<double> smb;
  std::vector<double> hml;
  std::vector<double> rf;

  [[nodiscard]] std::size_t size() const { return months.size(); }
  void validate() const;
  // Sub-range [first, last] of months; throws if not covered.
  [[nodiscard]] FactorSeries slice(Month first, Month last) const;
};

struct Window {
  Month start;
  Month end;
  [[nodiscard]] int length() const { return months_between_inclusive(start, end); }
};

// Per-month view of stock excess returns joined with the factor series.
// Row i of `excess` / `returns` belongs to stocks[i], column t to months[t].
struct AlignedPanel {
  std::vector<Month> months;
  std::vector<Identity> stocks;
  Eigen::MatrixXd excess;   // R - R_f in `kind`
  Eigen::MatrixXd returns;  // R in `kind`
  FactorSeries factors;
  ReturnKind kind = ReturnKind::Discrete;

  [[nodiscard]] std::size_t stock_count() const { return stocks.size(); }
  [[nodiscard]] std::size_t month_count() const { return months.size(); }
  [[nodiscard]] std::optional<std::size_t> find(std::string_view label) const;
  // Throws LookupError for an unknown label.
  [[nodiscard]] std::size_t index_of(std::string_view label) const;
  [[nodiscard]] AlignedPanel select_months(std::size_t first, std::size_t count) const;
};

// key -> Identity. Label is the ticker of the key's earliest record when that
// ticker labels exactly one key, otherwise ticker#k with k the 1-based
// position of the key among same-ticker keys in (permno, cusip) order.
[[nodiscard]] std::map<IdentityKey, Identity> assign_identities(
    std::span<const RawRecord> records);

struct DroppedStock {
  Identity identity;
  int months_observed = 0;
  std::string reason;
};

struct PanelBuildReport {
  std::size_t records_in_window = 0;
  std::size_t stocks_total = 0;
  std::vector<Identity> kept;
  std::vector<DroppedStock> dropped;
};

[[nodiscard]] AlignedPanel build_panel(std::span<const RawRecord> records,
                                       const FactorSeries& factors, Window window,
                                       int required_len, ReturnKind kind,
                                       PanelBuildReport* report = nullptr);

// early: months <= boundary, late: months > boundary.
[[nodiscard]] std::pair<AlignedPanel, AlignedPanel> split_panel(const AlignedPanel& panel,
                                                                Month boundary);

// Records that reproduce `panel` under build_panel (discrete raw returns, one
// row per stock-month, ticker = identity label).
[[nodiscard]] std::vector<RawRecord> panel_records(std::span<const RawRecord> records,
                                                   const AlignedPanel& panel);

// CSV readers. Errors name the file and line.
[[nodiscard]] std::vector<RawRecord> load_panel_file(const std::filesystem::path& path);
[[nodiscard]] FactorSeries load_factor_file(const std::filesystem::path& path, bool percent);

struct TbillRate {
  Month month;
  double monthly_rate = 0.0;  // decimal, de-annualized
};
// `date,rate` with rate in annualized percent; converted by /12/100.
[[nodiscard]] std::vector<TbillRate> load_tbill_file(const std::filesystem::path& path);
// Replaces factors.rf by the T-bill series for every factor month.
void apply_tbill(FactorSeries& factors, std::span<const TbillRate> rates);

void write_panel_file(const std::filesystem::path& path, std::span<const RawRecord> records);
// Decimal values, YYYYMM dates; reload with percent = false.
void write_factor_file(const std::filesystem::path& path, const FactorSeries& factors);

}  // namespace fb

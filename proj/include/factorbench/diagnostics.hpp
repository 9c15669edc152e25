#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "factorbench/dataset.hpp"
#include "factorbench/estimators.hpp"

namespace fb {

struct ShapiroWilkResult {
  double w_stat = 0.0;   // (0, 1]
  double p_value = 0.0;  // [0, 1]
};

// Shapiro-Wilk W with Royston's (AS R94) coefficient and p-value
// approximations. Supports 3 <= n <= 5000.
[[nodiscard]] ShapiroWilkResult shapiro_wilk(std::span<const double> x);

struct NormalityResult {
  Identity identity;
  ShapiroWilkResult result;
};

// F = ((rss_r - rss_f) / q) / (rss_f / (n - p_full)).
[[nodiscard]] double f_statistic(const FitResult& full, const FitResult& restricted,
                                 Eigen::Index n, Eigen::Index p_full, Eigen::Index q);

// Joint significance of all slopes: full OLS fit against intercept-only.
[[nodiscard]] double slope_f_statistic(const DesignSystem& d);

struct DescriptiveStats {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double mean = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

// Quartiles interpolate linearly between order statistics at 1 + (N - 1) q.
[[nodiscard]] DescriptiveStats describe(std::span<const double> values);
[[nodiscard]] double quantile(std::span<const double> sorted, double q);

enum class RankDirection { Ascending, Descending };

struct RankEntry {
  Identity identity;
  double value = 0.0;
  double rank = 0.0;
};

// Entries sorted by rank, ties by label. Tied values share their average rank.
struct RankVector {
  std::vector<RankEntry> entries;
  [[nodiscard]] std::size_t size() const { return entries.size(); }
};

[[nodiscard]] RankVector rank_values(std::span<const std::pair<Identity, double>> entries,
                                     RankDirection direction = RankDirection::Ascending);

// Pearson correlation of ranks matched by identity label (Spearman).
[[nodiscard]] double rank_correlation(const RankVector& a, const RankVector& b);

struct ExtremeSlice {
  std::vector<Identity> top;     // highest values first
  std::vector<Identity> bottom;  // lowest values first
};

// k = max(1, round_half_up(fraction * N)) names from each end.
[[nodiscard]] ExtremeSlice extreme_slice(const RankVector& ranks, double fraction);
[[nodiscard]] std::size_t extreme_count(std::size_t n, double fraction);

struct HistogramBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
};

// Fixed-width bins over [min, max]; the last bin is closed on the right.
[[nodiscard]] std::vector<HistogramBin> histogram(std::span<const double> values,
                                                  std::size_t bins = 30);

}  // namespace fb

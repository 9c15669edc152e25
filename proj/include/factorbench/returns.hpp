#pragma once

#include <compare>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fb {

enum class ReturnKind { Discrete, Continuous };

[[nodiscard]] std::string_view to_string(ReturnKind kind);
[[nodiscard]] ReturnKind parse_return_kind(std::string_view text);

// Calendar month. Returns are monthly throughout; there is no day-level time.
struct Month {
  int year = 0;
  int month = 1;  // 1..12

  auto operator<=>(const Month&) const = default;

  // Months since year 0, so consecutive months differ by exactly one.
  [[nodiscard]] int ordinal() const { return year * 12 + (month - 1); }
  [[nodiscard]] static Month from_ordinal(int ordinal);
  [[nodiscard]] Month next() const { return from_ordinal(ordinal() + 1); }
  [[nodiscard]] bool valid() const { return month >= 1 && month <= 12; }

  // "YYYY-MM"
  [[nodiscard]] std::string to_string() const;
  // "YYYYMM"
  [[nodiscard]] std::string to_compact() const;
  // Accepts "YYYY-MM", "YYYY-MM-DD" (day ignored) and "YYYYMM".
  [[nodiscard]] static Month parse(std::string_view text);
};

[[nodiscard]] int months_between_inclusive(Month first, Month last);

// One stock's ordered monthly returns. Values are decimals (0.05 == 5%).
struct ReturnSeries {
  std::string identity;
  std::vector<Month> months;
  std::vector<double> values;
  ReturnKind kind = ReturnKind::Discrete;

  // Throws DomainError if months are not consecutive, lengths differ, the
  // series is empty or a discrete value is <= -1.
  void validate() const;
};

[[nodiscard]] double holding_period_return(double initial_price, double end_price,
                                           double income);

// ln(1 + r_d); r_d must exceed -1.
[[nodiscard]] double to_continuous(double discrete_return);
// exp(r_c) - 1
[[nodiscard]] double to_discrete(double continuous_return);

[[nodiscard]] ReturnSeries convert_series(const ReturnSeries& series, ReturnKind target);

// Discrete: (prod(1 + r))^(1/m) - 1, evaluated in log space.
// Continuous: arithmetic mean, i.e. the log of the geometric gross mean.
[[nodiscard]] double geometric_average(std::span<const double> values, ReturnKind kind);
[[nodiscard]] double geometric_average(const ReturnSeries& series);

// Sample standard deviation with the m - 1 divisor.
[[nodiscard]] double sample_std(std::span<const double> values);
[[nodiscard]] double sample_std(const ReturnSeries& series);

}  // namespace fb

#include "factorbench/returns.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "factorbench/error.hpp"

namespace fb {

std::string_view to_string(ReturnKind kind) {
  return kind == ReturnKind::Discrete ? "discrete" : "continuous";
}

ReturnKind parse_return_kind(std::string_view text) {
  if (text == "discrete") return ReturnKind::Discrete;
  if (text == "continuous") return ReturnKind::Continuous;
  throw ConfigError("unknown return kind '" + std::string(text) +
                    "' (expected discrete|continuous)");
}

Month Month::from_ordinal(int ordinal) {
  int year = ordinal / 12;
  int rem = ordinal % 12;
  if (rem < 0) {
    rem += 12;
    --year;
  }
  return Month{year, rem + 1};
}

std::string Month::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
  return buf;
}

std::string Month::to_compact() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d%02d", year, month);
  return buf;
}

namespace {

bool parse_int(std::string_view text, int& out) {
  if (text.empty()) return false;
  for (char c : text) {
    if (c < '0' || c > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

Month Month::parse(std::string_view text) {
  Month m;
  bool ok = false;
  if (text.size() == 6) {
    ok = parse_int(text.substr(0, 4), m.year) && parse_int(text.substr(4, 2), m.month);
  } else if ((text.size() == 7 || text.size() == 10) && text[4] == '-') {
    ok = parse_int(text.substr(0, 4), m.year) && parse_int(text.substr(5, 2), m.month);
    if (ok && text.size() == 10) {
      int day = 0;
      ok = text[7] == '-' && parse_int(text.substr(8, 2), day) && day >= 1 && day <= 31;
    }
  }
  if (!ok || !m.valid()) {
    throw DomainError("invalid month '" + std::string(text) + "'");
  }
  return m;
}

int months_between_inclusive(Month first, Month last) {
  return last.ordinal() - first.ordinal() + 1;
}

void ReturnSeries::validate() const {
  if (values.empty()) throw DomainError("series '" + identity + "' is empty");
  if (values.size() != months.size()) {
    throw DomainError("series '" + identity + "': months and values differ in length");
  }
  for (std::size_t i = 1; i < months.size(); ++i) {
    if (months[i].ordinal() != months[i - 1].ordinal() + 1) {
      throw DomainError("series '" + identity + "': months not consecutive at " +
                        months[i].to_string());
    }
  }
  if (kind == ReturnKind::Discrete) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] > -1.0)) {
        throw DomainError("series '" + identity + "': discrete return <= -1 at " +
                          months[i].to_string());
      }
    }
  }
}

double holding_period_return(double initial_price, double end_price, double income) {
  if (!(initial_price > 0.0)) {
    throw DomainError("holding_period_return: initial price must be positive");
  }
  return (end_price - initial_price + income) / initial_price;
}

double to_continuous(double discrete_return) {
  if (!(discrete_return > -1.0)) {
    throw DomainError("to_continuous: discrete return must exceed -1");
  }
  return std::log1p(discrete_return);
}

double to_discrete(double continuous_return) { return std::expm1(continuous_return); }

ReturnSeries convert_series(const ReturnSeries& series, ReturnKind target) {
  ReturnSeries out = series;
  if (series.kind == target) return out;
  out.kind = target;
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    if (target == ReturnKind::Continuous) {
      if (!(series.values[i] > -1.0)) {
        std::string when = i < series.months.size() ? series.months[i].to_string()
                                                     : std::to_string(i);
        throw DomainError("convert_series: discrete return <= -1 in '" + series.identity +
                          "' at " + when);
      }
      out.values[i] = std::log1p(series.values[i]);
    } else {
      out.values[i] = std::expm1(series.values[i]);
    }
  }
  return out;
}

double geometric_average(std::span<const double> values, ReturnKind kind) {
  if (values.empty()) throw DomainError("geometric_average: empty series");
  double sum = 0.0;
  for (double v : values) {
    if (kind == ReturnKind::Discrete) {
      if (!(v > -1.0)) throw DomainError("geometric_average: discrete return <= -1");
      sum += std::log1p(v);
    } else {
      sum += v;
    }
  }
  const double mean_log = sum / static_cast<double>(values.size());
  return kind == ReturnKind::Discrete ? std::expm1(mean_log) : mean_log;
}

double geometric_average(const ReturnSeries& series) {
  return geometric_average(series.values, series.kind);
}

double sample_std(std::span<const double> values) {
  if (values.size() < 2) throw DomainError("sample_std: need at least 2 values");
  // Shift by the first value so constant input gives exactly zero.
  const double shift = values[0];
  double mean = 0.0;
  for (double v : values) mean += v - shift;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - shift - mean) * (v - shift - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double sample_std(const ReturnSeries& series) { return sample_std(series.values); }

}  // namespace fb

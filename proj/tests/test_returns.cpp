#include <doctest.h>

#include <cmath>
#include <random>

#include "factorbench/error.hpp"
#include "factorbench/returns.hpp"
#include "test_support.hpp"

using namespace fb;

namespace {

ReturnSeries series(std::vector<double> values, ReturnKind kind) {
  ReturnSeries s;
  s.identity = "X";
  s.months = fbtest::month_range(Month{2010, 7}, static_cast<int>(values.size()));
  s.values = std::move(values);
  s.kind = kind;
  return s;
}

}  // namespace

TEST_CASE("month parsing and arithmetic") {
  CHECK(Month::parse("2010-07") == Month{2010, 7});
  CHECK(Month::parse("201007") == Month{2010, 7});
  CHECK(Month::parse("2010-07-01") == Month{2010, 7});
  CHECK(Month{2010, 12}.next() == Month{2011, 1});
  CHECK(Month{2010, 7}.to_string() == "2010-07");
  CHECK(Month{2010, 7}.to_compact() == "201007");
  CHECK(months_between_inclusive(Month{2007, 1}, Month{2013, 12}) == 84);
  CHECK_THROWS_AS((void)Month::parse("2010-13"), DomainError);
  CHECK_THROWS_AS((void)Month::parse("July 2010"), DomainError);
}

TEST_CASE("holding_period_return") {
  CHECK(holding_period_return(100, 110, 0) == doctest::Approx(0.10).epsilon(1e-15));
  CHECK(holding_period_return(100, 100, 0) == 0.0);
  CHECK(holding_period_return(100, 95, 5) == 0.0);
  CHECK_THROWS_AS((void)holding_period_return(0, 95, 5), DomainError);
  CHECK_THROWS_AS((void)holding_period_return(-1, 95, 5), DomainError);
}

TEST_CASE("to_continuous") {
  CHECK(to_continuous(0.0) == 0.0);
  CHECK(std::abs(to_continuous(std::exp(1.0) - 1.0) - 1.0) < 1e-15);
  // ln(1.1) to 30 digits: 0.0953101798043248600439521232807
  CHECK(std::abs(to_continuous(0.10) - 0.0953102) < 1e-6);
  CHECK(std::abs(to_continuous(0.10) - 0.09531017980432486) < 1e-16);
  CHECK_THROWS_AS((void)to_continuous(-1.0), DomainError);
  CHECK_THROWS_AS((void)to_continuous(-1.5), DomainError);
}

TEST_CASE("convert_series") {
  SUBCASE("zero series") {
    auto c = convert_series(series({0, 0, 0}, ReturnKind::Discrete), ReturnKind::Continuous);
    CHECK(c.kind == ReturnKind::Continuous);
    for (double v : c.values) CHECK(v == 0.0);
  }
  SUBCASE("single value") {
    auto c = convert_series(series({0.10}, ReturnKind::Discrete), ReturnKind::Continuous);
    CHECK(std::abs(c.values[0] - 0.0953102) < 1e-6);
  }
  SUBCASE("identity when kinds match") {
    auto s = series({0.1, -0.2}, ReturnKind::Continuous);
    CHECK(convert_series(s, ReturnKind::Continuous).values == s.values);
  }
  SUBCASE("-100% return names the month") {
    auto s = series({0.1, -1.0}, ReturnKind::Discrete);
    try {
      (void)convert_series(s, ReturnKind::Continuous);
      FAIL("expected DomainError");
    } catch (const DomainError& e) {
      CHECK(std::string(e.what()).find("2010-08") != std::string::npos);
    }
  }
}

TEST_CASE("geometric_average") {
  for (auto kind : {ReturnKind::Discrete, ReturnKind::Continuous}) {
    CHECK(geometric_average(series({0.03, 0.03, 0.03}, kind)) ==
          doctest::Approx(0.03).epsilon(1e-14));
  }
  CHECK(std::abs(geometric_average(series({1.0, -0.5}, ReturnKind::Discrete))) < 1e-15);
  CHECK(std::abs(geometric_average(series({0.1, -0.1}, ReturnKind::Continuous))) < 1e-15);
  CHECK_THROWS_AS((void)geometric_average(std::vector<double>{}, ReturnKind::Discrete),
                  DomainError);
}

TEST_CASE("sample_std") {
  CHECK(sample_std(series({0.2, 0.2, 0.2}, ReturnKind::Discrete)) == 0.0);
  CHECK(std::abs(sample_std(std::vector<double>{0, 2}) - 1.4142136) < 1e-6);
  CHECK_THROWS_AS((void)sample_std(std::vector<double>{1.0}), DomainError);
}

TEST_CASE("return identities hold on random series") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ret(-0.5, 0.8);
  std::uniform_int_distribution<int> len(1, 120);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> v(static_cast<std::size_t>(len(rng)));
    for (double& x : v) x = ret(rng);
    const auto s = series(v, ReturnKind::Discrete);
    const auto c = convert_series(s, ReturnKind::Continuous);
    const auto back = convert_series(c, ReturnKind::Discrete);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::abs(back.values[i] - v[i]) < 1e-12);
    CHECK(std::abs(geometric_average(c) - std::log1p(geometric_average(s))) < 1e-12);

    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double g = geometric_average(s);
    if (*lo != *hi) {
      CHECK(g > *lo);
      CHECK(g <= *hi);
    }
    if (v.size() >= 2) {
      const double sd = sample_std(v);
      std::vector<double> shifted = v, scaled = v;
      for (double& x : shifted) x += 0.37;
      for (double& x : scaled) x *= -2.5;
      CHECK(std::abs(sample_std(shifted) - sd) < 1e-12);
      CHECK(std::abs(sample_std(scaled) - 2.5 * sd) < 1e-12);
    }
  }
}

TEST_CASE("ReturnSeries::validate") {
  auto s = series({0.1, 0.2}, ReturnKind::Discrete);
  CHECK_NOTHROW(s.validate());
  s.months[1] = Month{2011, 1};
  CHECK_THROWS_AS(s.validate(), DomainError);
  auto bad = series({0.1, -1.0}, ReturnKind::Discrete);
  CHECK_THROWS_AS(bad.validate(), DomainError);
  auto cont = series({0.1, -1.0}, ReturnKind::Continuous);
  CHECK_NOTHROW(cont.validate());
}

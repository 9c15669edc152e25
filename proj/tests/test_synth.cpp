#include <doctest.h>

#include <cmath>

#include "factorbench/diagnostics.hpp"
#include "factorbench/error.hpp"
#include "factorbench/synth.hpp"

using namespace fb;

TEST_CASE("uniform draws stay inside (0, 1)") {
  SynthRng rng(99);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / 100000.0 - 0.5) < 0.005);
}

TEST_CASE("normal, gamma and t moments") {
  SynthRng rng(5);
  const int n = 200000;
  double s = 0.0, s2 = 0.0, g = 0.0, g_small = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
    g += rng.gamma(2.5);
    g_small += rng.gamma(0.5);
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
  CHECK(std::abs(g / n - 2.5) < 0.03);
  CHECK(std::abs(g_small / n - 0.5) < 0.01);

  // Var of t(5) is 5 / 3.
  double t2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = rng.student_t(5.0);
    t2 += t * t;
  }
  CHECK(std::abs(t2 / n - 5.0 / 3.0) < 0.1);
}

TEST_CASE("same seed, same panel") {
  SynthSpec spec;
  spec.n_stocks = 20;
  spec.n_months = 24;
  const auto a = generate(spec);
  const auto b = generate(spec);
  CHECK(a.full.excess == b.full.excess);
  CHECK(a.factors.mktrf == b.factors.mktrf);
  spec.seed = 2;
  CHECK(generate(spec).full.excess != a.full.excess);
}

TEST_CASE("panel layout") {
  SynthSpec spec;
  spec.n_stocks = 12;
  spec.n_months = 84;
  spec.model = Model::FamaFrench3;
  const auto s = generate(spec);
  CHECK(s.full.stock_count() == 12);
  CHECK(s.full.stocks[0].label == "S01");
  CHECK(s.full.stocks[11].key.permno == "10012");
  CHECK(s.early.month_count() == 42);
  CHECK(s.late.month_count() == 42);
  CHECK(s.late.months.front() == Month{2010, 7});
  CHECK(s.truth.size() == 12);
  CHECK(s.truth[0].size() == 4);
  CHECK(s.records.size() == 12 * 84);
  for (const auto& t : s.truth) {
    CHECK(t(0) >= -0.005);
    CHECK(t(0) <= 0.005);
    CHECK(t(1) >= 0.5);
    CHECK(t(1) <= 1.5);
  }
}

TEST_CASE("zero noise recovers the coefficients") {
  for (Model model : {Model::CAPM, Model::FamaFrench3}) {
    SynthSpec spec;
    spec.n_stocks = 30;
    spec.n_months = 42;
    spec.model = model;
    spec.noise = NoiseLaw::gaussian(0.0);
    const auto s = generate(spec);
    for (std::size_t i = 0; i < s.truth.size(); ++i) {
      const auto fit = ols_fit(build_design(s.full, s.full.stocks[i].label, model));
      CHECK((fit.theta - s.truth[i]).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("explicit coefficients") {
  SynthSpec spec;
  spec.n_stocks = 2;
  spec.n_months = 10;
  spec.theta_by_stock = {Eigen::Vector2d(0.01, 1.0), Eigen::Vector2d(0.0, 0.5)};
  const auto s = generate(spec);
  CHECK(s.truth[1] == spec.theta_by_stock[1]);
  spec.theta_by_stock.pop_back();
  CHECK_THROWS_AS((void)generate(spec), ConfigError);
}

TEST_CASE("OLS slope is unbiased across stocks") {
  SynthSpec spec;
  spec.n_stocks = 468;
  spec.n_months = 42;
  spec.noise = NoiseLaw::gaussian(0.05);
  const auto s = generate(spec);
  const Eigen::MatrixXd X = factor_matrix(s.factors, Model::CAPM);
  const double var_beta = 0.05 * 0.05 * (X.transpose() * X).inverse()(1, 1);
  double bias = 0.0;
  for (std::size_t i = 0; i < s.truth.size(); ++i) {
    bias += ols_fit(build_design(s.full, s.full.stocks[i].label, Model::CAPM)).theta(1) -
            s.truth[i](1);
  }
  bias /= 468.0;
  CHECK(std::abs(bias) < 3.0 * std::sqrt(var_beta / 468.0));
}

TEST_CASE("continuous kind stores log returns") {
  SynthSpec spec;
  spec.n_stocks = 3;
  spec.n_months = 12;
  spec.kind = ReturnKind::Continuous;
  spec.rf = 0.001;
  const auto s = generate(spec);
  for (std::size_t t = 0; t < 12; ++t) {
    const auto& r = s.records[t];
    CHECK(std::abs(std::log1p(r.ret) - s.full.returns(0, static_cast<Eigen::Index>(t))) < 1e-14);
    CHECK(std::abs(s.full.returns(0, static_cast<Eigen::Index>(t)) -
                   s.full.excess(0, static_cast<Eigen::Index>(t)) - std::log1p(0.001)) < 1e-15);
  }
}

TEST_CASE("spec validation") {
  SynthSpec spec;
  spec.n_stocks = 0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = SynthSpec{};
  spec.n_months = 3;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = SynthSpec{};
  spec.noise = NoiseLaw::student_t(2.0, 0.05);
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = SynthSpec{};
  spec.beta = {1.5, 0.5};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

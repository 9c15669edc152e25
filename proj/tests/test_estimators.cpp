#include <doctest.h>

#include <cmath>
#include <random>

#include "factorbench/error.hpp"
#include "factorbench/estimators.hpp"
#include "test_support.hpp"

using namespace fb;

namespace {

DesignSystem line_design(std::initializer_list<double> x, std::initializer_list<double> y) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd v(n);
  Eigen::Index i = 0;
  for (double xi : x) {
    X(i, 0) = 1.0;
    X(i, 1) = xi;
    ++i;
  }
  i = 0;
  for (double yi : y) v(i++) = yi;
  return make_design(v, X);
}

}  // namespace

TEST_CASE("OLS on a hand-solved line") {
  const auto d = line_design({0, 1, 2}, {0, 1, 3});
  const auto fit = ols_fit(d);
  CHECK(std::abs(fit.theta(0) - (-1.0 / 6.0)) < 1e-12);
  CHECK(std::abs(fit.theta(1) - 1.5) < 1e-12);
  CHECK(std::abs(fit.rss - 1.0 / 6.0) < 1e-12);
  CHECK(std::abs(fit.sigma2_mle - 1.0 / 18.0) < 1e-12);
  CHECK(fit.method == Method::OLS);
}

TEST_CASE("OLS agrees with the normal equations") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 200; ++rep) {
    const Eigen::Index p = rep % 2 == 0 ? 2 : 4;
    const auto d = fbtest::random_design(rng, 6 + rep % 60, p);
    const Eigen::VectorXd oracle =
        (d.X.transpose() * d.X).ldlt().solve(d.X.transpose() * d.y);
    const auto fit = ols_fit(d);
    CHECK((fit.theta - oracle).cwiseAbs().maxCoeff() < 1e-9);
    // Residuals are orthogonal to every regressor.
    CHECK((d.X.transpose() * fit.residuals).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("MLE coefficients equal OLS, variance is rss/n") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 100; ++rep) {
    const auto d = fbtest::random_design(rng, 10 + rep, rep % 2 == 0 ? 2 : 4);
    const auto o = ols_fit(d);
    const auto m = mle_fit(d);
    CHECK((o.theta - m.theta).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(m.sigma2_mle - o.rss / static_cast<double>(d.n())) < 1e-15);
    CHECK(m.method == Method::MLE);
  }
}

TEST_CASE("design validation") {
  CHECK_THROWS_AS((void)line_design({0, 1}, {0, 1}), EstimationError);
  Eigen::MatrixXd X(3, 2);
  X << 2, 0, 1, 1, 1, 2;
  CHECK_THROWS_AS((void)make_design(Eigen::VectorXd::Zero(3), X), DomainError);
  CHECK_THROWS_AS((void)make_design(Eigen::VectorXd::Zero(4), Eigen::MatrixXd::Ones(3, 2)),
                  DomainError);
}

TEST_CASE("collinear designs are rejected") {
  const auto constant_x = line_design({1, 1, 1, 1}, {0, 1, 2, 3});
  try {
    (void)ols_fit(constant_x);
    FAIL("expected EstimationError");
  } catch (const EstimationError& e) {
    CHECK(std::string(e.what()) == "collinear design");
  }
  Eigen::MatrixXd X(5, 3);
  X << 1, 1, 2, 1, 2, 4, 1, 3, 6, 1, 4, 8, 1, 5, 10;
  CHECK_THROWS_AS((void)ols_fit(make_design(Eigen::VectorXd::LinSpaced(5, 0, 1), X)),
                  EstimationError);
}

TEST_CASE("robust Bayes blend") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  for (int rep = 0; rep < 200; ++rep) {
    const Eigen::Index p = rep % 2 == 0 ? 2 : 4;
    const auto d = fbtest::random_design(rng, 12 + rep % 40, p);
    Eigen::VectorXd theta0(p);
    for (Eigen::Index j = 0; j < p; ++j) theta0(j) = normal(rng);
    const double g = std::abs(normal(rng)) * 50.0;
    const auto ols = ols_fit(d);
    const auto fit = robust_bayes_fit(d, PriorSpec{theta0, GRule::fixed_value(g)}, g);
    const double w = 1.0 / (1.0 + std::sqrt(g) * std::sqrt(ols.rss));
    REQUIRE(fit.weight_w.has_value());
    CHECK(std::abs(*fit.weight_w - w) < 1e-12);
    CHECK(*fit.weight_w > 0.0);
    CHECK(*fit.weight_w <= 1.0);
    const Eigen::VectorXd expected = w * ols.theta + (1.0 - w) * theta0;
    CHECK((fit.theta - expected).cwiseAbs().maxCoeff() < 1e-12);
    for (Eigen::Index j = 0; j < p; ++j) {
      CHECK(fit.theta(j) >= std::min(ols.theta(j), theta0(j)));
      CHECK(fit.theta(j) <= std::max(ols.theta(j), theta0(j)));
    }
  }
}

TEST_CASE("robust Bayes limits") {
  std::mt19937_64 rng(5);
  const auto d = fbtest::random_design(rng, 30, 2);
  const Eigen::VectorXd theta0 = Eigen::Vector2d(0.3, -0.7);
  const auto ols = ols_fit(d);
  SUBCASE("g = 0 returns OLS exactly") {
    const auto fit = robust_bayes_fit(d, PriorSpec{theta0, GRule::fixed_value(0)}, 0.0);
    CHECK(*fit.weight_w == 1.0);
    CHECK(fit.theta == ols.theta);
  }
  SUBCASE("large g approaches the prior") {
    const auto fit = robust_bayes_fit(d, PriorSpec{theta0, GRule::fixed_value(1e30)}, 1e30);
    CHECK((fit.theta - theta0).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("w decreases in g") {
    double last = 2.0;
    for (double g : {0.0, 0.5, 1.0, 10.0, 1000.0}) {
      const double w = *robust_bayes_fit(d, PriorSpec{theta0, {}}, g).weight_w;
      CHECK(w < last);
      last = w;
    }
  }
  SUBCASE("negative g") {
    CHECK_THROWS_AS((void)robust_bayes_fit(d, PriorSpec{theta0, {}}, -1.0), DomainError);
  }
  SUBCASE("prior length mismatch") {
    CHECK_THROWS_AS((void)robust_bayes_fit(d, PriorSpec{Eigen::VectorXd::Zero(4), {}}, 1.0),
                    DomainError);
  }
}

TEST_CASE("conjugate Bayes") {
  std::mt19937_64 rng(9);
  const auto d = fbtest::random_design(rng, 40, 4);
  const auto ols = ols_fit(d);
  const Eigen::VectorXd theta0 = Eigen::Vector4d(0.1, 0.9, 0.0, -0.2);
  const Eigen::MatrixXd xtx = d.X.transpose() * d.X;
  SUBCASE("zero precision returns OLS") {
    const auto fit = conjugate_bayes_fit(d, theta0, Eigen::MatrixXd::Zero(4, 4));
    CHECK((fit.theta - ols.theta).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("g-prior precision shrinks by 1/(1+g)") {
    const double g = 3.0;
    const auto fit = conjugate_bayes_fit(d, theta0, g * xtx);
    const Eigen::VectorXd expected = (ols.theta + g * theta0) / (1.0 + g);
    CHECK((fit.theta - expected).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("matches the X'X theta_mle form") {
    Eigen::MatrixXd V = Eigen::MatrixXd::Identity(4, 4) * 2.5;
    V(1, 2) = V(2, 1) = 0.4;
    const auto fit = conjugate_bayes_fit(d, theta0, V);
    const Eigen::VectorXd expected =
        (xtx + V).inverse() * (xtx * ols.theta + V * theta0);
    CHECK((fit.theta - expected).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS((void)conjugate_bayes_fit(d, theta0, Eigen::MatrixXd::Zero(2, 2)),
                    DomainError);
  }
}

TEST_CASE("g selection rules") {
  CHECK(select_g(GRule::benchmark(), 42, 2) == 42.0);
  CHECK(select_g(GRule::benchmark(), 42, 4) == 42.0);
  CHECK(select_g(GRule::benchmark(), 10, 4) == 16.0);
  CHECK(select_g(GRule::local_empirical_bayes(), 42, 2, 5.5) == 4.5);
  CHECK(select_g(GRule::local_empirical_bayes(), 42, 2, 0.3) == 0.0);
  CHECK(select_g(GRule::local_empirical_bayes(), 42, 2, 1.0) == 0.0);
  CHECK(select_g(GRule::fixed_value(2.25), 42, 2) == 2.25);
  CHECK_THROWS_AS((void)select_g(GRule::local_empirical_bayes(), 42, 2), DomainError);
  CHECK_THROWS_AS((void)select_g(GRule::fixed_value(-1.0), 42, 2), DomainError);
}

TEST_CASE("model names") {
  CHECK(parse_model("capm") == Model::CAPM);
  CHECK(parse_model("ff3") == Model::FamaFrench3);
  CHECK(regressor_count(Model::FamaFrench3) == 4);
  CHECK_THROWS_AS((void)parse_model("apt"), ConfigError);
}

TEST_CASE("factor_matrix column layout") {
  const auto f = fbtest::flat_factors(Month{2010, 1}, 5);
  const auto X = factor_matrix(f, Model::FamaFrench3);
  CHECK(X.cols() == 4);
  CHECK(X(3, 1) == f.mktrf[3]);
  CHECK(X(3, 2) == f.smb[3]);
  CHECK(X(3, 3) == f.hml[3]);
  CHECK(factor_matrix(f, Model::CAPM).cols() == 2);
}

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string_view>

#include "factorbench/dataset.hpp"

namespace fb {

enum class Model { CAPM, FamaFrench3 };

// Regressor count including the intercept: 2 for CAPM, 4 for FF3.
[[nodiscard]] int regressor_count(Model model);
[[nodiscard]] std::string_view to_string(Model model);
[[nodiscard]] Model parse_model(std::string_view text);

// y = X theta + e, first column of X identically one.
struct DesignSystem {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;

  [[nodiscard]] Eigen::Index n() const { return X.rows(); }
  [[nodiscard]] Eigen::Index p() const { return X.cols(); }
};

// Validates shape (n > p, intercept column of ones).
[[nodiscard]] DesignSystem make_design(Eigen::VectorXd y, Eigen::MatrixXd X);

// Regressor matrix [1, mktrf] or [1, mktrf, smb, hml] for the panel months.
[[nodiscard]] Eigen::MatrixXd factor_matrix(const FactorSeries& factors, Model model);
[[nodiscard]] DesignSystem build_design(const AlignedPanel& panel, std::string_view stock,
                                        Model model);

enum class Method { OLS, MLE, ConjugateBayes, RobustBayes };
[[nodiscard]] std::string_view to_string(Method method);

struct FitResult {
  Eigen::VectorXd theta;      // alpha first, then slopes
  Eigen::VectorXd residuals;  // y - X theta
  double rss = 0.0;
  double sigma2_mle = 0.0;    // rss / n
  Method method = Method::OLS;
  std::optional<double> weight_w;  // robust Bayes only
  std::optional<double> g;         // g used by a Bayesian fit, when scalar
};

// Reciprocal condition number of X'X below which a design is rejected as
// collinear.
inline constexpr double kMinReciprocalCondition = 1e-12;

[[nodiscard]] FitResult ols_fit(const DesignSystem& d);
// Same coefficients as OLS; sigma2_mle is the likelihood maximiser rss / n.
[[nodiscard]] FitResult mle_fit(const DesignSystem& d);

// Posterior mean under the normal-inverse-gamma prior with mean theta0 and
// precision V: (X'X + V)^-1 (X'X theta_mle + V theta0).
[[nodiscard]] FitResult conjugate_bayes_fit(const DesignSystem& d,
                                            const Eigen::VectorXd& theta0,
                                            const Eigen::MatrixXd& V);

struct GRule {
  enum class Kind { Benchmark, LocalEmpiricalBayes, Fixed };
  Kind kind = Kind::Benchmark;
  double fixed = 0.0;

  static GRule benchmark() { return {Kind::Benchmark, 0.0}; }
  static GRule local_empirical_bayes() { return {Kind::LocalEmpiricalBayes, 0.0}; }
  static GRule fixed_value(double g) { return {Kind::Fixed, g}; }
};

struct PriorSpec {
  Eigen::VectorXd theta0;
  GRule g_rule;
};

// Posterior mean under the Cauchy g-prior:
//   theta = w theta_ols + (1 - w) theta0,  w = 1 / (1 + sqrt(g) ||y - X theta_ols||_2).
[[nodiscard]] FitResult robust_bayes_fit(const DesignSystem& d, const PriorSpec& prior,
                                         double g);

// Benchmark: max(n, p^2). Local empirical Bayes: max(F - 1, 0).
[[nodiscard]] double select_g(const GRule& rule, Eigen::Index n, Eigen::Index p,
                              std::optional<double> f_stat = std::nullopt);

// OLS coefficients of `stock` on the early panel, used as the prior mean.
[[nodiscard]] Eigen::VectorXd empirical_prior_mean(const AlignedPanel& early,
                                                   std::string_view stock, Model model);

}  // namespace fb

#include "factorbench/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "factorbench/error.hpp"

namespace fb {

int regressor_count(Model model) { return model == Model::CAPM ? 2 : 4; }

std::string_view to_string(Model model) { return model == Model::CAPM ? "capm" : "ff3"; }

Model parse_model(std::string_view text) {
  if (text == "capm") return Model::CAPM;
  if (text == "ff3") return Model::FamaFrench3;
  throw ConfigError("unknown model '" + std::string(text) + "' (expected capm|ff3)");
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::OLS: return "ols";
    case Method::MLE: return "mle";
    case Method::ConjugateBayes: return "conjugate-bayes";
    case Method::RobustBayes: return "robust-bayes";
  }
  return "unknown";
}

DesignSystem make_design(Eigen::VectorXd y, Eigen::MatrixXd X) {
  if (y.size() != X.rows()) throw DomainError("design: y and X row counts differ");
  if (X.cols() < 1) throw DomainError("design: X has no columns");
  if (X.rows() <= X.cols()) throw EstimationError("insufficient observations");
  if (!(X.col(0).array() == 1.0).all()) {
    throw DomainError("design: first column of X must be identically 1");
  }
  return DesignSystem{std::move(y), std::move(X)};
}

Eigen::MatrixXd factor_matrix(const FactorSeries& factors, Model model) {
  const auto n = static_cast<Eigen::Index>(factors.size());
  Eigen::MatrixXd X(n, regressor_count(model));
  for (Eigen::Index t = 0; t < n; ++t) {
    const auto i = static_cast<std::size_t>(t);
    X(t, 0) = 1.0;
    X(t, 1) = factors.mktrf[i];
    if (model == Model::FamaFrench3) {
      X(t, 2) = factors.smb[i];
      X(t, 3) = factors.hml[i];
    }
  }
  return X;
}

DesignSystem build_design(const AlignedPanel& panel, std::string_view stock, Model model) {
  const auto row = static_cast<Eigen::Index>(panel.index_of(stock));
  return make_design(panel.excess.row(row).transpose(), factor_matrix(panel.factors, model));
}

namespace {

void finish(const DesignSystem& d, FitResult& fit) {
  fit.residuals = d.y - d.X * fit.theta;
  fit.rss = fit.residuals.squaredNorm();
  fit.sigma2_mle = fit.rss / static_cast<double>(d.n());
}

double reciprocal_condition(const Eigen::MatrixXd& square) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(square);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0.0;
  return s(s.size() - 1) / s(0);
}

Eigen::VectorXd least_squares(const DesignSystem& d) {
  if (d.n() <= d.p()) throw EstimationError("insufficient observations");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.X);
  const Eigen::MatrixXd R =
      qr.matrixR().topLeftCorner(d.p(), d.p()).triangularView<Eigen::Upper>();
  // sigma(R) == sigma(X), and cond(X'X) == cond(X)^2.
  const double rc = reciprocal_condition(R);
  if (!std::isfinite(rc) || rc * rc < kMinReciprocalCondition) {
    throw EstimationError("collinear design");
  }
  return qr.solve(d.y);
}

}  // namespace

FitResult ols_fit(const DesignSystem& d) {
  FitResult fit;
  fit.method = Method::OLS;
  fit.theta = least_squares(d);
  finish(d, fit);
  return fit;
}

FitResult mle_fit(const DesignSystem& d) {
  FitResult fit = ols_fit(d);
  fit.method = Method::MLE;
  return fit;
}

FitResult conjugate_bayes_fit(const DesignSystem& d, const Eigen::VectorXd& theta0,
                              const Eigen::MatrixXd& V) {
  const auto p = d.p();
  if (theta0.size() != p || V.rows() != p || V.cols() != p) {
    throw DomainError("conjugate_bayes_fit: prior dimensions do not match p = " +
                      std::to_string(p));
  }
  const Eigen::MatrixXd xtx = d.X.transpose() * d.X;
  const Eigen::MatrixXd A = xtx + V;
  const double rc = reciprocal_condition(A);
  if (!std::isfinite(rc) || rc < kMinReciprocalCondition) {
    throw EstimationError("conjugate_bayes_fit: X'X + V is singular");
  }
  // X'X theta_mle == X'y, which keeps the estimator defined when only
  // X'X + V (not X'X) is invertible.
  const Eigen::VectorXd rhs = d.X.transpose() * d.y + V * theta0;
  FitResult fit;
  fit.method = Method::ConjugateBayes;
  fit.theta = A.fullPivLu().solve(rhs);
  finish(d, fit);
  return fit;
}

FitResult robust_bayes_fit(const DesignSystem& d, const PriorSpec& prior, double g) {
  if (!(g >= 0.0) || !std::isfinite(g)) {
    throw DomainError("robust_bayes_fit: g must be a nonnegative finite number");
  }
  if (prior.theta0.size() != d.p()) {
    throw DomainError("robust_bayes_fit: prior mean length does not match p = " +
                      std::to_string(d.p()));
  }
  const FitResult ols = ols_fit(d);
  const double w = 1.0 / (1.0 + std::sqrt(g) * ols.residuals.norm());

  FitResult fit;
  fit.method = Method::RobustBayes;
  fit.theta.resize(d.p());
  for (Eigen::Index j = 0; j < d.p(); ++j) {
    const double a = ols.theta(j);
    const double b = prior.theta0(j);
    // Rounding must not leave the segment between the two estimates.
    fit.theta(j) = std::clamp(w * a + (1.0 - w) * b, std::min(a, b), std::max(a, b));
  }
  fit.weight_w = w;
  fit.g = g;
  finish(d, fit);
  return fit;
}

double select_g(const GRule& rule, Eigen::Index n, Eigen::Index p,
                std::optional<double> f_stat) {
  switch (rule.kind) {
    case GRule::Kind::Benchmark:
      if (n <= 0 || p <= 0) throw DomainError("select_g: n and p must be positive");
      return static_cast<double>(std::max(n, p * p));
    case GRule::Kind::LocalEmpiricalBayes:
      if (!f_stat) throw DomainError("select_g: local empirical Bayes needs an F-statistic");
      return std::max(*f_stat - 1.0, 0.0);
    case GRule::Kind::Fixed:
      if (!(rule.fixed >= 0.0)) throw DomainError("select_g: fixed g must be nonnegative");
      return rule.fixed;
  }
  throw DomainError("select_g: unknown rule");
}

Eigen::VectorXd empirical_prior_mean(const AlignedPanel& early, std::string_view stock,
                                     Model model) {
  return ols_fit(build_design(early, stock, model)).theta;
}

}  // namespace fb

#include "factorbench/evaluation.hpp"

#include <algorithm>
#include <string>

#include "factorbench/diagnostics.hpp"
#include "factorbench/error.hpp"

namespace fb {

std::string_view to_string(Protocol protocol) {
  return protocol == Protocol::OutOfSample ? "oos" : "loocv";
}

Protocol parse_protocol(std::string_view text) {
  if (text == "oos") return Protocol::OutOfSample;
  if (text == "loocv") return Protocol::LOOCV;
  throw ConfigError("unknown protocol '" + std::string(text) + "' (expected oos|loocv)");
}

FitResult fit_design(const DesignSystem& d, const FitConfig& config,
                     const Eigen::VectorXd* theta0) {
  switch (config.method) {
    case Method::OLS: return ols_fit(d);
    case Method::MLE: return mle_fit(d);
    case Method::ConjugateBayes:
    case Method::RobustBayes: break;
  }
  if (theta0 == nullptr) throw ConfigError("Bayesian fit needs a prior mean");

  std::optional<double> f_stat;
  if (config.g_rule.kind == GRule::Kind::LocalEmpiricalBayes) f_stat = slope_f_statistic(d);
  const double g = select_g(config.g_rule, d.n(), d.p(), f_stat);

  if (config.method == Method::RobustBayes) {
    return robust_bayes_fit(d, PriorSpec{*theta0, config.g_rule}, g);
  }
  const double scale = config.conjugate_scale.value_or(g);
  if (!(scale >= 0.0)) throw DomainError("conjugate prior scale must be nonnegative");
  FitResult fit = conjugate_bayes_fit(d, *theta0, scale * (d.X.transpose() * d.X));
  fit.g = scale;
  return fit;
}

namespace {

bool is_bayesian(Method m) { return m == Method::ConjugateBayes || m == Method::RobustBayes; }

std::optional<Eigen::VectorXd> prior_mean(std::string_view stock, Model model,
                                          const FitConfig& config) {
  if (!is_bayesian(config.method)) return std::nullopt;
  if (config.prior_panel == nullptr) {
    throw ConfigError("Bayesian method needs a prior panel");
  }
  if (!config.prior_panel->find(stock)) {
    throw LookupError("stock '" + std::string(stock) + "' absent from prior panel");
  }
  return empirical_prior_mean(*config.prior_panel, stock, model);
}

}  // namespace

FitResult fit_stock(const AlignedPanel& panel, std::string_view stock, Model model,
                    const FitConfig& config) {
  const DesignSystem d = build_design(panel, stock, model);
  const auto theta0 = prior_mean(stock, model, config);
  return fit_design(d, config, theta0 ? &*theta0 : nullptr);
}

MseSummary summarize(const std::vector<StockMSE>& per_stock) {
  if (per_stock.empty()) throw DomainError("summarize: no per-stock results");
  MseSummary s;
  s.min = per_stock.front().mse;
  s.max = per_stock.front().mse;
  double sum = 0.0;
  for (const auto& e : per_stock) {
    s.min = std::min(s.min, e.mse);
    s.max = std::max(s.max, e.mse);
    sum += e.mse;
  }
  s.mean = sum / static_cast<double>(per_stock.size());
  s.range = s.max - s.min;
  return s;
}

ComparisonReport out_of_sample(const AlignedPanel& early, const AlignedPanel& late, Model model,
                               const FitConfig& config) {
  if (early.stocks.size() != late.stocks.size()) {
    throw DomainError("out_of_sample: early and late panels hold different stocks");
  }
  for (const auto& id : late.stocks) {
    if (!early.find(id.label)) {
      throw DomainError("out_of_sample: stock '" + id.label + "' missing from early panel");
    }
  }
  ComparisonReport report;
  report.model = model;
  report.method = config.method;
  report.kind = late.kind;
  report.protocol = Protocol::OutOfSample;

  const Eigen::MatrixXd X_late = factor_matrix(late.factors, model);
  for (std::size_t i = 0; i < late.stocks.size(); ++i) {
    const Identity& id = late.stocks[i];
    try {
      const FitResult fit = fit_stock(early, id.label, model, config);
      const Eigen::VectorXd actual = late.excess.row(static_cast<Eigen::Index>(i)).transpose();
      const Eigen::VectorXd err = actual - X_late * fit.theta;
      report.per_stock.push_back(
          {id, err.squaredNorm() / static_cast<double>(err.size()),
           static_cast<std::size_t>(err.size())});
    } catch (const Error& e) {
      report.exclusions.push_back({id, e.what()});
    }
  }
  if (!report.per_stock.empty()) report.summary = summarize(report.per_stock);
  return report;
}

StockMSE loocv(const AlignedPanel& panel, std::string_view stock, Model model,
               const FitConfig& config) {
  const DesignSystem full = build_design(panel, stock, model);
  const Eigen::Index n = full.n();
  const Eigen::Index p = full.p();
  if (n - 1 <= p) throw EstimationError("insufficient fold size");
  const auto theta0 = prior_mean(stock, model, config);

  double sum_sq = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd y(n - 1);
    Eigen::MatrixXd X(n - 1, p);
    for (Eigen::Index r = 0, k = 0; r < n; ++r) {
      if (r == i) continue;
      y(k) = full.y(r);
      X.row(k) = full.X.row(r);
      ++k;
    }
    try {
      const FitResult fit = fit_design(make_design(std::move(y), std::move(X)), config,
                                       theta0 ? &*theta0 : nullptr);
      const double e = full.y(i) - full.X.row(i).dot(fit.theta);
      sum_sq += e * e;
    } catch (const Error& e) {
      throw EstimationError("loocv fold " + std::to_string(i + 1) + " (" +
                            panel.months[static_cast<std::size_t>(i)].to_string() +
                            ") failed: " + e.what());
    }
  }
  const Identity& id = panel.stocks[panel.index_of(stock)];
  return StockMSE{id, sum_sq / static_cast<double>(n), static_cast<std::size_t>(n)};
}

ComparisonReport loocv_panel(const AlignedPanel& panel, Model model, const FitConfig& config) {
  ComparisonReport report;
  report.model = model;
  report.method = config.method;
  report.kind = panel.kind;
  report.protocol = Protocol::LOOCV;
  for (const auto& id : panel.stocks) {
    try {
      report.per_stock.push_back(loocv(panel, id.label, model, config));
    } catch (const Error& e) {
      report.exclusions.push_back({id, e.what()});
    }
  }
  if (!report.per_stock.empty()) report.summary = summarize(report.per_stock);
  return report;
}

}  // namespace fb

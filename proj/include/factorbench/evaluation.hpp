#pragma once

#include <optional>
#include <string>
#include <vector>

#include "factorbench/dataset.hpp"
#include "factorbench/estimators.hpp"

namespace fb {

// How a stock is fitted for a given method. Bayesian methods take their prior
// mean from `prior_panel` (OLS on the same stock there).
struct FitConfig {
  Method method = Method::OLS;
  GRule g_rule = GRule::benchmark();
  // Conjugate prior precision is V = conjugate_scale * X'X; when unset the
  // scale comes from g_rule.
  std::optional<double> conjugate_scale;
  const AlignedPanel* prior_panel = nullptr;
};

// Fits one design according to `config`. `theta0` is required for Bayesian
// methods.
[[nodiscard]] FitResult fit_design(const DesignSystem& d, const FitConfig& config,
                                   const Eigen::VectorXd* theta0);

// Fits `stock` on `panel`, resolving the prior mean from config.prior_panel.
[[nodiscard]] FitResult fit_stock(const AlignedPanel& panel, std::string_view stock,
                                  Model model, const FitConfig& config);

enum class Protocol { OutOfSample, LOOCV };
[[nodiscard]] std::string_view to_string(Protocol protocol);
[[nodiscard]] Protocol parse_protocol(std::string_view text);

struct StockMSE {
  Identity identity;
  double mse = 0.0;
  std::size_t n_predictions = 0;
};

struct Exclusion {
  Identity identity;
  std::string reason;
};

struct MseSummary {
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
  double range = 0.0;
};

[[nodiscard]] MseSummary summarize(const std::vector<StockMSE>& per_stock);

struct ComparisonReport {
  Model model = Model::CAPM;
  Method method = Method::OLS;
  ReturnKind kind = ReturnKind::Discrete;
  Protocol protocol = Protocol::OutOfSample;
  std::vector<StockMSE> per_stock;
  std::vector<Exclusion> exclusions;
  std::optional<MseSummary> summary;  // absent when every stock was excluded
};

// Fit on `early`, predict every month of `late` from its realised factors.
[[nodiscard]] ComparisonReport out_of_sample(const AlignedPanel& early, const AlignedPanel& late,
                                             Model model, const FitConfig& config);

// Leave-one-out over the months of one stock; throws on any fold failure.
[[nodiscard]] StockMSE loocv(const AlignedPanel& panel, std::string_view stock, Model model,
                             const FitConfig& config);

[[nodiscard]] ComparisonReport loocv_panel(const AlignedPanel& panel, Model model,
                                           const FitConfig& config);

}  // namespace fb

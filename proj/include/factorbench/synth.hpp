#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

#include "factorbench/dataset.hpp"
#include "factorbench/estimators.hpp"

namespace fb {

// Seeded generator: std::mt19937_64 (sequence fixed by the standard) with
// hand-written transforms, so draws do not depend on the standard library's
// distribution implementations. Bump kVersion if any transform changes.
class SynthRng {
 public:
  static constexpr int kVersion = 1;

  explicit SynthRng(std::uint64_t seed) : engine_(seed) {}

  // (0, 1)
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double gamma(double shape);
  double student_t(double nu);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct UniformRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct GaussianLaw {
  double mean = 0.0;
  double sd = 0.0;
};

struct NoiseLaw {
  enum class Kind { Gaussian, StudentT };
  Kind kind = Kind::Gaussian;
  double sigma = 0.05;  // Gaussian
  double nu = 3.0;      // StudentT
  double scale = 0.05;  // StudentT

  static NoiseLaw gaussian(double sigma) { return {Kind::Gaussian, sigma, 0.0, 0.0}; }
  static NoiseLaw student_t(double nu, double scale) { return {Kind::StudentT, 0.0, nu, scale}; }
};

struct SynthSpec {
  std::size_t n_stocks = 468;
  std::size_t n_months = 84;
  Model model = Model::CAPM;
  // Explicit per-stock coefficients; when empty they are drawn from the ranges.
  std::vector<Eigen::VectorXd> theta_by_stock;
  UniformRange alpha{-0.005, 0.005};
  UniformRange beta{0.5, 1.5};
  UniformRange beta_smb{-0.5, 0.5};
  UniformRange beta_hml{-0.5, 0.5};
  NoiseLaw noise;
  GaussianLaw mktrf{0.008, 0.045};
  GaussianLaw smb{0.002, 0.025};
  GaussianLaw hml{0.0, 0.025};
  double rf = 0.0;
  std::uint64_t seed = 1;
  Month start{2007, 1};
  // Kind of the generated excess returns.
  ReturnKind kind = ReturnKind::Discrete;

  // Throws ConfigError on invalid fields.
  void validate() const;
};

struct SynthPanel {
  AlignedPanel full;
  AlignedPanel early;  // first n_months / 2 months
  AlignedPanel late;
  std::vector<Eigen::VectorXd> truth;  // per stock, panel order
  std::vector<RawRecord> records;      // discrete raw returns for export
  FactorSeries factors;
};

[[nodiscard]] SynthPanel generate(const SynthSpec& spec);

}  // namespace fb

#include "factorbench/synth.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "factorbench/error.hpp"

namespace fb {

double SynthRng::uniform() {
  // 53 random mantissa bits, offset by half a step to exclude 0 and 1.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double SynthRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0, v = 0.0, s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  has_spare_ = true;
  return u * factor;
}

// Marsaglia & Tsang; shape < 1 boosted through shape + 1.
double SynthRng::gamma(double shape) {
  if (shape < 1.0) {
    const double g = gamma(shape + 1.0);
    return g * std::pow(uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x = 0.0, v = 0.0;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double SynthRng::student_t(double nu) {
  const double z = normal();
  const double chi2 = 2.0 * gamma(nu / 2.0);
  return z / std::sqrt(chi2 / nu);
}

void SynthSpec::validate() const {
  const auto p = static_cast<std::size_t>(regressor_count(model));
  if (n_stocks == 0) throw ConfigError("synth: n_stocks must be positive");
  if (n_months <= p + 1) {
    throw ConfigError("synth: n_months must exceed p + 1 = " + std::to_string(p + 1));
  }
  if (!theta_by_stock.empty()) {
    if (theta_by_stock.size() != n_stocks) {
      throw ConfigError("synth: theta_by_stock must hold one vector per stock");
    }
    for (const auto& t : theta_by_stock) {
      if (t.size() != static_cast<Eigen::Index>(p)) {
        throw ConfigError("synth: coefficient vector length must be " + std::to_string(p));
      }
    }
  }
  for (const auto* r : {&alpha, &beta, &beta_smb, &beta_hml}) {
    if (!(r->lo <= r->hi)) throw ConfigError("synth: coefficient range has lo > hi");
  }
  for (const auto* g : {&mktrf, &smb, &hml}) {
    if (!(g->sd >= 0.0)) throw ConfigError("synth: factor sd must be nonnegative");
  }
  if (noise.kind == NoiseLaw::Kind::Gaussian) {
    if (!(noise.sigma >= 0.0)) throw ConfigError("synth: Gaussian sigma must be nonnegative");
  } else if (!(noise.nu > 2.0) || !(noise.scale > 0.0)) {
    throw ConfigError("synth: Student-t noise needs nu > 2 and scale > 0");
  }
  if (!(rf > -1.0)) throw ConfigError("synth: rf must exceed -1");
  if (!start.valid()) throw ConfigError("synth: invalid start month");
}

SynthPanel generate(const SynthSpec& spec) {
  spec.validate();
  const auto p = static_cast<Eigen::Index>(regressor_count(spec.model));
  const auto n_months = static_cast<Eigen::Index>(spec.n_months);
  const auto n_stocks = static_cast<Eigen::Index>(spec.n_stocks);
  SynthRng rng(spec.seed);

  SynthPanel out;
  FactorSeries& f = out.factors;
  for (Eigen::Index t = 0; t < n_months; ++t) {
    f.months.push_back(Month::from_ordinal(spec.start.ordinal() + static_cast<int>(t)));
    f.mktrf.push_back(spec.mktrf.mean + spec.mktrf.sd * rng.normal());
    f.smb.push_back(spec.smb.mean + spec.smb.sd * rng.normal());
    f.hml.push_back(spec.hml.mean + spec.hml.sd * rng.normal());
    f.rf.push_back(spec.rf);
  }
  const Eigen::MatrixXd X = factor_matrix(f, spec.model);

  const int width = static_cast<int>(std::to_string(spec.n_stocks).size());
  AlignedPanel& panel = out.full;
  panel.kind = spec.kind;
  panel.months = f.months;
  panel.factors = f;
  panel.excess.resize(n_stocks, n_months);
  panel.returns.resize(n_stocks, n_months);
  const double rf_in_kind = spec.kind == ReturnKind::Discrete ? spec.rf : std::log1p(spec.rf);

  for (Eigen::Index i = 0; i < n_stocks; ++i) {
    char label[32];
    std::snprintf(label, sizeof label, "S%0*lld", width, static_cast<long long>(i + 1));
    char cusip[32];
    std::snprintf(cusip, sizeof cusip, "SYN%06lld", static_cast<long long>(i + 1));
    Identity id{label, IdentityKey{std::to_string(10001 + i), cusip}};
    panel.stocks.push_back(id);

    Eigen::VectorXd theta(p);
    if (!spec.theta_by_stock.empty()) {
      theta = spec.theta_by_stock[static_cast<std::size_t>(i)];
    } else {
      theta(0) = rng.uniform(spec.alpha.lo, spec.alpha.hi);
      theta(1) = rng.uniform(spec.beta.lo, spec.beta.hi);
      if (spec.model == Model::FamaFrench3) {
        theta(2) = rng.uniform(spec.beta_smb.lo, spec.beta_smb.hi);
        theta(3) = rng.uniform(spec.beta_hml.lo, spec.beta_hml.hi);
      }
    }
    out.truth.push_back(theta);

    for (Eigen::Index t = 0; t < n_months; ++t) {
      double noise = 0.0;
      if (spec.noise.kind == NoiseLaw::Kind::Gaussian) {
        noise = spec.noise.sigma * rng.normal();
      } else {
        noise = spec.noise.scale * rng.student_t(spec.noise.nu);
      }
      const double excess = X.row(t).dot(theta) + noise;
      const double ret = excess + rf_in_kind;
      const double discrete = spec.kind == ReturnKind::Discrete ? ret : std::expm1(ret);
      if (!(discrete > -1.0)) {
        throw ConfigError("synth: generated return <= -100% for " + id.label +
                          "; reduce noise or coefficient ranges");
      }
      panel.excess(i, t) = excess;
      panel.returns(i, t) = ret;
      out.records.push_back(RawRecord{f.months[static_cast<std::size_t>(t)], id.label,
                                      id.key.permno, id.key.cusip, discrete, 0});
    }
  }
  const std::size_t early_n = spec.n_months / 2;
  out.early = panel.select_months(0, early_n);
  out.late = panel.select_months(early_n, spec.n_months - early_n);
  return out;
}

}  // namespace fb

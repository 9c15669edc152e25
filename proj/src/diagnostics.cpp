#include "factorbench/diagnostics.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <map>
#include <numeric>

#include "factorbench/error.hpp"

namespace fb {

namespace {

// c[0] + c[1] x + ... + c[N-1] x^(N-1)
template <std::size_t N>
double poly(const double (&c)[N], double x) {
  double r = 0.0;
  for (std::size_t j = N; j-- > 0;) r = r * x + c[j];
  return r;
}

constexpr double kSwG[2] = {-2.273, 0.459};
constexpr double kSwC1[6] = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
constexpr double kSwC2[6] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
constexpr double kSwC3[4] = {0.544, -0.39978, 0.025054, -6.714e-4};
constexpr double kSwC4[4] = {1.3822, -0.77857, 0.062767, -0.0020322};
constexpr double kSwC5[4] = {-1.5861, -0.31082, -0.083751, 0.0038915};
constexpr double kSwC6[3] = {-0.4803, -0.082676, 0.0030302};

// Upper-half coefficients a_1..a_{n/2} (a_1 pairs with the extreme order
// statistics).
std::vector<double> shapiro_wilk_coefficients(std::size_t n) {
  const std::size_t half = n / 2;
  std::vector<double> a(half);
  if (n == 3) {
    a[0] = std::sqrt(0.5);
    return a;
  }
  const boost::math::normal_distribution<double> std_normal;
  const double an = static_cast<double>(n);
  std::vector<double> m(half);
  double summ2 = 0.0;
  for (std::size_t i = 0; i < half; ++i) {
    m[i] = boost::math::quantile(std_normal, (static_cast<double>(i + 1) - 0.375) / (an + 0.25));
    summ2 += m[i] * m[i];
  }
  summ2 *= 2.0;
  const double ssumm2 = std::sqrt(summ2);
  const double rsn = 1.0 / std::sqrt(an);
  const double a1 = poly(kSwC1, rsn) - m[0] / ssumm2;

  std::size_t first_scaled = 1;
  double fac = 0.0;
  if (n > 5) {
    first_scaled = 2;
    const double a2 = -m[1] / ssumm2 + poly(kSwC2, rsn);
    fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) /
                    (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
    a[1] = a2;
  } else {
    fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
  }
  a[0] = a1;
  for (std::size_t i = first_scaled; i < half; ++i) a[i] = -m[i] / fac;
  return a;
}

}  // namespace

ShapiroWilkResult shapiro_wilk(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 3 || n > 5000) {
    throw DomainError("shapiro_wilk: unsupported sample size " + std::to_string(n) +
                      " (need 3..5000)");
  }
  std::vector<double> xs(x.begin(), x.end());
  for (double v : xs) {
    if (!std::isfinite(v)) throw DomainError("shapiro_wilk: non-finite value");
  }
  std::sort(xs.begin(), xs.end());
  const double range = xs.back() - xs.front();
  if (!(range >= 1e-19)) throw DomainError("shapiro_wilk: degenerate input (zero range)");

  const auto a = shapiro_wilk_coefficients(n);
  const std::size_t half = n / 2;
  std::vector<double> coef(n, 0.0);
  for (std::size_t i = 0; i < half; ++i) {
    coef[i] = -a[i];
    coef[n - 1 - i] = a[i];
  }

  // W is the squared correlation between the scaled sample and the
  // coefficients; 1 - W is formed directly to keep precision near W = 1.
  double sa = 0.0;
  double sx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sa += coef[i];
    sx += xs[i] / range;
  }
  sa /= static_cast<double>(n);
  sx /= static_cast<double>(n);
  double ssa = 0.0, ssx = 0.0, sax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = coef[i] - sa;
    const double dx = xs[i] / range - sx;
    ssa += da * da;
    ssx += dx * dx;
    sax += da * dx;
  }
  const double ssassx = std::sqrt(ssa * ssx);
  const double w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
  ShapiroWilkResult out;
  out.w_stat = 1.0 - w1;

  if (n == 3) {
    constexpr double six_over_pi = 1.90985931710274;
    constexpr double pi_over_3 = 1.04719755119660;
    out.p_value = std::clamp(six_over_pi * (std::asin(std::sqrt(out.w_stat)) - pi_over_3),
                             0.0, 1.0);
    return out;
  }

  const double an = static_cast<double>(n);
  double y = std::log(w1);
  double mean = 0.0;
  double sd = 0.0;
  if (n <= 11) {
    const double gamma = poly(kSwG, an);
    if (y >= gamma) {
      out.p_value = 1e-99;
      return out;
    }
    y = -std::log(gamma - y);
    mean = poly(kSwC3, an);
    sd = std::exp(poly(kSwC4, an));
  } else {
    const double ln_n = std::log(an);
    mean = poly(kSwC5, ln_n);
    sd = std::exp(poly(kSwC6, ln_n));
  }
  if (std::isinf(y) && y < 0) {
    out.p_value = 1.0;
    return out;
  }
  const boost::math::normal_distribution<double> dist(mean, sd);
  out.p_value = std::clamp(boost::math::cdf(boost::math::complement(dist, y)), 0.0, 1.0);
  return out;
}

double f_statistic(const FitResult& full, const FitResult& restricted, Eigen::Index n,
                   Eigen::Index p_full, Eigen::Index q) {
  if (n <= p_full) throw DomainError("f_statistic: need n > p_full");
  if (q <= 0) throw DomainError("f_statistic: need at least one restriction");
  // Residuals at rounding level count as a perfect fit.
  if (!(full.rss > 1e-26 * restricted.rss)) throw EstimationError("perfect fit, F undefined");
  const double num = (restricted.rss - full.rss) / static_cast<double>(q);
  const double den = full.rss / static_cast<double>(n - p_full);
  return num / den;
}

double slope_f_statistic(const DesignSystem& d) {
  const FitResult full = ols_fit(d);
  const DesignSystem intercept_only = make_design(d.y, Eigen::MatrixXd::Ones(d.n(), 1));
  const FitResult restricted = ols_fit(intercept_only);
  return f_statistic(full, restricted, d.n(), d.p(), d.p() - 1);
}

double quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw DomainError("quantile: empty input");
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

DescriptiveStats describe(std::span<const double> values) {
  if (values.empty()) throw DomainError("describe: empty input");
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  DescriptiveStats d;
  d.min = s.front();
  d.max = s.back();
  d.q1 = quantile(s, 0.25);
  d.median = quantile(s, 0.5);
  d.q3 = quantile(s, 0.75);
  // Offsets from the minimum keep a constant vector's mean exact.
  double acc = 0.0;
  for (double v : s) acc += v - d.min;
  d.mean = std::clamp(d.min + acc / static_cast<double>(s.size()), d.min, d.max);
  return d;
}

RankVector rank_values(std::span<const std::pair<Identity, double>> entries,
                       RankDirection direction) {
  if (entries.empty()) throw DomainError("rank_values: empty input");
  const std::size_t n = entries.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (const auto& [id, v] : entries) {
    if (std::isnan(v)) throw DomainError("rank_values: NaN value for " + id.label);
  }
  const bool asc = direction == RankDirection::Ascending;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double va = entries[a].second;
    const double vb = entries[b].second;
    if (va != vb) return asc ? va < vb : va > vb;
    return entries[a].first.label < entries[b].first.label;
  });

  RankVector out;
  out.entries.resize(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && entries[order[j + 1]].second == entries[order[i]].second) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) {
      const auto& src = entries[order[k]];
      out.entries[k] = RankEntry{src.first, src.second, avg};
    }
    i = j + 1;
  }
  return out;
}

double rank_correlation(const RankVector& a, const RankVector& b) {
  if (a.size() != b.size() || a.size() == 0) {
    throw DomainError("rank_correlation: identity sets differ");
  }
  std::map<std::string, double> b_rank;
  for (const auto& e : b.entries) b_rank.emplace(e.identity.label, e.rank);
  std::vector<double> ra, rb;
  ra.reserve(a.size());
  rb.reserve(a.size());
  for (const auto& e : a.entries) {
    auto it = b_rank.find(e.identity.label);
    if (it == b_rank.end()) {
      throw DomainError("rank_correlation: identity '" + e.identity.label +
                        "' missing from second ranking");
    }
    ra.push_back(e.rank);
    rb.push_back(it->second);
  }
  if (b_rank.size() != ra.size()) throw DomainError("rank_correlation: identity sets differ");
  const double n = static_cast<double>(ra.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) {
    throw DomainError("rank_correlation: ranks have zero variance");
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::size_t extreme_count(std::size_t n, double fraction) {
  if (!(fraction > 0.0 && fraction <= 0.5)) {
    throw DomainError("extreme_slice: fraction must lie in (0, 0.5]");
  }
  const auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 0.5));
  return std::min(std::max<std::size_t>(k, 1), n);
}

ExtremeSlice extreme_slice(const RankVector& ranks, double fraction) {
  if (ranks.size() == 0) throw DomainError("extreme_slice: empty ranking");
  const std::size_t k = extreme_count(ranks.size(), fraction);
  std::vector<const RankEntry*> sorted;
  for (const auto& e : ranks.entries) sorted.push_back(&e);

  ExtremeSlice out;
  std::sort(sorted.begin(), sorted.end(), [](const RankEntry* a, const RankEntry* b) {
    if (a->value != b->value) return a->value > b->value;
    return a->identity.label < b->identity.label;
  });
  for (std::size_t i = 0; i < k; ++i) out.top.push_back(sorted[i]->identity);
  std::sort(sorted.begin(), sorted.end(), [](const RankEntry* a, const RankEntry* b) {
    if (a->value != b->value) return a->value < b->value;
    return a->identity.label < b->identity.label;
  });
  for (std::size_t i = 0; i < k; ++i) out.bottom.push_back(sorted[i]->identity);
  return out;
}

std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins) {
  if (values.empty()) throw DomainError("histogram: empty input");
  if (bins == 0) throw DomainError("histogram: need at least one bin");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<HistogramBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lower = lo + width * static_cast<double>(b);
    out[b].upper = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
  }
  for (double v : values) {
    std::size_t b = 0;
    if (width > 0.0) {
      b = static_cast<std::size_t>(std::floor((v - lo) / width));
      b = std::min(b, bins - 1);
    }
    ++out[b].count;
  }
  return out;
}

}  // namespace fb

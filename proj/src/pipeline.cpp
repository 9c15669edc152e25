#include "factorbench/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <set>

#include "factorbench/diagnostics.hpp"
#include "factorbench/error.hpp"
#include "factorbench/returns.hpp"
#include "text.hpp"

namespace fb {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration

namespace {

const std::set<std::string, std::less<>>& known_keys() {
  static const std::set<std::string, std::less<>> keys{
      "config", "panel",  "factors",  "tbill",    "percent", "start",       "split",
      "end",    "required-len", "out", "data",    "model",   "method",      "methods",
      "kind",   "prior-panel",  "g",   "fraction", "protocol", "alpha",     "spec",
      "format", "strict"};
  return keys;
}

}  // namespace

std::map<std::string, std::string, std::less<>> parse_key_values(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::map<std::string, std::string, std::less<>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    std::string_view body = text::trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    std::string key(text::trim(body.substr(0, eq)));
    std::string value(text::trim(body.substr(eq + 1)));
    if (key.empty()) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": empty key");
    }
    out[key] = value;
  }
  return out;
}

void RunConfig::set(std::string key, std::string value) {
  if (!known_keys().contains(key)) throw ConfigError("unknown setting '" + key + "'");
  values_[std::move(key)] = std::move(value);
}

void RunConfig::merge_file(const fs::path& path) {
  for (auto& [k, v] : parse_key_values(path)) {
    if (!known_keys().contains(k)) {
      throw ConfigError(path.string() + ": unknown setting '" + k + "'");
    }
    values_.emplace(k, v);
  }
}

bool RunConfig::has(std::string_view key) const { return values_.find(key) != values_.end(); }

std::optional<std::string> RunConfig::get(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string RunConfig::require(std::string_view key) const {
  auto v = get(key);
  if (!v || v->empty()) throw ConfigError("missing required setting '" + std::string(key) + "'");
  return *v;
}

std::string RunConfig::get_or(std::string_view key, std::string fallback) const {
  auto v = get(key);
  return v ? *v : std::move(fallback);
}

namespace {

double parse_number(std::string_view key, std::string_view text) {
  double v = 0.0;
  if (!text::parse_double(text, v) || !std::isfinite(v)) {
    throw ConfigError("setting '" + std::string(key) + "': '" + std::string(text) +
                      "' is not a number");
  }
  return v;
}

}  // namespace

double RunConfig::get_double(std::string_view key, double fallback) const {
  auto v = get(key);
  return v ? parse_number(key, *v) : fallback;
}

long long RunConfig::get_int(std::string_view key, long long fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  const double d = parse_number(key, *v);
  if (d != std::floor(d)) {
    throw ConfigError("setting '" + std::string(key) + "' must be an integer");
  }
  return static_cast<long long>(d);
}

bool RunConfig::get_bool(std::string_view key, bool fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  const std::string s = text::lower(*v);
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw ConfigError("setting '" + std::string(key) + "' must be true or false");
}

// ---------------------------------------------------------------------------
// Data directories

AlignedPanel DataDir::panel(ReturnKind kind) const {
  return build_panel(records, factors, window, required_len, kind);
}

std::pair<AlignedPanel, AlignedPanel> DataDir::split_panels(ReturnKind kind) const {
  return split_panel(panel(kind), split);
}

DataDir load_data_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("data directory '" + dir.string() + "' not found");
  DataDir d;
  d.root = dir;
  const auto meta = parse_key_values(dir / "meta.cfg");
  auto need = [&](const char* key) {
    auto it = meta.find(key);
    if (it == meta.end()) throw ConfigError((dir / "meta.cfg").string() + ": missing " + key);
    return it->second;
  };
  try {
    d.window = Window{Month::parse(need("start")), Month::parse(need("end"))};
    d.split = Month::parse(need("split"));
  } catch (const DomainError& e) {
    throw ConfigError((dir / "meta.cfg").string() + ": " + e.what());
  }
  d.required_len = static_cast<int>(parse_number("required-len", need("required-len")));
  d.records = load_panel_file(dir / "panel.csv");
  d.factors = load_factor_file(dir / "factors.csv", false);
  return d;
}

void write_data_dir(const fs::path& dir, std::span<const RawRecord> records,
                    const FactorSeries& factors, Window window, Month split, int required_len) {
  fs::create_directories(dir);
  write_panel_file(dir / "panel.csv", records);
  write_factor_file(dir / "factors.csv", factors);
  std::ofstream meta(dir / "meta.cfg", std::ios::binary);
  if (!meta) throw IoError("cannot write '" + (dir / "meta.cfg").string() + "'");
  meta << "start = " << window.start.to_string() << "\n"
       << "split = " << split.to_string() << "\n"
       << "end = " << window.end.to_string() << "\n"
       << "required-len = " << required_len << "\n";
}

// ---------------------------------------------------------------------------
// Shared helpers

namespace {

std::vector<ReturnKind> parse_kinds(const RunConfig& config, std::string fallback) {
  const std::string k = config.get_or("kind", std::move(fallback));
  if (k == "both") return {ReturnKind::Continuous, ReturnKind::Discrete};
  return {parse_return_kind(k)};
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  for (auto part : text::split(s, ',')) {
    if (!part.empty()) out.emplace_back(part);
  }
  return out;
}

std::vector<std::string> slope_names(Model model) {
  if (model == Model::CAPM) return {"beta"};
  return {"beta_mkt", "beta_smb", "beta_hml"};
}

std::string kind_name(ReturnKind k) { return std::string(to_string(k)); }

fs::path prepare_out(const RunConfig& config) {
  const fs::path out = config.require("out");
  fs::create_directories(out);
  return out;
}

OutputFormat output_format(const RunConfig& config) {
  return parse_output_format(config.get_or("format", "csv"));
}

Table exclusions_table() {
  return Table{"exclusions", {"kind", "model", "method", "identity", "reason"}, {}};
}

CommandResult finish(const RunConfig& config, CommandResult result) {
  if (result.exclusions > 0 && config.get_bool("strict", false)) {
    result.exit_code = kExitStrictExclusions;
  }
  return result;
}

std::optional<DataDir> load_prior_dir(const RunConfig& config) {
  if (auto p = config.get("prior-panel"); p && !p->empty()) return load_data_dir(*p);
  return std::nullopt;
}

std::string method_title(const std::string& method) {
  if (method == "ols") return "OLS";
  if (method == "mle") return "MLE";
  if (method == "bayes-benchmark") return "benchmark prior";
  if (method == "bayes-leb") return "local empirical Bayes";
  if (method == "bayes-conjugate") return "conjugate prior";
  return method;
}

std::string percent_label(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g%%", fraction * 100.0);
  return buf;
}

std::string join_labels(const std::vector<Identity>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ", ";
    out += ids[i].label;
  }
  return out;
}

}  // namespace

MethodChoice parse_method(std::string_view name, const RunConfig& config) {
  MethodChoice mc;
  mc.name = std::string(name);
  if (name == "ols") {
    mc.fit.method = Method::OLS;
  } else if (name == "mle") {
    mc.fit.method = Method::MLE;
  } else if (name == "bayes-benchmark") {
    mc.fit.method = Method::RobustBayes;
    mc.fit.g_rule = GRule::benchmark();
  } else if (name == "bayes-leb") {
    mc.fit.method = Method::RobustBayes;
    mc.fit.g_rule = GRule::local_empirical_bayes();
  } else if (name == "bayes-conjugate") {
    mc.fit.method = Method::ConjugateBayes;
    mc.fit.g_rule = GRule::benchmark();
  } else {
    throw ConfigError("unknown method '" + std::string(name) +
                      "' (expected ols|mle|bayes-benchmark|bayes-leb|bayes-conjugate)");
  }
  if (config.has("g")) {
    if (mc.fit.method == Method::OLS || mc.fit.method == Method::MLE) {
      throw ConfigError("--g applies only to Bayesian methods");
    }
    const double g = config.get_double("g", 0.0);
    if (g < 0.0) throw ConfigError("--g must be nonnegative");
    mc.fit.g_rule = GRule::fixed_value(g);
  }
  return mc;
}

Table describe_table(const std::string& name, const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& samples) {
  Table t{name, {"statistic"}, {}};
  for (const auto& c : columns) t.columns.push_back(c);
  std::vector<std::optional<DescriptiveStats>> stats;
  for (const auto& s : samples) {
    stats.push_back(s.empty() ? std::nullopt : std::optional(describe(s)));
  }
  const std::array<std::pair<const char*, double DescriptiveStats::*>, 6> rows{{
      {"Minimum", &DescriptiveStats::min},
      {"1st quartile", &DescriptiveStats::q1},
      {"Median", &DescriptiveStats::median},
      {"Mean", &DescriptiveStats::mean},
      {"3rd quartile", &DescriptiveStats::q3},
      {"Maximum", &DescriptiveStats::max},
  }};
  for (const auto& [label, field] : rows) {
    std::vector<Cell> row{std::string(label)};
    for (const auto& s : stats) {
      row.push_back(s ? Cell((*s).*field) : Cell{});
    }
    t.add_row(std::move(row));
  }
  return t;
}

Table histogram_table(const std::string& name, std::span<const double> values) {
  Table t{name, {"bin_lower", "bin_upper", "count"}, {}};
  if (values.empty()) return t;
  for (const auto& b : histogram(values, 30)) {
    t.add_row({b.lower, b.upper, static_cast<std::int64_t>(b.count)});
  }
  return t;
}

Table comparison_summary_table(const std::string& name,
                               const std::vector<ComparisonReport>& reports) {
  Table t{name, {"Error Information"}, {}};
  for (const auto& r : reports) {
    t.columns.push_back(r.model == Model::CAPM ? "The CAPM model" : "The Fama-French model");
  }
  const std::array<std::pair<const char*, double MseSummary::*>, 4> rows{{
      {"Min of mean squared error", &MseSummary::min},
      {"Mean of mean squared error", &MseSummary::mean},
      {"Max of mean squared error", &MseSummary::max},
      {"Range of mean squared error", &MseSummary::range},
  }};
  for (const auto& [label, field] : rows) {
    std::vector<Cell> row{std::string(label)};
    for (const auto& r : reports) {
      row.push_back(r.summary ? Cell((*r.summary).*field) : Cell{});
    }
    t.add_row(std::move(row));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Commands

CommandResult cmd_ingest(const RunConfig& config) {
  const fs::path out = prepare_out(config);
  const OutputFormat format = output_format(config);
  Window window;
  Month split;
  try {
    window = Window{Month::parse(config.require("start")), Month::parse(config.require("end"))};
    split = Month::parse(config.require("split"));
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (!(window.start <= split && split < window.end)) {
    throw ConfigError("split must satisfy start <= split < end");
  }
  const int required_len = static_cast<int>(config.get_int("required-len", 84));

  const auto records = load_panel_file(config.require("panel"));
  FactorSeries factors = load_factor_file(config.require("factors"), config.get_bool("percent", true));
  if (auto tbill = config.get("tbill"); tbill && !tbill->empty()) {
    apply_tbill(factors, load_tbill_file(*tbill));
  }

  PanelBuildReport report;
  const AlignedPanel panel =
      build_panel(records, factors, window, required_len, ReturnKind::Discrete, &report);
  const auto cleaned = panel_records(records, panel);
  write_data_dir(out, cleaned, panel.factors, window, split, required_len);

  CommandResult result;
  result.outputs = {out / "panel.csv", out / "factors.csv", out / "meta.cfg"};

  Table detail{"ingest_report",
               {"identity", "permno", "cusip", "months_observed", "status", "reason"},
               {}};
  for (const auto& id : report.kept) {
    detail.add_row({id.label, id.key.permno, id.key.cusip,
                    static_cast<std::int64_t>(required_len), std::string("kept"), Cell{}});
  }
  for (const auto& d : report.dropped) {
    detail.add_row({d.identity.label, d.identity.key.permno, d.identity.key.cusip,
                    static_cast<std::int64_t>(d.months_observed), std::string("dropped"),
                    d.reason});
  }
  std::sort(detail.rows.begin(), detail.rows.end(), [](const auto& a, const auto& b) {
    return std::get<std::string>(a[0]) < std::get<std::string>(b[0]);
  });
  Table summary{"ingest_summary", {"field", "value"}, {}};
  summary.add_row({std::string("records"), static_cast<std::int64_t>(records.size())});
  summary.add_row({std::string("records_in_window"),
                   static_cast<std::int64_t>(report.records_in_window)});
  summary.add_row({std::string("stocks_total"), static_cast<std::int64_t>(report.stocks_total)});
  summary.add_row({std::string("stocks_kept"), static_cast<std::int64_t>(report.kept.size())});
  summary.add_row(
      {std::string("stocks_dropped"), static_cast<std::int64_t>(report.dropped.size())});
  summary.add_row({std::string("months"), static_cast<std::int64_t>(required_len)});
  result.outputs.push_back(write_table(out, detail, format));
  result.outputs.push_back(write_table(out, summary, format));
  return result;
}

CommandResult cmd_estimate(const RunConfig& config) {
  const DataDir data = load_data_dir(config.require("data"));
  const fs::path out = prepare_out(config);
  const OutputFormat format = output_format(config);
  const Model model = parse_model(config.get_or("model", "capm"));
  MethodChoice mc = parse_method(config.get_or("method", "ols"), config);
  const auto kinds = parse_kinds(config, "discrete");
  const auto prior_dir = load_prior_dir(config);
  const auto slopes = slope_names(model);
  const bool bayes = mc.fit.method == Method::RobustBayes ||
                     mc.fit.method == Method::ConjugateBayes;

  CommandResult result;
  Table exclusions = exclusions_table();
  std::vector<std::string> summary_cols;
  std::vector<std::vector<double>> summary_samples;

  for (ReturnKind kind : kinds) {
    const auto [early, late] = data.split_panels(kind);
    const AlignedPanel prior = prior_dir ? prior_dir->panel(kind) : early;
    if (bayes) mc.fit.prior_panel = &prior;

    Table est{"estimates_" + kind_name(kind), {"identity", "alpha"}, {}};
    for (const auto& s : slopes) est.columns.push_back(s);
    for (const char* c : {"rss", "sigma2_mle", "g", "w"}) est.columns.emplace_back(c);

    std::vector<std::vector<double>> slope_values(slopes.size());
    for (const auto& id : late.stocks) {
      try {
        const FitResult fit = fit_stock(late, id.label, model, mc.fit);
        std::vector<Cell> row{id.label};
        for (Eigen::Index j = 0; j < fit.theta.size(); ++j) row.emplace_back(fit.theta(j));
        row.emplace_back(fit.rss);
        row.emplace_back(fit.sigma2_mle);
        row.push_back(fit.g ? Cell(*fit.g) : Cell{});
        row.push_back(fit.weight_w ? Cell(*fit.weight_w) : Cell{});
        est.add_row(std::move(row));
        for (std::size_t j = 0; j < slopes.size(); ++j) {
          slope_values[j].push_back(fit.theta(static_cast<Eigen::Index>(j + 1)));
        }
      } catch (const Error& e) {
        exclusions.add_row({kind_name(kind), std::string(to_string(model)), mc.name, id.label,
                            std::string(e.what())});
        ++result.exclusions;
      }
    }
    result.outputs.push_back(write_table(out, est, format));
    for (std::size_t j = 0; j < slopes.size(); ++j) {
      summary_cols.push_back(slopes[j] + "_" + kind_name(kind));
      summary_samples.push_back(slope_values[j]);
      result.outputs.push_back(write_table(
          out, histogram_table("hist_" + slopes[j] + "_" + kind_name(kind), slope_values[j]),
          format));
    }
  }
  result.outputs.push_back(
      write_table(out, describe_table("estimates_summary", summary_cols, summary_samples), format));
  result.outputs.push_back(write_table(out, exclusions, format));
  return finish(config, std::move(result));
}

CommandResult cmd_rank(const RunConfig& config) {
  const DataDir data = load_data_dir(config.require("data"));
  const fs::path out = prepare_out(config);
  const OutputFormat format = output_format(config);
  if (parse_model(config.get_or("model", "capm")) != Model::CAPM) {
    throw ConfigError("rank works on CAPM betas; use --model capm");
  }
  const Model model = Model::CAPM;
  const auto method_names = split_list(config.get_or("methods", "ols,bayes-benchmark,bayes-leb"));
  if (method_names.empty()) throw ConfigError("--methods must name at least one method");
  std::vector<MethodChoice> methods;
  for (const auto& m : method_names) methods.push_back(parse_method(m, config));
  const double fraction = config.get_double("fraction", 0.05);
  (void)extreme_count(1, fraction);  // validates the fraction up front
  const auto kinds = parse_kinds(config, "both");
  const auto prior_dir = load_prior_dir(config);

  CommandResult result;
  Table exclusions = exclusions_table();
  std::vector<std::string> geo_cols;
  std::vector<std::vector<double>> geo_samples;

  for (ReturnKind kind : kinds) {
    const std::string kn = kind_name(kind);
    const auto [early, late] = data.split_panels(kind);
    const AlignedPanel prior = prior_dir ? prior_dir->panel(kind) : early;
    for (auto& m : methods) m.fit.prior_panel = &prior;

    std::vector<Identity> ids;
    std::vector<std::vector<double>> betas(methods.size());
    std::vector<double> geo;
    for (std::size_t i = 0; i < late.stocks.size(); ++i) {
      const Identity& id = late.stocks[i];
      std::vector<double> b;
      try {
        for (const auto& m : methods) b.push_back(fit_stock(late, id.label, model, m.fit).theta(1));
      } catch (const Error& e) {
        exclusions.add_row({kn, std::string(to_string(model)), methods[b.size()].name, id.label,
                            std::string(e.what())});
        ++result.exclusions;
        continue;
      }
      const Eigen::VectorXd row = late.returns.row(static_cast<Eigen::Index>(i)).transpose();
      ids.push_back(id);
      for (std::size_t m = 0; m < methods.size(); ++m) betas[m].push_back(b[m]);
      geo.push_back(geometric_average(std::span<const double>(row.data(), row.size()), kind));
    }
    geo_cols.push_back("geo_return_" + kn);
    geo_samples.push_back(geo);
    if (ids.empty()) continue;

    auto make_ranks = [&](const std::vector<double>& values) {
      std::vector<std::pair<Identity, double>> entries;
      for (std::size_t i = 0; i < ids.size(); ++i) entries.emplace_back(ids[i], values[i]);
      return rank_values(entries, RankDirection::Ascending);
    };
    auto rank_of = [](const RankVector& rv) {
      std::map<std::string, double> m;
      for (const auto& e : rv.entries) m.emplace(e.identity.label, e.rank);
      return m;
    };
    std::vector<RankVector> beta_ranks;
    for (const auto& b : betas) beta_ranks.push_back(make_ranks(b));
    const RankVector geo_rank = make_ranks(geo);

    // Per-stock ranks.
    Table ranks{"ranks_" + kn, {"identity", "geo_return", "rank_geo_return"}, {}};
    for (const auto& m : methods) {
      ranks.columns.push_back("beta_" + m.name);
      ranks.columns.push_back("rank_beta_" + m.name);
    }
    const auto geo_rank_of = rank_of(geo_rank);
    std::vector<std::map<std::string, double>> beta_rank_of;
    for (const auto& r : beta_ranks) beta_rank_of.push_back(rank_of(r));
    for (std::size_t i = 0; i < ids.size(); ++i) {
      std::vector<Cell> row{ids[i].label, geo[i], geo_rank_of.at(ids[i].label)};
      for (std::size_t m = 0; m < methods.size(); ++m) {
        row.emplace_back(betas[m][i]);
        row.emplace_back(beta_rank_of[m].at(ids[i].label));
      }
      ranks.add_row(std::move(row));
    }
    result.outputs.push_back(write_table(out, ranks, format));

    // Lower-triangular Spearman matrix.
    std::vector<std::string> titles;
    std::vector<const RankVector*> vectors;
    for (std::size_t m = 0; m < methods.size(); ++m) {
      titles.push_back("Rank beta " + method_title(methods[m].name));
      vectors.push_back(&beta_ranks[m]);
    }
    titles.emplace_back("Rank geometric average return");
    vectors.push_back(&geo_rank);
    Table corr{"correlation_" + kn, {""}, {}};
    for (const auto& t : titles) corr.columns.push_back(t);
    for (std::size_t r = 0; r < vectors.size(); ++r) {
      std::vector<Cell> row{titles[r]};
      for (std::size_t c = 0; c < vectors.size(); ++c) {
        if (c > r) {
          row.emplace_back();
        } else if (c == r) {
          row.emplace_back(1.0);
        } else {
          try {
            row.emplace_back(rank_correlation(*vectors[r], *vectors[c]));
          } catch (const DomainError&) {
            row.emplace_back();  // all ranks tied
          }
        }
      }
      corr.add_row(std::move(row));
    }
    result.outputs.push_back(write_table(out, corr, format));

    // Top/bottom slices.
    const std::string pct = percent_label(fraction);
    Table ext{"extremes_" + kn, {"slice", "members"}, {}};
    for (std::size_t m = 0; m < methods.size(); ++m) {
      const auto s = extreme_slice(beta_ranks[m], fraction);
      ext.add_row({"Top " + pct + " beta (" + methods[m].name + ")", join_labels(s.top)});
      ext.add_row({"Bottom " + pct + " beta (" + methods[m].name + ")", join_labels(s.bottom)});
    }
    const auto gs = extreme_slice(geo_rank, fraction);
    ext.add_row({"Top " + pct + " return", join_labels(gs.top)});
    ext.add_row({"Bottom " + pct + " return", join_labels(gs.bottom)});
    result.outputs.push_back(write_table(out, ext, format));

    // Scatter data: beta rank against return rank.
    for (std::size_t m = 0; m < methods.size(); ++m) {
      Table sc{"scatter_" + kn + "_" + methods[m].name, {"identity", "beta_rank", "return_rank"}, {}};
      for (const auto& id : ids) {
        sc.add_row({id.label, beta_rank_of[m].at(id.label), geo_rank_of.at(id.label)});
      }
      result.outputs.push_back(write_table(out, sc, format));
    }
    result.outputs.push_back(write_table(out, histogram_table("hist_geo_return_" + kn, geo), format));
  }
  result.outputs.push_back(
      write_table(out, describe_table("geo_return_summary", geo_cols, geo_samples), format));
  result.outputs.push_back(write_table(out, exclusions, format));
  return finish(config, std::move(result));
}

CommandResult cmd_compare(const RunConfig& config) {
  const DataDir data = load_data_dir(config.require("data"));
  const fs::path out = prepare_out(config);
  const OutputFormat format = output_format(config);
  const Protocol protocol = parse_protocol(config.get_or("protocol", "oos"));
  const std::string model_text = config.get_or("model", "both");
  std::vector<Model> models;
  if (model_text == "both") {
    models = {Model::CAPM, Model::FamaFrench3};
  } else {
    models = {parse_model(model_text)};
  }
  MethodChoice mc = parse_method(config.get_or("method", "ols"), config);
  const bool bayes = mc.fit.method == Method::RobustBayes ||
                     mc.fit.method == Method::ConjugateBayes;
  const auto kinds = parse_kinds(config, "both");
  const auto prior_dir = load_prior_dir(config);
  if (bayes && protocol == Protocol::OutOfSample && !prior_dir) {
    throw ConfigError("out-of-sample Bayesian comparison needs --prior-panel (a window before "
                      "the early data)");
  }

  CommandResult result;
  Table exclusions = exclusions_table();
  const std::string pn(to_string(protocol));
  for (ReturnKind kind : kinds) {
    const std::string kn = kind_name(kind);
    const auto [early, late] = data.split_panels(kind);
    const AlignedPanel prior = prior_dir ? prior_dir->panel(kind) : early;
    if (bayes) mc.fit.prior_panel = &prior;

    std::vector<ComparisonReport> reports;
    for (Model model : models) {
      reports.push_back(protocol == Protocol::OutOfSample
                            ? out_of_sample(early, late, model, mc.fit)
                            : loocv_panel(late, model, mc.fit));
    }
    Table detail{"compare_" + pn + "_" + kn + "_detail",
                 {"model", "identity", "mse", "n_predictions"},
                 {}};
    for (const auto& r : reports) {
      for (const auto& s : r.per_stock) {
        detail.add_row({std::string(to_string(r.model)), s.identity.label, s.mse,
                        static_cast<std::int64_t>(s.n_predictions)});
      }
      for (const auto& e : r.exclusions) {
        exclusions.add_row({kn, std::string(to_string(r.model)), mc.name, e.identity.label,
                            e.reason});
        ++result.exclusions;
      }
    }
    result.outputs.push_back(
        write_table(out, comparison_summary_table("compare_" + pn + "_" + kn, reports), format));
    result.outputs.push_back(write_table(out, detail, format));
  }
  result.outputs.push_back(write_table(out, exclusions, format));
  return finish(config, std::move(result));
}

CommandResult cmd_normality(const RunConfig& config) {
  const DataDir data = load_data_dir(config.require("data"));
  const fs::path out = prepare_out(config);
  const OutputFormat format = output_format(config);
  const double alpha = config.get_double("alpha", 0.05);
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("--alpha must lie in (0, 1)");
  const auto kinds = parse_kinds(config, "both");

  CommandResult result;
  Table exclusions = exclusions_table();
  Table summary{"normality_summary", {"kind", "tested", "passed", "excluded", "alpha"}, {}};
  for (ReturnKind kind : kinds) {
    const std::string kn = kind_name(kind);
    const auto [early, late] = data.split_panels(kind);
    Table t{"normality_" + kn, {"identity", "w", "p_value", "pass"}, {}};
    std::int64_t tested = 0, passed = 0, excluded = 0;
    for (std::size_t i = 0; i < late.stocks.size(); ++i) {
      const Eigen::VectorXd row = late.returns.row(static_cast<Eigen::Index>(i)).transpose();
      try {
        const auto sw = shapiro_wilk(std::span<const double>(row.data(), row.size()));
        const bool pass = sw.p_value >= alpha;
        ++tested;
        passed += pass ? 1 : 0;
        t.add_row({late.stocks[i].label, sw.w_stat, sw.p_value,
                   static_cast<std::int64_t>(pass ? 1 : 0)});
      } catch (const Error& e) {
        ++excluded;
        ++result.exclusions;
        exclusions.add_row({kn, Cell{}, std::string("shapiro-wilk"), late.stocks[i].label,
                            std::string(e.what())});
      }
    }
    summary.add_row({kn, tested, passed, excluded, alpha});
    result.outputs.push_back(write_table(out, t, format));
  }
  result.outputs.push_back(write_table(out, summary, format));
  result.outputs.push_back(write_table(out, exclusions, format));
  return finish(config, std::move(result));
}

SynthSpec synth_spec_from_config(const RunConfig& config) {
  // `config` holds only the spec path; the spec file has its own keys.
  const auto kv = parse_key_values(config.require("spec"));
  static const std::set<std::string, std::less<>> keys{
      "n-stocks", "n-months", "model",    "alpha-min",  "alpha-max", "beta-min", "beta-max",
      "smb-min",  "smb-max",  "hml-min",  "hml-max",    "noise",     "sigma",    "nu",
      "scale",    "mktrf-mean", "mktrf-sd", "smb-mean", "smb-sd",    "hml-mean", "hml-sd",
      "rf",       "seed",     "start",    "kind",       "theta-file"};
  for (const auto& [k, v] : kv) {
    if (!keys.contains(k)) throw ConfigError("simulate spec: unknown key '" + k + "'");
  }
  auto num = [&](const char* key, double fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : parse_number(key, it->second);
  };
  auto str = [&](const char* key, std::string fallback) {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
  };
  SynthSpec s;
  const double n_stocks = num("n-stocks", static_cast<double>(s.n_stocks));
  const double n_months = num("n-months", static_cast<double>(s.n_months));
  if (n_stocks < 1 || n_months < 1 || n_stocks != std::floor(n_stocks) ||
      n_months != std::floor(n_months)) {
    throw ConfigError("simulate spec: n-stocks and n-months must be positive integers");
  }
  s.n_stocks = static_cast<std::size_t>(n_stocks);
  s.n_months = static_cast<std::size_t>(n_months);
  s.model = parse_model(str("model", "capm"));
  s.alpha = {num("alpha-min", s.alpha.lo), num("alpha-max", s.alpha.hi)};
  s.beta = {num("beta-min", s.beta.lo), num("beta-max", s.beta.hi)};
  s.beta_smb = {num("smb-min", s.beta_smb.lo), num("smb-max", s.beta_smb.hi)};
  s.beta_hml = {num("hml-min", s.beta_hml.lo), num("hml-max", s.beta_hml.hi)};
  const std::string noise = str("noise", "gaussian");
  if (noise == "gaussian") {
    s.noise = NoiseLaw::gaussian(num("sigma", 0.05));
  } else if (noise == "student-t") {
    s.noise = NoiseLaw::student_t(num("nu", 3.0), num("scale", 0.05));
  } else {
    throw ConfigError("simulate spec: noise must be gaussian or student-t");
  }
  s.mktrf = {num("mktrf-mean", s.mktrf.mean), num("mktrf-sd", s.mktrf.sd)};
  s.smb = {num("smb-mean", s.smb.mean), num("smb-sd", s.smb.sd)};
  s.hml = {num("hml-mean", s.hml.mean), num("hml-sd", s.hml.sd)};
  s.rf = num("rf", s.rf);
  const double seed = num("seed", 1.0);
  if (seed < 0 || seed != std::floor(seed) || seed > 9007199254740992.0) {
    throw ConfigError("simulate spec: seed must be a nonnegative integer");
  }
  s.seed = static_cast<std::uint64_t>(seed);
  try {
    s.start = Month::parse(str("start", "2007-01"));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("simulate spec: ") + e.what());
  }
  s.kind = parse_return_kind(str("kind", "discrete"));
  if (auto it = kv.find("theta-file"); it != kv.end()) {
    std::ifstream in(it->second);
    if (!in) throw IoError("cannot open theta file '" + it->second + "'");
    std::string line;
    bool header = true;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (text::trim(line).empty()) continue;
      if (header) {
        header = false;
        continue;
      }
      const auto cells = text::split(line, ',');
      Eigen::VectorXd theta(static_cast<Eigen::Index>(cells.size()));
      for (std::size_t j = 0; j < cells.size(); ++j) {
        if (!text::parse_double(cells[j], theta(static_cast<Eigen::Index>(j)))) {
          throw ConfigError(it->second + ":" + std::to_string(line_no) + ": malformed value");
        }
      }
      s.theta_by_stock.push_back(theta);
    }
  }
  return s;
}

CommandResult cmd_simulate(const RunConfig& config) {
  const SynthSpec spec = synth_spec_from_config(config);
  const fs::path out = prepare_out(config);
  const OutputFormat format = output_format(config);
  const SynthPanel sp = generate(spec);
  const Window window{sp.full.months.front(), sp.full.months.back()};
  const Month split = sp.early.months.back();
  write_data_dir(out, sp.records, sp.factors, window, split, static_cast<int>(spec.n_months));

  Table truth{"truth", {"identity", "alpha"}, {}};
  for (const auto& s : slope_names(spec.model)) truth.columns.push_back(s);
  for (std::size_t i = 0; i < sp.truth.size(); ++i) {
    std::vector<Cell> row{sp.full.stocks[i].label};
    for (Eigen::Index j = 0; j < sp.truth[i].size(); ++j) row.emplace_back(sp.truth[i](j));
    truth.add_row(std::move(row));
  }
  CommandResult result;
  result.outputs = {out / "panel.csv", out / "factors.csv", out / "meta.cfg",
                    write_table(out, truth, format)};
  return result;
}

CommandResult run_command(std::string_view name, const RunConfig& config) {
  if (name == "ingest") return cmd_ingest(config);
  if (name == "estimate") return cmd_estimate(config);
  if (name == "rank") return cmd_rank(config);
  if (name == "compare") return cmd_compare(config);
  if (name == "normality") return cmd_normality(config);
  if (name == "simulate") return cmd_simulate(config);
  throw ConfigError("unknown command '" + std::string(name) + "'");
}

}  // namespace fb

#include "factorbench/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "factorbench/error.hpp"
#include "text.hpp"

namespace fb {

namespace {

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

std::string record_where(const RawRecord& r) {
  return r.line > 0 ? "line " + std::to_string(r.line) : "record for " + r.ticker;
}

void check_consecutive(const std::vector<Month>& months, const std::string& what) {
  for (std::size_t i = 1; i < months.size(); ++i) {
    if (months[i].ordinal() != months[i - 1].ordinal() + 1) {
      throw IngestionError(what + ": months not consecutive between " +
                           months[i - 1].to_string() + " and " + months[i].to_string());
    }
  }
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

// Header normalisation: lower case, no spaces, dashes or underscores.
std::string header_token(std::string_view s) {
  std::string out;
  for (char c : text::lower(s)) {
    if (c != ' ' && c != '-' && c != '_') out.push_back(c);
  }
  return out;
}

}  // namespace

void FactorSeries::validate() const {
  const auto n = months.size();
  if (n == 0) throw IngestionError("factor series: empty series");
  if (mktrf.size() != n || smb.size() != n || hml.size() != n || rf.size() != n) {
    throw IngestionError("factor series: column lengths differ");
  }
  check_consecutive(months, "factor series");
}

FactorSeries FactorSeries::slice(Month first, Month last) const {
  if (months.empty() || first < months.front() || last > months.back() || last < first) {
    throw IngestionError("factor months missing within window " + first.to_string() + ".." +
                         last.to_string());
  }
  const auto begin = static_cast<std::size_t>(first.ordinal() - months.front().ordinal());
  const auto count = static_cast<std::size_t>(months_between_inclusive(first, last));
  auto cut = [&](const std::vector<double>& v) {
    return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(begin),
                               v.begin() + static_cast<std::ptrdiff_t>(begin + count));
  };
  FactorSeries out;
  out.months.assign(months.begin() + static_cast<std::ptrdiff_t>(begin),
                    months.begin() + static_cast<std::ptrdiff_t>(begin + count));
  out.mktrf = cut(mktrf);
  out.smb = cut(smb);
  out.hml = cut(hml);
  out.rf = cut(rf);
  return out;
}

std::optional<std::size_t> AlignedPanel::find(std::string_view label) const {
  for (std::size_t i = 0; i < stocks.size(); ++i) {
    if (stocks[i].label == label) return i;
  }
  return std::nullopt;
}

std::size_t AlignedPanel::index_of(std::string_view label) const {
  auto idx = find(label);
  if (!idx) throw LookupError("stock '" + std::string(label) + "' not in panel");
  return *idx;
}

AlignedPanel AlignedPanel::select_months(std::size_t first, std::size_t count) const {
  if (first + count > months.size()) throw DomainError("select_months: range out of panel");
  AlignedPanel out;
  out.kind = kind;
  out.stocks = stocks;
  out.months.assign(months.begin() + static_cast<std::ptrdiff_t>(first),
                    months.begin() + static_cast<std::ptrdiff_t>(first + count));
  const auto rows = static_cast<Eigen::Index>(stocks.size());
  const auto c0 = static_cast<Eigen::Index>(first);
  const auto cn = static_cast<Eigen::Index>(count);
  out.excess = excess.block(0, c0, rows, cn);
  out.returns = returns.block(0, c0, rows, cn);
  if (count > 0) out.factors = factors.slice(out.months.front(), out.months.back());
  return out;
}

std::map<IdentityKey, Identity> assign_identities(std::span<const RawRecord> records) {
  if (records.empty()) throw IngestionError("assign_identities: no records");

  // Earliest record per key decides the ticker; ties keep input order.
  std::map<IdentityKey, const RawRecord*> earliest;
  for (const auto& r : records) {
    if (r.permno.empty() || r.cusip.empty()) {
      throw IngestionError("empty permno or cusip at " + record_where(r));
    }
    IdentityKey key{r.permno, r.cusip};
    auto [it, inserted] = earliest.emplace(key, &r);
    if (!inserted && r.month < it->second->month) it->second = &r;
  }

  std::map<std::string, std::vector<IdentityKey>> by_ticker;
  for (const auto& [key, rec] : earliest) by_ticker[rec->ticker].push_back(key);

  std::map<IdentityKey, Identity> out;
  std::set<std::string> labels;
  for (const auto& [ticker, keys] : by_ticker) {
    for (std::size_t k = 0; k < keys.size(); ++k) {
      std::string label = keys.size() == 1 ? ticker : ticker + "#" + std::to_string(k + 1);
      if (!labels.insert(label).second) {
        throw IngestionError("identity label '" + label + "' is not unique");
      }
      out.emplace(keys[k], Identity{label, keys[k]});
    }
  }
  return out;
}

AlignedPanel build_panel(std::span<const RawRecord> records, const FactorSeries& factors,
                         Window window, int required_len, ReturnKind kind,
                         PanelBuildReport* report) {
  if (window.end < window.start) throw ConfigError("window end precedes start");
  if (required_len <= 0) throw ConfigError("required_len must be positive");
  if (window.length() != required_len) {
    throw ConfigError("window " + window.start.to_string() + ".." + window.end.to_string() +
                      " spans " + std::to_string(window.length()) +
                      " months but required_len is " + std::to_string(required_len));
  }
  const FactorSeries f = factors.slice(window.start, window.end);
  const auto ids = assign_identities(records);
  const auto n_months = static_cast<std::size_t>(window.length());
  const int first = window.start.ordinal();

  struct Slots {
    std::vector<double> ret;
    std::vector<bool> seen;
    int count = 0;
  };
  std::map<IdentityKey, Slots> slots;
  std::set<std::pair<IdentityKey, int>> seen_any;
  std::size_t in_window = 0;
  for (const auto& r : records) {
    IdentityKey key{r.permno, r.cusip};
    if (!seen_any.emplace(key, r.month.ordinal()).second) {
      throw IngestionError("duplicate return for " + ids.at(key).label + " in " +
                           r.month.to_string() + " at " + record_where(r));
    }
    if (!(r.ret > -1.0)) {
      throw IngestionError("return <= -1 at " + record_where(r));
    }
    auto& s = slots[key];
    if (s.ret.empty()) {
      s.ret.assign(n_months, 0.0);
      s.seen.assign(n_months, false);
    }
    if (r.month < window.start || r.month > window.end) continue;
    ++in_window;
    const auto t = static_cast<std::size_t>(r.month.ordinal() - first);
    s.ret[t] = r.ret;
    s.seen[t] = true;
    ++s.count;
  }

  std::vector<std::pair<Identity, const Slots*>> kept;
  PanelBuildReport rep;
  rep.records_in_window = in_window;
  rep.stocks_total = slots.size();
  for (const auto& [key, s] : slots) {
    const Identity& id = ids.at(key);
    if (s.count == required_len) {
      kept.emplace_back(id, &s);
    } else {
      rep.dropped.push_back({id, s.count,
                             std::to_string(s.count) + " of " + std::to_string(required_len) +
                                 " months"});
    }
  }
  std::sort(kept.begin(), kept.end(),
            [](const auto& a, const auto& b) { return a.first.label < b.first.label; });
  std::sort(rep.dropped.begin(), rep.dropped.end(),
            [](const auto& a, const auto& b) { return a.identity.label < b.identity.label; });

  AlignedPanel panel;
  panel.kind = kind;
  panel.months = f.months;
  panel.factors = f;
  const auto rows = static_cast<Eigen::Index>(kept.size());
  const auto cols = static_cast<Eigen::Index>(n_months);
  panel.excess.resize(rows, cols);
  panel.returns.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& [id, s] = kept[static_cast<std::size_t>(i)];
    panel.stocks.push_back(id);
    rep.kept.push_back(id);
    for (Eigen::Index t = 0; t < cols; ++t) {
      const double r = s->ret[static_cast<std::size_t>(t)];
      const double rf = f.rf[static_cast<std::size_t>(t)];
      if (kind == ReturnKind::Discrete) {
        panel.returns(i, t) = r;
        panel.excess(i, t) = r - rf;
      } else {
        panel.returns(i, t) = to_continuous(r);
        panel.excess(i, t) = to_continuous(r) - to_continuous(rf);
      }
    }
  }
  if (report) *report = std::move(rep);
  return panel;
}

std::pair<AlignedPanel, AlignedPanel> split_panel(const AlignedPanel& panel, Month boundary) {
  if (panel.months.empty() || boundary < panel.months.front() ||
      !(boundary < panel.months.back())) {
    throw DomainError("split boundary " + boundary.to_string() +
                      " must lie inside the panel and before its last month");
  }
  const auto early_n =
      static_cast<std::size_t>(boundary.ordinal() - panel.months.front().ordinal() + 1);
  return {panel.select_months(0, early_n),
          panel.select_months(early_n, panel.months.size() - early_n)};
}

std::vector<RawRecord> panel_records(std::span<const RawRecord> records,
                                     const AlignedPanel& panel) {
  std::map<IdentityKey, const Identity*> by_key;
  for (const auto& id : panel.stocks) by_key.emplace(id.key, &id);
  std::vector<RawRecord> out;
  if (panel.months.empty()) return out;
  for (const auto& r : records) {
    auto it = by_key.find(IdentityKey{r.permno, r.cusip});
    if (it == by_key.end()) continue;
    if (r.month < panel.months.front() || r.month > panel.months.back()) continue;
    RawRecord copy = r;
    copy.ticker = it->second->label;
    copy.line = 0;
    out.push_back(std::move(copy));
  }
  std::sort(out.begin(), out.end(), [](const RawRecord& a, const RawRecord& b) {
    return std::tie(a.ticker, a.month) < std::tie(b.ticker, b.month);
  });
  return out;
}

std::vector<RawRecord> load_panel_file(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  std::vector<RawRecord> out;
  bool header_seen = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    auto line = text::trim(lines[i]);
    if (line.empty()) continue;
    auto cells = text::split(line, ',');
    if (!header_seen) {
      std::vector<std::string> got;
      for (auto c : cells) got.push_back(header_token(c));
      const std::vector<std::string> want{"date", "ticker", "permno", "cusip", "ret"};
      if (got != want) {
        throw IngestionError(where(path, line_no) +
                             ": expected header date,ticker,permno,cusip,ret");
      }
      header_seen = true;
      continue;
    }
    if (cells.size() != 5) {
      throw IngestionError(where(path, line_no) + ": expected 5 fields, found " +
                           std::to_string(cells.size()));
    }
    RawRecord r;
    r.line = line_no;
    try {
      r.month = Month::parse(cells[0]);
    } catch (const DomainError& e) {
      throw IngestionError(where(path, line_no) + ": " + e.what());
    }
    r.ticker = std::string(cells[1]);
    r.permno = std::string(cells[2]);
    r.cusip = std::string(cells[3]);
    if (r.permno.empty() || r.cusip.empty()) {
      throw IngestionError(where(path, line_no) + ": empty permno or cusip");
    }
    if (!text::parse_double(cells[4], r.ret)) {
      throw IngestionError(where(path, line_no) + ": malformed return '" +
                           std::string(cells[4]) + "'");
    }
    if (!(r.ret > -1.0)) {
      throw IngestionError(where(path, line_no) + ": return <= -1");
    }
    out.push_back(std::move(r));
  }
  if (!header_seen) throw IngestionError(path.string() + ": missing header");
  return out;
}

FactorSeries load_factor_file(const std::filesystem::path& path, bool percent) {
  const auto lines = read_lines(path);
  FactorSeries f;
  bool header_seen = false;
  const double divisor = percent ? 100.0 : 1.0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    auto line = text::trim(lines[i]);
    if (line.empty()) continue;
    auto cells = text::split(line, ',');
    if (!header_seen) {
      std::vector<std::string> got;
      for (auto c : cells) got.push_back(header_token(c));
      const std::vector<std::string> want{"date", "mktrf", "smb", "hml", "rf"};
      if (got != want) {
        throw IngestionError(where(path, line_no) + ": expected header date,mktrf,smb,hml,rf");
      }
      header_seen = true;
      continue;
    }
    if (cells.size() != 5) {
      throw IngestionError(where(path, line_no) + ": expected 5 fields, found " +
                           std::to_string(cells.size()));
    }
    Month m;
    try {
      m = Month::parse(cells[0]);
    } catch (const DomainError& e) {
      throw IngestionError(where(path, line_no) + ": " + e.what());
    }
    double v[4];
    for (int c = 0; c < 4; ++c) {
      if (!text::parse_double(cells[static_cast<std::size_t>(c + 1)], v[c])) {
        throw IngestionError(where(path, line_no) + ": malformed value '" +
                             std::string(cells[static_cast<std::size_t>(c + 1)]) + "'");
      }
    }
    if (!f.months.empty() && m.ordinal() != f.months.back().ordinal() + 1) {
      throw IngestionError(where(path, line_no) + ": months not consecutive (" +
                           f.months.back().to_string() + " then " + m.to_string() + ")");
    }
    f.months.push_back(m);
    f.mktrf.push_back(v[0] / divisor);
    f.smb.push_back(v[1] / divisor);
    f.hml.push_back(v[2] / divisor);
    f.rf.push_back(v[3] / divisor);
  }
  if (!header_seen) throw IngestionError(path.string() + ": missing header");
  if (f.months.empty()) throw IngestionError(path.string() + ": empty series");
  return f;
}

std::vector<TbillRate> load_tbill_file(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  std::vector<TbillRate> out;
  bool header_seen = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    auto line = text::trim(lines[i]);
    if (line.empty()) continue;
    auto cells = text::split(line, ',');
    if (!header_seen) {
      if (cells.size() != 2 || header_token(cells[0]) != "date" ||
          header_token(cells[1]) != "rate") {
        throw IngestionError(where(path, line_no) + ": expected header date,rate");
      }
      header_seen = true;
      continue;
    }
    if (cells.size() != 2) {
      throw IngestionError(where(path, line_no) + ": expected 2 fields");
    }
    TbillRate r;
    double annual = 0.0;
    try {
      r.month = Month::parse(cells[0]);
    } catch (const DomainError& e) {
      throw IngestionError(where(path, line_no) + ": " + e.what());
    }
    if (!text::parse_double(cells[1], annual)) {
      throw IngestionError(where(path, line_no) + ": malformed rate '" +
                           std::string(cells[1]) + "'");
    }
    if (!out.empty() && r.month.ordinal() != out.back().month.ordinal() + 1) {
      throw IngestionError(where(path, line_no) + ": months not consecutive");
    }
    r.monthly_rate = annual / 12.0 / 100.0;
    out.push_back(r);
  }
  if (out.empty()) throw IngestionError(path.string() + ": empty series");
  return out;
}

void apply_tbill(FactorSeries& factors, std::span<const TbillRate> rates) {
  std::map<int, double> by_month;
  for (const auto& r : rates) by_month.emplace(r.month.ordinal(), r.monthly_rate);
  for (std::size_t t = 0; t < factors.months.size(); ++t) {
    auto it = by_month.find(factors.months[t].ordinal());
    if (it == by_month.end()) {
      throw IngestionError("T-bill series has no rate for " + factors.months[t].to_string());
    }
    factors.rf[t] = it->second;
  }
}

void write_panel_file(const std::filesystem::path& path, std::span<const RawRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "date,ticker,permno,cusip,ret\n";
  for (const auto& r : records) {
    out << r.month.to_string() << ',' << r.ticker << ',' << r.permno << ',' << r.cusip << ','
        << text::exact(r.ret) << '\n';
  }
}

void write_factor_file(const std::filesystem::path& path, const FactorSeries& factors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "date,mktrf,smb,hml,rf\n";
  for (std::size_t t = 0; t < factors.size(); ++t) {
    out << factors.months[t].to_compact() << ',' << text::exact(factors.mktrf[t]) << ','
        << text::exact(factors.smb[t]) << ',' << text::exact(factors.hml[t]) << ','
        << text::exact(factors.rf[t]) << '\n';
  }
}

}  // namespace fb

#include "dhde/economics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "dhde/csv.hpp"
#include "dhde/error.hpp"
#include "dhde/stats.hpp"
#include "dhde/text.hpp"

namespace dhde::economics {
namespace {

std::string band_key(const std::string& label) { return text::trim(text::nfkc(label)); }

bool is_integral(double v) {
  return std::isfinite(v) && std::fabs(v) < 9.0e15 && v == std::trunc(v);
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

CcfResult best_of(std::vector<CcfPoint> points) {
  CcfResult res;
  res.points = std::move(points);
  bool first = true;
  for (const auto& p : res.points) {
    if (first || p.r > res.best_r) {
      res.best_r = p.r;
      res.best_lag = p.lag;
      first = false;
    }
  }
  return res;
}

void check_not_constant(std::span<const double> v, const char* which) {
  if (std::all_of(v.begin(), v.end(), [&](double a) { return a == v[0]; })) {
    throw NumericalError(std::string("ccf: ") + which + " series is constant");
  }
}

}  // namespace

SpendBandTable::SpendBandTable(std::vector<std::pair<std::string, double>> bands) : bands_(std::move(bands)) {
  std::set<std::string> seen;
  std::vector<std::string> problems;
  for (auto& [label, mid] : bands_) {
    label = band_key(label);
    if (label.empty()) problems.push_back("spend band with an empty label");
    if (!(mid >= 0.0) || !std::isfinite(mid)) problems.push_back("spend band '" + label + "' has a negative midpoint");
    if (!seen.insert(label).second) problems.push_back("duplicate spend band '" + label + "'");
  }
  if (!problems.empty()) throw DataError(UsageError(problems).what());
}

SpendBandTable SpendBandTable::load_csv(std::istream& in) {
  const csv::Table t = csv::read_table(in);
  const auto label = t.column("label");
  const auto mid = t.column("midpoint_yen");
  if (!label || !mid) throw DataError("spend band file needs columns label,midpoint_yen");
  std::vector<std::pair<std::string, double>> bands;
  for (const auto& row : t.rows) {
    if (row.fields.size() <= std::max(*label, *mid)) throw RowError(row.line, "too few fields");
    const auto v = text::parse_double(row.fields[*mid]);
    if (!v) throw RowError(row.line, "midpoint '" + row.fields[*mid] + "' is not a number");
    bands.emplace_back(row.fields[*label], *v);
  }
  return SpendBandTable(std::move(bands));
}

std::optional<double> SpendBandTable::midpoint(const std::string& label) const {
  const std::string key = band_key(label);
  for (const auto& [l, m] : bands_) {
    if (l == key) return m;
  }
  return std::nullopt;
}

SpendSummary mean_spend(const std::vector<ingest::SurveyResponse>& responses, const SpendBandTable& bands) {
  SpendSummary s;
  double sum = 0.0;
  for (const auto& r : responses) {
    if (text::is_blank(r.spend_band)) {
      ++s.missing;
      continue;
    }
    const auto m = bands.midpoint(r.spend_band);
    if (!m) {
      ++s.unmapped;
      continue;
    }
    sum += *m;
    ++s.used;
  }
  if (s.used == 0) throw DataError("mean_spend: no response carries a mapped spend band");
  s.mean_yen = sum / static_cast<double>(s.used);
  return s;
}

FrictionFlags flag_friction_days(const features::FeatureMatrix& fm, const Eigen::VectorXd& predicted,
                                 const FrictionThresholds& thresholds) {
  if (fm.rows() == 0) throw DataError("flag_friction_days: empty panel");
  if (static_cast<std::size_t>(predicted.size()) != fm.rows()) {
    throw UsageError("flag_friction_days: predictions are not aligned with the panel");
  }
  if (thresholds.intent_quantile < 0.0 || thresholds.intent_quantile > 1.0) {
    throw UsageError("flag_friction_days: intent quantile must lie in [0, 1]");
  }
  const Eigen::VectorXd intent = fm.x.col(static_cast<Eigen::Index>(fm.col("directions")));
  const Eigen::VectorXd severity = fm.x.col(static_cast<Eigen::Index>(fm.col("weather_severity")));

  FrictionFlags out;
  out.intent_threshold =
      stats::quantile({intent.data(), static_cast<std::size_t>(intent.size())}, thresholds.intent_quantile);
  out.severity_threshold = thresholds.severity_min;
  out.observed_days = fm.rows();
  for (std::size_t i = 0; i < fm.rows(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double residual = fm.y(r) - predicted(r);
    if (intent(r) >= out.intent_threshold && severity(r) >= thresholds.severity_min && residual < 0.0) {
      out.rows.push_back(i);
      out.dates.push_back(fm.dates[i]);
      out.residuals.push_back(residual);
    }
  }
  return out;
}

std::int64_t yen_value(double lost_visitors, double spend_yen) {
  if (is_integral(lost_visitors) && is_integral(spend_yen)) {
    const __int128 p = static_cast<__int128>(static_cast<std::int64_t>(lost_visitors)) *
                       static_cast<__int128>(static_cast<std::int64_t>(spend_yen));
    if (p > INT64_MAX || p < INT64_MIN) throw NumericalError("yen value overflows 64 bits");
    return static_cast<std::int64_t>(p);
  }
  const long double p = static_cast<long double>(lost_visitors) * static_cast<long double>(spend_yen);
  if (!std::isfinite(p) || std::fabs(p) > 9.2e18L) throw NumericalError("yen value overflows 64 bits");
  return static_cast<std::int64_t>(std::llroundl(p));
}

GapReport opportunity_gap(const std::vector<NodeGapInput>& nodes, double spend_yen, double fx_rate, Exec exec) {
  std::vector<std::string> problems;
  if (!(spend_yen > 0.0)) problems.emplace_back("opportunity_gap: spend must be positive");
  if (!(fx_rate > 0.0)) problems.emplace_back("opportunity_gap: fx rate must be positive");
  for (const auto& n : nodes) {
    if (n.dates.size() != n.residuals.size()) problems.push_back("node " + n.node_id + ": dates and residuals differ in length");
    if (n.observed_days == 0) problems.push_back("node " + n.node_id + ": observed_days must be positive");
  }
  if (!problems.empty()) throw UsageError(problems);

  GapReport rep;
  rep.spend_yen = spend_yen;
  rep.fx_rate = fx_rate;
  rep.nodes.resize(nodes.size());
  const long count = static_cast<long>(nodes.size());
  LoopErrors errors;
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (long i = 0; i < count; ++i) {
    errors.capture(static_cast<std::size_t>(i), [&] {
      const NodeGapInput& in = nodes[static_cast<std::size_t>(i)];
      NodeGap& g = rep.nodes[static_cast<std::size_t>(i)];
      g.node_id = in.node_id;
      g.flagged = in.dates;
      g.observed_days = in.observed_days;
      g.annualization = 365.0 / static_cast<double>(in.observed_days);
      for (double r : in.residuals) g.suppressed += std::max(0.0, -r);
      g.lost_visitors = g.suppressed * g.annualization;
      g.yen = yen_value(g.lost_visitors, spend_yen);
      g.usd = round2(static_cast<double>(g.yen) / fx_rate);
    });
  }
  errors.rethrow();
  for (const auto& g : rep.nodes) rep.lost_visitors += g.lost_visitors;
  rep.yen = yen_value(rep.lost_visitors, spend_yen);
  rep.usd = round2(static_cast<double>(rep.yen) / fx_rate);
  return rep;
}

ProvenanceNote provenance_note(double lost_visitors, double spend_yen, std::int64_t printed_yen) {
  if (!(lost_visitors > 0.0)) throw UsageError("provenance_note: lost visitors must be positive");
  ProvenanceNote n;
  n.lost_visitors = lost_visitors;
  n.spend_yen = spend_yen;
  n.computed_yen = yen_value(lost_visitors, spend_yen);
  n.printed_yen = printed_yen;
  n.divergence = printed_yen - n.computed_yen;
  n.implied_spend = static_cast<double>(printed_yen) / lost_visitors;
  return n;
}

CcfResult ccf(std::span<const double> x, std::span<const double> y, int max_lag, Exec exec) {
  if (max_lag < 0) throw UsageError("ccf: max_lag must be non-negative");
  const std::size_t overlap = std::min(x.size(), y.size());
  if (overlap < static_cast<std::size_t>(max_lag) + 10) {
    throw NumericalError("ccf: need at least max_lag + 10 overlapping observations");
  }
  check_not_constant(x, "x");
  check_not_constant(y, "y");
  const auto nx = static_cast<long>(x.size());
  const auto ny = static_cast<long>(y.size());
  std::vector<CcfPoint> points(static_cast<std::size_t>(2 * max_lag + 1));
  const long lags = static_cast<long>(points.size());
  LoopErrors errors;
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (long i = 0; i < lags; ++i) {
    errors.capture(static_cast<std::size_t>(i), [&] {
      const long lag = i - max_lag;
      std::vector<double> a, b;
      for (long t = std::max(0L, lag); t < ny && t - lag < nx; ++t) {
        a.push_back(x[static_cast<std::size_t>(t - lag)]);
        b.push_back(y[static_cast<std::size_t>(t)]);
      }
      points[static_cast<std::size_t>(i)] = {static_cast<int>(lag), stats::pearson_r(a, b), a.size()};
    });
  }
  errors.rethrow();
  return best_of(std::move(points));
}

CcfResult ccf(const std::vector<Date>& x_dates, std::span<const double> x, const std::vector<Date>& y_dates,
              std::span<const double> y, int max_lag, Exec exec) {
  if (max_lag < 0) throw UsageError("ccf: max_lag must be non-negative");
  if (x_dates.size() != x.size() || y_dates.size() != y.size()) throw UsageError("ccf: dates and values differ in length");
  std::map<Date, double> xm;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!xm.emplace(x_dates[i], x[i]).second) throw DataError("ccf: duplicate date " + format_date(x_dates[i]));
  }
  std::size_t overlap = 0;
  std::set<Date> y_seen;
  for (const Date d : y_dates) {
    if (!y_seen.insert(d).second) throw DataError("ccf: duplicate date " + format_date(d));
    overlap += xm.contains(d) ? 1 : 0;
  }
  if (overlap < static_cast<std::size_t>(max_lag) + 10) {
    throw NumericalError("ccf: need at least max_lag + 10 overlapping dates");
  }
  check_not_constant(x, "x");
  check_not_constant(y, "y");

  // Pairs are visited in ascending y date, which is also ascending x date,
  // so swapping the arguments and negating the lag gives identical sums.
  std::vector<std::size_t> y_order(y.size());
  std::iota(y_order.begin(), y_order.end(), std::size_t{0});
  std::stable_sort(y_order.begin(), y_order.end(), [&](std::size_t a, std::size_t b) { return y_dates[a] < y_dates[b]; });

  std::vector<CcfPoint> points(static_cast<std::size_t>(2 * max_lag + 1));
  const long lags = static_cast<long>(points.size());
  LoopErrors errors;
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (long i = 0; i < lags; ++i) {
    errors.capture(static_cast<std::size_t>(i), [&] {
      const long lag = i - max_lag;
      std::vector<double> a, b;
      for (std::size_t k : y_order) {
        const auto it = xm.find(y_dates[k] - std::chrono::days{lag});
        if (it == xm.end()) continue;
        a.push_back(it->second);
        b.push_back(y[k]);
      }
      if (a.size() < 3) throw NumericalError("ccf: too few pairs at lag " + std::to_string(lag));
      points[static_cast<std::size_t>(i)] = {static_cast<int>(lag), stats::pearson_r(a, b), a.size()};
    });
  }
  errors.rethrow();
  return best_of(std::move(points));
}

RankingBaseline load_ranking_csv(std::istream& in) {
  const csv::Table t = csv::read_table(in);
  const auto month_col = t.column("month");
  const auto base_col = t.column("baseline_visitors");
  if (!month_col || !base_col) throw DataError("ranking baseline needs columns month,baseline_visitors,tier_<rank>...");
  std::vector<std::pair<std::size_t, int>> tier_cols;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    const std::string h = text::trim(t.header[c]);
    if (h.rfind("tier_", 0) != 0) continue;
    const auto rank = text::parse_int(h.substr(5));
    if (!rank || *rank < 1) throw DataError("ranking baseline: bad tier column '" + h + "'");
    tier_cols.emplace_back(c, static_cast<int>(*rank));
  }
  if (tier_cols.empty()) throw DataError("ranking baseline: no tier_<rank> columns");
  std::sort(tier_cols.begin(), tier_cols.end(), [](const auto& a, const auto& b) { return a.second < b.second; });

  RankingBaseline out;
  std::set<unsigned> seen;
  for (const auto& row : t.rows) {
    if (row.fields.size() != t.header.size()) throw RowError(row.line, "field count differs from the header");
    const auto m = text::parse_int(row.fields[*month_col]);
    if (!m || *m < 1 || *m > 12) throw RowError(row.line, "month must be 1..12");
    if (!seen.insert(static_cast<unsigned>(*m)).second) throw RowError(row.line, "duplicate month " + std::to_string(*m));
    const auto base = text::parse_double(row.fields[*base_col]);
    if (!base || *base < 0.0) throw RowError(row.line, "baseline_visitors must be a non-negative number");
    RankingMonth rm;
    rm.month = static_cast<unsigned>(*m);
    rm.baseline = *base;
    for (const auto& [c, rank] : tier_cols) {
      if (text::is_blank(row.fields[c])) continue;
      const auto v = text::parse_double(row.fields[c]);
      if (!v || *v < 0.0) throw RowError(row.line, "tier threshold must be a non-negative number");
      if (!rm.tiers.empty() && *v > rm.tiers.back().second) {
        throw RowError(row.line, "tier thresholds must not increase as the rank number grows");
      }
      rm.tiers.emplace_back(rank, *v);
    }
    out.months.push_back(std::move(rm));
  }
  if (out.months.size() != 12) throw DataError("ranking baseline must list 12 months");
  return out;
}

int rank_of(const RankingMonth& m, double total, int floor_rank) {
  for (const auto& [rank, threshold] : m.tiers) {
    if (total >= threshold) return rank;
  }
  return floor_rank;
}

RankingResult ranking_simulation(const RankingBaseline& baseline, double recovered_annual, std::vector<double> weights) {
  if (baseline.months.size() != 12) throw UsageError("ranking_simulation: baseline must hold 12 months");
  if (recovered_annual < 0.0) throw UsageError("ranking_simulation: recovered visitors must be non-negative");
  if (weights.empty()) weights.assign(12, 1.0 / 12.0);
  if (weights.size() != 12) throw UsageError("ranking_simulation: need 12 seasonal weights");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw UsageError("ranking_simulation: weights must be non-negative");
    total += w;
  }
  if (std::fabs(total - 1.0) > 1e-9) throw UsageError("ranking_simulation: weights must sum to 1");

  RankingResult res;
  res.recovered_annual = recovered_annual;
  for (std::size_t i = 0; i < 12; ++i) {
    const RankingMonth& m = baseline.months[i];
    RankingMonthResult r;
    r.month = m.month;
    r.baseline = m.baseline;
    r.weight = weights[i];
    r.recovered = recovered_annual * weights[i];
    r.baseline_rank = rank_of(m, m.baseline, baseline.floor_rank);
    r.projected_rank = rank_of(m, m.baseline + r.recovered, baseline.floor_rank);
    // The next tier is the lowest threshold strictly above the baseline.
    for (auto it = m.tiers.rbegin(); it != m.tiers.rend(); ++it) {
      if (it->second > m.baseline) {
        r.shortfall = it->second - m.baseline;
        r.closed_pct = 100.0 * r.recovered / *r.shortfall;
        break;
      }
    }
    res.months.push_back(r);
  }
  return res;
}

}  // namespace dhde::economics

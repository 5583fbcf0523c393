#include "dhde/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "dhde/csv.hpp"
#include "dhde/error.hpp"
#include "dhde/text.hpp"

namespace dhde::features {

int is_weekend_or_holiday(Date d, const HolidayTable& table) {
  const bool holiday = table.is_holiday(d);  // throws outside the validity range
  return (is_weekend(d) || holiday) ? 1 : 0;
}

int weather_severity(double precip, double wind, std::optional<double> snow_depth, const SeverityPolicy& policy) {
  if (!(precip >= 0.0) || !(wind >= 0.0)) {
    throw DataError("weather_severity: precip and wind must be non-negative");
  }
  if (snow_depth && !(*snow_depth >= 0.0)) throw DataError("weather_severity: negative snow depth");
  int level = 0;
  if (precip > policy.precip_hostile_mm) {
    level = 2;
  } else if (precip > 0.0) {
    level = 1;
  }
  if (wind > policy.wind_limit_ms) ++level;
  if (policy.snow_escalation && snow_depth && *snow_depth >= policy.snow_threshold_cm) ++level;
  return std::min(level, 3);
}

std::vector<std::string> jma_weather_columns() { return {"precip", "temp", "sun", "wind", "precip_lag1"}; }

std::vector<std::string> weather_feature_columns() {
  auto cols = jma_weather_columns();
  cols.emplace_back("weather_severity");
  cols.emplace_back("weekend_x_severity");
  return cols;
}

std::size_t FeatureMatrix::col(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw UsageError("unknown feature column '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

bool FeatureMatrix::has(const std::string& name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

FeatureMatrix FeatureMatrix::select_rows(const std::vector<std::size_t>& idx) const {
  FeatureMatrix out;
  out.names = names;
  out.x.resize(static_cast<Eigen::Index>(idx.size()), x.cols());
  out.y.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(idx[i]);
    out.x.row(static_cast<Eigen::Index>(i)) = x.row(r);
    out.y(static_cast<Eigen::Index>(i)) = y(r);
    out.dates.push_back(dates[idx[i]]);
    out.prev_count.push_back(prev_count[idx[i]]);
  }
  return out;
}

FeatureMatrix FeatureMatrix::keep_columns(const std::vector<std::string>& keep) const {
  FeatureMatrix out = *this;
  out.names.clear();
  out.x.resize(x.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    out.x.col(static_cast<Eigen::Index>(j)) = x.col(static_cast<Eigen::Index>(col(keep[j])));
    out.names.push_back(keep[j]);
  }
  return out;
}

FeatureMatrix FeatureMatrix::drop_columns(const std::vector<std::string>& drop) const {
  for (const auto& d : drop) (void)col(d);  // unknown names are an error
  std::vector<std::string> keep;
  for (const auto& n : names) {
    if (std::find(drop.begin(), drop.end(), n) == drop.end()) keep.push_back(n);
  }
  return keep_columns(keep);
}

FeatureMatrix build_features(const ingest::DailyPanel& panel, const HolidayTable& table,
                             const FeatureOptions& options) {
  const auto& rows = panel.rows;
  if (rows.size() < 8) {
    throw DataError("build_features: need at least 8 panel rows, got " + std::to_string(rows.size()));
  }
  std::map<Date, std::size_t> index;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].date <= rows[i - 1].date) throw DataError("panel rows must be strictly ascending by date");
    index.emplace(rows[i].date, i);
  }
  auto at = [&](Date d) -> const ingest::PanelRow* {
    const auto it = index.find(d);
    return it == index.end() ? nullptr : &rows[it->second];
  };

  FeatureMatrix fm;
  for (const char* n : kFeatureNames) fm.names.emplace_back(n);
  fm.panel_dates.reserve(rows.size());
  fm.retained.assign(rows.size(), false);

  // First pass: which rows have complete calendar-day windows.
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    fm.panel_dates.push_back(rows[i].date);
    bool ok = true;
    for (int k = 1; k <= 6 && ok; ++k) ok = at(rows[i].date - std::chrono::days{k}) != nullptr;
    if (ok) {
      fm.retained[i] = true;
      kept.push_back(i);
    }
  }
  if (kept.empty()) throw DataError("build_features: no row has a complete 7-day window");

  // Day-of-week baseline over the full panel or the training window only.
  std::size_t baseline_end = rows.size();
  if (options.dow_baseline == DowBaseline::train_only) {
    if (!options.train_rows || *options.train_rows == 0 || *options.train_rows > kept.size()) {
      throw UsageError("build_features: train_only baseline needs 0 < train_rows <= retained rows");
    }
    baseline_end = kept[*options.train_rows - 1] + 1;
  }
  double dow_sum[7] = {};
  int dow_n[7] = {};
  double all_sum = 0.0;
  for (std::size_t i = 0; i < baseline_end; ++i) {
    const unsigned w = weekday_index(rows[i].date);
    dow_sum[w] += static_cast<double>(rows[i].count);
    ++dow_n[w];
    all_sum += static_cast<double>(rows[i].count);
  }
  const double all_mean = all_sum / static_cast<double>(baseline_end);

  const auto n = static_cast<Eigen::Index>(kept.size());
  fm.x.resize(n, static_cast<Eigen::Index>(kFeatureNames.size()));
  fm.y.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = rows[kept[static_cast<std::size_t>(r)]];
    const Date d = row.date;
    auto intent_at = [&](int k) { return static_cast<double>(at(d - std::chrono::days{k})->directions); };
    const double intent = static_cast<double>(row.directions);
    double roll = 0.0;
    for (int k = 0; k <= 6; ++k) roll += intent_at(k);
    roll /= 7.0;
    const int flag = is_weekend_or_holiday(d, table);
    const int severity = weather_severity(row.precip, row.wind, row.snow_depth, options.severity);
    const unsigned w = weekday_index(d);
    const double dow_mean = dow_n[w] > 0 ? dow_sum[w] / dow_n[w] : all_mean;

    fm.x.row(r) << intent, intent_at(1), intent_at(2), intent_at(3), roll, row.precip, row.temp, row.sun, row.wind,
        at(d - std::chrono::days{1})->precip, flag, severity, dow_mean, flag * severity, flag * intent,
        static_cast<double>(month_of(d));
    fm.y(r) = static_cast<double>(row.count);
    fm.dates.push_back(d);
    fm.prev_count.emplace_back(static_cast<double>(at(d - std::chrono::days{1})->count));
  }
  return fm;
}

void write_features_csv(std::ostream& out, const FeatureMatrix& fm) {
  std::vector<std::string> header = {"date"};
  header.insert(header.end(), fm.names.begin(), fm.names.end());
  header.emplace_back("count");
  csv::write_row(out, header);
  for (std::size_t r = 0; r < fm.rows(); ++r) {
    std::vector<std::string> f = {format_date(fm.dates[r])};
    for (std::size_t c = 0; c < fm.cols(); ++c) {
      f.push_back(text::format_double(fm.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))));
    }
    f.push_back(text::format_double(fm.y(static_cast<Eigen::Index>(r))));
    csv::write_row(out, f);
  }
}

}  // namespace dhde::features

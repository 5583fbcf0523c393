#pragma once

#include <array>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dhde/holidays.hpp"
#include "dhde/ingest.hpp"

namespace dhde::features {

int is_weekend_or_holiday(Date d, const HolidayTable& table);

struct SeverityPolicy {
  bool snow_escalation = false;
  double snow_threshold_cm = 20.0;
  double precip_hostile_mm = 10.0;
  double wind_limit_ms = 8.0;
};

// 0 with no rain, 1 for 0 < precip <= 10, 2 above 10 mm/day; wind above
// 8 m/s adds one level; optional snow escalation adds one more; clamped to 3.
int weather_severity(double precip, double wind, std::optional<double> snow_depth = std::nullopt,
                     const SeverityPolicy& policy = {});

enum class DowBaseline { full_sample, train_only };

inline constexpr std::array<const char*, 16> kFeatureNames = {
    "directions",  "directions_lag1", "directions_lag2",       "directions_lag3",
    "directions_roll7", "precip",     "temp",                  "sun",
    "wind",        "precip_lag1",     "is_weekend_or_holiday", "weather_severity",
    "dow_mean_count", "weekend_x_severity", "weekend_x_intent", "month",
};

// The five meteorological inputs taken straight from the station data.
std::vector<std::string> jma_weather_columns();

// The JMA columns plus every feature derived from them.
std::vector<std::string> weather_feature_columns();

struct FeatureOptions {
  DowBaseline dow_baseline = DowBaseline::full_sample;
  // Number of leading retained rows used as the training window when
  // dow_baseline == train_only.
  std::optional<std::size_t> train_rows;
  SeverityPolicy severity;
};

struct FeatureMatrix {
  std::vector<std::string> names;
  std::vector<Date> dates;      // retained rows, ascending
  Eigen::MatrixXd x;            // rows = dates.size(), cols = names.size()
  Eigen::VectorXd y;            // count
  std::vector<std::optional<double>> prev_count;  // count on the previous calendar day, when in the panel

  std::vector<Date> panel_dates;
  std::vector<bool> retained;   // per panel row; false when a lag or roll window was incomplete

  std::size_t rows() const { return dates.size(); }
  std::size_t cols() const { return names.size(); }
  std::size_t col(const std::string& name) const;
  bool has(const std::string& name) const;

  FeatureMatrix select_rows(const std::vector<std::size_t>& idx) const;
  FeatureMatrix drop_columns(const std::vector<std::string>& drop) const;
  FeatureMatrix keep_columns(const std::vector<std::string>& keep) const;
};

// Lags and the 7-day roll are taken over calendar days. A row whose window
// reaches a date missing from the panel is masked, never zero-filled.
FeatureMatrix build_features(const ingest::DailyPanel& panel, const HolidayTable& table,
                             const FeatureOptions& options = {});

// date, the 16 features, count
void write_features_csv(std::ostream& out, const FeatureMatrix& fm);

}  // namespace dhde::features

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dhde/date.hpp"
#include "dhde/features.hpp"
#include "dhde/holidays.hpp"
#include "dhde/ingest.hpp"
#include "dhde/kansei.hpp"

namespace dhde::synth {

// Monthly climatology, index 0 = January.
struct WeatherProfile {
  std::array<double, 12> temp_mean{};
  std::array<double, 12> rain_day_prob{};
  std::array<double, 12> rain_rate_mm{};  // mean hourly amount during rain
  std::array<double, 12> wind_mean{};
  std::array<double, 12> sun_clear{};     // sunshine fraction of a clear daylight hour
  std::array<double, 12> snowfall_cm{};   // mean daily accumulation on cold wet days

  static WeatherProfile hokuriku();
};

struct DgpParams {
  Date start = make_date(2024, 12, 1);
  std::size_t n_days = 420;
  std::uint64_t seed = 20241201;

  double intercept = 300.0;
  // True coefficient per feature name; absent names are zero.
  // dow_mean_count is derived from the counts themselves and must stay 0.
  std::map<std::string, double> coef = default_coefficients();
  double sigma = 60.0;
  double rho = 0.0;

  WeatherProfile weather = WeatherProfile::hokuriku();

  double intent_base = 900.0;
  double intent_weekend_lift = 0.35;
  double intent_season_amp = 0.25;  // peaks in August
  double intent_noise_sd = 0.08;    // multiplicative

  // Fraction of intent lost per severity level 0..3 in the active months,
  // converted to visitors at suppression_conversion per direction.
  std::array<double, 4> suppression{0.0, 0.0, 0.0, 0.0};
  std::vector<unsigned> suppression_months{12, 1, 2};
  double suppression_conversion = 1.0;

  // Threshold and interaction terms that a linear model cannot express.
  bool nonlinear = false;

  std::size_t outage_days = 0;     // planted zero-count days at the first node
  std::size_t duplicate_rows = 0;  // repeated 5-minute rows at the first node

  static std::map<std::string, double> default_coefficients();
};

// Throws UsageError listing every invalid field.
void validate(const DgpParams& p);

struct HourlyWeather {
  Date date;
  int hour = 0;
  double temp = 0.0, precip = 0.0, sun = 0.0, wind = 0.0, humidity = 0.0;
  std::optional<double> snow_depth;
};

struct NodeTruth {
  ingest::NodeConfig node;
  double scale = 1.0;  // multiplies the intercept, coefficients and noise
  double intercept = 0.0;
  std::map<std::string, double> coef;
  std::vector<HourlyWeather> hourly;
  std::vector<ingest::DailyWeather> weather;  // as ingest will read it back
  std::vector<double> latent;                 // real-valued count per day
  std::vector<double> suppressed;             // visitors lost per day
  std::vector<int> severity;
  std::vector<std::int64_t> counts;           // emitted daily totals (0 on outage days)
  std::vector<Date> outage_days;
  // Latent design (dow_mean_count omitted) and latent target on retained rows.
  features::FeatureMatrix latent_features;
};

struct SynthData {
  DgpParams params;
  std::vector<Date> dates;
  std::vector<ingest::DailyIntent> intent;
  std::vector<NodeTruth> nodes;
};

SynthData generate_panel(const DgpParams& params, const std::vector<ingest::NodeConfig>& nodes = ingest::default_nodes(),
                         const features::HolidayTable& holidays = features::HolidayTable::embedded());

void write_camera_csv(std::ostream& out, const NodeTruth& node, std::uint64_t seed, std::size_t duplicate_rows = 0);
void write_jma_csv(std::ostream& out, const NodeTruth& node);
void write_intent_csv(std::ostream& out, const std::vector<ingest::DailyIntent>& intent);

struct SurveyCorpusParams {
  std::size_t n_low = 1066;   // satisfaction 1-2
  std::size_t n_mid = 500;    // satisfaction 3
  std::size_t n_high = 10000; // satisfaction 4-5
  double rate_low = 0.061;
  double rate_mid = 0.02;
  double rate_high = 0.005;
  Date first = make_date(2024, 12, 1);
  std::size_t span_days = 365;
};

// Planted hits per group are round(rate * n), placed on randomly chosen
// responses; every other response is built only from phrases that match no
// lexicon keyword.
std::vector<ingest::SurveyResponse> generate_survey_corpus(const SurveyCorpusParams& params,
                                                           const kansei::Lexicon& lexicon, std::uint64_t seed);

// Labels and midpoints used for the synthetic spend-band file.
std::vector<std::pair<std::string, double>> default_spend_bands();

// Fukui-only responses carrying spend bands and home prefectures.
std::vector<ingest::SurveyResponse> generate_raw_survey(std::size_t n, Date first, std::size_t span_days,
                                                        std::uint64_t seed);

struct Regression {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<std::string> names;
  std::size_t dominant = 0;  // column index carrying most of the signal
};

// Uniform features on [0, 1]; y = 12 x0 + 3 sin(pi x1 x2) + 4 (x3 - 0.5)^2 +
// noise_sd * N(0, 1). Columns x4.. are pure noise.
Regression nonlinear_regression(std::size_t n, std::size_t p, double noise_sd, std::uint64_t seed);

struct FixtureFiles {
  std::map<std::string, std::filesystem::path> camera;  // node id -> file
  std::map<std::string, std::filesystem::path> jma;     // station key -> file
  std::filesystem::path intent, survey_merged, survey_raw, spend_bands, ranking, forecast, outlook;
};

// Writes every input stream the pipeline reads into `dir`.
FixtureFiles write_fixtures(const SynthData& data, const std::filesystem::path& dir);

}  // namespace dhde::synth

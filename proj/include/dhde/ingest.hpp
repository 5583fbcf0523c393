#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dhde/date.hpp"

namespace dhde::ingest {

enum class Environment { coastal, urban, mountain, scenic };
enum class SensorKind { person_camera, face_gate, survey_proxy };

struct NodeConfig {
  std::string node_id;  // "A".."D", optionally with a sub-site suffix
  std::string name;
  Environment environment = Environment::coastal;
  SensorKind sensor_kind = SensorKind::person_camera;
  std::string station_id;  // exactly one weather station per node
  bool indoor_sheltered = false;
  bool survey_proxy_allowed = false;
};

// Weather station metadata. records_snow marks the one station whose snow
// depth is validated; other stations never report snow_depth.
struct Station {
  std::string key;
  std::string name;
  std::string kind;
  int block_no = 0;
  double latitude = 0.0;
  double longitude = 0.0;
  double elevation_m = 0.0;
  std::string node_id;
  bool records_snow = false;
};

std::vector<Station> default_stations();
std::vector<NodeConfig> default_nodes();

// Throws UsageError listing every invariant violation.
void validate_nodes(const std::vector<NodeConfig>& nodes, const std::vector<Station>& stations);

std::string to_string(Environment e);
std::string to_string(SensorKind k);
Environment parse_environment(const std::string& s);
SensorKind parse_sensor_kind(const std::string& s);

struct DailyCount {
  Date date;
  std::int64_t count = 0;
  SensorKind source = SensorKind::person_camera;
};

struct CameraParse {
  std::vector<DailyCount> days;
  std::size_t duplicate_rows = 0;
  std::size_t dropped_zero_days = 0;
  std::vector<Date> zero_days;
  std::size_t records = 0;
  std::size_t physical_lines = 0;
};

// 5-minute rows are deduplicated on the exact `aggregate from` text (first
// occurrence kept) and summed per calendar day. Days summing to zero are
// treated as outages and dropped.
CameraParse parse_camera_csv(std::istream& in, const NodeConfig& node);

struct DailyWeather {
  Date date;
  std::optional<double> precip;      // mm/day, summed
  std::optional<double> temp;        // deg C, mean
  std::optional<double> sun;         // h, mean of hourly sunshine
  std::optional<double> wind;        // m/s, mean
  std::optional<double> snow_depth;  // cm, mean
  std::optional<double> humidity;    // %, mean

  bool complete() const { return precip && temp && sun && wind; }
};

struct WeatherParse {
  std::vector<DailyWeather> days;
  std::size_t warnings = 0;  // non-numeric or out-of-domain cells treated as missing
  std::size_t records = 0;
};

WeatherParse parse_jma_csv(std::istream& in, const std::string& station_key,
                           const std::vector<Station>& stations = default_stations());

struct DailyIntent {
  Date date;
  std::int64_t directions = 0;
};

struct IntentParse {
  std::vector<DailyIntent> days;
  std::size_t warnings = 0;
};

IntentParse parse_intent_csv(std::istream& in);

enum class SurveyDataset { raw_fukui, merged_hokuriku };

struct SurveyResponse {
  std::string prefecture;  // collection site
  std::optional<Date> survey_date;
  std::optional<int> satisfaction;          // 1..5
  std::optional<int> nps_raw;               // 0..10
  std::optional<int> satisfaction_service;  // 1..5
  std::string reason;
  std::string inconvenience;
  std::string freetext;
  std::string location;
  std::string spend_band;       // raw_fukui only
  std::string home_prefecture;  // raw_fukui only; never the collection site
};

struct SurveyParse {
  std::vector<SurveyResponse> responses;
  std::size_t warnings = 0;
  std::size_t records = 0;
  std::size_t physical_lines = 0;
};

// Satisfaction label to score; accepts the five Japanese labels and the
// digits 1-5. Labels are compared after NFKC normalization and trimming.
std::optional<int> map_satisfaction(const std::string& label);
const std::vector<std::pair<std::string, int>>& satisfaction_labels();

SurveyParse parse_survey_csv(std::istream& in, SurveyDataset dataset);

void write_survey_csv(std::ostream& out, const std::vector<SurveyResponse>& rows, SurveyDataset dataset);

struct PanelRow {
  Date date;
  std::int64_t count = 0;
  double precip = 0.0;
  double temp = 0.0;
  double sun = 0.0;
  double wind = 0.0;
  std::optional<double> snow_depth;
  std::int64_t directions = 0;

  bool operator==(const PanelRow&) const = default;
};

struct GapEntry {
  Date date;
  bool has_count = false;
  bool has_weather = false;
  bool has_intent = false;
};

struct Coverage {
  std::size_t n_days = 0;
  std::vector<GapEntry> gaps;
  std::size_t dropped_zero_days = 0;
};

struct DailyPanel {
  std::string node_id;
  std::vector<PanelRow> rows;
  Coverage coverage;
};

// Inner join on date. Weather days missing any of precip/temp/sun/wind count
// as absent. Throws DataError("no overlapping dates") on an empty join.
DailyPanel build_panel(const std::vector<DailyCount>& counts, const std::vector<DailyWeather>& weather,
                       const std::vector<DailyIntent>& intent, const NodeConfig& node,
                       std::size_t dropped_zero_days = 0);

// Columns: date,count,precip,temp,sun,wind[,snow_depth],directions. The
// snow_depth column is written only when some row carries a value.
void write_panel_csv(std::ostream& out, const DailyPanel& panel);
DailyPanel read_panel_csv(std::istream& in, const std::string& node_id);

}  // namespace dhde::ingest

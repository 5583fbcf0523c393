#include "dhde/ingest.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_set>

#include "dhde/csv.hpp"
#include "dhde/error.hpp"
#include "dhde/text.hpp"

namespace dhde::ingest {
namespace {

std::size_t require_column(const csv::Table& t, std::string_view name, std::string_view stream) {
  auto c = t.column(name);
  if (!c) {
    throw DataError(std::string(stream) + ": missing required column '" + std::string(name) + "'");
  }
  return *c;
}

const std::string& cell(const csv::Record& r, std::size_t col) {
  static const std::string empty;
  return col < r.fields.size() ? r.fields[col] : empty;
}

csv::Table read_normalized(std::istream& in) {
  csv::Table t = csv::read_table(in);
  for (auto& h : t.header) h = text::trim(text::nfkc(h));
  return t;
}

}  // namespace

std::vector<Station> default_stations() {
  // Degrees-minutes from the station table converted to decimal degrees.
  return {
      {"mikuni", "Mikuni (三国)", "AMeDAS", 1071, 36.0 + 13.3 / 60.0, 136.0 + 8.9 / 60.0, 5.0, "A", false},
      {"fukui", "Fukui City (福井)", "Main Obs.", 47616, 36.0 + 3.4 / 60.0, 136.0 + 13.3 / 60.0, 9.0, "B", true},
      {"katsuyama", "Katsuyama (勝山)", "AMeDAS", 1226, 36.0 + 3.6 / 60.0, 136.0 + 30.0 / 60.0, 160.0, "C", false},
      {"mihama", "Mihama (美浜)", "AMeDAS", 1010, 35.0 + 35.8 / 60.0, 135.0 + 57.3 / 60.0, 5.0, "D", false},
  };
}

std::vector<NodeConfig> default_nodes() {
  return {
      {"A", "Tojinbo / Mikuni", Environment::coastal, SensorKind::person_camera, "mikuni", false, false},
      {"B", "Fukui Station", Environment::urban, SensorKind::person_camera, "fukui", false, false},
      {"C", "Katsuyama / Dinosaur Museum", Environment::mountain, SensorKind::survey_proxy, "katsuyama", true, true},
      {"D", "Rainbow Line / Wakasa", Environment::scenic, SensorKind::face_gate, "mihama", false, false},
  };
}

void validate_nodes(const std::vector<NodeConfig>& nodes, const std::vector<Station>& stations) {
  std::vector<std::string> problems;
  std::set<std::string> ids;
  std::set<std::string> used_stations;
  for (const auto& n : nodes) {
    if (n.node_id.empty()) problems.push_back("node with empty node_id");
    if (!ids.insert(n.node_id).second) problems.push_back("duplicate node_id '" + n.node_id + "'");
    const bool known = std::any_of(stations.begin(), stations.end(),
                                   [&](const Station& s) { return s.key == n.station_id; });
    if (!known) problems.push_back("node " + n.node_id + ": unknown station '" + n.station_id + "'");
    if (!used_stations.insert(n.station_id).second) {
      problems.push_back("node " + n.node_id + ": station '" + n.station_id + "' already assigned to another node");
    }
    if (n.sensor_kind == SensorKind::survey_proxy && !n.survey_proxy_allowed) {
      problems.push_back("node " + n.node_id + ": survey_proxy sensor not declared for this node");
    }
  }
  if (!problems.empty()) throw UsageError(problems);
}

std::string to_string(Environment e) {
  switch (e) {
    case Environment::coastal: return "coastal";
    case Environment::urban: return "urban";
    case Environment::mountain: return "mountain";
    case Environment::scenic: return "scenic";
  }
  return "?";
}

std::string to_string(SensorKind k) {
  switch (k) {
    case SensorKind::person_camera: return "person_camera";
    case SensorKind::face_gate: return "face_gate";
    case SensorKind::survey_proxy: return "survey_proxy";
  }
  return "?";
}

Environment parse_environment(const std::string& s) {
  if (s == "coastal") return Environment::coastal;
  if (s == "urban") return Environment::urban;
  if (s == "mountain") return Environment::mountain;
  if (s == "scenic") return Environment::scenic;
  throw UsageError("unknown environment '" + s + "'");
}

SensorKind parse_sensor_kind(const std::string& s) {
  if (s == "person_camera") return SensorKind::person_camera;
  if (s == "face_gate") return SensorKind::face_gate;
  if (s == "survey_proxy") return SensorKind::survey_proxy;
  throw UsageError("unknown sensor_kind '" + s + "'");
}

CameraParse parse_camera_csv(std::istream& in, const NodeConfig& node) {
  if (node.sensor_kind == SensorKind::survey_proxy && !node.survey_proxy_allowed) {
    throw UsageError("node " + node.node_id + ": survey_proxy sensor not declared");
  }
  const csv::Table t = read_normalized(in);
  const std::size_t c_from = require_column(t, "aggregate from", "camera csv");
  const std::size_t c_total = require_column(t, "total count", "camera csv");

  CameraParse out;
  out.records = t.rows.size();
  out.physical_lines = t.physical_lines;
  std::unordered_set<std::string> seen;
  std::map<Date, std::int64_t> per_day;
  for (const auto& row : t.rows) {
    const std::string stamp = text::trim(cell(row, c_from));
    const auto day = parse_timestamp_day(stamp);
    if (!day) throw RowError(row.line, "malformed timestamp '" + stamp + "'");
    const auto value = text::parse_int(cell(row, c_total));
    if (!value || *value < 0) {
      throw RowError(row.line, "invalid total count '" + cell(row, c_total) + "'");
    }
    if (!seen.insert(stamp).second) {
      ++out.duplicate_rows;
      continue;
    }
    per_day[*day] += *value;
  }
  for (const auto& [d, c] : per_day) {
    if (c == 0) {
      ++out.dropped_zero_days;
      out.zero_days.push_back(d);
      continue;
    }
    out.days.push_back({d, c, node.sensor_kind});
  }
  return out;
}

WeatherParse parse_jma_csv(std::istream& in, const std::string& station_key, const std::vector<Station>& stations) {
  const auto st = std::find_if(stations.begin(), stations.end(), [&](const Station& s) { return s.key == station_key; });
  if (st == stations.end()) throw DataError("unknown weather station '" + station_key + "'");

  const csv::Table t = read_normalized(in);
  const std::size_t c_time = require_column(t, "timestamp", "jma csv");

  enum Field { precip, temp, sun, wind, snow, humidity, n_fields };
  const char* names[n_fields] = {"precip_1h_mm", "temp_c", "sun_1h_h", "wind_speed_ms", "snow_depth_cm", "humidity_pct"};
  std::optional<std::size_t> cols[n_fields];
  for (int f = 0; f < n_fields; ++f) cols[f] = t.column(names[f]);
  if (!st->records_snow) cols[snow].reset();

  struct Acc {
    double sum[n_fields] = {};
    int n[n_fields] = {};
  };
  std::map<Date, Acc> acc;
  WeatherParse out;
  out.records = t.rows.size();
  for (const auto& row : t.rows) {
    const auto day = parse_timestamp_day(text::trim(cell(row, c_time)));
    if (!day) throw RowError(row.line, "malformed timestamp '" + cell(row, c_time) + "'");
    Acc& a = acc[*day];
    for (int f = 0; f < n_fields; ++f) {
      if (!cols[f]) continue;
      const std::string& raw = cell(row, *cols[f]);
      if (text::is_blank(raw)) continue;
      const auto v = text::parse_double(raw);
      const bool nonneg_field = f == precip || f == sun || f == wind || f == snow || f == humidity;
      if (!v || (nonneg_field && *v < 0.0)) {
        ++out.warnings;
        continue;
      }
      a.sum[f] += *v;
      ++a.n[f];
    }
  }
  for (const auto& [d, a] : acc) {
    DailyWeather w;
    w.date = d;
    auto mean_of = [&](int f) -> std::optional<double> {
      if (a.n[f] == 0) return std::nullopt;
      return a.sum[f] / a.n[f];
    };
    if (a.n[precip] > 0) w.precip = a.sum[precip];
    w.temp = mean_of(temp);
    w.sun = mean_of(sun);
    w.wind = mean_of(wind);
    w.snow_depth = mean_of(snow);
    w.humidity = mean_of(humidity);
    out.days.push_back(w);
  }
  return out;
}

IntentParse parse_intent_csv(std::istream& in) {
  const csv::Table t = read_normalized(in);
  IntentParse out;
  if (t.header.empty() && t.rows.empty()) {
    out.warnings = 1;
    return out;
  }
  const std::size_t c_date = require_column(t, "date", "intent csv");
  const std::size_t c_dir = require_column(t, "directions", "intent csv");
  if (t.rows.empty()) out.warnings = 1;
  std::map<Date, std::int64_t> days;
  for (const auto& row : t.rows) {
    const auto d = parse_date(text::trim(cell(row, c_date)));
    if (!d) throw RowError(row.line, "malformed date '" + cell(row, c_date) + "'");
    const auto v = text::parse_int(cell(row, c_dir));
    if (!v) throw RowError(row.line, "invalid directions value '" + cell(row, c_dir) + "'");
    if (*v < 0) throw RowError(row.line, "negative directions value " + std::to_string(*v));
    if (!days.emplace(*d, *v).second) throw DataError("duplicate intent date " + format_date(*d));
  }
  for (const auto& [d, v] : days) out.days.push_back({d, v});
  return out;
}

const std::vector<std::pair<std::string, int>>& satisfaction_labels() {
  static const std::vector<std::pair<std::string, int>> labels = {
      {"とても不満", 1}, {"不満", 2}, {"どちらでもない", 3}, {"満足", 4}, {"とても満足", 5},
  };
  return labels;
}

std::optional<int> map_satisfaction(const std::string& label) {
  const std::string norm = text::trim(text::nfkc(label));
  if (norm.empty()) return std::nullopt;
  for (const auto& [l, v] : satisfaction_labels()) {
    if (norm == l) return v;
  }
  if (norm.size() == 1 && norm[0] >= '1' && norm[0] <= '5') return norm[0] - '0';
  return std::nullopt;
}

namespace {

struct SurveyColumns {
  std::optional<std::size_t> prefecture, date, satisfaction, nps, service, reason, inconvenience, freetext,
      location, spend, home;
};

std::optional<std::size_t> find_exact(const csv::Table& t, std::string_view name) {
  return t.column(text::nfkc(name));
}

std::optional<std::size_t> find_containing(const csv::Table& t, std::string_view part) {
  const std::string p = text::nfkc(part);
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (t.header[i].find(p) != std::string::npos) return i;
  }
  return std::nullopt;
}

std::optional<int> parse_scale(const std::string& raw, int lo, int hi, std::size_t& warnings) {
  if (text::is_blank(raw)) return std::nullopt;
  const auto v = text::parse_int(text::nfkc(raw));
  if (!v || *v < lo || *v > hi) {
    ++warnings;
    return std::nullopt;
  }
  return static_cast<int>(*v);
}

}  // namespace

SurveyParse parse_survey_csv(std::istream& in, SurveyDataset dataset) {
  const csv::Table t = read_normalized(in);
  SurveyColumns c;
  // Column 0 header is "対象県(富山/石川/福井)"; match on the stem.
  if (dataset == SurveyDataset::merged_hokuriku) {
    for (std::size_t i = 0; i < t.header.size(); ++i) {
      if (t.header[i].starts_with(text::nfkc("対象県"))) {
        c.prefecture = i;
        break;
      }
    }
  }
  c.date = find_exact(t, "アンケート回答日");
  c.satisfaction = find_exact(t, "満足度（旅行全体）");
  c.nps = find_exact(t, "おすすめ度");
  c.service = find_exact(t, "満足度（商品・サービス）");
  c.reason = find_exact(t, "満足度理由");
  c.inconvenience = find_containing(t, "不便");
  c.freetext = find_containing(t, "自由意見");
  c.location = find_exact(t, "回答場所");
  c.spend = find_exact(t, "県内消費額");
  c.home = find_exact(t, "都道府県");

  std::vector<std::string> missing;
  if (!c.date) missing.push_back("アンケート回答日");
  if (dataset == SurveyDataset::merged_hokuriku) {
    if (!c.prefecture) missing.push_back("対象県(富山/石川/福井)");
    if (!c.satisfaction) missing.push_back("満足度(旅行全体)");
  } else if (!c.spend) {
    missing.push_back("県内消費額");
  }
  if (!missing.empty()) {
    std::string msg = "survey csv: missing mandatory header(s):";
    for (const auto& m : missing) msg += " " + m;
    throw DataError(msg);
  }

  SurveyParse out;
  out.records = t.rows.size();
  out.physical_lines = t.physical_lines;
  out.responses.reserve(t.rows.size());
  auto get = [](const csv::Record& r, const std::optional<std::size_t>& col) -> std::string {
    return col ? cell(r, *col) : std::string{};
  };
  for (const auto& row : t.rows) {
    SurveyResponse s;
    s.prefecture = dataset == SurveyDataset::merged_hokuriku ? text::trim(get(row, c.prefecture)) : "福井";
    const std::string date_raw = text::trim(get(row, c.date));
    if (!date_raw.empty()) {
      s.survey_date = parse_date(date_raw);
      if (!s.survey_date) ++out.warnings;
    }
    const std::string sat = get(row, c.satisfaction);
    if (!text::is_blank(sat)) {
      s.satisfaction = map_satisfaction(sat);
      if (!s.satisfaction) ++out.warnings;
    }
    const std::string svc = get(row, c.service);
    if (!text::is_blank(svc)) {
      s.satisfaction_service = map_satisfaction(svc);
      if (!s.satisfaction_service) ++out.warnings;
    }
    s.nps_raw = parse_scale(get(row, c.nps), 0, 10, out.warnings);
    s.reason = get(row, c.reason);
    s.inconvenience = get(row, c.inconvenience);
    s.freetext = get(row, c.freetext);
    s.location = text::trim(get(row, c.location));
    if (dataset == SurveyDataset::raw_fukui) {
      s.spend_band = text::trim(get(row, c.spend));
      s.home_prefecture = text::trim(get(row, c.home));
    }
    out.responses.push_back(std::move(s));
  }
  return out;
}

void write_survey_csv(std::ostream& out, const std::vector<SurveyResponse>& rows, SurveyDataset dataset) {
  const bool raw = dataset == SurveyDataset::raw_fukui;
  std::vector<std::string> header;
  header.push_back(raw ? "都道府県" : "対象県（富山/石川/福井）");
  for (const char* h : {"アンケート回答日", "満足度（旅行全体）", "おすすめ度", "満足度（商品・サービス）", "満足度理由",
                        "不便だった点", "自由意見", "回答場所"}) {
    header.emplace_back(h);
  }
  if (raw) header.emplace_back("県内消費額");
  csv::write_row(out, header);

  auto label = [](const std::optional<int>& v) -> std::string {
    if (!v) return {};
    for (const auto& [l, s] : satisfaction_labels()) {
      if (s == *v) return l;
    }
    return {};
  };
  for (const auto& r : rows) {
    std::vector<std::string> f;
    f.push_back(raw ? r.home_prefecture : r.prefecture);
    f.push_back(r.survey_date ? format_date(*r.survey_date) : std::string{});
    f.push_back(label(r.satisfaction));
    f.push_back(r.nps_raw ? std::to_string(*r.nps_raw) : std::string{});
    f.push_back(label(r.satisfaction_service));
    f.push_back(r.reason);
    f.push_back(r.inconvenience);
    f.push_back(r.freetext);
    f.push_back(r.location);
    if (raw) f.push_back(r.spend_band);
    csv::write_row(out, f);
  }
}

DailyPanel build_panel(const std::vector<DailyCount>& counts, const std::vector<DailyWeather>& weather,
                       const std::vector<DailyIntent>& intent, const NodeConfig& node,
                       std::size_t dropped_zero_days) {
  std::map<Date, const DailyCount*> c_by;
  std::map<Date, const DailyWeather*> w_by;
  std::map<Date, const DailyIntent*> i_by;
  for (const auto& c : counts) {
    if (c.count == 0) continue;
    if (!c_by.emplace(c.date, &c).second) throw DataError("duplicate count date " + format_date(c.date));
  }
  for (const auto& w : weather) {
    if (!w.complete()) continue;
    if (!w_by.emplace(w.date, &w).second) throw DataError("duplicate weather date " + format_date(w.date));
  }
  for (const auto& i : intent) {
    if (!i_by.emplace(i.date, &i).second) throw DataError("duplicate intent date " + format_date(i.date));
  }

  std::set<Date> all;
  for (const auto& [d, _] : c_by) all.insert(d);
  for (const auto& [d, _] : w_by) all.insert(d);
  for (const auto& [d, _] : i_by) all.insert(d);

  DailyPanel panel;
  panel.node_id = node.node_id;
  panel.coverage.dropped_zero_days = dropped_zero_days;
  for (const Date d : all) {
    const auto c = c_by.find(d);
    const auto w = w_by.find(d);
    const auto i = i_by.find(d);
    const bool hc = c != c_by.end(), hw = w != w_by.end(), hi = i != i_by.end();
    if (!(hc && hw && hi)) {
      panel.coverage.gaps.push_back({d, hc, hw, hi});
      continue;
    }
    const DailyWeather& wx = *w->second;
    panel.rows.push_back({d, c->second->count, *wx.precip, *wx.temp, *wx.sun, *wx.wind, wx.snow_depth,
                          i->second->directions});
  }
  if (panel.rows.empty()) throw DataError("no overlapping dates for node " + node.node_id);
  panel.coverage.n_days = panel.rows.size();
  return panel;
}

void write_panel_csv(std::ostream& out, const DailyPanel& panel) {
  const bool snow = std::any_of(panel.rows.begin(), panel.rows.end(), [](const PanelRow& r) { return r.snow_depth.has_value(); });
  std::vector<std::string> header = {"date", "count", "precip", "temp", "sun", "wind"};
  if (snow) header.emplace_back("snow_depth");
  header.emplace_back("directions");
  csv::write_row(out, header);
  for (const auto& r : panel.rows) {
    std::vector<std::string> f = {format_date(r.date), std::to_string(r.count), text::format_double(r.precip),
                                  text::format_double(r.temp), text::format_double(r.sun), text::format_double(r.wind)};
    if (snow) f.push_back(r.snow_depth ? text::format_double(*r.snow_depth) : std::string{});
    f.push_back(std::to_string(r.directions));
    csv::write_row(out, f);
  }
}

DailyPanel read_panel_csv(std::istream& in, const std::string& node_id) {
  const csv::Table t = read_normalized(in);
  const std::size_t c_date = require_column(t, "date", "panel csv");
  const std::size_t c_count = require_column(t, "count", "panel csv");
  const std::size_t c_precip = require_column(t, "precip", "panel csv");
  const std::size_t c_temp = require_column(t, "temp", "panel csv");
  const std::size_t c_sun = require_column(t, "sun", "panel csv");
  const std::size_t c_wind = require_column(t, "wind", "panel csv");
  const std::size_t c_dir = require_column(t, "directions", "panel csv");
  const auto c_snow = t.column("snow_depth");

  DailyPanel panel;
  panel.node_id = node_id;
  for (const auto& row : t.rows) {
    PanelRow r;
    const auto d = parse_date(text::trim(cell(row, c_date)));
    if (!d) throw RowError(row.line, "malformed date '" + cell(row, c_date) + "'");
    r.date = *d;
    if (!panel.rows.empty() && panel.rows.back().date >= r.date) {
      throw RowError(row.line, "panel dates must be strictly increasing");
    }
    const auto count = text::parse_int(cell(row, c_count));
    const auto dir = text::parse_int(cell(row, c_dir));
    if (!count || *count < 0) throw RowError(row.line, "invalid count");
    if (!dir || *dir < 0) throw RowError(row.line, "invalid directions");
    r.count = *count;
    r.directions = *dir;
    auto num = [&](std::size_t col, const char* what) {
      const auto v = text::parse_double(cell(row, col));
      if (!v) throw RowError(row.line, std::string("invalid ") + what);
      return *v;
    };
    r.precip = num(c_precip, "precip");
    r.temp = num(c_temp, "temp");
    r.sun = num(c_sun, "sun");
    r.wind = num(c_wind, "wind");
    if (c_snow && !text::is_blank(cell(row, *c_snow))) r.snow_depth = num(*c_snow, "snow_depth");
    panel.rows.push_back(r);
  }
  panel.coverage.n_days = panel.rows.size();
  return panel;
}

}  // namespace dhde::ingest

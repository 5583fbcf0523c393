#include "dhde/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "dhde/csv.hpp"
#include "dhde/error.hpp"
#include "dhde/random.hpp"
#include "dhde/stats.hpp"
#include "dhde/text.hpp"

namespace dhde::synth {
namespace {

constexpr std::uint64_t kIntentStream = 0;
constexpr std::uint64_t kWeatherStream = 100;
constexpr std::uint64_t kNoiseStream = 200;
constexpr std::uint64_t kOutageStream = 300;
constexpr std::uint64_t kCameraStream = 350;
constexpr std::uint64_t kSurveyStream = 400;

double round1(double v) { return std::round(v * 10.0) / 10.0; }

struct StationClimate {
  double temp_offset = 0.0;
  double wind_offset = 0.0;
  double rain_factor = 1.0;
};

StationClimate climate_for(const std::string& station) {
  if (station == "mikuni") return {0.0, 1.5, 1.0};
  if (station == "katsuyama") return {-2.5, -1.0, 1.1};
  if (station == "mihama") return {0.8, 0.3, 0.9};
  return {};
}

double node_scale(const ingest::NodeConfig& n) {
  switch (n.environment) {
    case ingest::Environment::coastal: return 1.0;
    case ingest::Environment::urban: return 1.5;
    case ingest::Environment::mountain: return 0.4;
    case ingest::Environment::scenic: return 0.25;
  }
  return 1.0;
}

bool in_months(const std::vector<unsigned>& months, Date d) {
  return std::find(months.begin(), months.end(), month_of(d)) != months.end();
}

std::vector<HourlyWeather> simulate_weather(const DgpParams& p, const std::vector<Date>& dates, const ingest::Station& st,
                                            std::uint64_t seed) {
  Rng rng(seed);
  const StationClimate cl = climate_for(st.key);
  const WeatherProfile& wp = p.weather;
  std::vector<HourlyWeather> out;
  out.reserve(dates.size() * 24);
  double anomaly = 0.0, depth = 0.0;
  for (const Date d : dates) {
    const unsigned m = month_of(d) - 1;
    anomaly = 0.7 * anomaly + rng.normal(0.0, 1.5);
    const double t_day = wp.temp_mean[m] + cl.temp_offset + anomaly;
    const bool rain_day = rng.uniform() < std::min(1.0, wp.rain_day_prob[m] * cl.rain_factor);
    const double w_day = std::max(0.3, wp.wind_mean[m] + cl.wind_offset + rng.normal(0.0, 1.5));
    const double cloud = rain_day ? rng.uniform(0.0, 0.5) : rng.uniform(0.3, 1.0);
    if (st.records_snow) {
      if (rain_day && t_day < 2.0) {
        depth += wp.snowfall_cm[m] * rng.uniform(0.5, 1.5);
      } else {
        depth = std::max(0.0, depth - (t_day > 0.0 ? 0.8 * t_day + 1.0 : 0.5));
      }
    }
    for (int h = 0; h < 24; ++h) {
      HourlyWeather hw;
      hw.date = d;
      hw.hour = h;
      hw.temp = round1(t_day + 3.0 * std::sin(2.0 * std::numbers::pi * (h - 9) / 24.0) + rng.normal(0.0, 0.3));
      const bool raining = rain_day && rng.uniform() < 0.5;
      hw.precip = raining ? round1(wp.rain_rate_mm[m] * -std::log1p(-rng.uniform())) : 0.0;
      hw.wind = std::max(0.0, round1(w_day + 0.8 * std::sin(2.0 * std::numbers::pi * (h - 8) / 24.0) +
                                     rng.normal(0.0, 0.5)));
      const bool daylight = h >= 7 && h <= 17;
      hw.sun = daylight && !raining ? std::clamp(round1(wp.sun_clear[m] * cloud + rng.normal(0.0, 0.05)), 0.0, 1.0) : 0.0;
      hw.humidity = std::clamp(std::round(70.0 + (raining ? 18.0 : 0.0) + rng.normal(0.0, 5.0)), 20.0, 100.0);
      if (st.records_snow) hw.snow_depth = round1(depth);
      out.push_back(hw);
    }
  }
  return out;
}

const ingest::Station& station_of(const ingest::NodeConfig& n) {
  static const std::vector<ingest::Station> stations = ingest::default_stations();
  for (const auto& s : stations) {
    if (s.key == n.station_id) return s;
  }
  throw UsageError("node " + n.node_id + ": unknown station '" + n.station_id + "'");
}

double coef_of(const std::map<std::string, double>& c, const std::string& name) {
  const auto it = c.find(name);
  return it == c.end() ? 0.0 : it->second;
}

// Phrases with no lexicon keyword.
const std::vector<std::string>& neutral_reasons() {
  static const std::vector<std::string> v = {
      "景色がとても良かった", "料理が美味しかった", "スタッフが親切でした", "家族で楽しめた", "天気に恵まれた",
      "恐竜博物館が面白かった", "海がきれいだった", "温泉で癒やされた", "地元の食材を堪能した", "写真をたくさん撮った",
      "子供が喜んでいた", "歴史を学べた",
  };
  return v;
}

const std::vector<std::string>& neutral_inconvenience() {
  static const std::vector<std::string> v = {
      "駐車場が分かりにくい", "案内表示が少ない", "バスの本数が少ない", "トイレが遠い", "坂道が多い",
      "特になし", "駅から遠い", "雨の日の移動が大変",
  };
  return v;
}

const std::vector<std::string>& neutral_freetext() {
  static const std::vector<std::string> v = {
      "また来たいです", "友人にも勧めたい", "次は冬に来たい", "ありがとうございました", "おすすめです",
      "ソフトクリームが絶品", "ＳＮＳで紹介します", "ﾊﾟﾝﾌﾚｯﾄが見やすかった",
  };
  return v;
}

// Phrases each containing at least one lexicon keyword, several in
// conjugated form.
const std::vector<std::string>& planted_phrases() {
  static const std::vector<std::string> v = {
      "人が少なくて寂しかった", "静かすぎて物足りない", "お店が閉まっていた", "活気がなかった", "何もなくて退屈だった",
      "夜は人通りが少ない",     "さびれた雰囲気だった", "もっと賑わいがほしい", "つまらなかった", "閑散としていた",
      "周りに店がない",         "盛り上がりに欠ける",   "にぎわいが足りない",   "少しさみしい",   "なんだかさびしい",
      "人がいなかった",         "営業していない店が多い", "寂れている",         "さびしかった",   "静かな町でした",
  };
  return v;
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[static_cast<std::size_t>(rng.below(v.size()))];
}

}  // namespace

WeatherProfile WeatherProfile::hokuriku() {
  WeatherProfile w;
  w.temp_mean = {3.0, 3.5, 7.0, 12.5, 17.5, 21.5, 25.5, 27.0, 23.0, 17.0, 11.0, 5.5};
  w.rain_day_prob = {0.70, 0.62, 0.50, 0.40, 0.38, 0.45, 0.48, 0.35, 0.45, 0.45, 0.55, 0.70};
  w.rain_rate_mm = {1.3, 1.2, 1.1, 1.0, 1.0, 1.3, 1.5, 1.2, 1.4, 1.1, 1.2, 1.4};
  w.wind_mean = {5.2, 5.0, 4.4, 3.8, 3.3, 3.0, 3.0, 3.1, 3.4, 3.8, 4.6, 5.3};
  w.sun_clear = {0.35, 0.45, 0.6, 0.7, 0.75, 0.65, 0.7, 0.85, 0.7, 0.65, 0.5, 0.35};
  w.snowfall_cm = {9.0, 8.0, 3.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 6.0};
  return w;
}

std::map<std::string, double> DgpParams::default_coefficients() {
  return {
      {"directions", 0.6},       {"directions_lag1", 0.15},      {"directions_lag2", 0.05},
      {"directions_lag3", 0.05}, {"directions_roll7", 0.1},      {"precip", -4.0},
      {"temp", 6.0},             {"sun", 80.0},                  {"wind", -12.0},
      {"precip_lag1", -1.5},     {"is_weekend_or_holiday", 250.0}, {"weather_severity", -30.0},
      {"dow_mean_count", 0.0},   {"weekend_x_severity", -20.0},  {"weekend_x_intent", 0.1},
      {"month", 0.0},
  };
}

void validate(const DgpParams& p) {
  std::vector<std::string> problems;
  if (p.n_days < 60) problems.emplace_back("synth: n_days must be at least 60");
  if (!(p.sigma > 0.0)) problems.emplace_back("synth: sigma must be positive");
  if (!(p.rho >= 0.0 && p.rho < 1.0)) problems.emplace_back("synth: rho must lie in [0, 1)");
  for (double f : p.suppression) {
    if (!(f >= 0.0 && f <= 1.0)) problems.emplace_back("synth: suppression fractions must lie in [0, 1]");
  }
  if (p.suppression_conversion < 0.0) problems.emplace_back("synth: suppression_conversion must be non-negative");
  if (coef_of(p.coef, "dow_mean_count") != 0.0) {
    problems.emplace_back("synth: dow_mean_count is computed from the counts and cannot carry a coefficient");
  }
  for (const auto& [name, _] : p.coef) {
    if (std::find(features::kFeatureNames.begin(), features::kFeatureNames.end(), name) ==
        features::kFeatureNames.end()) {
      problems.push_back("synth: unknown feature '" + name + "'");
    }
  }
  if (!(p.intent_base > 0.0)) problems.emplace_back("synth: intent_base must be positive");
  if (p.intent_noise_sd < 0.0) problems.emplace_back("synth: intent_noise_sd must be non-negative");
  if (p.outage_days + 7 > p.n_days) problems.emplace_back("synth: too many outage days");
  for (unsigned m : p.suppression_months) {
    if (m < 1 || m > 12) problems.emplace_back("synth: suppression months must be 1..12");
  }
  if (!problems.empty()) throw UsageError(problems);
}

SynthData generate_panel(const DgpParams& params, const std::vector<ingest::NodeConfig>& nodes,
                         const features::HolidayTable& holidays) {
  validate(params);
  if (nodes.empty()) throw UsageError("synth: no nodes configured");
  SynthData data;
  data.params = params;
  for (std::size_t i = 0; i < params.n_days; ++i) data.dates.push_back(params.start + std::chrono::days{i});
  if (!holidays.covers(data.dates.front()) || !holidays.covers(data.dates.back())) {
    throw UsageError("synth: the holiday table does not cover " + format_date(data.dates.front()) + " .. " +
                     format_date(data.dates.back()));
  }

  Rng intent_rng(derive_seed(params.seed, kIntentStream));
  for (const Date d : data.dates) {
    const auto ymd = std::chrono::year_month_day(d);
    const double doy = static_cast<double>((d - Date(ymd.year() / 1 / 1)).count());
    const double season = 1.0 + params.intent_season_amp * std::cos(2.0 * std::numbers::pi * (doy - 220.0) / 365.25);
    const double lift = features::is_weekend_or_holiday(d, holidays) ? 1.0 + params.intent_weekend_lift : 1.0;
    const double noise = std::exp(intent_rng.normal(0.0, params.intent_noise_sd));
    const auto v = static_cast<std::int64_t>(std::llround(params.intent_base * season * lift * noise));
    data.intent.push_back({d, std::max<std::int64_t>(0, v)});
  }

  for (std::size_t ni = 0; ni < nodes.size(); ++ni) {
    NodeTruth t;
    t.node = nodes[ni];
    const ingest::Station& st = station_of(t.node);
    t.scale = node_scale(t.node);
    t.intercept = params.intercept * t.scale;
    for (const auto& [name, b] : params.coef) t.coef[name] = b * t.scale;

    t.hourly = simulate_weather(params, data.dates, st, derive_seed(params.seed, kWeatherStream + ni));
    {
      std::stringstream ss;
      write_jma_csv(ss, t);
      t.weather = ingest::parse_jma_csv(ss, st.key).days;
    }
    if (t.weather.size() != data.dates.size()) throw NumericalError("synth: weather aggregation lost days");

    ingest::DailyPanel panel;
    panel.node_id = t.node.node_id;
    for (std::size_t i = 0; i < data.dates.size(); ++i) {
      const auto& w = t.weather[i];
      panel.rows.push_back({data.dates[i], 1, *w.precip, *w.temp, *w.sun, *w.wind, w.snow_depth,
                            data.intent[i].directions});
    }
    panel.coverage.n_days = panel.rows.size();
    features::FeatureMatrix fm = features::build_features(panel, holidays);

    Rng noise_rng(derive_seed(params.seed, kNoiseStream + ni));
    const double sigma = params.sigma * t.scale;
    double u = noise_rng.normal() * sigma / std::sqrt(1.0 - params.rho * params.rho);
    std::size_t row = 0;
    const double dir_sum = coef_of(t.coef, "directions") + coef_of(t.coef, "directions_lag1") +
                           coef_of(t.coef, "directions_lag2") + coef_of(t.coef, "directions_lag3") +
                           coef_of(t.coef, "directions_roll7");
    for (std::size_t i = 0; i < data.dates.size(); ++i) {
      if (i > 0) u = params.rho * u + sigma * noise_rng.normal();
      const auto& pr = panel.rows[i];
      const double dir = static_cast<double>(pr.directions);
      double mean;
      if (fm.retained[i]) {
        mean = t.intercept;
        for (std::size_t j = 0; j < fm.cols(); ++j) {
          mean += coef_of(t.coef, fm.names[j]) * fm.x(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j));
        }
        ++row;
      } else {
        mean = t.intercept + dir_sum * dir;
      }
      const int sev = features::weather_severity(pr.precip, pr.wind);
      double supp = 0.0;
      if (!t.node.indoor_sheltered && in_months(params.suppression_months, pr.date)) {
        supp = params.suppression[static_cast<std::size_t>(sev)] * params.suppression_conversion * dir * t.scale;
      }
      double nl = 0.0;
      if (params.nonlinear) {
        nl = t.scale * (-120.0 * (pr.temp < 4.0 ? 1.0 : 0.0) + 0.15 * dir * pr.sun -
                        60.0 * (pr.wind > 6.0 && pr.precip > 5.0 ? 1.0 : 0.0));
      }
      t.severity.push_back(sev);
      t.suppressed.push_back(supp);
      t.latent.push_back(mean + nl - supp + u);
      t.counts.push_back(std::max<std::int64_t>(1, std::llround(t.latent.back())));
    }

    if (ni == 0 && params.outage_days > 0) {
      Rng orng(derive_seed(params.seed, kOutageStream));
      std::vector<std::size_t> candidates;
      for (std::size_t i = 7; i < data.dates.size(); ++i) candidates.push_back(i);
      orng.shuffle(std::span<std::size_t>(candidates));
      candidates.resize(params.outage_days);
      std::sort(candidates.begin(), candidates.end());
      for (std::size_t i : candidates) {
        t.counts[i] = 0;
        t.outage_days.push_back(data.dates[i]);
      }
    }

    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < panel.rows.size(); ++i) {
      if (fm.retained[i]) keep.push_back(i);
    }
    t.latent_features = fm.drop_columns({"dow_mean_count"});
    for (std::size_t r = 0; r < keep.size(); ++r) {
      const std::size_t i = keep[r];
      t.latent_features.y(static_cast<Eigen::Index>(r)) = t.latent[i];
      t.latent_features.prev_count[r] = i > 0 ? std::optional<double>(t.latent[i - 1]) : std::nullopt;
    }
    data.nodes.push_back(std::move(t));
  }
  return data;
}

void write_camera_csv(std::ostream& out, const NodeTruth& node, std::uint64_t seed, std::size_t duplicate_rows) {
  constexpr int kSlots = 288;
  std::array<double, kSlots + 1> cum{};
  for (int s = 0; s < kSlots; ++s) {
    const double h = s / 12.0 + 1.0 / 24.0;
    cum[static_cast<std::size_t>(s) + 1] = cum[static_cast<std::size_t>(s)] + std::exp(-std::pow((h - 13.0) / 3.5, 2.0));
  }
  for (auto& c : cum) c /= cum[kSlots];
  cum[kSlots] = 1.0;

  std::vector<std::string> slot_time(kSlots + 1);
  for (int s = 0; s <= kSlots; ++s) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d:%02d:00", (s * 5) / 60 % 24, (s * 5) % 60);
    slot_time[static_cast<std::size_t>(s)] = buf;
  }

  const std::size_t n_rows = node.counts.size() * kSlots;
  std::vector<std::size_t> dup;
  if (duplicate_rows > 0) {
    Rng rng(derive_seed(seed, kCameraStream));
    for (std::size_t i = 0; i < duplicate_rows; ++i) dup.push_back(static_cast<std::size_t>(rng.below(n_rows)));
    std::sort(dup.begin(), dup.end());
  }

  out << "aggregate from,aggregate to,total count\n";
  std::size_t idx = 0, next_dup = 0;
  for (std::size_t i = 0; i < node.counts.size(); ++i) {
    const Date d = node.latent_features.panel_dates[i];
    const std::string day = format_date(d);
    const std::string next_day = format_date(d + std::chrono::days{1});
    const double total = static_cast<double>(node.counts[i]);
    for (int s = 0; s < kSlots; ++s, ++idx) {
      const auto c = std::llround(total * cum[static_cast<std::size_t>(s) + 1]) - std::llround(total * cum[static_cast<std::size_t>(s)]);
      const std::string line = day + ' ' + slot_time[static_cast<std::size_t>(s)] + ',' +
                               (s + 1 == kSlots ? next_day : day) + ' ' + slot_time[static_cast<std::size_t>(s) + 1] +
                               ',' + std::to_string(c) + '\n';
      out << line;
      while (next_dup < dup.size() && dup[next_dup] == idx) {
        out << line;
        ++next_dup;
      }
    }
  }
}

void write_jma_csv(std::ostream& out, const NodeTruth& node) {
  const bool snow = std::any_of(node.hourly.begin(), node.hourly.end(), [](const HourlyWeather& h) { return h.snow_depth.has_value(); });
  out << "timestamp,temp_c,precip_1h_mm,sun_1h_h,wind_speed_ms,humidity_pct";
  if (snow) out << ",snow_depth_cm";
  out << '\n';
  char hh[8];
  for (const auto& h : node.hourly) {
    std::snprintf(hh, sizeof hh, " %02d:00", h.hour);
    out << format_date(h.date) << hh << ',' << text::format_fixed(h.temp, 1) << ',' << text::format_fixed(h.precip, 1)
        << ',' << text::format_fixed(h.sun, 1) << ',' << text::format_fixed(h.wind, 1) << ','
        << text::format_fixed(h.humidity, 0);
    if (snow) out << ',' << (h.snow_depth ? text::format_fixed(*h.snow_depth, 1) : std::string{});
    out << '\n';
  }
}

void write_intent_csv(std::ostream& out, const std::vector<ingest::DailyIntent>& intent) {
  out << "date,directions\n";
  for (const auto& i : intent) out << format_date(i.date) << ',' << i.directions << '\n';
}

std::vector<ingest::SurveyResponse> generate_survey_corpus(const SurveyCorpusParams& params,
                                                           const kansei::Lexicon& lexicon, std::uint64_t seed) {
  for (double r : {params.rate_low, params.rate_mid, params.rate_high}) {
    if (!(r >= 0.0 && r <= 1.0)) throw UsageError("survey corpus: planted rates must lie in [0, 1]");
  }
  if (params.span_days == 0) throw UsageError("survey corpus: span_days must be positive");
  for (const auto* list : {&neutral_reasons(), &neutral_inconvenience(), &neutral_freetext()}) {
    for (const auto& s : *list) {
      if (!kansei::match_lexicon(text::nfkc(s), lexicon).empty()) {
        throw UsageError("survey corpus: neutral phrase '" + s + "' matches the lexicon");
      }
    }
  }
  for (const auto& s : planted_phrases()) {
    if (kansei::match_lexicon(text::nfkc(s), lexicon).empty()) {
      throw UsageError("survey corpus: planted phrase '" + s + "' matches no lexicon keyword");
    }
  }

  Rng rng(seed);
  static const std::vector<std::string> locations = {"東尋坊", "福井駅", "恐竜博物館", "レインボーライン", "一乗谷朝倉氏遺跡"};
  std::vector<ingest::SurveyResponse> out;
  auto group = [&](std::size_t n, double rate, std::vector<int> scores, int nps_lo, int nps_hi) {
    const auto hits = static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    std::vector<bool> planted(n, false);
    for (std::size_t i = 0; i < hits; ++i) planted[order[i]] = true;
    for (std::size_t i = 0; i < n; ++i) {
      ingest::SurveyResponse r;
      r.prefecture = "福井";
      r.survey_date = params.first + std::chrono::days{rng.below(params.span_days)};
      r.satisfaction = pick(rng, scores);
      r.satisfaction_service = std::clamp(*r.satisfaction + static_cast<int>(rng.below(3)) - 1, 1, 5);
      r.nps_raw = nps_lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(nps_hi - nps_lo + 1)));
      r.reason = rng.uniform() < 0.8 ? pick(rng, neutral_reasons()) : "";
      r.inconvenience = rng.uniform() < 0.5 ? pick(rng, neutral_inconvenience()) : "";
      r.freetext = rng.uniform() < 0.6 ? pick(rng, neutral_freetext()) : "";
      r.location = pick(rng, locations);
      if (planted[i]) {
        const std::string& phrase = pick(rng, planted_phrases());
        switch (rng.below(3)) {
          case 0: r.reason = r.reason.empty() ? phrase : r.reason + "。" + phrase; break;
          case 1: r.inconvenience = phrase; break;
          default: r.freetext = r.freetext.empty() ? phrase : phrase + "。" + r.freetext; break;
        }
      }
      out.push_back(std::move(r));
    }
  };
  group(params.n_low, params.rate_low, {1, 2}, 0, 6);
  group(params.n_mid, params.rate_mid, {3}, 5, 8);
  group(params.n_high, params.rate_high, {4, 5}, 7, 10);
  rng.shuffle(std::span<ingest::SurveyResponse>(out));
  return out;
}

std::vector<std::pair<std::string, double>> default_spend_bands() {
  return {
      {"5,000円未満", 2500.0},          {"5,000円～10,000円未満", 7500.0},  {"10,000円～20,000円未満", 15000.0},
      {"20,000円～30,000円未満", 25000.0}, {"30,000円～50,000円未満", 40000.0}, {"50,000円以上", 60000.0},
  };
}

std::vector<ingest::SurveyResponse> generate_raw_survey(std::size_t n, Date first, std::size_t span_days,
                                                        std::uint64_t seed) {
  if (span_days == 0) throw UsageError("raw survey: span_days must be positive");
  static const std::vector<std::string> homes = {"福井", "石川", "富山", "愛知", "大阪", "東京", "京都", "滋賀", "岐阜"};
  static const std::vector<double> band_weights = {0.18, 0.26, 0.27, 0.14, 0.09, 0.06};
  const auto bands = default_spend_bands();
  Rng rng(seed);
  std::vector<ingest::SurveyResponse> out;
  for (std::size_t i = 0; i < n; ++i) {
    ingest::SurveyResponse r;
    r.prefecture = "福井";
    r.home_prefecture = pick(rng, homes);
    r.survey_date = first + std::chrono::days{rng.below(span_days)};
    r.satisfaction = 1 + static_cast<int>(rng.below(5));
    r.location = "東尋坊";
    const double u = rng.uniform();
    if (u < 0.04) {
      r.spend_band = "";
    } else if (u < 0.05) {
      r.spend_band = "不明";
    } else {
      double v = rng.uniform(), acc = 0.0;
      std::size_t b = 0;
      for (; b + 1 < band_weights.size(); ++b) {
        acc += band_weights[b];
        if (v < acc) break;
      }
      r.spend_band = bands[b].first;
    }
    out.push_back(std::move(r));
  }
  return out;
}

Regression nonlinear_regression(std::size_t n, std::size_t p, double noise_sd, std::uint64_t seed) {
  if (p < 4) throw UsageError("nonlinear_regression: need at least 4 columns");
  if (n < 10) throw UsageError("nonlinear_regression: need at least 10 rows");
  Rng rng(seed);
  Regression r;
  r.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  r.y.resize(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < p; ++j) r.names.push_back("x" + std::to_string(j));
  for (Eigen::Index i = 0; i < r.x.rows(); ++i) {
    for (Eigen::Index j = 0; j < r.x.cols(); ++j) r.x(i, j) = rng.uniform();
    const double x0 = r.x(i, 0), x1 = r.x(i, 1), x2 = r.x(i, 2), x3 = r.x(i, 3);
    r.y(i) = 12.0 * x0 + 3.0 * std::sin(std::numbers::pi * x1 * x2) + 4.0 * (x3 - 0.5) * (x3 - 0.5) +
             noise_sd * rng.normal();
  }
  r.dominant = 0;
  return r;
}

FixtureFiles write_fixtures(const SynthData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [](const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw DataError("cannot write " + p.string());
    return f;
  };
  FixtureFiles files;
  const std::uint64_t seed = data.params.seed;
  for (std::size_t i = 0; i < data.nodes.size(); ++i) {
    const NodeTruth& t = data.nodes[i];
    const auto cam = dir / ("camera_" + t.node.node_id + ".csv");
    auto f = open(cam);
    write_camera_csv(f, t, derive_seed(seed, i), i == 0 ? data.params.duplicate_rows : 0);
    files.camera[t.node.node_id] = cam;
    if (!files.jma.contains(t.node.station_id)) {
      const auto jma = dir / ("jma_" + t.node.station_id + ".csv");
      auto g = open(jma);
      write_jma_csv(g, t);
      files.jma[t.node.station_id] = jma;
    }
  }
  files.intent = dir / "intent.csv";
  {
    auto f = open(files.intent);
    write_intent_csv(f, data.intent);
  }

  const Date first = data.dates.front();
  const std::size_t span = data.dates.size();
  files.survey_merged = dir / "survey_merged.csv";
  {
    SurveyCorpusParams sp;
    sp.first = first;
    sp.span_days = span;
    auto corpus = generate_survey_corpus(sp, kansei::Lexicon::embedded(), derive_seed(seed, kSurveyStream));
    Rng rng(derive_seed(seed, kSurveyStream + 2));
    for (int i = 0; i < 300; ++i) {
      ingest::SurveyResponse r;
      r.prefecture = i % 3 == 0 ? "富山" : "石川";
      r.survey_date = first + std::chrono::days{rng.below(span)};
      r.satisfaction = 1 + static_cast<int>(rng.below(5));
      r.reason = "兼六園がきれいだった";
      r.location = i % 3 == 0 ? "富山駅" : "金沢駅";
      corpus.push_back(std::move(r));
    }
    auto f = open(files.survey_merged);
    ingest::write_survey_csv(f, corpus, ingest::SurveyDataset::merged_hokuriku);
  }
  files.survey_raw = dir / "survey_raw.csv";
  {
    auto f = open(files.survey_raw);
    ingest::write_survey_csv(f, generate_raw_survey(2000, first, span, derive_seed(seed, kSurveyStream + 1)),
                             ingest::SurveyDataset::raw_fukui);
  }
  files.spend_bands = dir / "spend_bands.csv";
  {
    auto f = open(files.spend_bands);
    csv::write_row(f, {"label", "midpoint_yen"});
    for (const auto& [label, mid] : default_spend_bands()) csv::write_row(f, {label, text::format_double(mid)});
  }

  files.ranking = dir / "ranking_baseline.csv";
  {
    static const std::array<double, 12> base = {180000, 170000, 240000, 300000, 330000, 260000,
                                                310000, 420000, 300000, 320000, 290000, 210000};
    static const std::array<int, 12> base_rank = {46, 46, 44, 42, 40, 43, 41, 38, 42, 41, 43, 45};
    auto f = open(files.ranking);
    std::vector<std::string> header = {"month", "baseline_visitors"};
    for (int r = 30; r <= 47; ++r) header.push_back("tier_" + std::to_string(r));
    csv::write_row(f, header);
    for (std::size_t m = 0; m < 12; ++m) {
      std::vector<std::string> row = {std::to_string(m + 1), text::format_fixed(base[m], 0)};
      for (int r = 30; r <= 47; ++r) {
        const double factor = 1.0 + 0.05 * (base_rank[m] - r);
        row.push_back(r == 47 ? "0" : text::format_fixed(std::max(0.0, std::round(base[m] * factor)), 0));
      }
      csv::write_row(f, row);
    }
  }

  // Three-day outlook after the last panel day: a surge at the second node,
  // severe weather and high intent at the first exposed node.
  const Date issued = data.dates.back();
  files.forecast = dir / "forecast.csv";
  files.outlook = dir / "outlook.csv";
  {
    std::vector<double> intent;
    for (const auto& i : data.intent) intent.push_back(static_cast<double>(i.directions));
    const double intent_med = stats::quantile(intent, 0.5);
    const double intent_hi = stats::quantile(intent, 0.95) * 1.1;
    std::optional<std::size_t> exposed, surge;
    for (std::size_t i = 0; i < data.nodes.size(); ++i) {
      if (!data.nodes[i].node.indoor_sheltered && !exposed) {
        exposed = i;
      } else if (!data.nodes[i].node.indoor_sheltered && !surge) {
        surge = i;
      }
    }
    auto f = open(files.forecast);
    auto g = open(files.outlook);
    csv::write_row(f, {"date", "node_id", "forecast_visitors", "forecast_directions"});
    csv::write_row(g, {"date", "node_id", "severity"});
    for (int h = 1; h <= 3; ++h) {
      const Date d = issued + std::chrono::days{h};
      for (std::size_t i = 0; i < data.nodes.size(); ++i) {
        const NodeTruth& t = data.nodes[i];
        std::vector<double> counts;
        for (auto c : t.counts) {
          if (c > 0) counts.push_back(static_cast<double>(c));
        }
        double visitors = std::round(stats::quantile(counts, 0.5));
        double dir = std::round(intent_med);
        int sev = 0;
        if (h == 1 && surge && i == *surge) visitors = std::round(*std::max_element(counts.begin(), counts.end()) * 1.05);
        if (h == 1 && exposed && i == *exposed) {
          dir = std::round(intent_hi);
          sev = 3;
        }
        csv::write_row(f, {format_date(d), t.node.node_id, text::format_fixed(visitors, 0), text::format_fixed(dir, 0)});
        csv::write_row(g, {format_date(d), t.node.node_id, std::to_string(sev)});
      }
    }
  }
  return files;
}

}  // namespace dhde::synth

#include "dhde/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include <json.hpp>

#include "dhde/error.hpp"

namespace dhde::config {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// json::get silently wraps negative numbers into unsigned types and truncates
// fractions into integers; reject both.
template <typename T>
T convert(const json& v) {
  if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
    if (!v.is_number_integer()) throw json::type_error::create(302, "expected an integer", &v);
    if constexpr (std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned()) throw json::type_error::create(302, "expected a non-negative integer", &v);
    }
  }
  return v.get<T>();
}

// Walks one JSON object, recording type errors and unknown keys instead of
// stopping at the first one.
class Section {
public:
  Section(const json* j, std::string path, std::vector<std::string>& problems)
      : j_(j), path_(std::move(path)), problems_(problems) {
    if (j_ && !j_->is_object()) {
      problems_.push_back(path_ + ": expected an object");
      j_ = nullptr;
    }
  }

  template <typename T>
  void get(const char* key, T& out) {
    const json* v = find(key);
    if (!v) return;
    try {
      out = convert<T>(*v);
    } catch (const json::exception&) {
      problems_.push_back(where(key) + ": wrong type");
    }
  }

  template <typename T>
  void get(const char* key, std::optional<T>& out) {
    const json* v = find(key);
    if (!v || v->is_null()) return;
    try {
      out = convert<T>(*v);
    } catch (const json::exception&) {
      problems_.push_back(where(key) + ": wrong type");
    }
  }

  void path(const char* key, std::optional<std::filesystem::path>& out, const std::filesystem::path& base) {
    std::optional<std::string> s;
    get(key, s);
    if (s) out = base / *s;
  }

  void path_map(const char* key, std::map<std::string, std::filesystem::path>& out, const std::filesystem::path& base) {
    std::map<std::string, std::string> m;
    get(key, m);
    for (const auto& [k, v] : m) out[k] = base / v;
  }

  void date(const char* key, std::optional<Date>& out) {
    std::optional<std::string> s;
    get(key, s);
    if (!s) return;
    out = parse_date(*s);
    if (!out) problems_.push_back(where(key) + ": bad date '" + *s + "'");
  }

  void date(const char* key, Date& out) {
    std::optional<Date> d;
    date(key, d);
    if (d) out = *d;
  }

  Section sub(const char* key) { return Section(find(key), where(key), problems_); }

  const json* raw(const char* key) { return find(key); }

  void problem(const std::string& msg) { problems_.push_back(path_ + ": " + msg); }

  // Reports keys that were never read.
  void finish() const {
    if (!j_) return;
    for (auto it = j_->begin(); it != j_->end(); ++it) {
      if (!used_.contains(it.key())) problems_.push_back(where(it.key().c_str()) + ": unknown key");
    }
  }

private:
  const json* find(const char* key) {
    if (!j_) return nullptr;
    used_.insert(key);
    const auto it = j_->find(key);
    return it == j_->end() ? nullptr : &*it;
  }

  std::string where(const char* key) const { return path_.empty() ? std::string(key) : path_ + "." + key; }

  const json* j_;
  std::string path_;
  std::vector<std::string>& problems_;
  std::set<std::string> used_;
};

std::string rel(const std::filesystem::path& p, const std::filesystem::path& base) {
  const auto r = p.lexically_relative(base);
  return (r.empty() ? p : r).generic_string();
}

void read_nodes(const json* arr, std::vector<ingest::NodeConfig>& nodes, std::vector<std::string>& problems) {
  if (!arr) return;
  if (!arr->is_array()) {
    problems.emplace_back("nodes: expected an array");
    return;
  }
  nodes.clear();
  for (std::size_t i = 0; i < arr->size(); ++i) {
    Section s(&(*arr)[i], "nodes[" + std::to_string(i) + "]", problems);
    ingest::NodeConfig n;
    std::string env = "coastal", kind = "person_camera";
    s.get("node_id", n.node_id);
    s.get("name", n.name);
    s.get("environment", env);
    s.get("sensor_kind", kind);
    s.get("station_id", n.station_id);
    s.get("indoor_sheltered", n.indoor_sheltered);
    s.get("survey_proxy_allowed", n.survey_proxy_allowed);
    s.finish();
    try {
      n.environment = ingest::parse_environment(env);
    } catch (const Error& e) {
      s.problem(e.what());
    }
    try {
      n.sensor_kind = ingest::parse_sensor_kind(kind);
    } catch (const Error& e) {
      s.problem(e.what());
    }
    nodes.push_back(n);
  }
}

}  // namespace

RunConfig from_json_text(const std::string& json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("config is not valid JSON: ") + e.what());
  }
  std::vector<std::string> problems;
  RunConfig cfg;
  Section root(&j, "", problems);
  root.get("seed", cfg.seed);
  {
    std::optional<std::string> out;
    root.get("output_dir", out);
    if (out) cfg.output_dir = base_dir / *out;
  }
  root.get("serial", cfg.serial);
  read_nodes(root.raw("nodes"), cfg.nodes, problems);

  {
    Section s = root.sub("inputs");
    s.path_map("camera", cfg.inputs.camera, base_dir);
    s.path_map("jma", cfg.inputs.jma, base_dir);
    s.path("intent", cfg.inputs.intent, base_dir);
    s.path("survey_merged", cfg.inputs.survey_merged, base_dir);
    s.path("survey_raw", cfg.inputs.survey_raw, base_dir);
    s.path("spend_bands", cfg.inputs.spend_bands, base_dir);
    s.path("ranking", cfg.inputs.ranking, base_dir);
    s.path("forecast", cfg.inputs.forecast, base_dir);
    s.path("outlook", cfg.inputs.outlook, base_dir);
    s.path("holidays", cfg.inputs.holidays, base_dir);
    s.path("lexicon", cfg.inputs.lexicon, base_dir);
    s.finish();
  }
  {
    Section s = root.sub("features");
    std::string dow = cfg.features.dow_baseline == features::DowBaseline::full_sample ? "full_sample" : "train_only";
    s.get("dow_baseline", dow);
    if (dow == "full_sample") {
      cfg.features.dow_baseline = features::DowBaseline::full_sample;
    } else if (dow == "train_only") {
      cfg.features.dow_baseline = features::DowBaseline::train_only;
    } else {
      s.problem("dow_baseline must be full_sample or train_only");
    }
    s.get("snow_escalation", cfg.features.severity.snow_escalation);
    s.get("snow_threshold_cm", cfg.features.severity.snow_threshold_cm);
    s.get("precip_hostile_mm", cfg.features.severity.precip_hostile_mm);
    s.get("wind_limit_ms", cfg.features.severity.wind_limit_ms);
    s.finish();
  }
  {
    Section s = root.sub("model");
    s.get("node", cfg.model.node);
    s.get("holdout_train", cfg.model.holdout_train);
    s.get("hac_lag", cfg.model.hac_lag);
    s.get("small_sample", cfg.model.small_sample);
    s.finish();
  }
  {
    Section s = root.sub("forest");
    s.get("n_trees", cfg.forest.params.n_trees);
    s.get("max_features", cfg.forest.params.max_features);
    s.get("min_samples_leaf", cfg.forest.params.min_samples_leaf);
    s.get("min_samples_split", cfg.forest.params.min_samples_split);
    s.get("max_depth", cfg.forest.params.max_depth);
    s.get("folds", cfg.forest.folds);
    s.get("repeats", cfg.forest.repeats);
    s.finish();
  }
  {
    Section s = root.sub("gap");
    s.get("intent_quantile", cfg.gap.intent_quantile);
    s.get("severity_min", cfg.gap.severity_min);
    s.get("residual_source", cfg.gap.residual_source);
    s.get("fx_rate", cfg.gap.fx_rate);
    s.get("spend_yen", cfg.gap.spend_yen);
    s.get("reference_lost_visitors", cfg.gap.reference_lost_visitors);
    s.get("reference_yen", cfg.gap.reference_yen);
    s.finish();
  }
  {
    Section s = root.sub("ccf");
    s.get("max_lag", cfg.ccf.max_lag);
    s.get("node", cfg.ccf.node);
    s.finish();
  }
  {
    Section s = root.sub("rank");
    s.get("weights", cfg.rank.weights);
    s.get("recovered_annual", cfg.rank.recovered_annual);
    s.get("floor_rank", cfg.rank.floor_rank);
    s.finish();
  }
  {
    Section s = root.sub("nudge");
    s.get("surge_quantile", cfg.nudge.surge_quantile);
    s.get("intent_quantile", cfg.nudge.intent_quantile);
    s.get("severity_min", cfg.nudge.severity_min);
    s.get("reroute_priority", cfg.nudge.reroute_priority);
    s.date("issued", cfg.nudge.issued);
    s.finish();
  }
  {
    Section s = root.sub("kansei");
    s.get("prefecture", cfg.kansei.prefecture);
    s.finish();
  }
  {
    Section s = root.sub("synth");
    auto& p = cfg.synth;
    s.date("start", p.start);
    s.get("n_days", p.n_days);
    s.get("intercept", p.intercept);
    s.get("coef", p.coef);
    s.get("sigma", p.sigma);
    s.get("rho", p.rho);
    s.get("intent_base", p.intent_base);
    s.get("intent_weekend_lift", p.intent_weekend_lift);
    s.get("intent_season_amp", p.intent_season_amp);
    s.get("intent_noise_sd", p.intent_noise_sd);
    s.get("suppression", p.suppression);
    s.get("suppression_months", p.suppression_months);
    s.get("suppression_conversion", p.suppression_conversion);
    s.get("nonlinear", p.nonlinear);
    s.get("outage_days", p.outage_days);
    s.get("duplicate_rows", p.duplicate_rows);
    s.finish();
  }
  root.finish();
  cfg.synth.seed = cfg.seed;
  if (!problems.empty()) throw UsageError(problems);
  return cfg;
}

RunConfig load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw UsageError("cannot open config file " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str(), file.parent_path());
}

std::string to_json_text(const RunConfig& cfg, const std::filesystem::path& base_dir) {
  ordered_json j;
  j["seed"] = cfg.seed;
  j["output_dir"] = rel(cfg.output_dir, base_dir);
  j["serial"] = cfg.serial;
  j["nodes"] = ordered_json::array();
  for (const auto& n : cfg.nodes) {
    ordered_json o;
    o["node_id"] = n.node_id;
    o["name"] = n.name;
    o["environment"] = ingest::to_string(n.environment);
    o["sensor_kind"] = ingest::to_string(n.sensor_kind);
    o["station_id"] = n.station_id;
    o["indoor_sheltered"] = n.indoor_sheltered;
    o["survey_proxy_allowed"] = n.survey_proxy_allowed;
    j["nodes"].push_back(o);
  }
  ordered_json in = ordered_json::object();
  auto put_map = [&](const char* key, const std::map<std::string, std::filesystem::path>& m) {
    ordered_json o = ordered_json::object();
    for (const auto& [k, v] : m) o[k] = rel(v, base_dir);
    in[key] = o;
  };
  put_map("camera", cfg.inputs.camera);
  put_map("jma", cfg.inputs.jma);
  auto put = [&](const char* key, const std::optional<std::filesystem::path>& p) {
    if (p) in[key] = rel(*p, base_dir);
  };
  put("intent", cfg.inputs.intent);
  put("survey_merged", cfg.inputs.survey_merged);
  put("survey_raw", cfg.inputs.survey_raw);
  put("spend_bands", cfg.inputs.spend_bands);
  put("ranking", cfg.inputs.ranking);
  put("forecast", cfg.inputs.forecast);
  put("outlook", cfg.inputs.outlook);
  put("holidays", cfg.inputs.holidays);
  put("lexicon", cfg.inputs.lexicon);
  j["inputs"] = in;

  const auto& f = cfg.features;
  j["features"] = {{"dow_baseline", f.dow_baseline == features::DowBaseline::full_sample ? "full_sample" : "train_only"},
                   {"snow_escalation", f.severity.snow_escalation},
                   {"snow_threshold_cm", f.severity.snow_threshold_cm},
                   {"precip_hostile_mm", f.severity.precip_hostile_mm},
                   {"wind_limit_ms", f.severity.wind_limit_ms}};
  ordered_json model;
  model["node"] = cfg.model.node;
  model["holdout_train"] = cfg.model.holdout_train ? ordered_json(*cfg.model.holdout_train) : ordered_json(nullptr);
  model["hac_lag"] = cfg.model.hac_lag ? ordered_json(*cfg.model.hac_lag) : ordered_json(nullptr);
  model["small_sample"] = cfg.model.small_sample;
  j["model"] = model;
  const auto& fp = cfg.forest.params;
  ordered_json forest;
  forest["n_trees"] = fp.n_trees;
  forest["max_features"] = fp.max_features ? ordered_json(*fp.max_features) : ordered_json(nullptr);
  forest["min_samples_leaf"] = fp.min_samples_leaf;
  forest["min_samples_split"] = fp.min_samples_split;
  forest["max_depth"] = fp.max_depth ? ordered_json(*fp.max_depth) : ordered_json(nullptr);
  forest["folds"] = cfg.forest.folds;
  forest["repeats"] = cfg.forest.repeats;
  j["forest"] = forest;
  ordered_json gap;
  gap["intent_quantile"] = cfg.gap.intent_quantile;
  gap["severity_min"] = cfg.gap.severity_min;
  gap["residual_source"] = cfg.gap.residual_source;
  gap["fx_rate"] = cfg.gap.fx_rate;
  gap["spend_yen"] = cfg.gap.spend_yen ? ordered_json(*cfg.gap.spend_yen) : ordered_json(nullptr);
  gap["reference_lost_visitors"] = cfg.gap.reference_lost_visitors;
  gap["reference_yen"] = cfg.gap.reference_yen;
  j["gap"] = gap;
  j["ccf"] = {{"max_lag", cfg.ccf.max_lag}, {"node", cfg.ccf.node}};
  ordered_json rank;
  rank["weights"] = cfg.rank.weights;
  rank["recovered_annual"] = cfg.rank.recovered_annual ? ordered_json(*cfg.rank.recovered_annual) : ordered_json(nullptr);
  rank["floor_rank"] = cfg.rank.floor_rank;
  j["rank"] = rank;
  ordered_json nudge;
  nudge["surge_quantile"] = cfg.nudge.surge_quantile;
  nudge["intent_quantile"] = cfg.nudge.intent_quantile;
  nudge["severity_min"] = cfg.nudge.severity_min;
  nudge["reroute_priority"] = cfg.nudge.reroute_priority;
  nudge["issued"] = cfg.nudge.issued ? ordered_json(format_date(*cfg.nudge.issued)) : ordered_json(nullptr);
  j["nudge"] = nudge;
  j["kansei"] = {{"prefecture", cfg.kansei.prefecture}};
  const auto& p = cfg.synth;
  ordered_json s;
  s["start"] = format_date(p.start);
  s["n_days"] = p.n_days;
  s["intercept"] = p.intercept;
  s["coef"] = p.coef;
  s["sigma"] = p.sigma;
  s["rho"] = p.rho;
  s["intent_base"] = p.intent_base;
  s["intent_weekend_lift"] = p.intent_weekend_lift;
  s["intent_season_amp"] = p.intent_season_amp;
  s["intent_noise_sd"] = p.intent_noise_sd;
  s["suppression"] = p.suppression;
  s["suppression_months"] = p.suppression_months;
  s["suppression_conversion"] = p.suppression_conversion;
  s["nonlinear"] = p.nonlinear;
  s["outage_days"] = p.outage_days;
  s["duplicate_rows"] = p.duplicate_rows;
  j["synth"] = s;
  return j.dump(2) + "\n";
}

std::vector<std::string> problems(const RunConfig& cfg, const std::vector<Need>& needs) {
  std::vector<std::string> out;
  try {
    ingest::validate_nodes(cfg.nodes, ingest::default_stations());
  } catch (const UsageError& e) {
    out.insert(out.end(), e.problems().begin(), e.problems().end());
  }
  auto in01 = [&](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) out.push_back(std::string(name) + " must lie in [0, 1]");
  };
  in01(cfg.gap.intent_quantile, "gap.intent_quantile");
  in01(cfg.nudge.surge_quantile, "nudge.surge_quantile");
  in01(cfg.nudge.intent_quantile, "nudge.intent_quantile");
  if (!(cfg.gap.fx_rate > 0.0)) out.emplace_back("gap.fx_rate must be positive");
  if (cfg.gap.spend_yen && !(*cfg.gap.spend_yen > 0.0)) out.emplace_back("gap.spend_yen must be positive");
  if (cfg.gap.residual_source != "ols" && cfg.gap.residual_source != "ldv") {
    out.emplace_back("gap.residual_source must be ols or ldv");
  }
  if (cfg.forest.params.n_trees == 0) out.emplace_back("forest.n_trees must be positive");
  if (cfg.forest.params.min_samples_leaf == 0) out.emplace_back("forest.min_samples_leaf must be positive");
  if (cfg.forest.folds < 2) out.emplace_back("forest.folds must be at least 2");
  if (cfg.forest.repeats < 1) out.emplace_back("forest.repeats must be at least 1");
  if (cfg.ccf.max_lag < 0) out.emplace_back("ccf.max_lag must be non-negative");
  if (!cfg.rank.weights.empty() && cfg.rank.weights.size() != 12) out.emplace_back("rank.weights must hold 12 values");
  if (cfg.rank.recovered_annual && *cfg.rank.recovered_annual < 0.0) out.emplace_back("rank.recovered_annual must be non-negative");
  auto node_known = [&](const std::string& id) {
    return std::any_of(cfg.nodes.begin(), cfg.nodes.end(), [&](const ingest::NodeConfig& n) { return n.node_id == id; });
  };
  if (!node_known(cfg.model.node)) out.push_back("model.node '" + cfg.model.node + "' is not a configured node");
  if (!node_known(cfg.ccf.node)) out.push_back("ccf.node '" + cfg.ccf.node + "' is not a configured node");

  auto exists = [&](const std::optional<std::filesystem::path>& p, const char* name) {
    if (!p) {
      out.push_back(std::string("inputs.") + name + " is not configured");
    } else if (!std::filesystem::is_regular_file(*p)) {
      out.push_back(std::string("inputs.") + name + ": file not found: " + p->string());
    }
  };
  for (const Need n : needs) {
    switch (n) {
      case Need::camera:
        for (const auto& node : cfg.nodes) {
          const auto it = cfg.inputs.camera.find(node.node_id);
          exists(it == cfg.inputs.camera.end() ? std::nullopt : std::optional(it->second),
                 ("camera." + node.node_id).c_str());
        }
        break;
      case Need::jma:
        for (const auto& node : cfg.nodes) {
          const auto it = cfg.inputs.jma.find(node.station_id);
          exists(it == cfg.inputs.jma.end() ? std::nullopt : std::optional(it->second),
                 ("jma." + node.station_id).c_str());
        }
        break;
      case Need::intent: exists(cfg.inputs.intent, "intent"); break;
      case Need::survey_merged: exists(cfg.inputs.survey_merged, "survey_merged"); break;
      case Need::survey_raw: exists(cfg.inputs.survey_raw, "survey_raw"); break;
      case Need::spend_bands: exists(cfg.inputs.spend_bands, "spend_bands"); break;
      case Need::ranking: exists(cfg.inputs.ranking, "ranking"); break;
      case Need::forecast: exists(cfg.inputs.forecast, "forecast"); break;
      case Need::outlook: exists(cfg.inputs.outlook, "outlook"); break;
    }
  }
  if (cfg.inputs.holidays && !std::filesystem::is_regular_file(*cfg.inputs.holidays)) {
    out.push_back("inputs.holidays: file not found: " + cfg.inputs.holidays->string());
  }
  if (cfg.inputs.lexicon && !std::filesystem::is_regular_file(*cfg.inputs.lexicon)) {
    out.push_back("inputs.lexicon: file not found: " + cfg.inputs.lexicon->string());
  }
  return out;
}

}  // namespace dhde::config

#include "dhde/cli.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dhde/config.hpp"
#include "dhde/csv.hpp"
#include "dhde/economics.hpp"
#include "dhde/error.hpp"
#include "dhde/features.hpp"
#include "dhde/forest.hpp"
#include "dhde/ingest.hpp"
#include "dhde/kansei.hpp"
#include "dhde/linmodel.hpp"
#include "dhde/nudge.hpp"
#include "dhde/random.hpp"
#include "dhde/report.hpp"
#include "dhde/svg.hpp"
#include "dhde/synth.hpp"
#include "dhde/text.hpp"

namespace dhde::cli {
namespace {

namespace fs = std::filesystem;
using report::Json;
using config::Need;

// Flag values; unset optionals leave the config file value in place.
struct Overrides {
  std::optional<std::string> config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  bool serial = false;
  int threads = 0;

  std::optional<std::string> node;
  std::optional<std::string> dow_baseline;
  std::optional<std::size_t> hac_lag;
  std::optional<std::size_t> holdout_train;
  bool small_sample = false;
  std::optional<std::size_t> trees;
  std::optional<std::size_t> folds;
  std::optional<std::size_t> repeats;
  std::optional<std::string> prefecture;
  std::optional<double> spend;
  std::optional<double> fx;
  std::optional<double> intent_quantile;
  std::optional<int> severity_min;
  std::optional<std::string> residual_source;
  std::optional<int> max_lag;
  std::optional<double> recovered;
  std::optional<std::string> issued;
  std::optional<double> surge_quantile;
  std::optional<std::size_t> days;
  std::optional<std::string> start;
  std::optional<double> sigma;
  std::optional<double> rho;
  bool nonlinear = false;
  std::optional<std::size_t> outage_days;
  std::optional<std::size_t> duplicate_rows;
};

struct Context {
  config::RunConfig cfg;
  Exec exec = Exec::parallel;
  std::optional<features::HolidayTable> holidays;
  std::ostream* out = nullptr;
};

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open " + p.string());
  return in;
}

void write_file(Context& ctx, const fs::path& p, const std::string& content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write " + p.string());
  f << content;
  if (!f.flush()) throw DataError("write failed: " + p.string());
  *ctx.out << "wrote " << p.string() << "\n";
}

void write_json(Context& ctx, const std::string& name, const Json& j) {
  write_file(ctx, ctx.cfg.output_dir / name, j.dump(2) + "\n");
}

void require(const config::RunConfig& cfg, const std::vector<Need>& needs, std::vector<std::string> extra = {}) {
  auto p = config::problems(cfg, needs);
  p.insert(p.end(), extra.begin(), extra.end());
  if (!p.empty()) throw UsageError(p);
}

const ingest::NodeConfig& node_of(const Context& ctx, const std::string& id) {
  for (const auto& n : ctx.cfg.nodes) {
    if (n.node_id == id) return n;
  }
  throw UsageError("unknown node '" + id + "'");
}

fs::path panel_path(const Context& ctx, const std::string& node_id) {
  return ctx.cfg.output_dir / ("panel_" + node_id + ".csv");
}

ingest::DailyPanel load_panel(const Context& ctx, const std::string& node_id) {
  const fs::path p = panel_path(ctx, node_id);
  if (!fs::exists(p)) throw DataError("missing " + p.string() + "; run `dhde ingest` first");
  auto in = open_in(p);
  return ingest::read_panel_csv(in, node_id);
}

std::size_t default_train_rows(const config::RunConfig& cfg, std::size_t rows) {
  if (cfg.model.holdout_train) {
    if (*cfg.model.holdout_train == 0 || *cfg.model.holdout_train >= rows) {
      throw UsageError("model.holdout_train must lie in 1.." + std::to_string(rows - 1));
    }
    return *cfg.model.holdout_train;
  }
  return static_cast<std::size_t>(std::floor(0.8 * static_cast<double>(rows)));
}

features::FeatureMatrix build_features(const Context& ctx, const ingest::DailyPanel& panel) {
  features::FeatureOptions opt = ctx.cfg.features;
  if (opt.dow_baseline == features::DowBaseline::train_only && !opt.train_rows) {
    features::FeatureOptions probe = opt;
    probe.dow_baseline = features::DowBaseline::full_sample;
    const auto full = features::build_features(panel, *ctx.holidays, probe);
    opt.train_rows = default_train_rows(ctx.cfg, full.rows());
  }
  return features::build_features(panel, *ctx.holidays, opt);
}

std::string dow_label(const config::RunConfig& cfg) {
  return cfg.features.dow_baseline == features::DowBaseline::full_sample ? "full_sample" : "train_only";
}



// ---------------------------------------------------------------- ingest

Json survey_summary(const ingest::SurveyParse& s) {
  std::size_t with_sat = 0;
  for (const auto& r : s.responses) with_sat += r.satisfaction ? 1 : 0;
  return Json{{"records", s.records},
              {"physical_lines", s.physical_lines},
              {"responses", s.responses.size()},
              {"with_satisfaction", with_sat},
              {"warnings", s.warnings}};
}

int cmd_ingest(Context& ctx) {
  require(ctx.cfg, {Need::camera, Need::jma, Need::intent});
  auto intent_in = open_in(*ctx.cfg.inputs.intent);
  const auto intent = ingest::parse_intent_csv(intent_in);

  std::map<std::string, ingest::WeatherParse> weather;
  Json report;
  report["intent"] = {{"days", intent.days.size()}, {"warnings", intent.warnings}};
  Json nodes = Json::array();
  for (const auto& node : ctx.cfg.nodes) {
    auto cam_in = open_in(ctx.cfg.inputs.camera.at(node.node_id));
    const auto cam = ingest::parse_camera_csv(cam_in, node);
    if (!weather.count(node.station_id)) {
      auto w_in = open_in(ctx.cfg.inputs.jma.at(node.station_id));
      weather.emplace(node.station_id, ingest::parse_jma_csv(w_in, node.station_id));
    }
    const auto& w = weather.at(node.station_id);
    const auto panel = ingest::build_panel(cam.days, w.days, intent.days, node, cam.dropped_zero_days);
    std::ostringstream csv;
    ingest::write_panel_csv(csv, panel);
    write_file(ctx, panel_path(ctx, node.node_id), csv.str());

    Json zero = Json::array();
    for (const Date d : cam.zero_days) zero.push_back(format_date(d));
    Json o;
    o["node_id"] = node.node_id;
    o["station_id"] = node.station_id;
    o["camera"] = {{"records", cam.records},
                   {"physical_lines", cam.physical_lines},
                   {"days", cam.days.size()},
                   {"duplicate_rows", cam.duplicate_rows},
                   {"zero_days", zero}};
    o["weather"] = {{"records", w.records}, {"days", w.days.size()}, {"warnings", w.warnings}};
    o["panel"] = report::coverage(panel.coverage);
    o["panel"]["first_date"] = format_date(panel.rows.front().date);
    o["panel"]["last_date"] = format_date(panel.rows.back().date);
    nodes.push_back(o);
  }
  report["nodes"] = nodes;
  if (ctx.cfg.inputs.survey_merged) {
    auto in = open_in(*ctx.cfg.inputs.survey_merged);
    report["survey_merged"] = survey_summary(ingest::parse_survey_csv(in, ingest::SurveyDataset::merged_hokuriku));
  }
  if (ctx.cfg.inputs.survey_raw) {
    auto in = open_in(*ctx.cfg.inputs.survey_raw);
    report["survey_raw"] = survey_summary(ingest::parse_survey_csv(in, ingest::SurveyDataset::raw_fukui));
  }
  write_json(ctx, "ingest_report.json", report);
  return kExitOk;
}

// -------------------------------------------------------------- features

int cmd_features(Context& ctx) {
  require(ctx.cfg, {});
  for (const auto& node : ctx.cfg.nodes) {
    const auto fm = build_features(ctx, load_panel(ctx, node.node_id));
    std::ostringstream csv;
    features::write_features_csv(csv, fm);
    write_file(ctx, ctx.cfg.output_dir / ("features_" + node.node_id + ".csv"), csv.str());
  }
  return kExitOk;
}

// ------------------------------------------------------------------- fit

int cmd_fit(Context& ctx) {
  require(ctx.cfg, {});
  const std::string& id = node_of(ctx, ctx.cfg.model.node).node_id;
  const auto fm = build_features(ctx, load_panel(ctx, id));
  auto fit = linmodel::fit_ols(fm);
  fit.hac = linmodel::newey_west(fit, fm.x, {ctx.cfg.model.hac_lag, ctx.cfg.model.small_sample, ctx.exec});
  const auto betas = linmodel::standardized_betas(fit, fm.x, fm.y);
  const auto holdout = linmodel::chronological_holdout(fm, default_train_rows(ctx.cfg, fm.rows()));

  Json fj;
  fj["node"] = id;
  fj["dow_baseline"] = dow_label(ctx.cfg);
  fj["first_date"] = format_date(fm.dates.front());
  fj["last_date"] = format_date(fm.dates.back());
  fj.update(report::fit(fit, "ols"));
  write_json(ctx, "fit.json", fj);

  Json bj;
  bj["node"] = id;
  bj["standardized_betas"] = report::betas(betas);
  bj["r2"] = report::number(fit.r2);
  bj["cohens_f2"] = report::number(linmodel::cohens_f2(fit.r2));
  bj["holdout"] = report::holdout(holdout);
  write_json(ctx, "betas.json", bj);

  std::ostringstream csv;
  csv::write_row(csv, {"date", "actual", "predicted"});
  svg::Series actual{"actual", {}, {}, false}, predicted{"predicted", {}, {}, false};
  for (std::size_t i = 0; i < holdout.test_n; ++i) {
    csv::write_row(csv, {format_date(holdout.test_dates[i]), text::format_double(holdout.actual[i]),
                         text::format_double(holdout.predicted[i])});
    const double day = static_cast<double>((holdout.test_dates[i] - holdout.test_dates.front()).count());
    actual.x.push_back(day);
    actual.y.push_back(holdout.actual[i]);
    predicted.x.push_back(day);
    predicted.y.push_back(holdout.predicted[i]);
  }
  write_file(ctx, ctx.cfg.output_dir / "holdout.csv", csv.str());
  svg::Chart chart{"Hold-out: node " + id + " from " + format_date(holdout.test_dates.front()),
                   "days into hold-out", "daily visitors", {actual, predicted}};
  write_file(ctx, ctx.cfg.output_dir / "holdout.svg", svg::render(chart));
  return kExitOk;
}

// -------------------------------------------------------------- diagnose

template <typename F>
Json guarded(F&& f) {
  try {
    return f();
  } catch (const NumericalError& e) {
    return Json{{"unavailable", e.what()}};
  }
}

int cmd_diagnose(Context& ctx) {
  require(ctx.cfg, {});
  const std::string& id = node_of(ctx, ctx.cfg.model.node).node_id;
  const auto panel = load_panel(ctx, id);
  const auto fm = build_features(ctx, panel);

  std::vector<double> counts, directions;
  for (const auto& r : panel.rows) {
    counts.push_back(static_cast<double>(r.count));
    directions.push_back(static_cast<double>(r.directions));
  }
  Json j;
  j["node"] = id;
  j["adf"] = {{"count", guarded([&] { return report::adf(linmodel::adf_test(counts)); })},
              {"directions", guarded([&] { return report::adf(linmodel::adf_test(directions)); })}};
  j["vif"] = report::vif(linmodel::vif(fm.x, fm.names, ctx.exec));

  Json specs = Json::array();
  specs.push_back(guarded([&] { return report::spec_summary(linmodel::fit_ols(fm), "baseline"); }));
  specs.push_back(guarded([&] { return report::spec_summary(linmodel::fit_first_difference(fm), "first_difference"); }));
  specs.push_back(guarded([&] { return report::spec_summary(linmodel::fit_ldv(fm), "lagged_dependent"); }));
  j["specifications"] = specs;

  const auto jma = features::jma_weather_columns();
  const auto all = features::weather_feature_columns();
  j["weather_ablation"] = {
      {"jma_only", guarded([&] { return report::seasonal(linmodel::seasonal_sensitivity(fm, jma), jma); })},
      {"all_weather", guarded([&] { return report::seasonal(linmodel::seasonal_sensitivity(fm, all), all); })}};
  write_json(ctx, "diagnostics.json", j);
  return kExitOk;
}

// ---------------------------------------------------------------- forest

int cmd_forest(Context& ctx) {
  require(ctx.cfg, {});
  const std::string& id = node_of(ctx, ctx.cfg.model.node).node_id;
  const auto fm = build_features(ctx, load_panel(ctx, id));
  const auto& fc = ctx.cfg.forest;
  const std::uint64_t seed = ctx.cfg.seed;

  const auto model = forest::fit_forest(fm.x, fm.y, fm.names, fc.params, derive_seed(seed, 1), ctx.exec);
  const Eigen::VectorXd pred = model.predict(fm.x, ctx.exec);
  const double ss_res = (fm.y - pred).squaredNorm();
  const double ss_tot = (fm.y.array() - fm.y.mean()).matrix().squaredNorm();
  const auto shuffled =
      forest::kfold_cv(fm.x, fm.y, fm.names, fc.params, fc.folds, forest::FoldMode::shuffled, derive_seed(seed, 2), ctx.exec);
  const auto chrono = forest::kfold_cv(fm.x, fm.y, fm.names, fc.params, fc.folds, forest::FoldMode::chronological,
                                       derive_seed(seed, 3), ctx.exec);
  const auto imp = forest::permutation_importance(model, fm.x, fm.y, fc.repeats, derive_seed(seed, 4), ctx.exec);

  Json j;
  j["node"] = id;
  j["n"] = fm.rows();
  j["n_trees"] = fc.params.n_trees;
  j["max_features"] = model.max_features;
  j["min_samples_leaf"] = fc.params.min_samples_leaf;
  j["seed"] = seed;
  j["in_sample_r2"] = report::number(1.0 - ss_res / ss_tot);
  j["cv"] = Json::array({report::cv(shuffled), report::cv(chrono)});
  j["permutation_importance"] = report::importance(imp);
  write_json(ctx, "forest.json", j);

  std::ostringstream csv;
  csv::write_row(csv, {"rank", "feature", "mean_drop", "std_drop"});
  for (std::size_t idx : imp.ranking) {
    const auto& e = imp.features[idx];
    csv::write_row(csv, {std::to_string(e.rank), e.name, text::format_double(e.mean), text::format_double(e.std)});
  }
  write_file(ctx, ctx.cfg.output_dir / "importance.csv", csv.str());
  return kExitOk;
}

// ------------------------------------------------------------------ mine

// Units keyed by (site, year-month): density is the number of responses in
// the unit, satisfaction the unit mean.
Json density_correlation(const std::vector<ingest::SurveyResponse>& rows, bool by_location) {
  std::map<std::pair<std::string, std::string>, std::pair<double, std::size_t>> units;
  for (const auto& r : rows) {
    if (!r.satisfaction || !r.survey_date) continue;
    const std::string month = format_date(*r.survey_date).substr(0, 7);
    std::string site = text::nfkc(r.prefecture);
    if (by_location) site += "/" + text::nfkc(r.location);
    auto& u = units[{site, month}];
    u.first += *r.satisfaction;
    ++u.second;
  }
  std::vector<double> density, satisfaction;
  for (const auto& [key, u] : units) {
    density.push_back(static_cast<double>(u.second));
    satisfaction.push_back(u.first / static_cast<double>(u.second));
  }
  Json j;
  j["unit"] = by_location ? "location_month" : "prefecture_month";
  j["units"] = units.size();
  try {
    j["spearman"] = report::correlation(kansei::spearman(density, satisfaction));
    j["pearson"] = report::correlation(kansei::pearson(density, satisfaction));
  } catch (const Error& e) {
    j["unavailable"] = e.what();
  }
  return j;
}

Json spend_summary(const Context& ctx, std::optional<economics::SpendSummary>* out = nullptr) {
  const auto& in = ctx.cfg.inputs;
  if (!in.survey_raw || !in.spend_bands) return Json(nullptr);
  auto bands_in = open_in(*in.spend_bands);
  const auto bands = economics::SpendBandTable::load_csv(bands_in);
  auto raw_in = open_in(*in.survey_raw);
  const auto raw = ingest::parse_survey_csv(raw_in, ingest::SurveyDataset::raw_fukui);
  const auto s = economics::mean_spend(raw.responses, bands);
  if (out) *out = s;
  return Json{{"mean_yen", report::number(s.mean_yen)},
              {"used", s.used},
              {"missing", s.missing},
              {"unmapped", s.unmapped}};
}

int cmd_mine(Context& ctx) {
  require(ctx.cfg, {Need::survey_merged});
  auto in = open_in(*ctx.cfg.inputs.survey_merged);
  const auto survey = ingest::parse_survey_csv(in, ingest::SurveyDataset::merged_hokuriku);
  std::optional<kansei::Lexicon> lexicon;
  if (ctx.cfg.inputs.lexicon) {
    auto lin = open_in(*ctx.cfg.inputs.lexicon);
    lexicon = kansei::Lexicon::load_tsv(lin);
  } else {
    lexicon = kansei::Lexicon::embedded();
  }

  const std::string pref = text::nfkc(text::trim(ctx.cfg.kansei.prefecture));
  std::vector<ingest::SurveyResponse> local;
  for (const auto& r : survey.responses) {
    if (text::nfkc(text::trim(r.prefecture)) == pref) local.push_back(r);
  }
  if (local.empty()) throw DataError("no survey responses collected in " + pref);
  const auto prev = kansei::prevalence_analysis(local, *lexicon);

  Json j;
  j["prefecture"] = pref;
  j["lexicon_size"] = lexicon->size();
  j["responses"] = {{"total", survey.responses.size()}, {"in_prefecture", local.size()}};
  j["prevalence"] = report::prevalence(prev);
  j["density_satisfaction"] = Json::array(
      {density_correlation(survey.responses, true), density_correlation(survey.responses, false)});
  j["spend"] = spend_summary(ctx);
  write_json(ctx, "prevalence.json", j);
  return kExitOk;
}

// ------------------------------------------------------------------- gap

int cmd_gap(Context& ctx) {
  require(ctx.cfg, {});
  const auto& gc = ctx.cfg.gap;
  std::vector<economics::NodeGapInput> inputs;
  std::vector<economics::FrictionFlags> flags;
  for (const auto& node : ctx.cfg.nodes) {
    auto fm = build_features(ctx, load_panel(ctx, node.node_id));
    Eigen::VectorXd predicted;
    if (gc.residual_source == "ldv") {
      std::vector<std::size_t> keep;
      for (std::size_t i = 0; i < fm.rows(); ++i) {
        if (fm.prev_count[i]) keep.push_back(i);
      }
      fm = fm.select_rows(keep);
      predicted = linmodel::fit_ldv(fm).fitted;
    } else {
      predicted = linmodel::fit_ols(fm).fitted;
    }
    auto f = economics::flag_friction_days(fm, predicted, {gc.intent_quantile, gc.severity_min});
    inputs.push_back({node.node_id, f.dates, f.residuals, f.observed_days});
    flags.push_back(std::move(f));
  }

  std::string spend_source;
  double spend = economics::kFallbackSpendYen;
  std::optional<economics::SpendSummary> summary;
  if (gc.spend_yen) {
    spend = *gc.spend_yen;
    spend_source = "config";
  } else if (!spend_summary(ctx, &summary).is_null()) {
    spend = summary->mean_yen;
    spend_source = "spend_bands";
  } else {
    spend_source = "fallback";
  }
  const auto gap = economics::opportunity_gap(inputs, spend, gc.fx_rate, ctx.exec);

  Json j;
  j["residual_source"] = gc.residual_source;
  j["intent_quantile"] = report::number(gc.intent_quantile);
  j["spend_source"] = spend_source;
  j.update(report::gap(gap, flags));
  j["provenance"] = report::provenance(
      economics::provenance_note(gc.reference_lost_visitors, economics::kFallbackSpendYen, gc.reference_yen));
  write_json(ctx, "gap.json", j);

  std::ostringstream csv;
  csv::write_row(csv, {"node_id", "date", "residual"});
  for (const auto& in : inputs) {
    for (std::size_t i = 0; i < in.dates.size(); ++i) {
      csv::write_row(csv, {in.node_id, format_date(in.dates[i]), text::format_double(in.residuals[i])});
    }
  }
  write_file(ctx, ctx.cfg.output_dir / "gap_days.csv", csv.str());
  return kExitOk;
}

// ------------------------------------------------------------------- ccf

int cmd_ccf(Context& ctx) {
  require(ctx.cfg, {});
  const std::string& id = node_of(ctx, ctx.cfg.ccf.node).node_id;
  const auto panel = load_panel(ctx, id);
  std::vector<Date> dates;
  std::vector<double> x, y;
  for (const auto& r : panel.rows) {
    dates.push_back(r.date);
    x.push_back(static_cast<double>(r.directions));
    y.push_back(static_cast<double>(r.count));
  }
  const auto res = economics::ccf(dates, x, dates, y, ctx.cfg.ccf.max_lag, ctx.exec);

  Json j;
  j["node"] = id;
  j["x"] = "directions";
  j["y"] = "count";
  j["max_lag"] = ctx.cfg.ccf.max_lag;
  j.update(report::ccf(res));
  write_json(ctx, "ccf.json", j);

  std::ostringstream csv;
  csv::write_row(csv, {"lag", "r", "n"});
  svg::Series s{"r(lag)", {}, {}, true};
  for (const auto& p : res.points) {
    csv::write_row(csv, {std::to_string(p.lag), text::format_double(p.r), std::to_string(p.n)});
    s.x.push_back(p.lag);
    s.y.push_back(p.r);
  }
  write_file(ctx, ctx.cfg.output_dir / "ccf.csv", csv.str());
  svg::Chart chart{"Cross-correlation of directions (t - lag) with visitors (t), node " + id, "lag (days)",
                   "correlation", {s}};
  write_file(ctx, ctx.cfg.output_dir / "ccf.svg", svg::render(chart));
  return kExitOk;
}

// ------------------------------------------------------------------ rank

int cmd_rank(Context& ctx) {
  require(ctx.cfg, {Need::ranking});
  double recovered = 0.0;
  std::string source;
  if (ctx.cfg.rank.recovered_annual) {
    recovered = *ctx.cfg.rank.recovered_annual;
    source = "config";
  } else {
    const fs::path gp = ctx.cfg.output_dir / "gap.json";
    if (!fs::exists(gp)) throw UsageError("no recovered volume: set rank.recovered_annual or run `dhde gap` first");
    auto in = open_in(gp);
    Json g;
    try {
      g = Json::parse(in);
      recovered = g.at("total").at("lost_visitors").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError(gp.string() + ": " + e.what());
    }
    source = "gap.json";
  }
  auto in = open_in(*ctx.cfg.inputs.ranking);
  auto baseline = economics::load_ranking_csv(in);
  baseline.floor_rank = ctx.cfg.rank.floor_rank;
  const auto res = economics::ranking_simulation(baseline, recovered, ctx.cfg.rank.weights);

  Json j;
  j["recovered_source"] = source;
  j["floor_rank"] = baseline.floor_rank;
  j.update(report::ranking(res));
  write_json(ctx, "ranking.json", j);

  std::ostringstream csv;
  csv::write_row(csv, {"month", "baseline", "weight", "recovered", "shortfall", "shortfall_closed_pct",
                       "baseline_rank", "projected_rank"});
  svg::Series closed{"shortfall closed (%)", {}, {}, true};
  for (const auto& m : res.months) {
    csv::write_row(csv, {std::to_string(m.month), text::format_double(m.baseline), text::format_double(m.weight),
                         text::format_double(m.recovered), m.shortfall ? text::format_double(*m.shortfall) : "",
                         m.closed_pct ? text::format_fixed(*m.closed_pct, 2) : "", std::to_string(m.baseline_rank),
                         std::to_string(m.projected_rank)});
    if (m.closed_pct) {
      closed.x.push_back(m.month);
      closed.y.push_back(*m.closed_pct);
    }
  }
  write_file(ctx, ctx.cfg.output_dir / "ranking.csv", csv.str());
  svg::Chart chart{"Monthly ranking shortfall closed by recovered demand", "month", "percent of shortfall", {closed}};
  write_file(ctx, ctx.cfg.output_dir / "ranking.svg", svg::render(chart));
  return kExitOk;
}

// ----------------------------------------------------------------- nudge

int cmd_nudge(Context& ctx) {
  require(ctx.cfg, {Need::forecast, Need::outlook});
  std::vector<nudge::NodeHistory> history;
  std::optional<Date> last;
  for (const auto& node : ctx.cfg.nodes) {
    const auto panel = load_panel(ctx, node.node_id);
    nudge::NodeHistory h{node.node_id, {}, {}};
    for (const auto& r : panel.rows) {
      h.counts.push_back(static_cast<double>(r.count));
      h.directions.push_back(static_cast<double>(r.directions));
    }
    if (!last || panel.rows.back().date > *last) last = panel.rows.back().date;
    history.push_back(std::move(h));
  }
  const Date issued = ctx.cfg.nudge.issued.value_or(*last);
  auto f_in = open_in(*ctx.cfg.inputs.forecast);
  const auto forecasts = nudge::read_forecast_csv(f_in);
  auto o_in = open_in(*ctx.cfg.inputs.outlook);
  const auto outlook = nudge::read_outlook_csv(o_in);

  nudge::NudgePolicy policy;
  policy.surge_quantile = ctx.cfg.nudge.surge_quantile;
  policy.intent_quantile = ctx.cfg.nudge.intent_quantile;
  policy.severity_min = ctx.cfg.nudge.severity_min;
  policy.reroute_priority = ctx.cfg.nudge.reroute_priority;
  const auto res = nudge::evaluate_nudges(forecasts, outlook, ctx.cfg.nodes, history, issued, policy);

  std::ostringstream jsonl;
  nudge::write_jsonl(jsonl, res.directives);
  write_file(ctx, ctx.cfg.output_dir / "nudges.jsonl", jsonl.str());

  std::map<std::string, std::size_t> by_kind{{nudge::to_string(nudge::Kind::merchant_vitality_alert), 0},
                                             {nudge::to_string(nudge::Kind::weather_resilient_reroute), 0}};
  for (const auto& d : res.directives) ++by_kind[nudge::to_string(d.kind)];
  Json j;
  j["issued"] = format_date(issued);
  j["policy"] = {{"surge_quantile", policy.surge_quantile},
                 {"intent_quantile", policy.intent_quantile},
                 {"severity_min", policy.severity_min},
                 {"max_horizon_days", policy.max_horizon_days}};
  j["directives"] = res.directives.size();
  j["by_kind"] = by_kind;
  j["warnings"] = res.warnings;
  write_json(ctx, "nudge_report.json", j);
  return kExitOk;
}

// ----------------------------------------------------------------- synth

int cmd_synth(Context& ctx) {
  require(ctx.cfg, {});
  const auto data = synth::generate_panel(ctx.cfg.synth, ctx.cfg.nodes, *ctx.holidays);
  const fs::path dir = ctx.cfg.output_dir;
  const auto files = synth::write_fixtures(data, dir);

  config::RunConfig next = ctx.cfg;
  next.output_dir = dir / "results";
  next.inputs.camera = files.camera;
  next.inputs.jma = files.jma;
  next.inputs.intent = files.intent;
  next.inputs.survey_merged = files.survey_merged;
  next.inputs.survey_raw = files.survey_raw;
  next.inputs.spend_bands = files.spend_bands;
  next.inputs.ranking = files.ranking;
  next.inputs.forecast = files.forecast;
  next.inputs.outlook = files.outlook;
  write_file(ctx, dir / "config.json", config::to_json_text(next, dir));

  Json truth;
  truth["seed"] = data.params.seed;
  truth["start"] = format_date(data.params.start);
  truth["n_days"] = data.params.n_days;
  truth["sigma"] = data.params.sigma;
  truth["rho"] = data.params.rho;
  truth["suppression"] = data.params.suppression;
  truth["nonlinear"] = data.params.nonlinear;
  Json nodes = Json::array();
  for (const auto& n : data.nodes) {
    Json o;
    o["node_id"] = n.node.node_id;
    o["scale"] = n.scale;
    o["intercept"] = n.intercept;
    Json coef;
    for (const char* name : features::kFeatureNames) {
      const auto it = n.coef.find(name);
      coef[name] = it == n.coef.end() ? 0.0 : it->second;
    }
    o["coefficients"] = coef;
    double suppressed = 0.0;
    for (double s : n.suppressed) suppressed += s;
    o["suppressed_visitors"] = suppressed;
    std::array<std::size_t, 4> sev{};
    for (int s : n.severity) ++sev[static_cast<std::size_t>(s)];
    o["severity_days"] = sev;
    Json outages = Json::array();
    for (const Date d : n.outage_days) outages.push_back(format_date(d));
    o["outage_days"] = outages;
    nodes.push_back(o);
  }
  truth["nodes"] = nodes;
  write_file(ctx, dir / "truth.json", truth.dump(2) + "\n");
  return kExitOk;
}

// ------------------------------------------------------------ dispatch

void apply(config::RunConfig& cfg, const Overrides& o, const std::string& command) {
  if (o.out) cfg.output_dir = *o.out;
  if (o.seed) cfg.seed = *o.seed;
  cfg.synth.seed = cfg.seed;
  if (o.serial) cfg.serial = true;
  if (o.node) {
    if (command == "ccf") {
      cfg.ccf.node = *o.node;
    } else {
      cfg.model.node = *o.node;
    }
  }
  if (o.dow_baseline) {
    if (*o.dow_baseline == "full_sample") {
      cfg.features.dow_baseline = features::DowBaseline::full_sample;
    } else {
      cfg.features.dow_baseline = features::DowBaseline::train_only;
    }
  }
  if (o.hac_lag) cfg.model.hac_lag = o.hac_lag;
  if (o.holdout_train) cfg.model.holdout_train = o.holdout_train;
  if (o.small_sample) cfg.model.small_sample = true;
  if (o.trees) cfg.forest.params.n_trees = *o.trees;
  if (o.folds) cfg.forest.folds = *o.folds;
  if (o.repeats) cfg.forest.repeats = *o.repeats;
  if (o.prefecture) cfg.kansei.prefecture = *o.prefecture;
  if (o.spend) cfg.gap.spend_yen = o.spend;
  if (o.fx) cfg.gap.fx_rate = *o.fx;
  if (o.intent_quantile) {
    cfg.gap.intent_quantile = *o.intent_quantile;
    cfg.nudge.intent_quantile = *o.intent_quantile;
  }
  if (o.severity_min) {
    cfg.gap.severity_min = *o.severity_min;
    cfg.nudge.severity_min = *o.severity_min;
  }
  if (o.residual_source) cfg.gap.residual_source = *o.residual_source;
  if (o.max_lag) cfg.ccf.max_lag = *o.max_lag;
  if (o.recovered) cfg.rank.recovered_annual = o.recovered;
  if (o.issued) {
    const auto d = parse_date(*o.issued);
    if (!d) throw UsageError("--issued: expected YYYY-MM-DD, got '" + *o.issued + "'");
    cfg.nudge.issued = d;
  }
  if (o.surge_quantile) cfg.nudge.surge_quantile = *o.surge_quantile;
  if (o.days) cfg.synth.n_days = *o.days;
  if (o.start) {
    const auto d = parse_date(*o.start);
    if (!d) throw UsageError("--start: expected YYYY-MM-DD, got '" + *o.start + "'");
    cfg.synth.start = *d;
  }
  if (o.sigma) cfg.synth.sigma = *o.sigma;
  if (o.rho) cfg.synth.rho = *o.rho;
  if (o.nonlinear) cfg.synth.nonlinear = true;
  if (o.outage_days) cfg.synth.outage_days = *o.outage_days;
  if (o.duplicate_rows) cfg.synth.duplicate_rows = *o.duplicate_rows;
}

Json error_record(int code, const std::string& kind, const std::string& message,
                  const std::vector<std::string>& problems = {}, std::optional<std::size_t> line = std::nullopt) {
  Json e;
  e["exit_code"] = code;
  e["kind"] = kind;
  e["message"] = message;
  if (!problems.empty()) e["problems"] = problems;
  if (line) e["line"] = *line;
  return Json{{"error", e}};
}

int fail(std::ostream& err, const Json& record) {
  err << record.dump() << "\n";
  return record["error"]["exit_code"].get<int>();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tourism demand data engine: ingest, model, mine and govern visitor flows", "dhde"};
  app.set_help_flag();
  app.set_help_all_flag("-h,--help", "Print help for every subcommand and flag");
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  app.add_option("--config", o.config, std::string("JSON run configuration (default: $") + kConfigEnv + ")");
  app.add_option("--out", o.out, "Output directory (overrides output_dir)");
  app.add_option("--seed", o.seed, "Master seed");
  app.add_flag("--serial", o.serial, "Run every kernel on its serial reference path");
  app.add_option("--threads", o.threads, "OpenMP thread count (0 = runtime default)")->check(CLI::NonNegativeNumber);

  app.add_subcommand("ingest", "Harmonize camera, weather and intent streams into daily panels");
  auto* feats = app.add_subcommand("features", "Write the engineered feature matrix of every node");
  feats->add_option("--dow-baseline", o.dow_baseline, "Day-of-week baseline window")
      ->check(CLI::IsMember({"full_sample", "train_only"}));
  auto* fit = app.add_subcommand("fit", "OLS with Newey-West errors, standardized betas and hold-out");
  fit->add_option("--node", o.node, "Node to model");
  fit->add_option("--hac-lag", o.hac_lag, "Newey-West lag (default: automatic rule)");
  fit->add_option("--holdout-train", o.holdout_train, "Training rows of the chronological hold-out");
  fit->add_flag("--small-sample", o.small_sample, "Scale the HAC covariance by n/(n-k-1)");
  fit->add_option("--dow-baseline", o.dow_baseline, "Day-of-week baseline window")
      ->check(CLI::IsMember({"full_sample", "train_only"}));
  auto* diagnose = app.add_subcommand("diagnose", "ADF, VIF, Durbin-Watson, alternative specifications, ablation");
  diagnose->add_option("--node", o.node, "Node to model");
  auto* forest = app.add_subcommand("forest", "Random forest with k-fold CV and permutation importance");
  forest->add_option("--node", o.node, "Node to model");
  forest->add_option("--trees", o.trees, "Number of trees");
  forest->add_option("--folds", o.folds, "Cross-validation folds");
  forest->add_option("--repeats", o.repeats, "Permutation repeats per feature");
  auto* mine = app.add_subcommand("mine", "Lexicon prevalence, chi-square and density correlations");
  mine->add_option("--prefecture", o.prefecture, "Collection prefecture to analyse");
  auto* gap = app.add_subcommand("gap", "Flag friction days and value the opportunity gap");
  gap->add_option("--spend", o.spend, "Per-capita spend in yen");
  gap->add_option("--fx", o.fx, "Yen per US dollar");
  gap->add_option("--intent-quantile", o.intent_quantile, "Intent quantile for flagging");
  gap->add_option("--severity-min", o.severity_min, "Minimum weather severity for flagging");
  gap->add_option("--residual-source", o.residual_source, "Model supplying residuals")
      ->check(CLI::IsMember({"ols", "ldv"}));
  auto* ccf = app.add_subcommand("ccf", "Cross-correlation of search intent and visitors");
  ccf->add_option("--node", o.node, "Node to analyse");
  ccf->add_option("--max-lag", o.max_lag, "Largest lag in days");
  auto* rank = app.add_subcommand("rank", "Ranking-recovery simulation");
  rank->add_option("--recovered", o.recovered, "Recovered visitors per year (default: gap.json total)");
  auto* nudge = app.add_subcommand("nudge", "Merchant alerts and weather-resilient reroutes");
  nudge->add_option("--issued", o.issued, "Issue date YYYY-MM-DD (default: last panel date)");
  nudge->add_option("--surge-quantile", o.surge_quantile, "Visitor quantile that triggers an alert");
  nudge->add_option("--intent-quantile", o.intent_quantile, "Intent quantile that triggers a reroute");
  nudge->add_option("--severity-min", o.severity_min, "Minimum severity that triggers a reroute");
  auto* synth = app.add_subcommand("synth", "Write a synthetic fixture set and its run configuration");
  synth->add_option("--days", o.days, "Days to simulate");
  synth->add_option("--start", o.start, "First day YYYY-MM-DD");
  synth->add_option("--sigma", o.sigma, "Noise standard deviation");
  synth->add_option("--rho", o.rho, "AR(1) coefficient of the noise");
  synth->add_flag("--nonlinear", o.nonlinear, "Add threshold and interaction effects");
  synth->add_option("--outage-days", o.outage_days, "Zero-count days planted at the first node");
  synth->add_option("--duplicate-rows", o.duplicate_rows, "Repeated 5-minute rows at the first node");

  for (auto* sub : app.get_subcommands({})) {
    sub->footer("Global options (before or after the subcommand): --config, --out, --seed, --serial, --threads");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return fail(err, error_record(kExitUsage, "usage", e.what()));
  }

  std::string command;
  for (auto* sub : app.get_subcommands()) command = sub->get_name();

  try {
    Context ctx;
    ctx.out = &out;
    std::optional<std::string> cfg_path = o.config;
    if (!cfg_path) {
      if (const char* env = std::getenv(kConfigEnv); env && *env) cfg_path = env;
    }
    ctx.cfg = cfg_path ? config::load(*cfg_path) : config::RunConfig{};
    apply(ctx.cfg, o, command);
    ctx.exec = ctx.cfg.serial ? Exec::serial : Exec::parallel;
    set_max_threads(o.threads);
    if (ctx.cfg.inputs.holidays) {
      auto in = open_in(*ctx.cfg.inputs.holidays);
      ctx.holidays = features::HolidayTable::load(in);
    } else {
      ctx.holidays = features::HolidayTable::embedded();
    }

    if (command == "ingest") return cmd_ingest(ctx);
    if (command == "features") return cmd_features(ctx);
    if (command == "fit") return cmd_fit(ctx);
    if (command == "diagnose") return cmd_diagnose(ctx);
    if (command == "forest") return cmd_forest(ctx);
    if (command == "mine") return cmd_mine(ctx);
    if (command == "gap") return cmd_gap(ctx);
    if (command == "ccf") return cmd_ccf(ctx);
    if (command == "rank") return cmd_rank(ctx);
    if (command == "nudge") return cmd_nudge(ctx);
    if (command == "synth") return cmd_synth(ctx);
    return fail(err, error_record(kExitUsage, "usage", "unknown command " + command));
  } catch (const UsageError& e) {
    return fail(err, error_record(kExitUsage, "usage", e.what(), e.problems()));
  } catch (const RowError& e) {
    return fail(err, error_record(kExitData, "data", e.what(), {}, e.line()));
  } catch (const DataError& e) {
    return fail(err, error_record(kExitData, "data", e.what()));
  } catch (const NumericalError& e) {
    return fail(err, error_record(kExitNumerical, "numerical", e.what()));
  } catch (const fs::filesystem_error& e) {
    return fail(err, error_record(kExitData, "data", e.what()));
  } catch (const Error& e) {
    return fail(err, error_record(kExitData, "data", e.what()));
  }
}

}  // namespace dhde::cli

#include "dhde/report.hpp"

#include <cmath>

namespace dhde::report {
namespace {

const char* fold_mode(forest::FoldMode m) { return m == forest::FoldMode::shuffled ? "shuffled" : "chronological"; }

Json dates(const std::vector<Date>& ds) {
  Json a = Json::array();
  for (const Date d : ds) a.push_back(format_date(d));
  return a;
}

}  // namespace

Json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

Json fit(const linmodel::LinearFit& f, const std::string& model) {
  Json j;
  j["model"] = model;
  j["n"] = f.n;
  j["k"] = f.k;
  j["r2"] = number(f.r2);
  j["adj_r2"] = number(f.adj_r2);
  j["sigma"] = number(std::sqrt(f.sigma2));
  j["durbin_watson"] = f.dw ? number(*f.dw) : Json(nullptr);
  if (f.hac) j["hac"] = {{"kernel", "bartlett"}, {"lag", f.hac->lag}, {"small_sample", f.hac->small_sample}};
  Json coefs = Json::array();
  for (std::size_t i = 0; i < f.names.size(); ++i) {
    const auto e = static_cast<Eigen::Index>(i);
    Json c;
    c["name"] = f.names[i];
    c["coef"] = number(f.coef(e));
    c["se"] = number(f.se(e));
    c["t"] = number(f.t(e));
    c["p"] = number(f.p(e));
    if (f.hac) {
      c["hac_se"] = number(f.hac->se(e));
      c["hac_t"] = number(f.hac->t(e));
      c["hac_p"] = number(f.hac->p(e));
    }
    coefs.push_back(c);
  }
  j["coefficients"] = coefs;
  return j;
}

Json betas(const std::vector<linmodel::StandardizedBeta>& b) {
  Json a = Json::array();
  for (const auto& e : b) a.push_back({{"rank", e.rank}, {"name", e.name}, {"beta", number(e.beta)}});
  return a;
}

Json holdout(const linmodel::HoldoutReport& h) {
  Json j;
  j["train_n"] = h.train_n;
  j["test_n"] = h.test_n;
  j["first_test_date"] = format_date(h.test_dates.front());
  j["r2"] = number(h.r2);
  j["mae"] = number(h.mae);
  j["rmse"] = number(h.rmse);
  return j;
}

Json adf(const linmodel::AdfResult& r) {
  Json j;
  j["statistic"] = number(r.statistic);
  j["p_value"] = number(r.p_value);
  j["lag"] = r.lag;
  j["maxlag"] = r.maxlag;
  j["nobs"] = r.nobs;
  j["criterion"] = r.criterion;
  j["regression"] = r.regression == linmodel::AdfRegression::constant ? "c" : "ct";
  return j;
}

Json vif(const std::vector<linmodel::VifEntry>& v) {
  Json a = Json::array();
  for (const auto& e : v) a.push_back({{"name", e.name}, {"vif", number(e.vif)}});
  return a;
}

Json ablation(const linmodel::AblationResult& a) {
  Json j;
  j["n"] = a.n;
  j["r2_full"] = number(a.r2_full);
  j["r2_reduced"] = number(a.r2_reduced);
  j["delta_r2"] = number(a.delta_r2);
  j["dropped_constant"] = a.dropped_constant;
  return j;
}

Json seasonal(const linmodel::SeasonalSensitivity& s, const std::vector<std::string>& columns) {
  Json j;
  j["columns"] = columns;
  j["overall"] = ablation(s.overall);
  j["winter"] = ablation(s.winter);
  j["summer"] = ablation(s.summer);
  j["winter_summer_ratio"] = number(s.ratio);
  return j;
}

Json spec_summary(const linmodel::LinearFit& f, const std::string& model) {
  Json j;
  j["model"] = model;
  j["n"] = f.n;
  j["r2"] = number(f.r2);
  j["adj_r2"] = number(f.adj_r2);
  j["durbin_watson"] = f.dw ? number(*f.dw) : Json(nullptr);
  return j;
}

Json cv(const forest::CvResult& r) {
  Json j;
  j["mode"] = fold_mode(r.mode);
  Json folds = Json::array();
  for (double v : r.fold_r2) folds.push_back(number(v));
  j["fold_r2"] = folds;
  j["mean_r2"] = number(r.mean);
  j["std_r2"] = number(r.std);
  return j;
}

Json importance(const forest::ImportanceReport& r) {
  Json j;
  j["baseline_r2"] = number(r.baseline_r2);
  j["repeats"] = r.repeats;
  Json a = Json::array();
  for (std::size_t idx : r.ranking) {
    const auto& e = r.features[idx];
    a.push_back({{"rank", e.rank}, {"name", e.name}, {"mean_drop", number(e.mean)}, {"std_drop", number(e.std)}});
  }
  j["features"] = a;
  return j;
}

Json prevalence(const kansei::PrevalenceReport& r) {
  Json j;
  auto group = [](const kansei::GroupStats& g) {
    return Json{{"n", g.n}, {"hits", g.hits}, {"rate", number(g.rate)}};
  };
  j["low_satisfaction"] = group(r.low);
  j["high_satisfaction"] = group(r.high);
  j["ratio"] = number(r.ratio);
  j["chi_square"] = {{"statistic", number(r.chi2.statistic)}, {"p_value", number(r.chi2.p_value)}, {"correction", false}};
  j["chi_square_yates"] = {{"statistic", number(r.chi2_corrected.statistic)},
                           {"p_value", number(r.chi2_corrected.p_value)},
                           {"correction", true}};
  Json kw = Json::array();
  for (std::size_t i = 0; i < r.keyword_hits_low.size(); ++i) {
    kw.push_back({{"keyword", r.keyword_hits_low[i].first},
                  {"low", r.keyword_hits_low[i].second},
                  {"high", r.keyword_hits_high[i].second}});
  }
  j["keywords"] = kw;
  return j;
}

Json correlation(const kansei::Correlation& c) {
  return Json{{"r", number(c.r)}, {"p_value", number(c.p_value)}, {"n", c.n}};
}

Json gap(const economics::GapReport& g, const std::vector<economics::FrictionFlags>& flags) {
  Json j;
  j["parameters"] = {{"spend_per_capita_yen", number(g.spend_yen)}, {"fx_rate_yen_per_usd", number(g.fx_rate)}};
  if (!flags.empty()) {
    j["parameters"]["severity_threshold"] = flags.front().severity_threshold;
  }
  Json nodes = Json::array();
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const auto& n = g.nodes[i];
    Json o;
    o["node_id"] = n.node_id;
    if (i < flags.size()) o["intent_threshold"] = number(flags[i].intent_threshold);
    o["observed_days"] = n.observed_days;
    o["annualization"] = number(n.annualization);
    o["flagged_days"] = n.flagged.size();
    o["flagged_dates"] = dates(n.flagged);
    o["suppressed_visitors"] = number(n.suppressed);
    o["lost_visitors"] = number(n.lost_visitors);
    o["yen"] = n.yen;
    o["usd"] = number(n.usd);
    nodes.push_back(o);
  }
  j["nodes"] = nodes;
  j["total"] = {{"lost_visitors", number(g.lost_visitors)}, {"yen", g.yen}, {"usd", number(g.usd)}};
  return j;
}

Json provenance(const economics::ProvenanceNote& n) {
  Json j;
  j["lost_visitors"] = number(n.lost_visitors);
  j["spend_yen"] = number(n.spend_yen);
  j["computed_yen"] = n.computed_yen;
  j["printed_yen"] = n.printed_yen;
  j["divergence_yen"] = n.divergence;
  j["implied_spend_yen"] = number(n.implied_spend);
  return j;
}

Json ccf(const economics::CcfResult& r) {
  Json j;
  j["best_lag"] = r.best_lag;
  j["best_r"] = number(r.best_r);
  Json pts = Json::array();
  for (const auto& p : r.points) pts.push_back({{"lag", p.lag}, {"r", number(p.r)}, {"n", p.n}});
  j["lags"] = pts;
  return j;
}

Json ranking(const economics::RankingResult& r) {
  Json j;
  j["recovered_annual"] = number(r.recovered_annual);
  Json months = Json::array();
  for (const auto& m : r.months) {
    Json o;
    o["month"] = m.month;
    o["baseline"] = number(m.baseline);
    o["weight"] = number(m.weight);
    o["recovered"] = number(m.recovered);
    o["shortfall"] = m.shortfall ? number(*m.shortfall) : Json(nullptr);
    o["shortfall_closed_pct"] = m.closed_pct ? number(*m.closed_pct) : Json(nullptr);
    o["baseline_rank"] = m.baseline_rank;
    o["projected_rank"] = m.projected_rank;
    months.push_back(o);
  }
  j["months"] = months;
  return j;
}

Json coverage(const ingest::Coverage& c) {
  Json j;
  j["n_days"] = c.n_days;
  j["dropped_zero_days"] = c.dropped_zero_days;
  Json gaps = Json::array();
  for (const auto& g : c.gaps) {
    gaps.push_back({{"date", format_date(g.date)},
                    {"has_count", g.has_count},
                    {"has_weather", g.has_weather},
                    {"has_intent", g.has_intent}});
  }
  j["gaps"] = gaps;
  return j;
}

}  // namespace dhde::report

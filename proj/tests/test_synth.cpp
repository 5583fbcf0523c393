#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <unistd.h>

#include "dhde/error.hpp"
#include "dhde/features.hpp"
#include "dhde/kansei.hpp"
#include "dhde/linmodel.hpp"
#include "dhde/random.hpp"
#include "dhde/synth.hpp"

using namespace dhde;
using namespace dhde::synth;

namespace {

// camera, JMA and intent CSVs for one node, read back through ingest.
ingest::DailyPanel through_csv(const SynthData& data, std::size_t node) {
  const NodeTruth& t = data.nodes[node];
  std::stringstream cam, jma, intent;
  write_camera_csv(cam, t, derive_seed(data.params.seed, 99));
  write_jma_csv(jma, t);
  write_intent_csv(intent, data.intent);
  const auto c = ingest::parse_camera_csv(cam, t.node);
  const auto w = ingest::parse_jma_csv(jma, t.node.station_id);
  const auto i = ingest::parse_intent_csv(intent);
  CHECK(w.warnings == 0);
  CHECK(i.warnings == 0);
  return ingest::build_panel(c.days, w.days, i.days, t.node, c.dropped_zero_days);
}

double truth(const NodeTruth& t, const std::string& name) {
  const auto it = t.coef.find(name);
  return it == t.coef.end() ? 0.0 : it->second;
}

}  // namespace

TEST_CASE("parameter validation collects every problem") {
  DgpParams p;
  p.n_days = 10;
  p.sigma = 0.0;
  p.rho = 1.0;
  p.coef["dow_mean_count"] = 1.0;
  p.coef["bogus"] = 1.0;
  try {
    validate(p);
    FAIL("expected UsageError");
  } catch (const UsageError& e) {
    CHECK(e.problems().size() == 5);
  }
}

TEST_CASE("generation is deterministic in the seed") {
  DgpParams p;
  p.n_days = 90;
  const auto a = generate_panel(p);
  const auto b = generate_panel(p);
  CHECK(a.nodes[0].counts == b.nodes[0].counts);
  p.seed += 1;
  CHECK(generate_panel(p).nodes[0].counts != a.nodes[0].counts);
  CHECK(a.nodes.size() == 4);
  CHECK(a.dates.size() == 90);
}

TEST_CASE("near-noiseless data identifies the coefficients") {
  DgpParams p;
  p.sigma = 1e-9;
  const auto data = generate_panel(p);
  for (const auto& t : data.nodes) {
    const auto fit = linmodel::fit_ols(t.latent_features);
    CHECK(std::fabs(fit.coef(0) - t.intercept) < 1e-6 * std::max(1.0, std::fabs(t.intercept)));
    for (std::size_t j = 1; j < fit.names.size(); ++j) {
      const double b = truth(t, fit.names[j]);
      CHECK(std::fabs(fit.coef(static_cast<Eigen::Index>(j)) - b) < 1e-6 * std::max(1.0, std::fabs(b)));
    }
  }
}

TEST_CASE("AR(1) noise shows up in Durbin-Watson and is absorbed by the lagged model") {
  DgpParams p;
  // The lagged count absorbs the AR(1) term only when that term dominates
  // the residual; at low sigma the omitted lagged regressors take over.
  p.rho = 0.5;
  p.sigma = 300.0;
  p.n_days = 420;
  const auto data = generate_panel(p);
  const auto& fm = data.nodes[0].latent_features;
  const auto base = linmodel::fit_ols(fm);
  const auto fd = linmodel::fit_first_difference(fm);
  const auto ldv = linmodel::fit_ldv(fm);
  CHECK(*base.dw == doctest::Approx(1.0).epsilon(0.2));
  CHECK(*base.dw < *fd.dw);
  CHECK(std::fabs(*ldv.dw - 2.0) < 0.2);
}

TEST_CASE("winter-only suppression makes winter weather matter more") {
  DgpParams p;
  p.suppression = {0.0, 0.1, 0.35, 0.6};
  p.n_days = 730;
  const auto data = generate_panel(p);
  const auto& fm = data.nodes[0].latent_features;
  const auto s = linmodel::seasonal_sensitivity(fm, features::weather_feature_columns());
  CHECK(s.winter.delta_r2 > s.summer.delta_r2);
  double lost = 0.0;
  for (double v : data.nodes[0].suppressed) lost += v;
  CHECK(lost > 0.0);
  for (std::size_t i = 0; i < data.dates.size(); ++i) {
    const unsigned m = month_of(data.dates[i]);
    if (m != 12 && m != 1 && m != 2) CHECK(data.nodes[0].suppressed[i] == 0.0);
  }
}

TEST_CASE("survey corpus plants hits at exact rates") {
  const auto lex = kansei::Lexicon::embedded();
  SurveyCorpusParams sp;
  const auto corpus = generate_survey_corpus(sp, lex, 7);
  CHECK(corpus.size() == 1066 + 500 + 10000);
  const auto r = kansei::prevalence_analysis(corpus, lex);
  CHECK(r.low.n == 1066);
  CHECK(r.low.hits == 65);
  CHECK(r.high.hits == 50);
  CHECK(r.ratio == doctest::Approx(12.195).epsilon(1e-3));

  sp.rate_low = sp.rate_mid = sp.rate_high = 0.0;
  const auto none = kansei::prevalence_analysis(generate_survey_corpus(sp, lex, 8), lex);
  CHECK(none.low.hits == 0);
  CHECK(none.high.hits == 0);

  sp.rate_low = 1.0;
  CHECK(kansei::prevalence_analysis(generate_survey_corpus(sp, lex, 9), lex).low.rate == 1.0);
  sp.rate_low = 1.5;
  CHECK_THROWS_AS(generate_survey_corpus(sp, lex, 9), UsageError);
}

TEST_CASE("the CSV pipeline recovers the planted coefficients") {
  std::size_t within = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    DgpParams p;
    p.seed = seed;
    const auto data = generate_panel(p);
    const auto panel = through_csv(data, 0);
    CHECK(panel.rows.size() == p.n_days);
    const auto fm = features::build_features(panel, features::HolidayTable::embedded());
    const auto fit = linmodel::fit_ols(fm);
    for (std::size_t j = 1; j < fit.names.size(); ++j) {
      const auto k = static_cast<Eigen::Index>(j);
      within += std::fabs(fit.coef(k) - truth(data.nodes[0], fit.names[j])) <= 3.0 * fit.se(k) ? 1 : 0;
      ++total;
    }
  }
  MESSAGE("coefficients within 3 SE: " << within << " / " << total);
  CHECK(static_cast<double>(within) >= 0.95 * static_cast<double>(total));
}

TEST_CASE("written fixtures read back without warnings") {
  DgpParams p;
  p.n_days = 120;
  p.outage_days = 3;
  p.duplicate_rows = 10;
  const auto data = generate_panel(p);
  const auto dir = std::filesystem::temp_directory_path() / ("dhde_fixture_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  const auto files = write_fixtures(data, dir);
  const auto nodes = ingest::default_nodes();
  for (const auto& n : nodes) {
    std::ifstream cam(files.camera.at(n.node_id));
    const auto c = ingest::parse_camera_csv(cam, n);
    std::ifstream jma(files.jma.at(n.station_id));
    const auto w = ingest::parse_jma_csv(jma, n.station_id);
    CHECK(w.warnings == 0);
    if (n.node_id == "A") {
      CHECK(c.duplicate_rows == 10);
      CHECK(c.dropped_zero_days == 3);
    }
  }
  std::ifstream intent(files.intent);
  CHECK(ingest::parse_intent_csv(intent).warnings == 0);
  std::ifstream merged(files.survey_merged);
  CHECK(ingest::parse_survey_csv(merged, ingest::SurveyDataset::merged_hokuriku).responses.size() > 11000);
  std::ifstream raw(files.survey_raw);
  CHECK_FALSE(ingest::parse_survey_csv(raw, ingest::SurveyDataset::raw_fukui).responses.empty());
  std::filesystem::remove_all(dir);
}

TEST_CASE("nonlinear regression fixture") {
  const auto d = nonlinear_regression(500, 6, 0.0, 3);
  CHECK(d.x.rows() == 500);
  CHECK(d.names.size() == 6);
  CHECK(d.dominant == 0);
  for (Eigen::Index i = 0; i < 500; ++i) {
    const double expect = 12 * d.x(i, 0) + 3 * std::sin(M_PI * d.x(i, 1) * d.x(i, 2)) + 4 * std::pow(d.x(i, 3) - 0.5, 2);
    CHECK(d.y(i) == doctest::Approx(expect).epsilon(1e-12));
  }
}

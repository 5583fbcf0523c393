#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "dhde/economics.hpp"
#include "dhde/error.hpp"
#include "dhde/random.hpp"
#include "dhde/stats.hpp"
#include "oracle.hpp"

using namespace dhde;
using namespace dhde::economics;

namespace {

ingest::SurveyResponse band(std::string label) {
  ingest::SurveyResponse r;
  r.spend_band = std::move(label);
  return r;
}

features::FeatureMatrix gap_matrix(const std::vector<double>& intent, const std::vector<double>& severity,
                                   const std::vector<double>& count) {
  features::FeatureMatrix fm;
  fm.names = {"directions", "weather_severity"};
  const auto n = static_cast<Eigen::Index>(intent.size());
  fm.x.resize(n, 2);
  fm.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    fm.x(i, 0) = intent[u];
    fm.x(i, 1) = severity[u];
    fm.y(i) = count[u];
    fm.dates.push_back(make_date(2025, 1, 1) + std::chrono::days{static_cast<int>(i)});
    fm.prev_count.emplace_back();
  }
  return fm;
}

std::string ranking_csv(const std::vector<double>& baseline) {
  std::ostringstream s;
  s << "month,baseline_visitors,tier_38,tier_39,tier_40\n";
  for (std::size_t m = 0; m < 12; ++m) {
    s << m + 1 << "," << baseline[m] << "," << 3000 + 100 * m << "," << 2000 + 100 * m << "," << 1000 + 100 * m << "\n";
  }
  return s.str();
}

std::vector<double> random_series(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (auto& e : v) e = rng.normal();
  return v;
}

}  // namespace

TEST_CASE("mean spend over mapped bands") {
  const SpendBandTable t({{"1万円未満", 10000}, {"2万円", 20000}});
  const auto s = mean_spend({band("1万円未満"), band("2万円"), band(""), band("謎")}, t);
  CHECK(s.mean_yen == 15000.0);
  CHECK(s.used == 2);
  CHECK(s.missing == 1);
  CHECK(s.unmapped == 1);
  CHECK(t.midpoint("　２万円 ") == 20000.0);
  CHECK_THROWS_AS(mean_spend({band(""), band("")}, t), DataError);
  CHECK_THROWS(SpendBandTable({{"a", 1}, {"a", 2}}));
  CHECK_THROWS(SpendBandTable({{"a", -1}}));
  std::istringstream in("label,midpoint_yen\n5千円,5000\n");
  CHECK(SpendBandTable::load_csv(in).midpoint("5千円") == 5000.0);
}

TEST_CASE("friction flags match an enumeration of the three conditions") {
  // Rows 12..15 carry high intent; 12, 13 and 15 also meet severity and
  // residual, 14 has mild weather, and row 3 is severe but low-intent.
  std::vector<double> intent, sev, count;
  for (int i = 0; i < 12; ++i) {
    intent.push_back(10.0 * (i + 1));
    sev.push_back(i == 3 ? 3 : 0);
    count.push_back(50);
  }
  for (int i = 0; i < 4; ++i) intent.push_back(1000.0 + i);
  sev.insert(sev.end(), {2, 3, 1, 3});
  count.insert(count.end(), {40, 20, 10, 70});
  const auto fm = gap_matrix(intent, sev, count);
  Eigen::VectorXd pred = Eigen::VectorXd::Constant(16, 80.0);
  const auto f = flag_friction_days(fm, pred);
  std::vector<std::size_t> expect;
  const double q = stats::quantile(intent, 0.75);
  for (std::size_t i = 0; i < 16; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    if (fm.x(r, 0) >= q && fm.x(r, 1) >= 2 && fm.y(r) < pred(r)) expect.push_back(i);
  }
  CHECK(f.rows == expect);
  CHECK(f.rows == std::vector<std::size_t>{12, 13, 15});
  CHECK(f.residuals == std::vector<double>{-40, -60, -10});

  FrictionThresholds loose;
  loose.intent_quantile = 0.0;
  CHECK(flag_friction_days(fm, pred, loose).rows == std::vector<std::size_t>{3, 12, 13, 15});
  loose.severity_min = 1;
  CHECK(flag_friction_days(fm, pred, loose).rows.size() == 5);

  const auto calm = gap_matrix({1, 2, 3, 4}, {0, 0, 0, 0}, {1, 1, 1, 1});
  CHECK(flag_friction_days(calm, Eigen::VectorXd::Constant(4, 10.0)).rows.empty());
  CHECK_THROWS_AS(flag_friction_days(gap_matrix({}, {}, {}), Eigen::VectorXd()), DataError);
}

TEST_CASE("raising either threshold never adds flagged days") {
  Rng rng(41);
  std::vector<double> intent(300), sev(300), count(300);
  for (std::size_t i = 0; i < 300; ++i) {
    intent[i] = rng.uniform(0, 1000);
    sev[i] = static_cast<double>(rng.below(4));
    count[i] = rng.uniform(0, 100);
  }
  const auto fm = gap_matrix(intent, sev, count);
  Eigen::VectorXd pred(300);
  for (auto& v : pred) v = rng.uniform(0, 100);
  for (int trial = 0; trial < 200; ++trial) {
    FrictionThresholds a{rng.uniform(), static_cast<int>(rng.below(4))};
    FrictionThresholds b{std::min(1.0, a.intent_quantile + rng.uniform(0, 0.3)), a.severity_min + static_cast<int>(rng.below(2))};
    const auto fa = flag_friction_days(fm, pred, a).rows;
    const auto fb = flag_friction_days(fm, pred, b).rows;
    REQUIRE(std::includes(fa.begin(), fa.end(), fb.begin(), fb.end()));
  }
}

TEST_CASE("opportunity gap arithmetic") {
  NodeGapInput n{"A", {make_date(2025, 1, 5), make_date(2025, 2, 5)}, {-100, -50}, 365};
  const auto g = opportunity_gap({n}, 13811.0);
  CHECK(g.lost_visitors == 150.0);
  CHECK(g.yen == 2071650);
  CHECK(g.usd == doctest::Approx(2071650.0 / 157.0));
  CHECK(g.nodes[0].annualization == 1.0);

  const auto zero = opportunity_gap({NodeGapInput{"A", {}, {}, 365}}, 13811.0);
  CHECK(zero.lost_visitors == 0.0);
  CHECK(zero.yen == 0);

  NodeGapInput half{"B", {make_date(2025, 1, 5)}, {-73}, 73};
  const auto h = opportunity_gap({half}, 100.0, 100.0);
  CHECK(h.nodes[0].annualization == 5.0);
  CHECK(h.lost_visitors == 365.0);
  CHECK(h.yen == 36500);
  CHECK(h.usd == 365.0);

  const auto both = opportunity_gap({n, half}, 13811.0, 157.0, Exec::serial);
  CHECK(both.lost_visitors == 515.0);
  CHECK(both.nodes.size() == 2);
  CHECK(opportunity_gap({n, half}, 13811.0, 157.0, Exec::parallel).yen == both.yen);
  CHECK_THROWS_AS(opportunity_gap({n}, 0.0), UsageError);
  CHECK_THROWS_AS(opportunity_gap({n}, 1.0, -1.0), UsageError);
}

TEST_CASE("yen value is exact and linear") {
  CHECK(yen_value(865917, 13811) == 11959179687LL);
  const auto p = provenance_note(865917, 13811, 11959183083LL);
  CHECK(p.computed_yen == 11959179687LL);
  CHECK(p.divergence == 3396);
  CHECK(p.implied_spend == doctest::Approx(13811.0039).epsilon(1e-8));
  Rng rng(42);
  for (int i = 0; i < 500; ++i) {
    const auto lost = static_cast<double>(rng.below(1000000));
    const auto spend = static_cast<double>(1 + rng.below(50000));
    const auto k = static_cast<double>(1 + rng.below(20));
    CHECK(yen_value(k * lost, spend) == static_cast<std::int64_t>(k) * yen_value(lost, spend));
    CHECK(yen_value(lost, k * spend) == static_cast<std::int64_t>(k) * yen_value(lost, spend));
  }
}

TEST_CASE("cross-correlation recovers a planted lag") {
  Rng rng(43);
  const auto x = random_series(400, rng);
  std::vector<double> y(400);
  for (std::size_t t = 0; t < 400; ++t) y[t] = (t >= 3 ? x[t - 3] : 0.0) + 0.05 * rng.normal();
  const auto c = ccf(x, y, 7);
  CHECK(c.best_lag == 3);
  CHECK(c.best_r > 0.95);
  CHECK(c.points.size() == 15);
  CHECK(c.points.front().lag == -7);

  const auto point3 = c.points[10];
  std::vector<double> xs(x.begin(), x.end() - 3), ys(y.begin() + 3, y.end());
  CHECK(point3.lag == 3);
  CHECK(point3.n == 397);
  CHECK(oracle::rel_err(point3.r, oracle::pearson(xs, ys)) < 1e-10);

  const auto rev = ccf(y, x, 7);
  CHECK(rev.best_lag == -3);
  CHECK(ccf(x, x, 0).points[0].r == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(ccf(std::vector<double>(50, 1.0), y, 3), NumericalError);
  CHECK_THROWS(ccf(std::vector<double>(12, 1.0), std::vector<double>(12, 1.0), 5));
}

TEST_CASE("cross-correlation is symmetric under argument swap") {
  Rng rng(44);
  for (int inst = 0; inst < 10; ++inst) {
    const auto x = random_series(200, rng), y = random_series(200, rng);
    const auto a = ccf(x, y, 10, Exec::serial);
    const auto b = ccf(y, x, 10, Exec::parallel);
    for (std::size_t i = 0; i < a.points.size(); ++i) {
      CHECK(std::fabs(a.points[i].r - b.points[a.points.size() - 1 - i].r) < 1e-12);
    }
    CHECK(ccf(x, y, 10, Exec::parallel).points[5].r == a.points[5].r);
  }
}

TEST_CASE("independent series have small cross-correlation") {
  int ok = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    Rng rng(seed);
    const auto c = ccf(random_series(1000, rng), random_series(1000, rng), 5);
    double m = 0.0;
    for (const auto& p : c.points) m = std::max(m, std::fabs(p.r));
    ok += m < 0.1 ? 1 : 0;
  }
  CHECK(ok >= 38);
}

TEST_CASE("calendar-aligned cross-correlation skips missing days") {
  Rng rng(45);
  std::vector<Date> dx, dy;
  std::vector<double> x, y;
  for (int i = 0; i < 120; ++i) {
    const Date d = make_date(2025, 1, 1) + std::chrono::days{i};
    const double v = rng.normal();
    if (i % 17 != 5) {
      dx.push_back(d);
      x.push_back(v);
    }
    if (i + 2 < 120 && i % 13 != 4) {
      dy.push_back(d + std::chrono::days{2});
      y.push_back(v + 0.01 * rng.normal());
    }
  }
  const auto c = ccf(dx, x, dy, y, 5);
  CHECK(c.best_lag == 2);
  CHECK(c.best_r > 0.99);
}

TEST_CASE("ranking simulation") {
  std::vector<double> base(12);
  for (std::size_t m = 0; m < 12; ++m) base[m] = 1500 + 100 * static_cast<double>(m);
  std::istringstream in(ranking_csv(base));
  const auto b = load_ranking_csv(in);
  REQUIRE(b.months.size() == 12);

  const auto same = ranking_simulation(b, 0.0);
  for (const auto& m : same.months) {
    CHECK(m.projected_rank == m.baseline_rank);
    CHECK(m.baseline_rank == 40);
    CHECK(*m.shortfall == 500.0);
  }

  const auto full = ranking_simulation(b, 12 * 500.0);
  double sum = 0.0;
  for (const auto& m : full.months) {
    CHECK(*m.closed_pct == doctest::Approx(100.0));
    CHECK(m.projected_rank == 39);
    sum += m.recovered;
  }
  CHECK(sum == doctest::Approx(6000.0).epsilon(1e-6));

  std::vector<double> w(12, 0.0);
  w[0] = 0.5;
  w[6] = 0.5;
  const auto skew = ranking_simulation(b, 2400.0, w);
  CHECK(skew.months[0].recovered == 1200.0);
  CHECK(*skew.months[0].closed_pct == doctest::Approx(240.0));
  CHECK(skew.months[0].projected_rank == 39);
  CHECK(skew.months[6].projected_rank == 39);
  CHECK(ranking_simulation(b, 3000.0, w).months[6].projected_rank == 38);
  CHECK(skew.months[1].projected_rank == 40);

  w[0] = 0.6;
  CHECK_THROWS_AS(ranking_simulation(b, 1.0, w), UsageError);

  std::istringstream eleven("month,baseline_visitors,tier_1\n1,5,10\n");
  CHECK_THROWS_AS(load_ranking_csv(eleven), DataError);
  std::istringstream bad("month,baseline_visitors,tier_1,tier_2\n1,5,10,20\n");
  CHECK_THROWS(load_ranking_csv(bad));
}

TEST_CASE("rank of a total") {
  RankingMonth m{1, 0.0, {{10, 500}, {20, 100}}};
  CHECK(rank_of(m, 600, 47) == 10);
  CHECK(rank_of(m, 500, 47) == 10);
  CHECK(rank_of(m, 499, 47) == 20);
  CHECK(rank_of(m, 50, 47) == 47);
}

#include <doctest.h>

#include <map>
#include <sstream>
#include <vector>

#include "dhde/error.hpp"
#include "dhde/features.hpp"
#include "dhde/random.hpp"

using namespace dhde;
using namespace dhde::features;

namespace {

const HolidayTable& holidays() {
  static const HolidayTable h = HolidayTable::embedded();
  return h;
}

ingest::DailyPanel make_panel(Date start, const std::vector<std::int64_t>& intent, std::uint64_t seed = 1) {
  Rng rng(seed);
  ingest::DailyPanel p;
  p.node_id = "A";
  for (std::size_t i = 0; i < intent.size(); ++i) {
    ingest::PanelRow r;
    r.date = start + std::chrono::days{static_cast<int>(i)};
    r.count = 500 + static_cast<std::int64_t>(rng.below(500));
    r.precip = rng.uniform() < 0.5 ? 0.0 : rng.uniform(0.0, 30.0);
    r.temp = rng.uniform(-5.0, 30.0);
    r.sun = rng.uniform(0.0, 1.0);
    r.wind = rng.uniform(0.0, 12.0);
    r.directions = intent[i];
    p.rows.push_back(r);
  }
  return p;
}

double at(const FeatureMatrix& fm, std::size_t row, const char* name) {
  return fm.x(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(fm.col(name)));
}

}  // namespace

TEST_CASE("weekend or holiday flag") {
  CHECK(is_weekend_or_holiday(make_date(2025, 1, 1), holidays()) == 1);
  CHECK(is_weekend_or_holiday(make_date(2025, 1, 11), holidays()) == 1);
  CHECK(is_weekend_or_holiday(make_date(2025, 1, 8), holidays()) == 0);
}

TEST_CASE("severity table cells") {
  CHECK(weather_severity(0, 5) == 0);
  CHECK(weather_severity(5, 3) == 1);
  CHECK(weather_severity(15, 2) == 2);
  CHECK(weather_severity(12, 9) == 3);
  CHECK(weather_severity(0, 9) == 1);
  CHECK(weather_severity(10, 8) == 1);
  CHECK(weather_severity(10.0001, 8.0001) == 3);
  CHECK_THROWS_AS(weather_severity(-1, 0), DataError);
  CHECK_THROWS_AS(weather_severity(0, -0.1), DataError);
}

TEST_CASE("snow escalation is opt-in") {
  CHECK(weather_severity(0, 0, 25.0) == 0);
  SeverityPolicy p;
  p.snow_escalation = true;
  CHECK(weather_severity(0, 0, 25.0, p) == 1);
  CHECK(weather_severity(0, 0, 5.0, p) == 0);
  CHECK(weather_severity(12, 9, 25.0, p) == 3);
}

TEST_CASE("severity is monotone in precipitation and wind") {
  Rng rng(20250101);
  for (int i = 0; i < 10000; ++i) {
    const double p = rng.uniform() < 0.2 ? 0.0 : rng.uniform(0.0, 40.0);
    const double w = rng.uniform(0.0, 20.0);
    const double dp = rng.uniform(0.0, 15.0), dw = rng.uniform(0.0, 8.0);
    const int s = weather_severity(p, w);
    REQUIRE(s >= 0);
    REQUIRE(s <= 3);
    REQUIRE(weather_severity(p + dp, w) >= s);
    REQUIRE(weather_severity(p, w + dw) >= s);
  }
}

TEST_CASE("constant intent gives constant lags and roll") {
  const auto fm = build_features(make_panel(make_date(2025, 1, 6), std::vector<std::int64_t>(20, 77)), holidays());
  REQUIRE(fm.rows() == 14);
  for (std::size_t r = 0; r < fm.rows(); ++r) {
    for (const char* c : {"directions", "directions_lag1", "directions_lag2", "directions_lag3", "directions_roll7"}) {
      CHECK(at(fm, r, c) == 77.0);
    }
  }
}

TEST_CASE("roll7 is the mean of the current and six previous days") {
  const auto fm = build_features(make_panel(make_date(2025, 1, 6), {1, 2, 3, 4, 5, 6, 7, 8}), holidays());
  REQUIRE(fm.rows() == 2);
  CHECK(at(fm, 0, "directions_roll7") == 4.0);
  CHECK(at(fm, 1, "directions_roll7") == 5.0);
  CHECK(at(fm, 0, "directions_lag3") == 4.0);
}

TEST_CASE("interaction terms vanish on weekdays") {
  auto panel = make_panel(make_date(2025, 1, 6), std::vector<std::int64_t>(14, 100));
  for (auto& r : panel.rows) {
    r.precip = 12.0;
    r.wind = 1.0;
  }
  const auto fm = build_features(panel, holidays());
  bool saw_weekend = false, saw_weekday = false;
  for (std::size_t r = 0; r < fm.rows(); ++r) {
    CHECK(at(fm, r, "weather_severity") == 2.0);
    if (is_weekend(fm.dates[r])) {
      saw_weekend = true;
      CHECK(at(fm, r, "weekend_x_intent") == 100.0);
      CHECK(at(fm, r, "weekend_x_severity") == 2.0);
    } else if (!holidays().is_holiday(fm.dates[r])) {
      saw_weekday = true;
      CHECK(at(fm, r, "weekend_x_intent") == 0.0);
      CHECK(at(fm, r, "weekend_x_severity") == 0.0);
    }
  }
  CHECK(saw_weekend);
  CHECK(saw_weekday);
}

TEST_CASE("lags follow calendar days and gaps mask rows") {
  std::vector<std::int64_t> intent(40);
  for (std::size_t i = 0; i < intent.size(); ++i) intent[i] = static_cast<std::int64_t>(10 * i + 3);
  auto panel = make_panel(make_date(2025, 3, 1), intent);
  const Date missing = panel.rows[20].date;
  panel.rows.erase(panel.rows.begin() + 20);
  const auto fm = build_features(panel, holidays());

  std::map<Date, std::int64_t> by_date;
  for (const auto& r : panel.rows) by_date[r.date] = r.directions;
  for (std::size_t r = 0; r < fm.rows(); ++r) {
    const Date d = fm.dates[r];
    CHECK((d - missing).count() != 0);
    const auto gap = (d - missing).count();
    CHECK_FALSE((gap >= 1 && gap <= 6));
    for (int k = 1; k <= 3; ++k) {
      CHECK(at(fm, r, ("directions_lag" + std::to_string(k)).c_str()) ==
            static_cast<double>(by_date.at(d - std::chrono::days{k})));
    }
    CHECK(fm.prev_count[r].has_value());
  }
  CHECK(fm.rows() == 40 - 6 - 1 - 6);
  std::size_t retained = 0;
  for (bool b : fm.retained) retained += b ? 1 : 0;
  CHECK(retained == fm.rows());
}

TEST_CASE("shifting the panel in time leaves non-calendar features unchanged") {
  std::vector<std::int64_t> intent(30);
  for (std::size_t i = 0; i < intent.size(); ++i) intent[i] = static_cast<std::int64_t>((i * 37) % 101);
  const auto a = build_features(make_panel(make_date(2025, 3, 3), intent), holidays());
  const auto b = build_features(make_panel(make_date(2025, 6, 11), intent), holidays());
  REQUIRE(a.rows() == b.rows());
  for (const char* c : {"directions", "directions_lag1", "directions_lag2", "directions_lag3", "directions_roll7",
                        "precip", "temp", "sun", "wind", "precip_lag1", "weather_severity"}) {
    for (std::size_t r = 0; r < a.rows(); ++r) CHECK(at(a, r, c) == at(b, r, c));
  }
}

TEST_CASE("train-only weekday baseline ignores the hold-out rows") {
  auto panel = make_panel(make_date(2025, 3, 3), std::vector<std::int64_t>(60, 5));
  for (std::size_t i = 30; i < panel.rows.size(); ++i) panel.rows[i].count = 100000;
  FeatureOptions opt;
  opt.dow_baseline = DowBaseline::train_only;
  opt.train_rows = 20;
  const auto fm = build_features(panel, holidays(), opt);
  const auto full = build_features(panel, holidays());
  for (std::size_t r = 0; r < fm.rows(); ++r) {
    CHECK(at(fm, r, "dow_mean_count") < 1000.0);
    CHECK(at(full, r, "dow_mean_count") > 1000.0);
  }
  opt.train_rows = 1000;
  CHECK_THROWS_AS(build_features(panel, holidays(), opt), UsageError);
}

TEST_CASE("short panels and column selection") {
  CHECK_THROWS_AS(build_features(make_panel(make_date(2025, 3, 3), std::vector<std::int64_t>(7, 1)), holidays()),
                  DataError);
  const auto fm = build_features(make_panel(make_date(2025, 3, 3), std::vector<std::int64_t>(20, 1)), holidays());
  CHECK(fm.cols() == 16);
  const auto reduced = fm.drop_columns(weather_feature_columns());
  CHECK(reduced.cols() == 9);
  CHECK_FALSE(reduced.has("precip"));
  CHECK(reduced.x.col(0) == fm.x.col(0));
  CHECK_THROWS_AS(fm.drop_columns({"nope"}), UsageError);
  const auto sub = fm.select_rows({0, 2});
  CHECK(sub.rows() == 2);
  CHECK(sub.dates[1] == fm.dates[2]);

  std::ostringstream out;
  write_features_csv(out, fm);
  const std::string header = out.str().substr(0, out.str().find('\n'));
  CHECK(header.rfind("date,directions,directions_lag1", 0) == 0);
  CHECK(header.substr(header.size() - 12) == ",month,count");
}

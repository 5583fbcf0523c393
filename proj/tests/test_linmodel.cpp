#include <doctest.h>

#include <cmath>
#include <vector>

#include "dhde/error.hpp"
#include "dhde/linmodel.hpp"
#include "dhde/random.hpp"
#include "oracle.hpp"

using namespace dhde;
using namespace dhde::linmodel;

namespace {

std::vector<std::string> names_for(std::size_t k) {
  std::vector<std::string> n;
  for (std::size_t j = 0; j < k; ++j) n.push_back("x" + std::to_string(j));
  return n;
}

Eigen::VectorXd linear_response(const Eigen::MatrixXd& x, const std::vector<double>& b, double noise, Rng& rng) {
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double v = b[0];
    for (Eigen::Index j = 0; j < x.cols(); ++j) v += b[static_cast<std::size_t>(j) + 1] * x(i, j);
    y(i) = v + noise * rng.normal();
  }
  return y;
}

// Feature matrix over consecutive days with the given target; prev_count is
// the previous row's target.
features::FeatureMatrix daily_matrix(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Date start) {
  features::FeatureMatrix fm;
  fm.names = names_for(static_cast<std::size_t>(x.cols()));
  fm.x = x;
  fm.y = y;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    fm.dates.push_back(start + std::chrono::days{static_cast<int>(i)});
    fm.prev_count.push_back(i == 0 ? std::nullopt : std::optional<double>(y(i - 1)));
  }
  return fm;
}

}  // namespace

TEST_CASE("OLS matches the normal equations on random instances") {
  Rng rng(42);
  for (int inst = 0; inst < 50; ++inst) {
    const std::size_t k = 1 + rng.below(6);
    const std::size_t n = k + 5 + rng.below(45 - k);
    const Eigen::MatrixXd x = oracle::random_matrix(n, k, rng);
    std::vector<double> b(k + 1);
    for (auto& v : b) v = (rng.uniform() < 0.5 ? -1 : 1) * rng.uniform(0.5, 5.0);
    const Eigen::VectorXd y = linear_response(x, b, 1.0, rng);
    const auto fit = fit_ols(x, y, names_for(k));
    const auto ref = oracle::normal_equations(x, y);
    for (std::size_t j = 0; j <= k; ++j) CHECK(oracle::rel_err(fit.coef(static_cast<Eigen::Index>(j)), ref[j]) < 1e-8);
    CHECK(fit.names.front() == "const");
    CHECK(fit.n == n);
    CHECK(fit.k == k);
  }
}

TEST_CASE("exact linear data is fit exactly") {
  Eigen::MatrixXd x(6, 1);
  x << 1, 2, 3, 4, 5, 6;
  const Eigen::VectorXd y = (2.0 * x.col(0)).array() + 3.0;
  const auto fit = fit_ols(x, y, {"x"});
  CHECK(fit.coef(0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.coef(1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.r2 == doctest::Approx(1.0));
  CHECK(fit.residuals.cwiseAbs().maxCoeff() < 1e-10);
  CHECK_FALSE(fit.dw.has_value());
}

TEST_CASE("independent noise has near-zero R^2") {
  int ok = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    const Eigen::MatrixXd x = oracle::random_matrix(1000, 3, rng);
    Eigen::VectorXd y(1000);
    for (auto& v : y) v = rng.normal();
    ok += std::fabs(fit_ols(x, y, names_for(3)).r2) < 0.02 ? 1 : 0;
  }
  CHECK(ok >= 19);
}

TEST_CASE("rank deficiency names the dependent columns") {
  Rng rng(3);
  Eigen::MatrixXd x = oracle::random_matrix(30, 3, rng);
  x.col(2) = 2.0 * x.col(0) - x.col(1);
  Eigen::VectorXd y(30);
  for (auto& v : y) v = rng.normal();
  try {
    fit_ols(x, y, {"a", "b", "c"});
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    const std::string msg = e.what();
    CHECK(msg.find('c') != std::string::npos);
  }
  Eigen::MatrixXd constant = oracle::random_matrix(30, 2, rng);
  constant.col(1).setConstant(4.0);
  CHECK_THROWS_AS(fit_ols(constant, y, {"a", "b"}), NumericalError);
}

TEST_CASE("predictions are invariant under affine rescaling of features") {
  Rng rng(9);
  const Eigen::MatrixXd x = oracle::random_matrix(40, 3, rng);
  const Eigen::VectorXd y = linear_response(x, {1, 2, -1, 0.5}, 0.3, rng);
  Eigen::MatrixXd z = x;
  z.col(0) = 1000.0 * x.col(0).array() + 7.0;
  z.col(2) = -0.001 * x.col(2).array() - 3.0;
  const auto a = fit_ols(x, y, names_for(3));
  const auto b = fit_ols(z, y, names_for(3));
  CHECK((a.fitted - b.fitted).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((a.predict(x) - b.predict(z)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("standardized betas") {
  Rng rng(5);
  Eigen::MatrixXd x = oracle::random_matrix(200, 3, rng);
  const Eigen::VectorXd y = linear_response(x, {0, 3, -1, 0.2}, 1.0, rng);
  const auto fit = fit_ols(x, y, names_for(3));
  const auto betas = standardized_betas(fit, x, y);
  REQUIRE(betas.size() == 3);
  CHECK(betas[0].name == "x0");
  CHECK(betas[0].rank == 1);
  for (std::size_t i = 1; i < betas.size(); ++i) CHECK(std::fabs(betas[i - 1].beta) >= std::fabs(betas[i].beta));

  Eigen::MatrixXd scaled = x;
  scaled.col(1) *= 10.0;
  const auto fit2 = fit_ols(scaled, y, names_for(3));
  const auto betas2 = standardized_betas(fit2, scaled, y);
  CHECK(fit2.coef(2) == doctest::Approx(fit.coef(2) / 10.0).epsilon(1e-10));
  for (std::size_t i = 0; i < 3; ++i) CHECK(betas2[i].beta == doctest::Approx(betas[i].beta).epsilon(1e-10));

  Eigen::MatrixXd xs = x;
  for (Eigen::Index j = 0; j < xs.cols(); ++j) {
    const double m = xs.col(j).mean();
    const double sd = std::sqrt((xs.col(j).array() - m).square().mean());
    xs.col(j) = (xs.col(j).array() - m) / sd;
  }
  const double ym = y.mean(), ysd = std::sqrt((y.array() - ym).square().mean());
  const Eigen::VectorXd ys = (y.array() - ym) / ysd;
  const auto fs = fit_ols(xs, ys, names_for(3));
  for (const auto& b : standardized_betas(fs, xs, ys)) {
    CHECK(b.beta == doctest::Approx(fs.coef(static_cast<Eigen::Index>(fs.index(b.name)))).epsilon(1e-12));
  }
}

TEST_CASE("standardized betas recover known effects") {
  int ok = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    Eigen::MatrixXd x(2000, 3);
    for (auto& v : x.reshaped()) v = rng.normal();
    const Eigen::VectorXd y = linear_response(x, {0, 0.5, 0.3, 0.1}, std::sqrt(1 - 0.35), rng);
    const auto fit = fit_ols(x, y, names_for(3));
    bool all = true;
    for (int j = 0; j < 3; ++j) all = all && std::fabs(fit.coef(j + 1) - std::vector<double>{0.5, 0.3, 0.1}[j]) < 3 * fit.se(j + 1);
    ok += all ? 1 : 0;
  }
  CHECK(ok >= 19);
}

TEST_CASE("Cohen's f^2") {
  CHECK(cohens_f2(0.8096) == doctest::Approx(4.2521).epsilon(1e-4));
  CHECK(std::fabs(cohens_f2(0.8096) - 4.252) < 0.001);
  CHECK(cohens_f2(0.0) == 0.0);
  CHECK(cohens_f2(0.5) == 1.0);
  CHECK_THROWS_AS(cohens_f2(1.0), NumericalError);
  CHECK_THROWS_AS(cohens_f2(-0.1), NumericalError);
}

TEST_CASE("Durbin-Watson") {
  std::vector<double> alt(1000);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 ? -1.0 : 1.0;
  CHECK(durbin_watson(alt) > 3.8);
  CHECK(durbin_watson(alt) == doctest::Approx(4.0 * 999.0 / 1000.0));
  CHECK(durbin_watson(std::vector<double>{1.0, 1.0}) == 0.0);
  CHECK_THROWS_AS(durbin_watson(std::vector<double>{1.0}), NumericalError);
  CHECK_THROWS_AS(durbin_watson(std::vector<double>{0.0, 0.0, 0.0}), NumericalError);

  for (double rho : {0.0, 0.5}) {
    int ok = 0;
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
      Rng rng(seed);
      ok += std::fabs(durbin_watson(oracle::ar1(1000, rho, rng)) - 2.0 * (1.0 - rho)) < 0.15 ? 1 : 0;
    }
    CHECK(ok >= 38);
  }
}

TEST_CASE("Newey-West equals the double-loop sandwich") {
  Rng rng(77);
  for (int inst = 0; inst < 20; ++inst) {
    const std::size_t k = 1 + rng.below(4);
    const std::size_t n = 30 + rng.below(50);
    const Eigen::MatrixXd x = oracle::random_matrix(n, k, rng);
    Eigen::VectorXd y = linear_response(x, std::vector<double>(k + 1, 1.0), 0.0, rng);
    const auto e = oracle::ar1(n, 0.6, rng);
    for (std::size_t i = 0; i < n; ++i) y(static_cast<Eigen::Index>(i)) += e[i] * (1.0 + std::fabs(x(static_cast<Eigen::Index>(i), 0)));
    const auto fit = fit_ols(x, y, names_for(k));
    for (std::size_t lag : {std::size_t{0}, std::size_t{1}, std::size_t{4}, n / 3}) {
      const auto hac = newey_west(fit, x, {lag, false, Exec::serial});
      const auto ref = oracle::hac_se(x, fit.residuals, lag);
      for (std::size_t j = 0; j <= k; ++j) CHECK(oracle::rel_err(hac.se(static_cast<Eigen::Index>(j)), ref[j]) < 1e-8);
    }
  }
}

TEST_CASE("Newey-West with lag 0 is the White estimator") {
  Rng rng(8);
  const Eigen::MatrixXd x = oracle::random_matrix(60, 3, rng);
  const Eigen::VectorXd y = linear_response(x, {1, 1, 1, 1}, 1.0, rng);
  const auto fit = fit_ols(x, y, names_for(3));
  const auto hac = newey_west(fit, x, {0, false, Exec::parallel});
  const auto white = oracle::white_se(x, fit.residuals);
  for (std::size_t j = 0; j < 4; ++j) CHECK(oracle::rel_err(hac.se(static_cast<Eigen::Index>(j)), white[j]) < 1e-10);
}

TEST_CASE("Newey-West options") {
  CHECK(newey_west_auto_lag(397) == 5);
  CHECK(newey_west_auto_lag(100) == 4);
  Rng rng(10);
  const Eigen::MatrixXd x = oracle::random_matrix(50, 2, rng);
  const Eigen::VectorXd y = linear_response(x, {1, 1, 1}, 1.0, rng);
  const auto fit = fit_ols(x, y, names_for(2));
  const auto plain = newey_west(fit, x, {3, false, Exec::serial});
  const auto scaled = newey_west(fit, x, {3, true, Exec::serial});
  CHECK(scaled.se(1) == doctest::Approx(plain.se(1) * std::sqrt(50.0 / 47.0)).epsilon(1e-12));
  CHECK(newey_west(fit, x).lag == newey_west_auto_lag(50));
  CHECK_THROWS_AS(newey_west(fit, x, {50, false, Exec::serial}), NumericalError);
  CHECK_THROWS_AS(newey_west(fit, x.leftCols(1)), UsageError);
}

TEST_CASE("HAC meat is identical on the serial and parallel paths") {
  Rng rng(12);
  const Eigen::MatrixXd x = with_intercept(oracle::random_matrix(500, 6, rng));
  Eigen::VectorXd e(500);
  for (auto& v : e) v = rng.normal();
  for (std::size_t lag : {std::size_t{0}, std::size_t{7}, std::size_t{60}}) {
    CHECK(hac_meat(x, e, lag, Exec::serial) == hac_meat(x, e, lag, Exec::parallel));
  }
}

TEST_CASE("variance inflation factors") {
  Rng rng(13);
  Eigen::MatrixXd x(400, 3);
  for (Eigen::Index i = 0; i < 400; ++i) {
    const double t = 2.0 * M_PI * static_cast<double>(i) / 400.0;
    x(i, 0) = std::sin(t);
    x(i, 1) = std::cos(t);
    x(i, 2) = std::sin(2 * t);
  }
  for (const auto& v : vif(x, names_for(3))) CHECK(v.vif == doctest::Approx(1.0).epsilon(1e-8));

  Eigen::MatrixXd near = oracle::random_matrix(200, 3, rng);
  for (Eigen::Index i = 0; i < 200; ++i) near(i, 1) = near(i, 0) + 1e-3 * rng.normal();
  const auto v = vif(near, names_for(3), Exec::serial);
  CHECK(v[0].vif > 100.0);
  CHECK(v[1].vif > 100.0);
  CHECK(v[2].vif < 2.0);

  Eigen::MatrixXd exact = near;
  exact.col(2) = exact.col(0) + exact.col(1);
  const auto inf = vif(exact, names_for(3));
  CHECK(std::isinf(inf[2].vif));

  const auto par = vif(near, names_for(3), Exec::parallel);
  for (std::size_t j = 0; j < 3; ++j) CHECK(par[j].vif == v[j].vif);
  CHECK_THROWS_AS(vif(near.leftCols(1), {"x0"}), UsageError);
}

TEST_CASE("first differences remove a shared trend") {
  Rng rng(14);
  const std::size_t n = 300;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  double walk = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    walk += rng.normal();
    const auto r = static_cast<Eigen::Index>(i);
    x(r, 0) = static_cast<double>(i * i) / 100.0;
    x(r, 1) = rng.normal();
    y(r) = 0.5 * x(r, 0) + 2.0 * x(r, 1) + walk;
  }
  const auto fm = daily_matrix(x, y, make_date(2025, 1, 1));
  const auto level = fit_ols(fm);
  const auto fd = fit_first_difference(fm);
  CHECK(fd.n == n - 1);
  CHECK(*fd.dw > *level.dw);

  features::FeatureMatrix flat = fm;
  flat.y.setConstant(5.0);
  CHECK_THROWS_AS(fit_first_difference(flat), NumericalError);
}

TEST_CASE("lagged dependent variable recovers AR(1) persistence") {
  int ok = 0, white = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    const std::size_t n = 500;
    Eigen::MatrixXd x(n, 1);
    Eigen::VectorXd y(n), z(n);
    double prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      x(r, 0) = rng.normal();
      prev = 0.7 * prev + rng.normal();
      y(r) = prev;
      z(r) = rng.normal();
    }
    const auto fit = fit_ldv(daily_matrix(x, y, make_date(2025, 1, 1)));
    const auto lag = static_cast<Eigen::Index>(fit.index("count_lag1"));
    CHECK(fit.n == n - 1);
    ok += std::fabs(fit.coef(lag) - 0.7) < 3 * fit.se(lag) ? 1 : 0;
    const auto wn = fit_ldv(daily_matrix(x, z, make_date(2025, 1, 1)));
    white += std::fabs(wn.t(lag)) < 3.0 ? 1 : 0;
  }
  CHECK(ok >= 19);
  CHECK(white >= 19);
}

TEST_CASE("chronological hold-out") {
  Rng rng(15);
  const Eigen::MatrixXd x = oracle::random_matrix(100, 2, rng);
  const Eigen::VectorXd y = linear_response(x, {1, 2, 3}, 0.0, rng);
  const auto h = chronological_holdout(daily_matrix(x, y, make_date(2025, 1, 1)), 80);
  CHECK(h.train_n == 80);
  CHECK(h.test_n == 20);
  CHECK(h.r2 == doctest::Approx(1.0));
  CHECK(h.mae < 1e-9);
  CHECK(h.test_dates.front() == make_date(2025, 1, 1) + std::chrono::days{80});

  Eigen::VectorXd flip = y;
  for (Eigen::Index i = 80; i < 100; ++i) flip(i) = -y(i) + 40.0;
  const auto bad = chronological_holdout(daily_matrix(x, flip, make_date(2025, 1, 1)), 80);
  CHECK(bad.r2 < 0.0);
  double mae = 0, sq = 0;
  for (std::size_t i = 0; i < bad.test_n; ++i) {
    mae += std::fabs(bad.actual[i] - bad.predicted[i]);
    sq += (bad.actual[i] - bad.predicted[i]) * (bad.actual[i] - bad.predicted[i]);
  }
  CHECK(bad.mae == doctest::Approx(mae / 20.0));
  CHECK(bad.rmse == doctest::Approx(std::sqrt(sq / 20.0)));
  CHECK_THROWS_AS(chronological_holdout(daily_matrix(x, y, make_date(2025, 1, 1)), 97), NumericalError);
  CHECK_THROWS_AS(chronological_holdout(daily_matrix(x, y, make_date(2025, 1, 1)), 100), UsageError);
}

TEST_CASE("weather ablation") {
  Rng rng(16);
  const std::size_t n = 1000;
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  features::FeatureMatrix fm;
  fm.names = {"directions", "precip", "weather_severity"};
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const Date d = make_date(2024, 1, 1) + std::chrono::days{static_cast<int>(i)};
    const unsigned m = month_of(d);
    x(r, 0) = rng.normal();
    x(r, 1) = rng.normal();
    x(r, 2) = static_cast<double>(rng.below(4));
    const bool winter = m == 12 || m == 1 || m == 2;
    y(r) = 2.0 * x(r, 0) - (winter ? 1.5 * x(r, 2) : 0.0) + rng.normal();
    fm.dates.push_back(d);
    fm.prev_count.emplace_back();
  }
  fm.x = x;
  fm.y = y;
  const auto noise = weather_ablation(fm, {"precip"});
  CHECK(noise.delta_r2 >= 0.0);
  CHECK(noise.delta_r2 < 0.01);
  const auto s = seasonal_sensitivity(fm, {"precip", "weather_severity"});
  CHECK(s.winter.delta_r2 > 10.0 * s.summer.delta_r2);
  CHECK(s.ratio == doctest::Approx(s.winter.delta_r2 / s.summer.delta_r2));
  CHECK(s.overall.r2_full >= s.overall.r2_reduced);
  CHECK_THROWS(weather_ablation(fm, {"precip"}, {13}));
}

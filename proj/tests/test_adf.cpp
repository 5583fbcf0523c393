#include <doctest.h>

#include <cmath>
#include <vector>

#include "dhde/adf.hpp"
#include "dhde/error.hpp"
#include "dhde/random.hpp"
#include "oracle.hpp"

using namespace dhde;
using namespace dhde::linmodel;

namespace {

// t statistic on y_{t-1} in dy_t ~ 1 + y_{t-1} + dy_{t-1..t-p}, solved with
// the long double normal equations.
double oracle_tau(const std::vector<double>& y, std::size_t p) {
  const std::size_t n = y.size();
  const std::size_t m = n - 1 - p;
  Eigen::MatrixXd x(m, 1 + p);
  Eigen::VectorXd dy(m);
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t t = r + 1 + p;
    dy(r) = y[t] - y[t - 1];
    x(r, 0) = y[t - 1];
    for (std::size_t l = 1; l <= p; ++l) x(r, l) = y[t - l] - y[t - l - 1];
  }
  const auto b = oracle::normal_equations(x, dy);
  const auto inv = oracle::invert(oracle::xtx(oracle::design(x)));
  long double ssr = 0.0L;
  for (std::size_t r = 0; r < m; ++r) {
    long double f = b[0];
    for (std::size_t j = 0; j < 1 + p; ++j) f += b[j + 1] * x(r, j);
    ssr += (dy(r) - f) * (dy(r) - f);
  }
  const long double s2 = ssr / static_cast<long double>(m - p - 2);
  return static_cast<double>(b[1] / std::sqrt(s2 * inv[1][1]));
}

std::vector<double> random_walk(std::size_t n, Rng& rng) {
  std::vector<double> y(n);
  double v = 0.0;
  for (auto& e : y) e = (v += rng.normal());
  return y;
}

}  // namespace

TEST_CASE("MacKinnon p-values") {
  CHECK(mackinnon_p(-2.916) == doctest::Approx(0.0435).epsilon(0.02));
  CHECK(mackinnon_p(-2.480) == doctest::Approx(0.1204).epsilon(0.02));
  CHECK(mackinnon_p(-2.8621) == doctest::Approx(0.05).epsilon(0.02));
  CHECK(mackinnon_p(-3.4304) == doctest::Approx(0.01).epsilon(0.05));
  CHECK(mackinnon_p(-3.9638, AdfRegression::constant_trend) == doctest::Approx(0.01).epsilon(0.05));
  double prev = 0.0;
  for (double tau = -8.0; tau <= 3.0; tau += 0.05) {
    const double p = mackinnon_p(tau);
    CHECK(p >= prev);
    CHECK(p <= 1.0);
    prev = p;
  }
}

TEST_CASE("tau matches an independent regression") {
  Rng rng(31);
  for (int inst = 0; inst < 10; ++inst) {
    const auto y = oracle::ar1(120 + rng.below(200), 0.8, rng);
    for (std::size_t p : {std::size_t{0}, std::size_t{2}}) {
      const auto r = adf_test(y, p);
      if (r.lag != p) continue;
      CHECK(r.nobs == y.size() - 1 - p);
      CHECK(oracle::rel_err(r.statistic, oracle_tau(y, p)) < 1e-8);
    }
    const auto fixed0 = adf_test(y, std::size_t{0});
    CHECK(fixed0.lag == 0);
    CHECK(oracle::rel_err(fixed0.statistic, oracle_tau(y, 0)) < 1e-8);
  }
}

TEST_CASE("unit roots are rarely rejected and stationary series are") {
  int walk_rejected = 0, ar_rejected = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    Rng rng(seed);
    walk_rejected += adf_test(random_walk(400, rng)).p_value < 0.05 ? 1 : 0;
    ar_rejected += adf_test(oracle::ar1(400, 0.5, rng)).p_value < 0.05 ? 1 : 0;
  }
  CHECK(walk_rejected <= 6);
  CHECK(ar_rejected >= 38);
}

TEST_CASE("lag selection bounds and degenerate input") {
  CHECK(schwert_maxlag(100) == 12);
  CHECK(schwert_maxlag(397) == 16);
  Rng rng(4);
  const auto y = oracle::ar1(397, 0.3, rng);
  const auto r = adf_test(y);
  CHECK(r.maxlag == 16);
  CHECK(r.lag <= r.maxlag);
  CHECK(r.criterion == "AIC");
  CHECK_THROWS_AS(adf_test(std::vector<double>(200, 3.0)), NumericalError);
  CHECK_THROWS_AS(adf_test(std::vector<double>(10, 1.0)), NumericalError);
}

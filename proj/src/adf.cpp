#include "dhde/adf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "dhde/error.hpp"
#include "dhde/linmodel.hpp"
#include "dhde/stats.hpp"

namespace dhde::linmodel {
namespace {

// MacKinnon (1994), Table 3/4 response-surface coefficients for one
// integrated series (N = 1). Polynomials in tau map to a standard normal
// quantile. Source: MacKinnon, J.G. "Approximate Asymptotic Distribution
// Functions for Unit-Root and Cointegration Tests", JBES 12 (1994).
struct Surface {
  double tau_max, tau_min, tau_star;
  double small[3];
  double large[4];
};

constexpr Surface kConstant{2.74, -18.83, -1.61, {2.1659, 1.4412, 3.8269e-2}, {1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2}};
constexpr Surface kConstantTrend{0.7, -16.18, -2.89, {3.2512, 1.6047, 4.9588e-2}, {2.5261, 6.1654e-1, -3.7956e-1, -6.0285e-2}};

struct LagFit {
  double aic;
  double tau;
};

// Regression of dy on [y_{t-1}, (trend), dy_{t-1..t-lags}] using the last
// `nobs` usable observations.
LagFit adf_regression(const std::vector<double>& y, const std::vector<double>& dy, std::size_t lags, std::size_t nobs,
                      AdfRegression regression) {
  const bool trend = regression == AdfRegression::constant_trend;
  const std::size_t k = 1 + (trend ? 1 : 0) + lags;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(nobs), static_cast<Eigen::Index>(k));
  Eigen::VectorXd target(static_cast<Eigen::Index>(nobs));
  std::vector<std::string> names{"y_lag1"};
  if (trend) names.emplace_back("trend");
  for (std::size_t l = 1; l <= lags; ++l) names.push_back("dy_lag" + std::to_string(l));

  const std::size_t first = dy.size() - nobs;  // dy index of the first response
  for (std::size_t r = 0; r < nobs; ++r) {
    const std::size_t t = first + r;  // dy[t] = y[t+1] - y[t]
    const auto row = static_cast<Eigen::Index>(r);
    target(row) = dy[t];
    Eigen::Index c = 0;
    x(row, c++) = y[t];
    if (trend) x(row, c++) = static_cast<double>(r + 1);
    for (std::size_t l = 1; l <= lags; ++l) x(row, c++) = dy[t - l];
  }
  const LinearFit fit = fit_ols(x, target, names);
  const double n = static_cast<double>(nobs);
  const double llf = -n / 2.0 * (std::log(2.0 * std::numbers::pi) + std::log(fit.ssr / n) + 1.0);
  const double params = static_cast<double>(k + 1);
  return {-2.0 * llf + 2.0 * params, fit.t(1)};
}

}  // namespace

std::size_t schwert_maxlag(std::size_t n) {
  return static_cast<std::size_t>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
}

double mackinnon_p(double tau, AdfRegression regression) {
  const Surface& s = regression == AdfRegression::constant ? kConstant : kConstantTrend;
  if (tau > s.tau_max) return 1.0;
  if (tau < s.tau_min) return 0.0;
  double z;
  if (tau <= s.tau_star) {
    z = s.small[0] + tau * (s.small[1] + tau * s.small[2]);
  } else {
    z = s.large[0] + tau * (s.large[1] + tau * (s.large[2] + tau * s.large[3]));
  }
  return stats::normal_cdf(z);
}

AdfResult adf_test(std::span<const double> series, std::optional<std::size_t> maxlag, AdfRegression regression) {
  const std::size_t n = series.size();
  if (n < 3) throw NumericalError("adf_test: series too short");
  if (std::all_of(series.begin(), series.end(), [&](double v) { return v == series[0]; })) {
    throw NumericalError("adf_test: constant series");
  }
  const std::size_t ntrend = regression == AdfRegression::constant ? 1 : 2;
  std::size_t max_p = maxlag.value_or(schwert_maxlag(n));
  if (!maxlag) max_p = std::min(max_p, n / 2 > ntrend + 1 ? n / 2 - ntrend - 1 : std::size_t{0});
  if (n < 20 + max_p) {
    throw NumericalError("adf_test: need at least 20 + maxlag observations (n=" + std::to_string(n) +
                         ", maxlag=" + std::to_string(max_p) + ")");
  }

  const std::vector<double> y(series.begin(), series.end());
  std::vector<double> dy(n - 1);
  for (std::size_t t = 0; t + 1 < n; ++t) dy[t] = y[t + 1] - y[t];

  // Common sample for the information-criterion search.
  const std::size_t common = dy.size() - max_p;
  std::size_t best = 0;
  double best_aic = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p <= max_p; ++p) {
    const double aic = adf_regression(y, dy, p, common, regression).aic;
    if (aic < best_aic) {
      best_aic = aic;
      best = p;
    }
  }

  AdfResult res;
  res.lag = best;
  res.maxlag = max_p;
  res.regression = regression;
  res.nobs = dy.size() - best;
  res.statistic = adf_regression(y, dy, best, res.nobs, regression).tau;
  res.p_value = mackinnon_p(res.statistic, regression);
  return res;
}

}  // namespace dhde::linmodel

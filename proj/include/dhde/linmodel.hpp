#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dhde/features.hpp"
#include "dhde/parallel.hpp"

namespace dhde::linmodel {

struct HacResult {
  std::size_t lag = 0;
  bool small_sample = false;
  Eigen::MatrixXd cov;
  Eigen::VectorXd se, t, p;
};

struct LinearFit {
  std::vector<std::string> names;  // "const" first
  Eigen::VectorXd coef;
  Eigen::VectorXd se, t, p;        // classical
  std::optional<HacResult> hac;
  Eigen::VectorXd fitted;
  Eigen::VectorXd residuals;
  double r2 = 0.0;
  double adj_r2 = 0.0;
  std::optional<double> dw;        // absent when the fit is exact
  std::size_t n = 0;
  std::size_t k = 0;               // regressors excluding the intercept
  double ssr = 0.0;
  double tss = 0.0;
  double sigma2 = 0.0;
  Eigen::MatrixXd xtx_inv;         // (X'X)^-1 with the intercept column first

  // x has the regressor columns only (no intercept).
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
  std::size_t index(const std::string& name) const;
};

// Prepends a column of ones.
Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x);

// Least squares with an intercept via column-pivoted Householder QR on the
// column-equilibrated design. Exact rank deficiency throws NumericalError
// naming the dependent columns.
LinearFit fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& names);
LinearFit fit_ols(const features::FeatureMatrix& fm);

struct StandardizedBeta {
  std::string name;
  double beta = 0.0;
  std::size_t rank = 0;  // 1 = largest |beta|
};

// beta_j = b_j * sd(x_j) / sd(y) with population standard deviations,
// sorted by |beta| descending.
std::vector<StandardizedBeta> standardized_betas(const LinearFit& fit, const Eigen::MatrixXd& x,
                                                 const Eigen::VectorXd& y);

double cohens_f2(double r2);

double durbin_watson(std::span<const double> residuals);
double durbin_watson(const Eigen::VectorXd& residuals);

// floor(4 (n/100)^(2/9))
std::size_t newey_west_auto_lag(std::size_t n);

// Bartlett-weighted long-run covariance of the score rows x_t e_t:
// Gamma_0 + sum_{l=1..L} (1 - l/(L+1)) (Gamma_l + Gamma_l').
// xc includes the intercept column. The parallel path computes the Gamma_l
// blocks concurrently and sums them in lag order, so it is bit-identical to
// the serial path.
Eigen::MatrixXd hac_meat(const Eigen::MatrixXd& xc, const Eigen::VectorXd& e, std::size_t lag,
                         Exec exec = Exec::parallel);

struct NeweyWestOptions {
  std::optional<std::size_t> lag;  // nullopt = auto rule
  bool small_sample = false;       // scale by n / (n - k - 1)
  Exec exec = Exec::parallel;
};

// x holds the regressors the fit was estimated on (no intercept column).
HacResult newey_west(const LinearFit& fit, const Eigen::MatrixXd& x, const NeweyWestOptions& options = {});

struct VifEntry {
  std::string name;
  double vif = 0.0;  // +inf marks perfect collinearity
};

std::vector<VifEntry> vif(const Eigen::MatrixXd& x, const std::vector<std::string>& names,
                          Exec exec = Exec::parallel);

// Differences every column and the target over pairs of consecutive calendar
// days (both retained), then refits with an intercept.
LinearFit fit_first_difference(const features::FeatureMatrix& fm);

// Adds count on the previous calendar day as the regressor "count_lag1".
LinearFit fit_ldv(const features::FeatureMatrix& fm);

struct HoldoutReport {
  std::size_t train_n = 0;
  std::size_t test_n = 0;
  double r2 = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
  std::vector<Date> test_dates;
  std::vector<double> actual;
  std::vector<double> predicted;
};

// Fits on the first train_n rows, scores the remainder. R^2 centres SST on
// the test mean, so it can be negative.
HoldoutReport chronological_holdout(const features::FeatureMatrix& fm, std::size_t train_n);

struct AblationResult {
  double r2_full = 0.0;
  double r2_reduced = 0.0;
  double delta_r2 = 0.0;
  std::size_t n = 0;
  std::vector<std::string> dropped_constant;  // columns constant within the subset
};

// R^2(full) - R^2(full without weather_cols), optionally restricted to rows
// whose month is in `months`. Both models are refit on the same rows.
AblationResult weather_ablation(const features::FeatureMatrix& fm, const std::vector<std::string>& weather_cols,
                                const std::vector<unsigned>& months = {});

struct SeasonalSensitivity {
  AblationResult overall, winter, summer;
  double ratio = 0.0;  // winter delta / summer delta
};

SeasonalSensitivity seasonal_sensitivity(const features::FeatureMatrix& fm, const std::vector<std::string>& weather_cols,
                                         const std::vector<unsigned>& winter = {12, 1, 2},
                                         const std::vector<unsigned>& summer = {6, 7, 8});

}  // namespace dhde::linmodel

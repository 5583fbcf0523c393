#pragma once

#include <optional>
#include <span>
#include <string>

namespace dhde::linmodel {

enum class AdfRegression { constant, constant_trend };

struct AdfResult {
  double statistic = 0.0;
  double p_value = 0.0;
  std::size_t lag = 0;
  std::size_t maxlag = 0;
  std::size_t nobs = 0;
  std::string criterion = "AIC";
  AdfRegression regression = AdfRegression::constant;
};

// floor(12 (n/100)^(1/4))
std::size_t schwert_maxlag(std::size_t n);

// MacKinnon (1994) approximate asymptotic p-value for a single-series
// Dickey-Fuller tau statistic.
double mackinnon_p(double tau, AdfRegression regression = AdfRegression::constant);

// Regresses dy_t on y_{t-1}, dy_{t-1..t-p} and deterministic terms. p is
// chosen by AIC over 0..maxlag on a common sample, then the chosen
// regression is refit on all available observations.
AdfResult adf_test(std::span<const double> series, std::optional<std::size_t> maxlag = std::nullopt,
                   AdfRegression regression = AdfRegression::constant);

}  // namespace dhde::linmodel

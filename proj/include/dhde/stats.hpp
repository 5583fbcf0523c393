#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dhde::stats {

double mean(std::span<const double> x);

// Population variance / standard deviation (divisor n).
double variance_pop(std::span<const double> x);
double sd_pop(std::span<const double> x);

// Sample standard deviation (divisor n - 1).
double sd_sample(std::span<const double> x);

// Linear-interpolation quantile (Hyndman-Fan type 7), q in [0, 1].
double quantile(std::span<const double> x, double q);

// Fraction of values <= v, as a percentile in [0, 100].
double percentile_rank(std::span<const double> x, double v);

// Product-moment correlation. Throws NumericalError when either input has
// zero variance.
double pearson_r(std::span<const double> x, std::span<const double> y);

// Mid-ranks (1-based), ties receive the average of their positions.
std::vector<double> midranks(std::span<const double> x);

// Two-sided p-value of a t statistic with df degrees of freedom.
double t_two_sided_p(double t, double df);

// Upper tail of the chi-square distribution.
double chi2_sf(double x, double df);

double normal_cdf(double z);

// Coefficient of determination with SST centred on the mean of actual.
double r_squared(std::span<const double> actual, std::span<const double> predicted);

}  // namespace dhde::stats

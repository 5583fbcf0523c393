#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dhde/date.hpp"
#include "dhde/features.hpp"
#include "dhde/ingest.hpp"
#include "dhde/parallel.hpp"

namespace dhde::economics {

// Spend-band label (compared after NFKC and trimming) to a midpoint in yen.
class SpendBandTable {
public:
  explicit SpendBandTable(std::vector<std::pair<std::string, double>> bands);

  // CSV with header "label,midpoint_yen".
  static SpendBandTable load_csv(std::istream& in);

  std::optional<double> midpoint(const std::string& label) const;
  const std::vector<std::pair<std::string, double>>& bands() const { return bands_; }

private:
  std::vector<std::pair<std::string, double>> bands_;
};

// Fallback per-capita spend when no band table is configured.
inline constexpr double kFallbackSpendYen = 13811.0;

struct SpendSummary {
  double mean_yen = 0.0;  // unrounded
  std::size_t used = 0;
  std::size_t missing = 0;   // blank band
  std::size_t unmapped = 0;  // label absent from the table, excluded with a warning
};

SpendSummary mean_spend(const std::vector<ingest::SurveyResponse>& responses, const SpendBandTable& bands);

struct FrictionThresholds {
  double intent_quantile = 0.75;
  int severity_min = 2;
};

struct FrictionFlags {
  double intent_threshold = 0.0;
  int severity_threshold = 0;
  std::vector<std::size_t> rows;  // indices into the feature matrix
  std::vector<Date> dates;
  std::vector<double> residuals;  // actual - predicted on flagged days (all negative)
  std::size_t observed_days = 0;
};

// A day is flagged when directions >= the intent quantile, weather_severity
// >= severity_min and actual < predicted.
FrictionFlags flag_friction_days(const features::FeatureMatrix& fm, const Eigen::VectorXd& predicted,
                                 const FrictionThresholds& thresholds = {});

// lost * spend rounded to whole yen; exact when both factors are integral.
std::int64_t yen_value(double lost_visitors, double spend_yen);

struct NodeGapInput {
  std::string node_id;
  std::vector<Date> dates;
  std::vector<double> residuals;
  std::size_t observed_days = 0;
};

struct NodeGap {
  std::string node_id;
  std::vector<Date> flagged;
  std::size_t observed_days = 0;
  double annualization = 0.0;  // 365 / observed_days
  double suppressed = 0.0;     // sum of max(0, -residual)
  double lost_visitors = 0.0;
  std::int64_t yen = 0;
  double usd = 0.0;
};

struct GapReport {
  std::vector<NodeGap> nodes;
  double lost_visitors = 0.0;
  std::int64_t yen = 0;
  double usd = 0.0;
  double spend_yen = 0.0;
  double fx_rate = 0.0;
};

GapReport opportunity_gap(const std::vector<NodeGapInput>& nodes, double spend_yen, double fx_rate = 157.0,
                          Exec exec = Exec::parallel);

// Compares lost * spend against an externally printed yen figure.
struct ProvenanceNote {
  double lost_visitors = 0.0;
  double spend_yen = 0.0;
  std::int64_t computed_yen = 0;
  std::int64_t printed_yen = 0;
  std::int64_t divergence = 0;  // printed - computed
  double implied_spend = 0.0;   // printed / lost
};

ProvenanceNote provenance_note(double lost_visitors, double spend_yen, std::int64_t printed_yen);

struct CcfPoint {
  int lag = 0;
  double r = 0.0;
  std::size_t n = 0;
};

struct CcfResult {
  std::vector<CcfPoint> points;  // lags -max_lag..max_lag
  int best_lag = 0;
  double best_r = 0.0;
};

// r(l) = corr(x[t-l], y[t]) over positions where both exist.
CcfResult ccf(std::span<const double> x, std::span<const double> y, int max_lag, Exec exec = Exec::parallel);

// Calendar-aligned variant: x at day d-l is paired with y at day d whenever
// both days are present.
CcfResult ccf(const std::vector<Date>& x_dates, std::span<const double> x, const std::vector<Date>& y_dates,
              std::span<const double> y, int max_lag, Exec exec = Exec::parallel);

struct RankingMonth {
  unsigned month = 0;
  double baseline = 0.0;
  std::vector<std::pair<int, double>> tiers;  // (rank, visitors needed), best rank first
};

struct RankingBaseline {
  std::vector<RankingMonth> months;  // 12, in calendar order of the file
  int floor_rank = 47;
};

// CSV: month,baseline_visitors,tier_<rank>,... with one row per month.
RankingBaseline load_ranking_csv(std::istream& in);

struct RankingMonthResult {
  unsigned month = 0;
  double baseline = 0.0;
  double weight = 0.0;
  double recovered = 0.0;
  std::optional<double> shortfall;    // absent at the top tier
  std::optional<double> closed_pct;   // may exceed 100
  int baseline_rank = 0;
  int projected_rank = 0;
};

struct RankingResult {
  double recovered_annual = 0.0;
  std::vector<RankingMonthResult> months;
};

// Rank of a total: the best rank whose threshold it meets, else floor_rank.
int rank_of(const RankingMonth& m, double total, int floor_rank);

// Uniform 1/12 weights when `weights` is empty.
RankingResult ranking_simulation(const RankingBaseline& baseline, double recovered_annual,
                                 std::vector<double> weights = {});

}  // namespace dhde::economics

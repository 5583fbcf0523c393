#pragma once

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dhde/date.hpp"
#include "dhde/ingest.hpp"

namespace dhde::nudge {

enum class Kind { merchant_vitality_alert, weather_resilient_reroute };

std::string to_string(Kind k);

struct NodeForecast {
  Date date;
  std::string node_id;
  double visitors = 0.0;
  double directions = 0.0;  // forecast intent
};

struct SeverityOutlook {
  Date date;
  std::string node_id;
  int severity = 0;
};

// Daily history a node's thresholds are derived from.
struct NodeHistory {
  std::string node_id;
  std::vector<double> counts;
  std::vector<double> directions;
};

struct NudgePolicy {
  double surge_quantile = 0.8;
  double intent_quantile = 0.75;
  int severity_min = 2;
  int max_horizon_days = 3;
  // Candidate reroute targets per source node, tried in order. Sources with
  // no entry fall back to the node list order.
  std::map<std::string, std::vector<std::string>> reroute_priority;
};

struct Trigger {
  double intent_percentile = 0.0;  // of the forecast intent within the node's history
  double intent_threshold = 0.0;
  double surge_threshold = 0.0;
  int severity = 0;
  std::optional<int> target_severity;
};

struct NudgeDirective {
  Date date;
  Kind kind = Kind::merchant_vitality_alert;
  std::string source_node;
  std::optional<std::string> target_node;
  double forecast_visitors = 0.0;
  Trigger trigger;
};

struct NudgeResult {
  std::vector<NudgeDirective> directives;
  std::vector<std::string> warnings;
};

// Forecasts must cover every node for every forecast date, and dates must
// fall within issued+1 .. issued+max_horizon_days.
NudgeResult evaluate_nudges(const std::vector<NodeForecast>& forecasts, const std::vector<SeverityOutlook>& outlook,
                            const std::vector<ingest::NodeConfig>& nodes, const std::vector<NodeHistory>& history,
                            Date issued, const NudgePolicy& policy = {});

// CSV "date,node_id,forecast_visitors,forecast_directions".
std::vector<NodeForecast> read_forecast_csv(std::istream& in);
// CSV "date,node_id,severity".
std::vector<SeverityOutlook> read_outlook_csv(std::istream& in);

void write_jsonl(std::ostream& out, const std::vector<NudgeDirective>& directives);

}  // namespace dhde::nudge

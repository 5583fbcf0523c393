#include "dhde/nudge.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "dhde/csv.hpp"
#include "dhde/error.hpp"
#include "dhde/stats.hpp"
#include "dhde/text.hpp"

namespace dhde::nudge {
namespace {

struct Thresholds {
  double surge = 0.0;
  double intent = 0.0;
  std::vector<double> directions;
};

using Key = std::pair<Date, std::string>;

std::size_t require(const csv::Table& t, std::string_view name, std::string_view what) {
  const auto c = t.column(name);
  if (!c) throw DataError(std::string(what) + " file is missing the column '" + std::string(name) + "'");
  return *c;
}

Date date_field(const csv::Record& r, std::size_t c) {
  const auto d = parse_date(text::trim(r.fields[c]));
  if (!d) throw RowError(r.line, "bad date '" + r.fields[c] + "'");
  return *d;
}

double number_field(const csv::Record& r, std::size_t c) {
  const auto v = text::parse_double(r.fields[c]);
  if (!v) throw RowError(r.line, "'" + r.fields[c] + "' is not a number");
  return *v;
}

}  // namespace

std::string to_string(Kind k) {
  return k == Kind::merchant_vitality_alert ? "merchant_vitality_alert" : "weather_resilient_reroute";
}

NudgeResult evaluate_nudges(const std::vector<NodeForecast>& forecasts, const std::vector<SeverityOutlook>& outlook,
                            const std::vector<ingest::NodeConfig>& nodes, const std::vector<NodeHistory>& history,
                            Date issued, const NudgePolicy& policy) {
  std::vector<std::string> problems;
  std::map<std::string, const ingest::NodeConfig*> by_id;
  for (const auto& n : nodes) by_id[n.node_id] = &n;

  std::map<Key, const NodeForecast*> fc;
  std::set<Date> dates;
  for (const auto& f : forecasts) {
    if (!by_id.contains(f.node_id)) problems.push_back("forecast for unknown node " + f.node_id);
    const auto ahead = (f.date - issued).count();
    if (ahead < 1 || ahead > policy.max_horizon_days) {
      problems.push_back("forecast date " + format_date(f.date) + " is outside the " +
                         std::to_string(policy.max_horizon_days) + "-day horizon");
    }
    if (!fc.emplace(Key{f.date, f.node_id}, &f).second) {
      problems.push_back("duplicate forecast for node " + f.node_id + " on " + format_date(f.date));
    }
    dates.insert(f.date);
  }
  for (const Date d : dates) {
    for (const auto& n : nodes) {
      if (!fc.contains(Key{d, n.node_id})) problems.push_back("no forecast for node " + n.node_id + " on " + format_date(d));
    }
  }
  std::map<Key, int> sev;
  for (const auto& o : outlook) {
    if (o.severity < 0 || o.severity > 3) problems.push_back("outlook severity must be 0..3");
    if (!sev.emplace(Key{o.date, o.node_id}, o.severity).second) {
      problems.push_back("duplicate outlook for node " + o.node_id + " on " + format_date(o.date));
    }
  }
  std::map<std::string, Thresholds> thr;
  for (const auto& h : history) {
    if (h.counts.empty() || h.directions.empty()) {
      problems.push_back("empty history for node " + h.node_id);
      continue;
    }
    Thresholds t;
    t.surge = stats::quantile(h.counts, policy.surge_quantile);
    t.intent = stats::quantile(h.directions, policy.intent_quantile);
    t.directions = h.directions;
    thr[h.node_id] = std::move(t);
  }
  for (const auto& n : nodes) {
    if (!thr.contains(n.node_id)) problems.push_back("no history for node " + n.node_id);
  }
  if (!problems.empty()) throw UsageError(problems);

  NudgeResult res;
  for (const Date d : dates) {
    for (const auto& n : nodes) {
      const NodeForecast& f = *fc.at(Key{d, n.node_id});
      const Thresholds& t = thr.at(n.node_id);
      Trigger trig;
      trig.intent_threshold = t.intent;
      trig.surge_threshold = t.surge;
      trig.intent_percentile = stats::percentile_rank(t.directions, f.directions);
      const auto s = sev.find(Key{d, n.node_id});
      trig.severity = s == sev.end() ? 0 : s->second;

      if (f.visitors >= t.surge) {
        res.directives.push_back({d, Kind::merchant_vitality_alert, n.node_id, std::nullopt, f.visitors, trig});
      }

      if (n.indoor_sheltered || f.directions < t.intent || trig.severity < policy.severity_min) continue;
      std::vector<std::string> candidates;
      if (const auto it = policy.reroute_priority.find(n.node_id); it != policy.reroute_priority.end()) {
        candidates = it->second;
      } else {
        for (const auto& m : nodes) candidates.push_back(m.node_id);
      }
      std::optional<std::string> target;
      for (const auto& c : candidates) {
        const auto node = by_id.find(c);
        if (c == n.node_id || node == by_id.end() || !node->second->indoor_sheltered) continue;
        const auto ts = sev.find(Key{d, c});
        if (ts == sev.end() || ts->second >= trig.severity) continue;
        target = c;
        trig.target_severity = ts->second;
        break;
      }
      if (!target) {
        res.warnings.push_back("reroute from node " + n.node_id + " on " + format_date(d) +
                               " suppressed: no sheltered node with milder weather");
        continue;
      }
      res.directives.push_back({d, Kind::weather_resilient_reroute, n.node_id, target, f.visitors, trig});
    }
  }
  return res;
}

std::vector<NodeForecast> read_forecast_csv(std::istream& in) {
  const csv::Table t = csv::read_table(in);
  const auto dc = require(t, "date", "forecast");
  const auto nc = require(t, "node_id", "forecast");
  const auto vc = require(t, "forecast_visitors", "forecast");
  const auto ic = require(t, "forecast_directions", "forecast");
  std::vector<NodeForecast> out;
  for (const auto& r : t.rows) {
    if (r.fields.size() != t.header.size()) throw RowError(r.line, "field count differs from the header");
    out.push_back({date_field(r, dc), text::trim(r.fields[nc]), number_field(r, vc), number_field(r, ic)});
  }
  return out;
}

std::vector<SeverityOutlook> read_outlook_csv(std::istream& in) {
  const csv::Table t = csv::read_table(in);
  const auto dc = require(t, "date", "outlook");
  const auto nc = require(t, "node_id", "outlook");
  const auto sc = require(t, "severity", "outlook");
  std::vector<SeverityOutlook> out;
  for (const auto& r : t.rows) {
    if (r.fields.size() != t.header.size()) throw RowError(r.line, "field count differs from the header");
    const auto s = text::parse_int(r.fields[sc]);
    if (!s || *s < 0 || *s > 3) throw RowError(r.line, "severity must be an integer 0..3");
    out.push_back({date_field(r, dc), text::trim(r.fields[nc]), static_cast<int>(*s)});
  }
  return out;
}

void write_jsonl(std::ostream& out, const std::vector<NudgeDirective>& directives) {
  for (const auto& d : directives) {
    nlohmann::ordered_json j;
    j["date"] = format_date(d.date);
    j["kind"] = to_string(d.kind);
    j["source_node"] = d.source_node;
    if (d.target_node) j["target_node"] = *d.target_node;
    j["forecast_visitors"] = d.forecast_visitors;
    nlohmann::ordered_json t;
    t["intent_percentile"] = d.trigger.intent_percentile;
    t["intent_threshold"] = d.trigger.intent_threshold;
    t["surge_threshold"] = d.trigger.surge_threshold;
    t["severity"] = d.trigger.severity;
    if (d.trigger.target_severity) t["target_severity"] = *d.trigger.target_severity;
    j["trigger"] = t;
    nlohmann::ordered_json payload;
    if (d.kind == Kind::merchant_vitality_alert) {
      payload["action"] = "extend_opening_hours";
      payload["expected_visitors"] = d.forecast_visitors;
    } else {
      payload["action"] = "promote_sheltered_destination";
      payload["from"] = d.source_node;
      payload["to"] = d.target_node.value_or("");
    }
    j["payload"] = payload;
    out << j.dump() << '\n';
  }
}

}  // namespace dhde::nudge

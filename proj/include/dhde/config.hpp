#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dhde/features.hpp"
#include "dhde/forest.hpp"
#include "dhde/ingest.hpp"
#include "dhde/synth.hpp"

namespace dhde::config {

struct Inputs {
  std::map<std::string, std::filesystem::path> camera;  // node id -> 5-minute CSV
  std::map<std::string, std::filesystem::path> jma;     // station key -> hourly CSV
  std::optional<std::filesystem::path> intent, survey_merged, survey_raw, spend_bands, ranking, forecast, outlook,
      holidays, lexicon;
};

struct ModelConfig {
  std::string node = "A";
  std::optional<std::size_t> holdout_train;  // default: first 80% of rows
  std::optional<std::size_t> hac_lag;
  bool small_sample = false;
};

struct ForestConfig {
  forest::ForestParams params;
  std::size_t folds = 5;
  std::size_t repeats = 10;
};

struct GapConfig {
  double intent_quantile = 0.75;
  int severity_min = 2;
  std::string residual_source = "ols";  // or "ldv"
  double fx_rate = 157.0;
  std::optional<double> spend_yen;       // overrides the band-table mean
  double reference_lost_visitors = 865917.0;
  std::int64_t reference_yen = 11959183083;
};

struct CcfConfig {
  int max_lag = 14;
  std::string node = "A";
};

struct RankConfig {
  std::vector<double> weights;  // empty = uniform
  std::optional<double> recovered_annual;
  int floor_rank = 47;
};

struct NudgeConfig {
  double surge_quantile = 0.8;
  double intent_quantile = 0.75;
  int severity_min = 2;
  std::map<std::string, std::vector<std::string>> reroute_priority{{"A", {"C"}}, {"B", {"C"}}, {"D", {"C"}}};
  std::optional<Date> issued;  // default: last panel date
};

struct KanseiConfig {
  std::string prefecture = "福井";
};

struct RunConfig {
  std::uint64_t seed = 20241201;
  std::filesystem::path output_dir = "out";
  std::vector<ingest::NodeConfig> nodes = ingest::default_nodes();
  Inputs inputs;
  features::FeatureOptions features;
  ModelConfig model;
  ForestConfig forest;
  GapConfig gap;
  CcfConfig ccf;
  RankConfig rank;
  NudgeConfig nudge;
  KanseiConfig kansei;
  synth::DgpParams synth;
  bool serial = false;
};

// Reads a JSON config. Relative input paths resolve against the directory
// holding the file. Unknown keys and type errors are collected and raised
// together as one UsageError.
RunConfig load(const std::filesystem::path& file);
RunConfig from_json_text(const std::string& json_text, const std::filesystem::path& base_dir);

// Serializes with input paths written relative to `base_dir` when possible.
std::string to_json_text(const RunConfig& cfg, const std::filesystem::path& base_dir);

enum class Need { camera, jma, intent, survey_merged, survey_raw, spend_bands, ranking, forecast, outlook };

// Every problem with the configuration for a command needing `needs`.
std::vector<std::string> problems(const RunConfig& cfg, const std::vector<Need>& needs);

}  // namespace dhde::config

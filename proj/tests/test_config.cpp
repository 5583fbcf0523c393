#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>

#include <unistd.h>

#include "dhde/config.hpp"
#include "dhde/error.hpp"

using namespace dhde;

namespace {

bool mentions(const std::vector<std::string>& problems, const std::string& needle) {
  return std::any_of(problems.begin(), problems.end(),
                     [&](const std::string& p) { return p.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("an empty object yields the defaults") {
  const auto cfg = config::from_json_text("{}", "/base");
  CHECK(cfg.seed == 20241201);
  CHECK(cfg.nodes.size() == 4);
  CHECK(cfg.gap.fx_rate == 157.0);
  CHECK(cfg.gap.intent_quantile == 0.75);
  CHECK(cfg.nudge.surge_quantile == 0.8);
  CHECK(cfg.forest.params.n_trees == 500);
  CHECK(cfg.model.node == "A");
}

TEST_CASE("values and relative paths are read") {
  const auto cfg = config::from_json_text(R"({
    "seed": 7,
    "output_dir": "results",
    "inputs": {"camera": {"A": "cam_a.csv"}, "intent": "/abs/intent.csv"},
    "gap": {"fx_rate": 150, "residual_source": "ldv"},
    "nudge": {"issued": "2025-03-01"},
    "forest": {"n_trees": 50}
  })", "/base");
  CHECK(cfg.seed == 7);
  CHECK(cfg.output_dir == std::filesystem::path("/base/results"));
  CHECK(cfg.inputs.camera.at("A") == std::filesystem::path("/base/cam_a.csv"));
  CHECK(*cfg.inputs.intent == std::filesystem::path("/abs/intent.csv"));
  CHECK(cfg.gap.fx_rate == 150.0);
  CHECK(cfg.gap.residual_source == "ldv");
  CHECK(*cfg.nudge.issued == make_date(2025, 3, 1));
  CHECK(cfg.forest.params.n_trees == 50);
}

TEST_CASE("unknown keys and wrong types are collected together") {
  try {
    config::from_json_text(R"({"sed": 1, "gap": {"fx_rate": "high", "bogus": 2}, "model": {"hac_lag": -1}})", "/");
    FAIL("expected UsageError");
  } catch (const UsageError& e) {
    CHECK(e.problems().size() >= 4);
    CHECK(mentions(e.problems(), "sed"));
    CHECK(mentions(e.problems(), "gap.fx_rate"));
    CHECK(mentions(e.problems(), "gap.bogus"));
    CHECK(mentions(e.problems(), "model.hac_lag"));
  }
  try {
    config::from_json_text(R"({"forest": {"n_trees": 1.5}})", "/");
    FAIL("expected UsageError");
  } catch (const UsageError& e) {
    CHECK(mentions(e.problems(), "forest.n_trees"));
  }
  CHECK_THROWS_AS(config::from_json_text("{not json", "/"), UsageError);
  CHECK_THROWS_AS(config::from_json_text("[1, 2]", "/"), UsageError);
}

TEST_CASE("problems lists every missing input and bad value") {
  auto cfg = config::from_json_text(R"({"inputs": {"intent": "missing.csv"}})", "/nowhere");
  cfg.gap.fx_rate = 0.0;
  cfg.model.node = "Z";
  const auto p = config::problems(cfg, {config::Need::camera, config::Need::intent, config::Need::ranking});
  CHECK(mentions(p, "gap.fx_rate"));
  CHECK(mentions(p, "model.node"));
  CHECK(mentions(p, "file not found"));
  CHECK(mentions(p, "inputs.ranking is not configured"));
  CHECK(mentions(p, "camera"));
  CHECK(config::problems(config::RunConfig{}, {}).empty());
}

TEST_CASE("serialization round-trips") {
  auto cfg = config::from_json_text(R"({"seed": 9, "inputs": {"intent": "in/intent.csv"}, "rank": {"weights": [1,0,0,0,0,0,0,0,0,0,0,0]}})", "/base");
  const auto text = config::to_json_text(cfg, "/base");
  CHECK(text.find("\"in/intent.csv\"") != std::string::npos);
  const auto back = config::from_json_text(text, "/base");
  CHECK(back.seed == 9);
  CHECK(*back.inputs.intent == *cfg.inputs.intent);
  CHECK(back.rank.weights == cfg.rank.weights);
  CHECK(config::to_json_text(back, "/base") == text);
}

TEST_CASE("loading from a file resolves against its directory") {
  const auto dir = std::filesystem::temp_directory_path() / ("dhde_cfg_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "run.json");
    f << R"({"inputs": {"ranking": "ranking.csv"}})";
  }
  const auto cfg = config::load(dir / "run.json");
  CHECK(*cfg.inputs.ranking == dir / "ranking.csv");
  CHECK_THROWS_AS(config::load(dir / "absent.json"), UsageError);
  std::filesystem::remove_all(dir);
}

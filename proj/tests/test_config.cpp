#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "gvarsv/config.hpp"
#include "gvarsv/errors.hpp"

using namespace gvarsv;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("gvarsv_cfg_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int n = 0;
    return n;
  }
  std::string file(const std::string& name, const std::string& body) const {
    const fs::path p = path / name;
    std::ofstream out(p, std::ios::binary);
    out << body;
    return p.string();
  }
};

const char* kBase = R"({
  "seed": 42,
  "data": {
    "series_csv": "panel.csv",
    "trade_flows_csv": "flows.csv",
    "already_transformed": true,
    "training_split": "1999Q4"
  },
  "model": {
    "lags": { "p": 2, "q": 1, "s": 1, "m": 1 },
    "countries": [
      { "id": "US",
        "domestic": ["short_rate", "output_growth", "inflation"],
        "foreign": ["output_growth", "inflation"],
        "shock_origin": true },
      { "id": "AA",
        "domestic": ["short_rate", "output_growth", "inflation"],
        "foreign": ["short_rate", "output_growth", "inflation"],
        "lags": { "p": 1 } }
    ]
  },
  "mcmc": { "burn": 10, "keep": 20 },
  "experiments": [
    { "name": "base", "origin": "US", "level_size": 1.0, "horizon": 8,
      "reps": 10, "coverage": 0.68,
      "groups": [ { "name": "aa_only", "members": ["AA"], "weights": [1.0] } ] }
  ]
})";

std::string with_inputs(const TempDir& dir, const std::string& body) {
  dir.file("panel.csv", "country,variable,quarter,value\n");
  dir.file("flows.csv", "from,to,exports,imports\n");
  return dir.file("run.json", body);
}

}  // namespace

TEST_CASE("config: full round trip with per-country overrides") {
  TempDir dir;
  RunConfig cfg = load_run_config(with_inputs(dir, kBase));

  CHECK(cfg.seed == 42);
  CHECK(cfg.out_dir == (dir.path / "out").string());
  CHECK(cfg.data.already_transformed);
  CHECK(cfg.data.base_country == "US");
  CHECK(cfg.data.training_split == Quarter{1999, 4});
  CHECK(cfg.data.series_csv == (dir.path / "panel.csv").string());

  REQUIRE(cfg.countries.size() == 2);
  CHECK(cfg.countries[0].is_shock_origin);
  CHECK(cfg.countries[0].lags.p == 2);
  CHECK(cfg.countries[1].lags.p == 1);   // override
  CHECK(cfg.countries[1].lags.q == 1);   // inherited
  CHECK_FALSE(cfg.countries[1].is_shock_origin);
  CHECK(cfg.countries[1].foreign.size() == 3);

  CHECK(cfg.mcmc.n_burn == 10);
  CHECK(cfg.mcmc.n_keep == 20);
  CHECK(cfg.mcmc.thin == 1);

  REQUIRE(cfg.experiments.size() == 1);
  const ExperimentConfig& exp = cfg.experiments[0];
  CHECK(exp.name == "base");
  CHECK(exp.shock.origin == "US");
  CHECK(exp.shock.horizon == 8);
  CHECK(exp.reps == 10);
  CHECK(exp.coverage == doctest::Approx(0.68));
  REQUIRE(exp.groups.size() == 1);
  CHECK(exp.groups[0].members == std::vector<std::string>{"AA"});

  CHECK(cfg.config_hash.size() == 16);
  RunConfig again = load_run_config((dir.path / "run.json").string());
  CHECK(again.config_hash == cfg.config_hash);
}

TEST_CASE("config: unknown keys are rejected everywhere") {
  TempDir dir;
  std::string body = kBase;
  body.insert(body.find("\"seed\""), "\"typo_key\": 1,\n  ");
  const std::string path = with_inputs(dir, body);
  CHECK_THROWS_WITH_AS(load_run_config(path),
                       doctest::Contains("unknown key \"typo_key\""),
                       ConfigError);
}

TEST_CASE("config: seed is mandatory and nonzero") {
  TempDir dir;
  std::string body = kBase;
  body.replace(body.find("\"seed\": 42"), 10, "\"seed\": 0");
  CHECK_THROWS_WITH_AS(load_run_config(with_inputs(dir, body)),
                       doctest::Contains("seed is mandatory"), ConfigError);

  std::string missing = kBase;
  missing.replace(missing.find("\"seed\": 42,"), 11, "");
  CHECK_THROWS_WITH_AS(load_run_config(with_inputs(dir, missing)),
                       doctest::Contains("seed"), ConfigError);
}

TEST_CASE("config: missing input files are named") {
  TempDir dir;
  const std::string path = dir.file("run.json", kBase);
  dir.file("flows.csv", "from,to,exports,imports\n");
  CHECK_THROWS_WITH_AS(load_run_config(path),
                       doctest::Contains("panel.csv"), ConfigError);
}

TEST_CASE("config: duplicate experiment names") {
  TempDir dir;
  std::string body = kBase;
  const std::string exp =
      R"({ "name": "base", "origin": "US", "level_size": 1.0, "horizon": 8,
      "reps": 10, "coverage": 0.68,
      "groups": [ { "name": "aa_only", "members": ["AA"], "weights": [1.0] } ] })";
  body.replace(body.find(exp), exp.size(), exp + ",\n    " + exp);
  CHECK_THROWS_WITH_AS(load_run_config(with_inputs(dir, body)),
                       doctest::Contains("duplicate experiment name"),
                       ConfigError);
}

TEST_CASE("config: group members must be configured countries") {
  TempDir dir;
  std::string body = kBase;
  const std::string needle = "\"members\": [\"AA\"]";
  body.replace(body.find(needle), needle.size(), "\"members\": [\"ZZ\"]");
  CHECK_THROWS_WITH_AS(load_run_config(with_inputs(dir, body)),
                       doctest::Contains("ZZ"), ConfigError);
}

TEST_CASE("config: experiment origin must be the designated shock origin") {
  TempDir dir;
  std::string body = kBase;
  const std::string needle = "\"origin\": \"US\"";
  body.replace(body.find(needle), needle.size(), "\"origin\": \"AA\"");
  CHECK_THROWS_AS(load_run_config(with_inputs(dir, body)), ConfigError);
}

TEST_CASE("config: malformed JSON reports the file") {
  TempDir dir;
  const std::string path = dir.file("broken.json", "{ not json");
  CHECK_THROWS_WITH_AS(load_run_config(path), doctest::Contains("broken.json"),
                       ConfigError);
}

TEST_CASE("config: bad coverage and reps are rejected") {
  TempDir dir;
  std::string body = kBase;
  body.replace(body.find("\"coverage\": 0.68"), 16, "\"coverage\": 1.00");
  CHECK_THROWS_WITH_AS(load_run_config(with_inputs(dir, body)),
                       doctest::Contains("coverage"), ConfigError);

  body = kBase;
  body.replace(body.find("\"reps\": 10"), 10, "\"reps\": 0");
  CHECK_THROWS_WITH_AS(load_run_config(with_inputs(dir, body)),
                       doctest::Contains("reps"), ConfigError);
}

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace std::string_literals;
namespace fs = std::filesystem;

namespace {

const std::string kCli = GVARSV_CLI_PATH;
const std::string kFixtures = GVARSV_FIXTURE_DIR;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("gvarsv_cli_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int n = 0;
    return n;
  }
  std::string at(const std::string& name) const {
    return (path / name).string();
  }
};

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string write_config(const TempDir& dir) {
  fs::copy_file(fs::path(kFixtures) / "panel.csv", dir.path / "panel.csv");
  fs::copy_file(fs::path(kFixtures) / "flows.csv", dir.path / "flows.csv");
  const char* body = R"({
  "seed": 321,
  "out_dir": "out",
  "data": {
    "series_csv": "panel.csv",
    "trade_flows_csv": "flows.csv",
    "already_transformed": true,
    "training_split": "1999Q4"
  },
  "model": {
    "lags": { "p": 1, "q": 1, "s": 1, "m": 1 },
    "countries": [
      { "id": "US",
        "domestic": ["short_rate", "output_growth", "inflation"],
        "foreign": ["output_growth", "inflation"],
        "shock_origin": true },
      { "id": "AA",
        "domestic": ["short_rate", "output_growth", "inflation"],
        "foreign": ["short_rate", "output_growth", "inflation"] },
      { "id": "BB",
        "domestic": ["short_rate", "output_growth", "inflation"],
        "foreign": ["short_rate", "output_growth", "inflation"] }
    ]
  },
  "mcmc": { "burn": 60, "keep": 60, "thin": 1 },
  "experiments": [
    { "name": "tiny", "origin": "US", "level_size": 1.0, "vol_shock": 1.0,
      "horizon": 6, "reps": 8, "coverage": 0.68,
      "groups": [ { "name": "partners", "members": ["AA", "BB"],
                    "weights": [0.5, 0.5] } ] }
  ]
})";
  std::ofstream out(dir.path / "run.json", std::ios::binary);
  out << body;
  return dir.at("run.json");
}

}  // namespace

TEST_CASE("cli: argument and config errors exit with 2") {
  CHECK(run("") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("ingest") == 2);                                // no --config
  CHECK(run("ingest --config /nonexistent/run.json") == 2);
  TempDir dir;
  const std::string cfg = write_config(dir);
  CHECK(run("ingest --config " + cfg + " --seed 0") == 2);  // zero seed
  CHECK(run("ingest --config " + cfg + " --bogus-flag") == 2);
}

TEST_CASE("cli: stages demand their upstream artifacts") {
  TempDir dir;
  const std::string cfg = write_config(dir);
  CHECK(run("estimate --config " + cfg) == 2);  // no panel yet
  CHECK(run("ingest --config " + cfg) == 0);
  CHECK(run("solve --config " + cfg) == 2);     // no draws yet
  CHECK(run("irf --config " + cfg) == 2);
}

TEST_CASE("cli: full pipeline runs, is deterministic, and honors --jobs") {
  TempDir dir;
  const std::string cfg = write_config(dir);
  REQUIRE(run("ingest --config " + cfg) == 0);
  REQUIRE(run("estimate --config " + cfg + " --jobs 3") == 0);
  REQUIRE(run("solve --config " + cfg) == 0);
  REQUIRE(run("irf --config " + cfg + " --jobs 2") == 0);
  REQUIRE(run("decompose --config " + cfg + " --jobs 2") == 0);
  REQUIRE(run("report --config " + cfg) == 0);

  const fs::path out = dir.path / "out";
  const std::vector<std::string> files = {
      "panel.csv",         "weights.csv",
      "draws_US.bin",      "draws_AA.bin",
      "draws_BB.bin",      "stability.csv",
      "irf_tiny.csv",      "irf_tiny.json",
      "decompose_tiny.csv", "decompose_tiny.json",
      "report.md",
      "ingest_manifest.json",  "estimate_manifest.json",
      "solve_manifest.json",   "irf_manifest.json",
      "decompose_manifest.json", "report_manifest.json"};
  std::map<std::string, std::string> before;
  for (const auto& f : files) {
    CAPTURE(f);
    REQUIRE(fs::exists(out / f));
    before[f] = slurp((out / f).string());
  }

  // rerun everything in place, single-threaded, to prove byte determinism
  REQUIRE(run("ingest --config " + cfg) == 0);
  REQUIRE(run("estimate --config " + cfg) == 0);
  REQUIRE(run("solve --config " + cfg) == 0);
  REQUIRE(run("irf --config " + cfg) == 0);
  REQUIRE(run("decompose --config " + cfg) == 0);
  REQUIRE(run("report --config " + cfg) == 0);
  for (const auto& f : files) {
    CAPTURE(f);
    CHECK(slurp((out / f).string()) == before[f]);
  }

  // a different seed must change the posterior artifacts
  REQUIRE(run("estimate --config " + cfg + " --seed 999") == 0);
  CHECK(slurp((out / "draws_US.bin").string()) != before["draws_US.bin"]);
}

TEST_CASE("cli: --out redirects artifacts") {
  TempDir dir;
  const std::string cfg = write_config(dir);
  const std::string alt = dir.at("elsewhere");
  REQUIRE(run("ingest --config " + cfg + " --out " + alt) == 0);
  CHECK(fs::exists(fs::path(alt) / "panel.csv"));
  CHECK_FALSE(fs::exists(dir.path / "out" / "panel.csv"));
}

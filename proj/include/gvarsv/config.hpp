#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gvarsv/ingest.hpp"
#include "gvarsv/shocks.hpp"
#include "gvarsv/types.hpp"
#include "gvarsv/varx.hpp"

namespace gvarsv {

// A region assembled at ingest time from member countries (PPP-GDP weighted
// series averages, summed trade flows).
struct RegionConfig {
  std::string id;
  std::vector<std::string> members;
  std::string weights_csv;
};

struct DataConfig {
  std::string series_csv;
  std::string trade_flows_csv;
  std::string shadow_rates_csv;  // empty = no override
  // true: series_csv is already a canonical growth-rate panel snapshot and
  // the transform/aggregation steps are skipped
  bool already_transformed = false;
  std::string base_country = "US";
  FlowBasis flow_basis = FlowBasis::Total;
  Quarter training_split = Quarter(1900, 1);
  std::vector<RegionConfig> regions;
};

struct ExperimentConfig {
  std::string name;
  ShockSpec shock;
  int reps = 200;
  double coverage = 0.68;
  std::vector<Group> groups;
};

struct RunConfig {
  DataConfig data;
  std::vector<CountrySpec> countries;
  McmcConfig mcmc;
  std::vector<ExperimentConfig> experiments;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  // drop draws whose level dynamics are explosive before simulating
  // (the stability report lists them either way)
  bool filter_unstable = false;
  std::string config_hash;  // hash of the file bytes, set by load_run_config

  void validate() const;
};

// Parses and validates the JSON run configuration. Relative paths inside the
// file are resolved against the file's directory. Unknown keys are errors.
RunConfig load_run_config(const std::string& path);

}  // namespace gvarsv

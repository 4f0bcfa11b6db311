#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gvarsv/stack.hpp"
#include "gvarsv/types.hpp"
#include "gvarsv/varx.hpp"

namespace gvarsv {

// FNV-1a 64 over the file's bytes, as 16 hex digits.
std::string file_hash(const std::string& path);

// Stage provenance record. Deliberately carries no timestamps so that
// byte-identical reruns produce byte-identical manifests.
struct Manifest {
  std::string stage;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<std::pair<std::string, std::string>> inputs;   // name -> hash
  std::vector<std::pair<std::string, std::string>> outputs;  // name -> hash
  nlohmann::ordered_json diagnostics = nlohmann::ordered_json::object();
};

void write_manifest(const Manifest& manifest, const std::string& path);

// Versioned little-endian binary serialization of one country's posterior.
// The reader checks the embedded shape against `spec` and revalidates the
// identification draws, so a stale or mismatched artifact cannot flow into
// simulation silently.
void write_draws(const std::string& path, const PosteriorDraws& draws,
                 const CountrySpec& spec);
PosteriorDraws read_draws(const std::string& path, const CountrySpec& spec);

void write_stability_csv(const StabilityReport& report,
                         const std::string& path);

}  // namespace gvarsv

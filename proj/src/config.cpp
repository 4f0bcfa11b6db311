#include "gvarsv/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "gvarsv/util.hpp"

namespace gvarsv {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

void reject_unknown_keys(const json& obj, const std::string& where,
                         const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
}

const json& require(const json& obj, const std::string& where,
                    const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw ConfigError("missing key \"" + key + "\" in " + where);
  return *it;
}

std::string require_string(const json& obj, const std::string& where,
                           const std::string& key) {
  const json& v = require(obj, where, key);
  if (!v.is_string())
    throw ConfigError(where + "." + key + " must be a string");
  return v.get<std::string>();
}

std::vector<VariableKind> parse_kinds(const json& arr,
                                      const std::string& where) {
  if (!arr.is_array() || arr.empty())
    throw ConfigError(where + " must be a non-empty array of variable names");
  std::vector<VariableKind> kinds;
  for (const auto& v : arr) {
    if (!v.is_string())
      throw ConfigError(where + " entries must be strings");
    try {
      kinds.push_back(kind_from_token(v.get<std::string>()));
    } catch (const DataError& e) {
      throw ConfigError(std::string(e.what()) + " in " + where);
    }
  }
  return kinds;
}

LagOrders parse_lags(const json& obj, const std::string& where,
                     LagOrders base) {
  reject_unknown_keys(obj, where, {"p", "q", "s", "m"});
  if (obj.contains("p")) base.p = obj["p"].get<int>();
  if (obj.contains("q")) base.q = obj["q"].get<int>();
  if (obj.contains("s")) base.s = obj["s"].get<int>();
  if (obj.contains("m")) base.m = obj["m"].get<int>();
  try {
    base.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(std::string(e.what()) + " in " + where);
  }
  return base;
}

std::string resolve(const std::filesystem::path& base,
                    const std::string& rel) {
  if (rel.empty()) return rel;
  std::filesystem::path p(rel);
  if (p.is_absolute()) return rel;
  return (base / p).lexically_normal().string();
}

void require_file(const std::string& path, const std::string& what) {
  if (!std::filesystem::exists(path))
    throw ConfigError(what + " file does not exist: " + path);
}

Quarter parse_quarter_key(const json& obj, const std::string& where,
                          const std::string& key) {
  const std::string text = require_string(obj, where, key);
  try {
    return Quarter::parse(text);
  } catch (const Error& e) {
    throw ConfigError(std::string(e.what()) + " in " + where + "." + key);
  }
}

Group parse_group(const json& obj, const std::string& where) {
  reject_unknown_keys(obj, where, {"name", "members", "weights"});
  Group group;
  group.name = require_string(obj, where, "name");
  const json& members = require(obj, where, "members");
  const json& weights = require(obj, where, "weights");
  if (!members.is_array() || !weights.is_array())
    throw ConfigError(where + ".members and .weights must be arrays");
  for (const auto& m : members) group.members.push_back(m.get<std::string>());
  for (const auto& w : weights) group.weights.push_back(w.get<double>());
  if (group.members.size() != group.weights.size())
    throw ConfigError(where + ": one weight per member required");
  return group;
}

}  // namespace

void RunConfig::validate() const {
  if (seed == 0)
    throw ConfigError("seed is mandatory and must be nonzero");
  if (countries.empty()) throw ConfigError("model.countries must be non-empty");
  try {
    validate_specs(countries);
    for (const auto& spec : countries) mcmc.validate(spec);
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  if (out_dir.empty()) throw ConfigError("out_dir must be non-empty");

  std::set<std::string> names;
  std::set<std::string> ids;
  for (const auto& spec : countries) ids.insert(spec.id);
  for (const auto& exp : experiments) {
    if (exp.name.empty())
      throw ConfigError("experiments need non-empty names");
    if (!names.insert(exp.name).second)
      throw ConfigError("duplicate experiment name " + exp.name);
    try {
      exp.shock.validate();
    } catch (const ValidationError& e) {
      throw ConfigError(std::string(e.what()) + " in experiment " + exp.name);
    }
    bool origin_ok = false;
    for (const auto& spec : countries)
      if (spec.id == exp.shock.origin && spec.is_shock_origin)
        origin_ok = true;
    if (!origin_ok)
      throw ConfigError("experiment " + exp.name + ": origin " +
                        exp.shock.origin +
                        " is not the configured shock-origin country");
    if (exp.reps < 1)
      throw ConfigError("experiment " + exp.name + ": reps must be >= 1");
    if (!(exp.coverage >= 0.0) || exp.coverage >= 1.0)
      throw ConfigError("experiment " + exp.name +
                        ": coverage must lie in [0, 1)");
    for (const auto& group : exp.groups)
      for (const auto& member : group.members)
        if (!ids.count(member))
          throw ConfigError("experiment " + exp.name + ": group " +
                            group.name + " references unknown country " +
                            member);
  }
  for (const auto& region : data.regions) {
    if (region.members.size() < 2)
      throw ConfigError("region " + region.id + " needs at least 2 members");
    if (!ids.count(region.id))
      throw ConfigError("region " + region.id +
                        " is not in the model country list");
  }
}

RunConfig load_run_config(const std::string& path) {
  const std::string text = read_file(path);
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");
  reject_unknown_keys(root, "config", {"seed", "out_dir", "data", "model",
                                       "mcmc", "experiments",
                                       "filter_unstable"});

  const std::filesystem::path base =
      std::filesystem::path(path).parent_path();
  RunConfig cfg;
  cfg.config_hash = hex64(fnv1a64(text.data(), text.size()));

  const json& seed = require(root, "config", "seed");
  if (!seed.is_number_unsigned() && !seed.is_number_integer())
    throw ConfigError("seed must be an unsigned integer");
  cfg.seed = seed.get<std::uint64_t>();
  if (root.contains("out_dir"))
    cfg.out_dir = resolve(base, root["out_dir"].get<std::string>());
  else
    cfg.out_dir = resolve(base, "out");
  if (root.contains("filter_unstable"))
    cfg.filter_unstable = root["filter_unstable"].get<bool>();

  {
    const json& data = require(root, "config", "data");
    reject_unknown_keys(data, "data",
                        {"series_csv", "trade_flows_csv", "shadow_rates_csv",
                         "already_transformed", "base_country", "flow_basis",
                         "training_split", "regions"});
    cfg.data.series_csv =
        resolve(base, require_string(data, "data", "series_csv"));
    cfg.data.trade_flows_csv =
        resolve(base, require_string(data, "data", "trade_flows_csv"));
    if (data.contains("shadow_rates_csv"))
      cfg.data.shadow_rates_csv =
          resolve(base, data["shadow_rates_csv"].get<std::string>());
    if (data.contains("already_transformed"))
      cfg.data.already_transformed = data["already_transformed"].get<bool>();
    if (data.contains("base_country"))
      cfg.data.base_country = data["base_country"].get<std::string>();
    if (data.contains("flow_basis")) {
      try {
        cfg.data.flow_basis =
            flow_basis_from_token(data["flow_basis"].get<std::string>());
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
    }
    cfg.data.training_split =
        parse_quarter_key(data, "data", "training_split");
    if (data.contains("regions")) {
      for (const auto& r : data["regions"]) {
        reject_unknown_keys(r, "data.regions[]",
                            {"id", "members", "weights_csv"});
        RegionConfig region;
        region.id = require_string(r, "data.regions[]", "id");
        for (const auto& m : require(r, "data.regions[]", "members"))
          region.members.push_back(m.get<std::string>());
        region.weights_csv = resolve(
            base, require_string(r, "data.regions[]", "weights_csv"));
        cfg.data.regions.push_back(std::move(region));
      }
    }
    require_file(cfg.data.series_csv, "data.series_csv");
    require_file(cfg.data.trade_flows_csv, "data.trade_flows_csv");
    if (!cfg.data.shadow_rates_csv.empty())
      require_file(cfg.data.shadow_rates_csv, "data.shadow_rates_csv");
    for (const auto& region : cfg.data.regions)
      require_file(region.weights_csv,
                   "weights for region " + region.id);
  }

  {
    const json& model = require(root, "config", "model");
    reject_unknown_keys(model, "model", {"lags", "countries"});
    LagOrders global;
    if (model.contains("lags"))
      global = parse_lags(model["lags"], "model.lags", LagOrders{});
    const json& countries = require(model, "model", "countries");
    if (!countries.is_array() || countries.empty())
      throw ConfigError("model.countries must be a non-empty array");
    for (const auto& c : countries) {
      const std::string where = "model.countries[]";
      reject_unknown_keys(c, where,
                          {"id", "domestic", "foreign", "shock_origin",
                           "lags"});
      CountrySpec spec;
      spec.id = require_string(c, where, "id");
      spec.domestic = parse_kinds(require(c, where, "domestic"),
                                  where + ".domestic");
      if (c.contains("foreign"))
        spec.foreign = parse_kinds(c["foreign"], where + ".foreign");
      if (c.contains("shock_origin"))
        spec.is_shock_origin = c["shock_origin"].get<bool>();
      spec.lags = c.contains("lags")
                      ? parse_lags(c["lags"], where + ".lags", global)
                      : global;
      try {
        spec.validate();
      } catch (const ValidationError& e) {
        throw ConfigError(std::string(e.what()) + " for country " + spec.id);
      }
      cfg.countries.push_back(std::move(spec));
    }
  }

  if (root.contains("mcmc")) {
    const json& mcmc = root["mcmc"];
    reject_unknown_keys(mcmc, "mcmc",
                        {"burn", "keep", "thin", "h_step", "sign_cap",
                         "include_vol_in_mean"});
    if (mcmc.contains("burn")) cfg.mcmc.n_burn = mcmc["burn"].get<int>();
    if (mcmc.contains("keep")) cfg.mcmc.n_keep = mcmc["keep"].get<int>();
    if (mcmc.contains("thin")) cfg.mcmc.thin = mcmc["thin"].get<int>();
    if (mcmc.contains("h_step"))
      cfg.mcmc.h_step = mcmc["h_step"].get<double>();
    if (mcmc.contains("sign_cap"))
      cfg.mcmc.sign_cap = mcmc["sign_cap"].get<int>();
    if (mcmc.contains("include_vol_in_mean"))
      cfg.mcmc.include_vol_in_mean =
          mcmc["include_vol_in_mean"].get<bool>();
  }

  if (root.contains("experiments")) {
    for (const auto& e : root["experiments"]) {
      const std::string where = "experiments[]";
      reject_unknown_keys(e, where,
                          {"name", "origin", "level_size", "vol_shock",
                           "horizon", "reps", "coverage", "groups"});
      ExperimentConfig exp;
      exp.name = require_string(e, where, "name");
      exp.shock.origin = require_string(e, where, "origin");
      if (e.contains("level_size"))
        exp.shock.level_size = e["level_size"].get<double>();
      if (e.contains("vol_shock"))
        exp.shock.vol_shock = e["vol_shock"].get<double>();
      if (e.contains("horizon")) exp.shock.horizon = e["horizon"].get<int>();
      if (e.contains("reps")) exp.reps = e["reps"].get<int>();
      if (e.contains("coverage")) exp.coverage = e["coverage"].get<double>();
      if (e.contains("groups"))
        for (const auto& g : e["groups"])
          exp.groups.push_back(
              parse_group(g, "experiment " + exp.name + " group"));
      cfg.experiments.push_back(std::move(exp));
    }
  }

  cfg.validate();
  return cfg;
}

}  // namespace gvarsv

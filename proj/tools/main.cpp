#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gvarsv/artifacts.hpp"
#include "gvarsv/config.hpp"
#include "gvarsv/csv.hpp"
#include "gvarsv/errors.hpp"
#include "gvarsv/ingest.hpp"
#include "gvarsv/rng.hpp"
#include "gvarsv/shocks.hpp"
#include "gvarsv/stack.hpp"
#include "gvarsv/util.hpp"
#include "gvarsv/varx.hpp"

namespace fs = std::filesystem;
using namespace gvarsv;

namespace {

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::string draws_file(const RunConfig& cfg, const std::string& id) {
  return join(cfg.out_dir, "draws_" + id + ".bin");
}

void require_artifact(const std::string& path, const std::string& producer) {
  if (!fs::exists(path))
    throw ConfigError("missing artifact " + path + "; run `gvarsv " +
                      producer + "` first");
}

const RegionConfig* region_of(const RunConfig& cfg, const std::string& id) {
  for (const auto& region : cfg.data.regions)
    if (region.id == id) return &region;
  return nullptr;
}

TradeFlows restrict_flows(const TradeFlows& flows,
                          const std::vector<CountrySpec>& specs) {
  const int n = static_cast<int>(specs.size());
  std::vector<int> idx(n, -1);
  for (int i = 0; i < n; ++i) {
    for (size_t j = 0; j < flows.order.size(); ++j)
      if (flows.order[j] == specs[i].id) idx[i] = static_cast<int>(j);
    if (idx[i] < 0)
      throw ConfigError("trade flows lack country " + specs[i].id);
  }
  TradeFlows out;
  out.exports.set_size(n, n);
  out.imports.set_size(n, n);
  for (int i = 0; i < n; ++i) {
    out.order.push_back(specs[i].id);
    for (int j = 0; j < n; ++j) {
      out.exports(i, j) = flows.exports(idx[i], idx[j]);
      out.imports(i, j) = flows.imports(idx[i], idx[j]);
    }
  }
  return out;
}

// ---------------------------------------------------------------- ingest

int cmd_ingest(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  Manifest man;
  man.stage = "ingest";
  man.seed = cfg.seed;
  man.config_hash = cfg.config_hash;
  man.inputs.emplace_back(cfg.data.series_csv,
                          file_hash(cfg.data.series_csv));
  man.inputs.emplace_back(cfg.data.trade_flows_csv,
                          file_hash(cfg.data.trade_flows_csv));
  if (!cfg.data.shadow_rates_csv.empty())
    man.inputs.emplace_back(cfg.data.shadow_rates_csv,
                            file_hash(cfg.data.shadow_rates_csv));
  for (const auto& region : cfg.data.regions)
    man.inputs.emplace_back(region.weights_csv,
                            file_hash(region.weights_csv));

  Panel panel = [&] {
    if (cfg.data.already_transformed)
      return read_panel_csv(cfg.data.series_csv, cfg.countries,
                            cfg.data.training_split);
    RawPanel raw = load_raw(cfg.data.series_csv);
    if (!cfg.data.shadow_rates_csv.empty())
      apply_shadow_rates(raw, cfg.data.shadow_rates_csv);
    std::vector<CountrySpec> member_specs;
    for (const auto& spec : cfg.countries) {
      if (const RegionConfig* region = region_of(cfg, spec.id)) {
        for (const auto& member : region->members) {
          CountrySpec ms = spec;
          ms.id = member;
          member_specs.push_back(std::move(ms));
        }
      } else {
        member_specs.push_back(spec);
      }
    }
    Panel p = transform(raw, member_specs, cfg.data.base_country,
                        cfg.data.training_split);
    for (const auto& region : cfg.data.regions) {
      const auto table = load_weights_csv(region.weights_csv);
      std::vector<double> weights;
      for (const auto& member : region.members) {
        auto it = table.find(member);
        if (it == table.end())
          throw ConfigError(region.weights_csv + " lacks a weight for " +
                            member);
        weights.push_back(it->second);
      }
      p = aggregate_region(p, region.id, region.members, weights);
    }
    return p;
  }();

  TradeFlows flows = load_trade_flows(cfg.data.trade_flows_csv);
  for (const auto& region : cfg.data.regions)
    flows = aggregate_trade_flows(flows, region.id, region.members);
  flows = restrict_flows(flows, cfg.countries);
  WeightMatrix weights = build_weight_matrix(flows, cfg.data.flow_basis);

  const std::string panel_path = join(cfg.out_dir, "panel.csv");
  const std::string weights_path = join(cfg.out_dir, "weights.csv");
  write_panel_csv(panel, panel_path);
  write_weight_matrix_csv(weights, weights_path);
  man.outputs.emplace_back(panel_path, file_hash(panel_path));
  man.outputs.emplace_back(weights_path, file_hash(weights_path));
  man.diagnostics["countries"] = panel.countries().size();
  man.diagnostics["rows"] = panel.rows();
  man.diagnostics["grid"] =
      panel.start().str() + ".." + panel.last().str();
  write_manifest(man, join(cfg.out_dir, "ingest_manifest.json"));
  std::printf("ingest: %d countries, %d quarters (%s..%s)\n",
              static_cast<int>(panel.countries().size()), panel.rows(),
              panel.start().str().c_str(), panel.last().str().c_str());
  return 0;
}

// ------------------------------------------------------------- estimate

struct LoadedInputs {
  Panel panel;
  WeightMatrix weights;
};

LoadedInputs load_panel_weights(const RunConfig& cfg) {
  const std::string panel_path = join(cfg.out_dir, "panel.csv");
  const std::string weights_path = join(cfg.out_dir, "weights.csv");
  require_artifact(panel_path, "ingest");
  require_artifact(weights_path, "ingest");
  Panel panel = read_panel_csv(panel_path, cfg.countries,
                               cfg.data.training_split);
  WeightMatrix weights = read_weight_matrix_csv(weights_path);
  std::vector<std::string> want;
  for (const auto& spec : cfg.countries) want.push_back(spec.id);
  if (weights.order() != want)
    throw ConfigError("weights.csv country order does not match the "
                      "configured model; re-run ingest");
  return {std::move(panel), std::move(weights)};
}

int cmd_estimate(const RunConfig& cfg, int jobs) {
  LoadedInputs in = load_panel_weights(cfg);
  const int n = static_cast<int>(cfg.countries.size());
  std::vector<std::string> errors(n);
  std::vector<nlohmann::ordered_json> diag(n);

  parallel_for(n, jobs, [&](int i) {
    const CountrySpec& spec = cfg.countries[i];
    try {
      EstimationFrame frame = build_frame(in.panel, in.weights, spec);
      Priors priors = build_priors(in.panel, in.weights, spec);
      PosteriorDraws draws = sample_posterior(
          frame, priors, cfg.mcmc,
          derive_seed(cfg.seed, {fnv1a64("estimate"), fnv1a64(spec.id)}));
      write_draws(draws_file(cfg, spec.id), draws, spec);
      auto d = nlohmann::ordered_json::object();
      d["draws"] = draws.n_draws();
      d["h_accept_rate"] = draws.h_accept_rate;
      d["sign_rejections"] = draws.sign_rejections;
      d["window_start"] = draws.window_start.str();
      diag[i] = std::move(d);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  Manifest man;
  man.stage = "estimate";
  man.seed = cfg.seed;
  man.config_hash = cfg.config_hash;
  man.inputs.emplace_back(join(cfg.out_dir, "panel.csv"),
                          file_hash(join(cfg.out_dir, "panel.csv")));
  man.inputs.emplace_back(join(cfg.out_dir, "weights.csv"),
                          file_hash(join(cfg.out_dir, "weights.csv")));
  bool failed = false;
  for (int i = 0; i < n; ++i) {
    const std::string& id = cfg.countries[i].id;
    if (!errors[i].empty()) {
      failed = true;
      auto d = nlohmann::ordered_json::object();
      d["failed"] = errors[i];
      man.diagnostics[id] = std::move(d);
      std::fprintf(stderr, "estimate %s: %s\n", id.c_str(),
                   errors[i].c_str());
    } else {
      man.diagnostics[id] = std::move(diag[i]);
      man.outputs.emplace_back(draws_file(cfg, id),
                               file_hash(draws_file(cfg, id)));
      std::printf("estimate %s: %lld draws, h acceptance %.3f\n", id.c_str(),
                  static_cast<long long>(man.diagnostics[id]["draws"]
                                             .get<int>()),
                  man.diagnostics[id]["h_accept_rate"].get<double>());
    }
  }
  write_manifest(man, join(cfg.out_dir, "estimate_manifest.json"));
  return failed ? 1 : 0;
}

// ----------------------------------------------------- stacked artifacts

SimInput load_sim_input(const RunConfig& cfg, const LoadedInputs& in,
                        std::vector<std::pair<std::string, std::string>>*
                            hashes) {
  std::vector<PosteriorDraws> posts;
  for (const auto& spec : cfg.countries) {
    const std::string path = draws_file(cfg, spec.id);
    require_artifact(path, "estimate");
    if (hashes) hashes->emplace_back(path, file_hash(path));
    posts.push_back(read_draws(path, spec));
  }
  LinkMatrices links = build_links(in.weights, cfg.countries);
  return build_sim_input(links, posts, in.panel);
}

int cmd_solve(const RunConfig& cfg) {
  LoadedInputs in = load_panel_weights(cfg);
  Manifest man;
  man.stage = "solve";
  man.seed = cfg.seed;
  man.config_hash = cfg.config_hash;
  SimInput input = load_sim_input(cfg, in, &man.inputs);
  StabilityReport report = check_stability(input.draws);
  const std::string path = join(cfg.out_dir, "stability.csv");
  write_stability_csv(report, path);
  man.outputs.emplace_back(path, file_hash(path));
  man.diagnostics["draws"] = input.n_draws();
  man.diagnostics["flagged"] = report.flagged.n_elem;
  man.diagnostics["max_radius"] = report.radius.max();
  man.diagnostics["level_unit"] = input.level_unit;
  write_manifest(man, join(cfg.out_dir, "solve_manifest.json"));
  std::printf("solve: %d stacked draws, %d explosive, max radius %.4f\n",
              input.n_draws(), static_cast<int>(report.flagged.n_elem),
              report.radius.max());
  return 0;
}

// ------------------------------------------------------- irf / decompose

void drop_unstable(SimInput& input, Manifest& man) {
  StabilityReport report = check_stability(input.draws);
  if (report.flagged.n_elem == 0) {
    man.diagnostics["dropped_unstable"] = 0;
    return;
  }
  std::set<arma::uword> bad(report.flagged.begin(), report.flagged.end());
  if (bad.size() == input.draws.size())
    throw NumericError("every posterior draw is explosive; nothing to "
                       "simulate");
  std::vector<GlobalModel> keep_draws;
  std::vector<SimState> keep_states;
  for (size_t d = 0; d < input.draws.size(); ++d) {
    if (bad.count(static_cast<arma::uword>(d))) continue;
    keep_draws.push_back(std::move(input.draws[d]));
    keep_states.push_back(std::move(input.states[d]));
  }
  man.diagnostics["dropped_unstable"] = bad.size();
  input.draws = std::move(keep_draws);
  input.states = std::move(keep_states);
}

std::vector<VariableKind> group_kinds(const LinkMatrices& links,
                                      const Group& group) {
  static const VariableKind all[] = {
      VariableKind::ShortRate, VariableKind::OutputGrowth,
      VariableKind::Inflation, VariableKind::RealFxGrowth,
      VariableKind::EquityPriceGrowth};
  std::vector<VariableKind> kinds;
  for (VariableKind kind : all) {
    bool all = true;
    for (const auto& member : group.members) {
      bool found = false;
      for (const auto& spec : links.specs())
        if (spec.id == member && spec.has_domestic(kind)) found = true;
      if (!found) all = false;
    }
    if (all) kinds.push_back(kind);
  }
  return kinds;
}

void append_group_records(IrfSet& set, const Group& group,
                          const std::vector<VariableKind>& kinds,
                          const std::string& regime, const BandSet& b) {
  for (size_t v = 0; v < kinds.size(); ++v)
    for (arma::uword hz = 0; hz < b.median.n_cols; ++hz) {
      IrfRecord rec;
      rec.country = group.name;
      rec.variable = to_token(kinds[v]);
      rec.regime = regime;
      rec.horizon = static_cast<int>(hz);
      rec.median = b.median(v, hz);
      rec.lo = b.lo(v, hz);
      rec.hi = b.hi(v, hz);
      set.records.push_back(std::move(rec));
    }
}

void add_groups(IrfSet& set, const ExperimentConfig& exp,
                const LinkMatrices& links, const arma::cube& per_draw_x,
                const std::string& regime) {
  for (const auto& group : exp.groups) {
    const auto kinds = group_kinds(links, group);
    if (kinds.empty())
      throw ConfigError("group " + group.name +
                        " has no variable shared by every member");
    arma::cube agg = aggregate_group(per_draw_x, links, group, kinds);
    append_group_records(set, group, kinds, regime,
                         bands(agg, exp.coverage));
  }
}

int cmd_irf(const RunConfig& cfg, int jobs, bool decompose) {
  if (cfg.experiments.empty())
    throw ConfigError("config lists no experiments");
  LoadedInputs in = load_panel_weights(cfg);
  Manifest man;
  man.stage = decompose ? "decompose" : "irf";
  man.seed = cfg.seed;
  man.config_hash = cfg.config_hash;
  SimInput input = load_sim_input(cfg, in, &man.inputs);
  if (cfg.filter_unstable) drop_unstable(input, man);

  const std::string stage = decompose ? "decompose" : "irf";
  for (const auto& exp : cfg.experiments) {
    const std::uint64_t seed =
        derive_seed(cfg.seed, {fnv1a64(stage), fnv1a64(exp.name)});
    IrfSet set;
    if (decompose) {
      Decomposition dec =
          decompose_direct_total(input, exp.shock, exp.reps, seed, jobs);
      append_irf_records(set, input.links, exp.name + ":total",
                         bands(dec.total.x, exp.coverage),
                         bands(dec.total.h, exp.coverage));
      append_irf_records(set, input.links, exp.name + ":direct",
                         bands(dec.direct.x, exp.coverage),
                         bands(dec.direct.h, exp.coverage));
      add_groups(set, exp, input.links, dec.total.x, exp.name + ":total");
      add_groups(set, exp, input.links, dec.direct.x, exp.name + ":direct");
    } else {
      IrfDraws g = girf(input, exp.shock, exp.reps, seed, jobs);
      append_irf_records(set, input.links, exp.name,
                         bands(g.x, exp.coverage), bands(g.h, exp.coverage));
      add_groups(set, exp, input.links, g.x, exp.name);
    }
    const std::string base = stage + "_" + exp.name;
    const std::string csv_path = join(cfg.out_dir, base + ".csv");
    const std::string json_path = join(cfg.out_dir, base + ".json");
    write_irf_csv(set, csv_path);
    write_irf_json(set, json_path);
    man.outputs.emplace_back(csv_path, file_hash(csv_path));
    man.outputs.emplace_back(json_path, file_hash(json_path));
    auto d = nlohmann::ordered_json::object();
    d["records"] = set.records.size();
    d["reps"] = exp.reps;
    d["horizon"] = exp.shock.horizon;
    man.diagnostics[exp.name] = std::move(d);
    std::printf("%s %s: %d records\n", stage.c_str(), exp.name.c_str(),
                static_cast<int>(set.records.size()));
  }
  man.diagnostics["draws_used"] = input.n_draws();
  man.diagnostics["level_unit"] = input.level_unit;
  write_manifest(man, join(cfg.out_dir, stage + "_manifest.json"));
  return 0;
}

// ---------------------------------------------------------------- report

struct BandCell {
  double median = 0.0, lo = 0.0, hi = 0.0;
  bool present = false;
};

using ImpactTable =
    std::map<std::string, std::map<std::string, BandCell>>;  // country -> var

ImpactTable impacts_at(const CsvTable& table, const std::string& regime,
                       int horizon) {
  ImpactTable out;
  const int c_country = table.col("country");
  const int c_variable = table.col("variable");
  const int c_regime = table.col("regime");
  const int c_horizon = table.col("horizon");
  const int c_median = table.col("median");
  const int c_lo = table.col("lo");
  const int c_hi = table.col("hi");
  for (const auto& row : table.rows) {
    if (row[c_regime] != regime) continue;
    if (std::stoi(row[c_horizon]) != horizon) continue;
    BandCell cell;
    cell.median = parse_double(row[c_median], "median");
    cell.lo = parse_double(row[c_lo], "lo");
    cell.hi = parse_double(row[c_hi], "hi");
    cell.present = true;
    out[row[c_country]][row[c_variable]] = cell;
  }
  return out;
}

std::string fmt3(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

int cmd_report(const RunConfig& cfg) {
  std::string md;
  md += "# Spillover run report\n\n";
  Manifest man;
  man.stage = "report";
  man.seed = cfg.seed;
  man.config_hash = cfg.config_hash;

  const std::string stability_path = join(cfg.out_dir, "stability.csv");
  if (fs::exists(stability_path)) {
    CsvTable table = read_csv(stability_path);
    int flagged = 0;
    const int c_flag = table.col("flagged");
    for (const auto& row : table.rows)
      if (row[c_flag] == "1") ++flagged;
    md += "Stability: " + std::to_string(table.rows.size()) +
          " stacked draws, " + std::to_string(flagged) +
          " flagged explosive.\n\n";
    man.inputs.emplace_back(stability_path, file_hash(stability_path));
  }

  for (const auto& exp : cfg.experiments) {
    md += "## Experiment " + exp.name + "\n\n";
    md += "Shock: origin " + exp.shock.origin + ", level " +
          fmt3(exp.shock.level_size) + " sd, volatility co-shock " +
          fmt3(exp.shock.vol_shock) + " sd, horizon " +
          std::to_string(exp.shock.horizon) + ".\n\n";

    const std::string irf_path =
        join(cfg.out_dir, "irf_" + exp.name + ".csv");
    if (fs::exists(irf_path)) {
      CsvTable table = read_csv(irf_path);
      man.inputs.emplace_back(irf_path, file_hash(irf_path));
      ImpactTable impacts = impacts_at(table, exp.name, 0);
      md += "Impact responses (horizon 0, median [lo, hi]):\n\n";
      md += "| country | variable | impact |\n|---|---|---|\n";
      for (const auto& [country, vars] : impacts)
        for (const auto& [variable, cell] : vars)
          if (variable.rfind("h:", 0) != 0)
            md += "| " + country + " | " + variable + " | " +
                  fmt3(cell.median) + " [" + fmt3(cell.lo) + ", " +
                  fmt3(cell.hi) + "] |\n";
      md += "\n";
    }

    const std::string dec_path =
        join(cfg.out_dir, "decompose_" + exp.name + ".csv");
    if (fs::exists(dec_path)) {
      CsvTable table = read_csv(dec_path);
      man.inputs.emplace_back(dec_path, file_hash(dec_path));
      ImpactTable total = impacts_at(table, exp.name + ":total", 0);
      ImpactTable direct = impacts_at(table, exp.name + ":direct", 0);
      md += "Direct vs total at impact (median):\n\n";
      md += "| country | variable | direct | total | total/direct |\n";
      md += "|---|---|---|---|---|\n";
      for (const auto& [country, vars] : total)
        for (const auto& [variable, cell] : vars) {
          if (variable.rfind("h:", 0) == 0) continue;
          const BandCell d = direct[country][variable];
          if (!d.present) continue;
          const std::string ratio =
              std::abs(d.median) < 1e-12
                  ? "n/a"
                  : fmt3(cell.median / d.median);
          md += "| " + country + " | " + variable + " | " +
                fmt3(d.median) + " | " + fmt3(cell.median) + " | " + ratio +
                " |\n";
        }
      md += "\n";
    }
  }

  const std::string report_path = join(cfg.out_dir, "report.md");
  std::ofstream out(report_path, std::ios::binary);
  if (!out) throw DataError("cannot open " + report_path + " for writing");
  out << md;
  out.close();
  man.outputs.emplace_back(report_path, file_hash(report_path));
  write_manifest(man, join(cfg.out_dir, "report_manifest.json"));
  std::printf("report: wrote %s\n", report_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Global VAR with stochastic volatility: spillovers of "
               "origin-country rate shocks under uncertainty"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::uint64_t seed_override = 0;
  int jobs = 1;
  std::string out_override;
  app.add_option("--config", config_path, "run configuration (JSON)");
  auto* seed_opt =
      app.add_option("--seed", seed_override, "override the config seed");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::Range(1, 256));
  app.add_option("--out", out_override, "override the output directory");

  auto* ingest = app.add_subcommand("ingest",
                                    "build the panel and weight artifacts");
  auto* estimate = app.add_subcommand("estimate",
                                      "sample per-country posteriors");
  auto* solve = app.add_subcommand("solve",
                                   "stack draws and report stability");
  auto* irf = app.add_subcommand("irf", "simulate generalized IRFs");
  auto* decompose = app.add_subcommand("decompose",
                                       "split IRFs into direct and total");
  auto* report = app.add_subcommand("report",
                                    "summarize artifacts as markdown");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (config_path.empty())
      throw ConfigError("--config <path> is required");
    RunConfig cfg = load_run_config(config_path);
    if (seed_opt->count() > 0) {
      cfg.seed = seed_override;
      cfg.validate();
    }
    if (!out_override.empty()) cfg.out_dir = out_override;
    fs::create_directories(cfg.out_dir);

    if (ingest->parsed()) return cmd_ingest(cfg);
    if (estimate->parsed()) return cmd_estimate(cfg, jobs);
    if (solve->parsed()) return cmd_solve(cfg);
    if (irf->parsed()) return cmd_irf(cfg, jobs, false);
    if (decompose->parsed()) return cmd_irf(cfg, jobs, true);
    if (report->parsed()) return cmd_report(cfg);
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 2;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

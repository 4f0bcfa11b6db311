#pragma once

#include <armadillo>
#include <cstdint>
#include <string>
#include <vector>

#include "gvarsv/stack.hpp"
#include "gvarsv/types.hpp"
#include "gvarsv/varx.hpp"

namespace gvarsv {

// A structural policy-rate shock at the origin country. level_size is in
// units of the average structural-shock standard deviation (the time/draw
// average of exp(h/2) for the origin rate equation); vol_shock, when nonzero,
// adds a simultaneous innovation to the rate-volatility equation, in units
// of that equation's innovation standard deviation sqrt(Q_rr).
struct ShockSpec {
  std::string origin;
  double level_size = 1.0;
  double vol_shock = 0.0;
  int horizon = 20;

  void validate() const;
};

// Trailing history needed to start a simulation: the last rows of observed
// levels and sampled log volatility, oldest row first.
struct SimState {
  arma::mat x_lags;  // max(p, q) rows, K cols
  arma::mat h_lags;  // max(m, s) rows, K cols
};

// A set of joint posterior draws ready for simulation. Draws are
// index-matched across countries; level_unit is the absolute size of a
// one-average-standard-deviation rate shock.
struct SimInput {
  LinkMatrices links;
  std::vector<GlobalModel> draws;
  std::vector<SimState> states;
  double level_unit = 1.0;

  int n_draws() const { return static_cast<int>(draws.size()); }
  void validate() const;
};

// Average over observation rows and draws of exp(h/2) for one volatility
// column; defines the paper-style "one standard deviation" rate shock.
double shock_size_level(const std::vector<LatentVolPath>& h_draws, int column);

// Assembles index-matched global draws from the per-country posteriors:
// world matrices per draw, trailing level history from the panel, trailing
// volatility history from each draw's own sampled path, and level_unit from
// the origin's rate-volatility draws. Estimation windows all end at the
// panel's last row, so the histories line up across countries.
SimInput build_sim_input(const LinkMatrices& links,
                         const std::vector<PosteriorDraws>& by_country,
                         const Panel& panel);

// Replication-averaged generalized IRFs, one slice per posterior draw.
struct IrfDraws {
  arma::cube x;  // K x (horizon+1) x n_draws
  arma::cube h;  // K x (horizon+1) x n_draws
};

// Paired-path generalized IRF: per draw and replication, a baseline and a
// shocked path share every random number; the IRF is the replication
// average of (shocked - baseline). Randomness per (draw, rep, country) comes
// from derive_seed(seed, {draw, rep, fnv1a64(country id)}), consumed as
// e_t then eta_t for t = 0..horizon, so results are independent of
// scheduling.
IrfDraws girf(const SimInput& input, const ShockSpec& shock, int reps,
              std::uint64_t seed, int jobs = 1);

// TOTAL propagates the shock through everyone; DIRECT rebuilds each
// country's foreign variables with only the origin's path deviating from
// baseline (third-country contributions and the origin's own foreign
// variables stay frozen at baseline).
struct Decomposition {
  IrfDraws total;
  IrfDraws direct;
};

Decomposition decompose_direct_total(const SimInput& input,
                                     const ShockSpec& shock, int reps,
                                     std::uint64_t seed, int jobs = 1);

// Pointwise quantile envelope over draws: 50% plus the central `coverage`
// interval (16/84 for 0.68).
struct BandSet {
  arma::mat median, lo, hi;  // K x (horizon+1)
};

BandSet bands(const arma::cube& per_draw, double coverage = 0.68);

struct Group {
  std::string name;
  std::vector<std::string> members;
  std::vector<double> weights;
};

// Weighted member average per draw; `kinds` lists the variable kinds to
// aggregate (each member must carry them all).
arma::cube aggregate_group(const arma::cube& per_draw_x,
                           const LinkMatrices& links, const Group& group,
                           const std::vector<VariableKind>& kinds);

// Tidy result records for serialization.
struct IrfRecord {
  std::string country;
  std::string variable;
  std::string regime;
  int horizon;
  double median, lo, hi;
};

struct IrfSet {
  std::vector<IrfRecord> records;
};

// Flattens band sets into tidy records (volatility responses carry an "h:"
// variable prefix); enforces lo <= median <= hi.
void append_irf_records(IrfSet& set, const LinkMatrices& links,
                        const std::string& regime, const BandSet& x_bands,
                        const BandSet& h_bands);

void write_irf_csv(const IrfSet& set, const std::string& path);
void write_irf_json(const IrfSet& set, const std::string& path);

}  // namespace gvarsv

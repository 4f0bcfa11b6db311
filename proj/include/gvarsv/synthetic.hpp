#pragma once

#include <armadillo>
#include <cstdint>
#include <vector>

#include "gvarsv/shocks.hpp"
#include "gvarsv/types.hpp"

namespace gvarsv {

// A fully known data-generating world. Everything downstream of this module
// is implemented with plain loops and dense solves on purpose: it is the
// oracle the estimation and simulation engines are tested against, so it
// shares no numerical kernels with them.
struct TrueWorld {
  std::vector<CountrySpec> specs;
  std::vector<CountryParameters> params;
  std::vector<VolatilityParameters> vols;
  WeightMatrix weights;
  arma::vec h_init;  // stacked initial log variances
  int T = 400;
  std::uint64_t seed = 1;

  int n_countries() const { return static_cast<int>(specs.size()); }
  int K() const;
  int offset(int i) const;
  // Checks conformable dimensions, weight/spec order agreement, stability
  // of the level block (spectral radius < 1) and origin sign restrictions.
  void validate() const;
};

struct GeneratedData {
  Panel panel;
  std::vector<LatentVolPath> h_truth;  // per country, aligned with the panel
};

// Simulates Eqs.-style dynamics forward: h first (country-local), then the
// stacked level system solved each step. A 50-step burn-in is discarded.
// Explosions (|x| > 1e8) are an error.
GeneratedData generate(const TrueWorld& world, Quarter start,
                       int training_rows);

// Loop-based paired-path GIRF on the true world, for cross-checking the
// simulation engine. Consumes randomness via the same documented contract
// as girf: per (rep, country) stream seeded with
// derive_seed(seed, {0, rep, fnv1a64(id)}), e_t then eta_t per step.
struct OracleIrf {
  arma::mat x;  // K x (horizon+1)
  arma::mat h;  // K x (horizon+1)
};

OracleIrf brute_force_irf(const TrueWorld& world, const GeneratedData& data,
                          const ShockSpec& shock, int reps,
                          std::uint64_t seed);

// Closed-form moving-average IRF of the homoskedastic linear reduction
// (Psi = Xi = 0, Q = 0): responses to an impulse eps in structural units.
arma::mat linear_irf(const TrueWorld& world, const arma::vec& eps0,
                     int horizon);

// Desk-scale canonical world: 3 countries x 3 variables, p = q = s = m = 1,
// spillovers, spillbacks and volatility feedback all active.
TrueWorld canonical_world(std::uint64_t seed);

// The same world with every volatility channel shut off (Psi = Xi = 0,
// Q = 0, constant h), for linear/degenerate oracles.
TrueWorld linear_world(std::uint64_t seed);

}  // namespace gvarsv

#pragma once

#include <armadillo>
#include <vector>

#include "gvarsv/types.hpp"

namespace gvarsv {

// Selection machinery for one country within the stacked world vector:
// domestic_cols picks out x_i, foreign_rows is the k*_i x K matrix R_i with
// x*_i = R_i x.
struct CountryLinks {
  arma::uvec domestic_cols;
  arma::mat foreign_rows;
};

class LinkMatrices {
 public:
  LinkMatrices(WeightMatrix weights, std::vector<CountrySpec> specs);

  int n_countries() const { return static_cast<int>(specs_.size()); }
  int K() const { return K_; }
  int offset(int i) const { return offsets_[i]; }
  const CountryLinks& country(int i) const { return links_[i]; }
  const std::vector<CountrySpec>& specs() const { return specs_; }
  const WeightMatrix& weights() const { return weights_; }

  arma::vec domestic_of(int i, const arma::vec& x) const;
  arma::vec foreign_of(int i, const arma::vec& x) const;

 private:
  WeightMatrix weights_;
  std::vector<CountrySpec> specs_;
  std::vector<CountryLinks> links_;
  std::vector<int> offsets_;
  int K_ = 0;
};

LinkMatrices build_links(const WeightMatrix& weights,
                         const std::vector<CountrySpec>& specs);

// One joint draw assembled into world form:
//   g0 x_t = intercept + sum_l lag_mats[l-1] x_{t-l} + psi terms + u_t
// with g0 = I - blockstack(Lambda_i0 R_i). Volatility dynamics stay
// country-local and live in `vols`.
struct GlobalModel {
  std::vector<CountryParameters> params;
  std::vector<VolatilityParameters> vols;
  arma::vec intercept;              // K
  arma::mat g0;                     // K x K
  std::vector<arma::mat> lag_mats;  // level lags 1..L, each K x K
  int max_p = 0, max_q = 0, max_s = 0, max_m = 0;
  double g0_condition = 0.0;

  int K() const { return static_cast<int>(intercept.n_elem); }
};

// Throws NumericError when the contemporaneous matrix is singular for
// practical purposes (condition number above 1e10).
GlobalModel stack_global(const LinkMatrices& links,
                         std::vector<CountryParameters> params,
                         std::vector<VolatilityParameters> vols);

// Companion-matrix spectrum of the level block, volatility terms held at
// their (additively entering) means. Radius >= 1 flags the draw.
double spectral_radius(const GlobalModel& model);

struct StabilityReport {
  arma::vec radius;      // per draw
  arma::vec condition;   // per draw
  arma::uvec flagged;    // indices with radius >= 1
};

StabilityReport check_stability(const std::vector<GlobalModel>& models);

}  // namespace gvarsv

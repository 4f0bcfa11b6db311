#pragma once

#include <armadillo>
#include <optional>
#include <string>
#include <vector>

#include "gvarsv/errors.hpp"
#include "gvarsv/quarters.hpp"

// Core domain types for a global VAR with endogenous stochastic volatility.
//
// One country block with k domestic variables evolves as
//
//   levels:      x_t = a + sum_{l=1..p} Phi_l x_{t-l}
//                        + sum_{l=0..q} Lambda_l xstar_{t-l}
//                        + sum_{l=0..s} Psi_l h_{t-l} + u_t
//   structure:   A u_t = eps_t,   eps_t = H_t^{1/2} e_t,   e_t ~ N(0, I),
//                H_t = diag(exp h_t),  so  Var(u_t) = At H_t At'  with
//                At = inv(A) unit lower triangular (IdentificationMatrix)
//   volatility:  h_t = c + sum_{l=1..m} Ups_l h_{t-l}
//                        + sum_{l=1..q} Xi_l x_{t-l} + eta_t,
//                eta_t ~ N(0, Q), Q diagonal
//   foreign:     xstar_t = Wbar x_t over the stacked world vector, with
//                zero self-weight and rows summing to one.
//
// Field map: a -> CountryParameters::intercept, Phi -> domestic_lags,
// Lambda -> foreign_lags, Psi -> vol_in_mean, At -> ident.a_tilde,
// c -> VolatilityParameters::intercept, Ups -> vol_lags,
// Xi -> macro_feedback, diag(Q) -> innovation_var, h -> LatentVolPath::h,
// w_ij -> WeightMatrix::w, (p, q, s, m) -> LagOrders.
//
// All types are immutable value objects once validated; they can be copied
// and shared across threads freely.

namespace gvarsv {

// Within-country variable ordering is fixed to the declaration order below:
// (ShortRate, OutputGrowth, Inflation, RealFxGrowth, EquityPriceGrowth),
// with absent kinds skipped. Growth variables are annual log-differences
// times 100; rates are percent per annum.
enum class VariableKind {
  ShortRate = 0,
  OutputGrowth = 1,
  Inflation = 2,
  RealFxGrowth = 3,
  EquityPriceGrowth = 4,
};

const char* to_token(VariableKind kind);
VariableKind kind_from_token(const std::string& token);

// Lag orders of one country model: p domestic, q foreign (contemporaneous
// term is extra), s volatility-in-mean (contemporaneous term is extra),
// m volatility transition. The macro-feedback block of the volatility
// transition uses q lags.
struct LagOrders {
  int p = 2;
  int q = 1;
  int s = 1;
  int m = 1;

  void validate() const;
};

struct CountrySpec {
  std::string id;
  std::vector<VariableKind> domestic;
  std::vector<VariableKind> foreign;
  LagOrders lags;
  bool is_shock_origin = false;

  int k() const { return static_cast<int>(domestic.size()); }
  int kstar() const { return static_cast<int>(foreign.size()); }

  bool has_domestic(VariableKind kind) const;
  // Position of `kind` in the domestic ordering; throws if absent.
  int domestic_pos(VariableKind kind) const;

  void validate() const;
};

// Model-set checks: unique ids, exactly one shock origin.
void validate_specs(const std::vector<CountrySpec>& specs);

// The data conventions of the shipped experiments: every non-origin country
// sees foreign (OutputGrowth, Inflation, ShortRate); the origin sees
// (OutputGrowth, Inflation, RealFxGrowth) and never a foreign ShortRate.
void validate_paper_conventions(const std::vector<CountrySpec>& specs);

// Country x variable x quarter panel on a common quarter grid. Missing
// observations are NaN; a country's usable sample may start later than the
// grid (leading gaps are never imputed).
class Panel {
 public:
  Panel(std::vector<std::string> countries,
        std::vector<std::vector<VariableKind>> variables,
        std::vector<arma::mat> data, Quarter start, Quarter training_split);

  const std::vector<std::string>& countries() const { return countries_; }
  const std::vector<VariableKind>& variables(const std::string& country) const;
  const arma::mat& data(const std::string& country) const;
  int rows() const { return T_; }
  Quarter start() const { return start_; }
  Quarter last() const { return start_.plus(T_ - 1); }
  Quarter training_split() const { return training_split_; }
  int row_of(const Quarter& q) const { return q.minus(start_); }
  Quarter quarter_of(int row) const { return start_.plus(row); }

  int country_index(const std::string& country) const;
  bool has_country(const std::string& country) const;
  // Column of `kind` within a country's data; throws if absent.
  int col_of(const std::string& country, VariableKind kind) const;
  arma::vec series(const std::string& country, VariableKind kind) const;

  // First row from which every variable of `country` is observed through the
  // end of the grid; throws DataError if no such row exists.
  int first_complete_row(const std::string& country) const;

  Panel with_training_split(Quarter split) const;

 private:
  std::vector<std::string> countries_;
  std::vector<std::vector<VariableKind>> variables_;
  std::vector<arma::mat> data_;
  Quarter start_;
  int T_;
  Quarter training_split_;
};

// Row-stochastic, zero-diagonal country linkage weights. A row may instead
// be exactly zero, meaning that country takes no foreign input.
class WeightMatrix {
 public:
  WeightMatrix() = default;  // empty; fails validation wherever one is used
  WeightMatrix(std::vector<std::string> order, arma::mat w);

  const std::vector<std::string>& order() const { return order_; }
  const arma::mat& w() const { return w_; }
  int size() const { return static_cast<int>(order_.size()); }
  int index_of(const std::string& country) const;
  double weight(const std::string& from, const std::string& to) const;

 private:
  std::vector<std::string> order_;
  arma::mat w_;
};

// Unit-lower-triangular map from structural shocks to reduced-form
// residuals: u_t = a_tilde * eps_t. For a shock-origin country ordered
// (rate, output, inflation, ...), the first-column entries in the output
// and inflation rows must be <= 0 so that a rate tightening cannot raise
// output or prices on impact.
class IdentificationMatrix {
 public:
  IdentificationMatrix(arma::mat a_tilde, std::vector<VariableKind> ordering,
                       bool shock_origin);

  const arma::mat& a_tilde() const { return a_tilde_; }
  const std::vector<VariableKind>& ordering() const { return ordering_; }
  int k() const { return static_cast<int>(ordering_.size()); }
  bool shock_origin() const { return shock_origin_; }

  // True when a_tilde satisfies the shock-origin sign restrictions (always
  // true for non-origin orderings and k < 3).
  static bool signs_ok(const arma::mat& a_tilde, bool shock_origin);

 private:
  arma::mat a_tilde_;
  std::vector<VariableKind> ordering_;
  bool shock_origin_;
};

// One posterior draw of a country's level-equation coefficients.
struct CountryParameters {
  arma::vec intercept;                  // k
  std::vector<arma::mat> domestic_lags; // p matrices, k x k
  std::vector<arma::mat> foreign_lags;  // q+1 matrices (lag 0 first), k x k*
  std::vector<arma::mat> vol_in_mean;   // s+1 matrices (lag 0 first), k x k
  IdentificationMatrix ident;

  void validate(const CountrySpec& spec) const;
};

// One posterior draw of a country's volatility-transition coefficients.
struct VolatilityParameters {
  arma::vec intercept;                   // k
  std::vector<arma::mat> vol_lags;       // m matrices, k x k
  std::vector<arma::mat> macro_feedback; // q matrices, k x k
  arma::vec innovation_var;              // k, diagonal of Q; >= 0, > 0 for
                                         // estimated draws

  void validate(const CountrySpec& spec) const;
};

// A sampled path of log structural-shock variances. Rows n_pre..end align
// with observation times; the first n_pre rows are pre-sample initial
// conditions. Structural shocks, standardized shocks, residuals and
// volatility innovations are all recoverable from h plus the level
// parameters, so only h is stored.
class LatentVolPath {
 public:
  LatentVolPath(arma::mat h, int n_pre);

  const arma::mat& h() const { return h_; }
  int n_pre() const { return n_pre_; }
  int n_obs() const { return static_cast<int>(h_.n_rows) - n_pre_; }

  // Row of the observation at time index t (0-based within the sample).
  arma::rowvec at_obs(int t) const { return h_.row(n_pre_ + t); }
  // Structural-shock standard deviations exp(h/2) at observation t.
  arma::vec sd_at_obs(int t) const {
    return arma::exp(0.5 * h_.row(n_pre_ + t).t());
  }

 private:
  arma::mat h_;
  int n_pre_;
};

// Canonical variable ordering helper: sorts kinds by the declaration order
// of VariableKind, which is the within-country convention.
std::vector<VariableKind> canonical_order(std::vector<VariableKind> kinds);

}  // namespace gvarsv

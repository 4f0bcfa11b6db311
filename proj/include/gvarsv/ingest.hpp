#pragma once

#include <armadillo>
#include <map>
#include <string>
#include <vector>

#include "gvarsv/types.hpp"

namespace gvarsv {

// Raw quarterly levels as shipped by the data provider, one matrix per
// country on a common quarter grid with NaN for unobserved cells.
enum class RawKind {
  Gdp = 0,         // real GDP index
  Cpi = 1,         // consumer price index
  NominalRate = 2, // nominal short rate, percent per annum
  NominalFx = 3,   // nominal exchange rate, local currency per USD
  Equity = 4,      // CPI-deflated equity price index
};
constexpr int kRawKinds = 5;

const char* raw_token(RawKind kind);
RawKind raw_kind_from_token(const std::string& token);

class RawPanel {
 public:
  RawPanel(std::vector<std::string> countries, std::vector<arma::mat> data,
           Quarter start);

  const std::vector<std::string>& countries() const { return countries_; }
  int rows() const { return T_; }
  Quarter start() const { return start_; }
  Quarter last() const { return start_.plus(T_ - 1); }
  int country_index(const std::string& country) const;
  // T x kRawKinds levels for one country, NaN where unobserved.
  const arma::mat& data(const std::string& country) const;
  arma::mat& data(const std::string& country);

 private:
  std::vector<std::string> countries_;
  std::vector<arma::mat> data_;  // each T x kRawKinds
  Quarter start_;
  int T_;
};

// Long CSV with header (country, variable, quarter, value); variable tokens
// are gdp, cpi, rate, fx_usd, equity. Duplicate (country, variable, quarter)
// rows and non-monotone quarters within a series are rejected.
RawPanel load_raw(const std::string& path);

// Replaces the policy rate with a shadow-rate series where the override CSV
// (country, quarter, value) provides one.
void apply_shadow_rates(RawPanel& raw, const std::string& path);

// Annual log-difference transforms: output growth and inflation are
// 100*(ln v_t - ln v_{t-4}); the real exchange rate is the nominal rate
// deflated by relative CPI (e_nom * CPI_base / CPI_local, so depreciation
// against the base currency is positive growth) before the same transform;
// the short rate passes through; equity growth likewise when requested.
// The first four quarters drop off the grid. `base_country` supplies the
// deflating CPI (the numeraire economy) and receives no RealFxGrowth.
Panel transform(const RawPanel& raw, const std::vector<CountrySpec>& specs,
                const std::string& base_country, Quarter training_split);

// Collapses `members` into one region `id` whose series are the
// weight-averaged member series; weights must sum to 1 within 1e-10. The
// new region takes the panel slot of the first member.
Panel aggregate_region(const Panel& panel, const std::string& id,
                       const std::vector<std::string>& members,
                       const std::vector<double>& weights);

struct TradeFlows {
  std::vector<std::string> order;
  arma::mat exports;  // exports[i][j] = flow from i to j
  arma::mat imports;  // imports[i][j] = flow into i from j
};

// CSV with header (from, to, exports, imports), one row per ordered pair.
TradeFlows load_trade_flows(const std::string& path);

// Sums flows of `members` into one region `id` (intra-member flows vanish
// onto the diagonal and are zeroed).
TradeFlows aggregate_trade_flows(const TradeFlows& flows, const std::string& id,
                                 const std::vector<std::string>& members);

enum class FlowBasis { Total, Exports, Imports };
FlowBasis flow_basis_from_token(const std::string& token);

// Row-normalizes the selected flow matrix; a country with no recorded trade
// is an error ("isolated country").
WeightMatrix build_weight_matrix(const TradeFlows& flows, FlowBasis basis);

// x*_t = sum_j w_ij x_jt per foreign kind of `spec`, as a T x kstar matrix.
// NaN partner values propagate. A partner with positive weight that lacks a
// requested kind is an error naming the partner.
arma::mat foreign_variables(const Panel& panel, const WeightMatrix& weights,
                            const CountrySpec& spec);

// CSV with header (country, weight); used for region aggregation and group
// averaging.
std::map<std::string, double> load_weights_csv(const std::string& path);

// Canonical panel snapshot: long CSV (country, variable, quarter, value)
// sorted by (country order, variable order, quarter), %.17g values, plus the
// grid metadata needed to read it back.
void write_panel_csv(const Panel& panel, const std::string& path);
Panel read_panel_csv(const std::string& path,
                     const std::vector<CountrySpec>& specs,
                     Quarter training_split);

void write_weight_matrix_csv(const WeightMatrix& weights,
                             const std::string& path);
WeightMatrix read_weight_matrix_csv(const std::string& path);

}  // namespace gvarsv

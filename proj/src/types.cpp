#include "gvarsv/types.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace gvarsv {

Quarter Quarter::parse(const std::string& s) {
  auto pos = s.find_first_of("Qq");
  if (pos == std::string::npos || pos == 0 || pos + 1 >= s.size())
    throw DataError("Quarter: cannot parse '" + s + "' (expected e.g. 1979Q2)");
  try {
    int year = std::stoi(s.substr(0, pos));
    size_t used = 0;
    int q = std::stoi(s.substr(pos + 1), &used);
    if (used != s.size() - pos - 1 || q < 1 || q > 4)
      throw DataError("Quarter: cannot parse '" + s + "'");
    return Quarter(year, q);
  } catch (const std::invalid_argument&) {
    throw DataError("Quarter: cannot parse '" + s + "'");
  } catch (const std::out_of_range&) {
    throw DataError("Quarter: cannot parse '" + s + "'");
  }
}

const char* to_token(VariableKind kind) {
  switch (kind) {
    case VariableKind::ShortRate: return "short_rate";
    case VariableKind::OutputGrowth: return "output_growth";
    case VariableKind::Inflation: return "inflation";
    case VariableKind::RealFxGrowth: return "real_fx_growth";
    case VariableKind::EquityPriceGrowth: return "equity_growth";
  }
  throw ValidationError("VariableKind: unknown enum value");
}

VariableKind kind_from_token(const std::string& token) {
  if (token == "short_rate") return VariableKind::ShortRate;
  if (token == "output_growth") return VariableKind::OutputGrowth;
  if (token == "inflation") return VariableKind::Inflation;
  if (token == "real_fx_growth") return VariableKind::RealFxGrowth;
  if (token == "equity_growth") return VariableKind::EquityPriceGrowth;
  throw DataError("VariableKind: unknown token '" + token + "'");
}

void LagOrders::validate() const {
  if (p < 1) throw ValidationError("LagOrders: p >= 1 violated (p = " +
                                   std::to_string(p) + ")");
  if (m < 1) throw ValidationError("LagOrders: m >= 1 violated (m = " +
                                   std::to_string(m) + ")");
  if (q < 0) throw ValidationError("LagOrders: q >= 0 violated");
  if (s < 0) throw ValidationError("LagOrders: s >= 0 violated");
}

bool CountrySpec::has_domestic(VariableKind kind) const {
  return std::find(domestic.begin(), domestic.end(), kind) != domestic.end();
}

int CountrySpec::domestic_pos(VariableKind kind) const {
  auto it = std::find(domestic.begin(), domestic.end(), kind);
  if (it == domestic.end())
    throw ValidationError("CountrySpec " + id + ": variable " +
                          to_token(kind) + " not in domestic set");
  return static_cast<int>(it - domestic.begin());
}

namespace {

void check_ordered_unique(const std::string& where,
                          const std::vector<VariableKind>& kinds) {
  for (size_t i = 1; i < kinds.size(); ++i) {
    if (static_cast<int>(kinds[i]) <= static_cast<int>(kinds[i - 1]))
      throw ValidationError(
          where + ": variable list must be duplicate-free and follow the "
                  "canonical ordering (rate, output, inflation, fx, equity)");
  }
}

}  // namespace

void CountrySpec::validate() const {
  if (id.empty()) throw ValidationError("CountrySpec: empty country id");
  if (domestic.empty())
    throw ValidationError("CountrySpec " + id + ": empty domestic set");
  check_ordered_unique("CountrySpec " + id + " (domestic)", domestic);
  check_ordered_unique("CountrySpec " + id + " (foreign)", foreign);
  lags.validate();
  if (is_shock_origin && has_domestic(VariableKind::RealFxGrowth))
    throw ValidationError(
        "CountrySpec " + id +
        ": shock-origin country cannot carry real_fx_growth as a domestic "
        "variable (its currency is the numeraire)");
}

void validate_specs(const std::vector<CountrySpec>& specs) {
  if (specs.empty()) throw ValidationError("model set: no country specs");
  std::set<std::string> ids;
  int origins = 0;
  for (const auto& spec : specs) {
    spec.validate();
    if (!ids.insert(spec.id).second)
      throw ValidationError("model set: duplicate country id " + spec.id);
    origins += spec.is_shock_origin ? 1 : 0;
  }
  if (origins != 1)
    throw ValidationError("model set: exactly one shock origin required, got " +
                          std::to_string(origins));
}

void validate_paper_conventions(const std::vector<CountrySpec>& specs) {
  validate_specs(specs);
  const std::vector<VariableKind> nonorigin = {VariableKind::OutputGrowth,
                                               VariableKind::Inflation,
                                               VariableKind::ShortRate};
  const std::vector<VariableKind> origin = {VariableKind::OutputGrowth,
                                            VariableKind::Inflation,
                                            VariableKind::RealFxGrowth};
  for (const auto& spec : specs) {
    const auto want = spec.is_shock_origin ? origin : nonorigin;
    auto got = spec.foreign;
    std::sort(got.begin(), got.end());
    auto sorted_want = want;
    std::sort(sorted_want.begin(), sorted_want.end());
    if (got != sorted_want)
      throw ValidationError(
          "CountrySpec " + spec.id + ": foreign set violates the data "
          "conventions (" + std::string(spec.is_shock_origin
              ? "origin takes foreign output, inflation, real fx growth"
              : "non-origin takes foreign output, inflation, short rate") +
          ")");
  }
}

Panel::Panel(std::vector<std::string> countries,
             std::vector<std::vector<VariableKind>> variables,
             std::vector<arma::mat> data, Quarter start, Quarter training_split)
    : countries_(std::move(countries)),
      variables_(std::move(variables)),
      data_(std::move(data)),
      start_(start),
      training_split_(training_split) {
  if (countries_.empty()) throw ValidationError("Panel: no countries");
  if (variables_.size() != countries_.size() ||
      data_.size() != countries_.size())
    throw ValidationError("Panel: countries/variables/data size mismatch");
  std::set<std::string> seen;
  for (const auto& c : countries_)
    if (!seen.insert(c).second)
      throw ValidationError("Panel: duplicate country " + c);
  T_ = static_cast<int>(data_.front().n_rows);
  if (T_ < 1) throw ValidationError("Panel: empty time range");
  for (size_t i = 0; i < countries_.size(); ++i) {
    check_ordered_unique("Panel country " + countries_[i], variables_[i]);
    if (static_cast<int>(data_[i].n_rows) != T_)
      throw ValidationError("Panel: country " + countries_[i] +
                            " does not span the common quarter grid");
    if (data_[i].n_cols != variables_[i].size())
      throw ValidationError("Panel: country " + countries_[i] +
                            " has data/variable column mismatch");
  }
  if (!(training_split_ > start_ && training_split_ < last()))
    throw ValidationError("Panel: training_split " + training_split_.str() +
                          " must lie strictly inside " + start_.str() + ".." +
                          last().str());
}

int Panel::country_index(const std::string& country) const {
  auto it = std::find(countries_.begin(), countries_.end(), country);
  if (it == countries_.end())
    throw DataError("Panel: unknown country " + country);
  return static_cast<int>(it - countries_.begin());
}

bool Panel::has_country(const std::string& country) const {
  return std::find(countries_.begin(), countries_.end(), country) !=
         countries_.end();
}

const std::vector<VariableKind>& Panel::variables(
    const std::string& country) const {
  return variables_[country_index(country)];
}

const arma::mat& Panel::data(const std::string& country) const {
  return data_[country_index(country)];
}

int Panel::col_of(const std::string& country, VariableKind kind) const {
  const auto& vars = variables(country);
  auto it = std::find(vars.begin(), vars.end(), kind);
  if (it == vars.end())
    throw DataError("Panel: country " + country + " has no variable " +
                    to_token(kind));
  return static_cast<int>(it - vars.begin());
}

arma::vec Panel::series(const std::string& country, VariableKind kind) const {
  return data(country).col(col_of(country, kind));
}

int Panel::first_complete_row(const std::string& country) const {
  const arma::mat& d = data(country);
  for (int t = 0; t < T_; ++t) {
    bool ok = d.row(t).is_finite();
    if (ok) {
      // all later rows must be complete as well
      for (int u = t; u < T_; ++u)
        if (!d.row(u).is_finite())
          throw DataError("Panel: country " + country +
                          " has an interior gap at " + quarter_of(u).str());
      return t;
    }
  }
  throw DataError("Panel: country " + country + " has no complete rows");
}

Panel Panel::with_training_split(Quarter split) const {
  return Panel(countries_, variables_, data_, start_, split);
}

WeightMatrix::WeightMatrix(std::vector<std::string> order, arma::mat w)
    : order_(std::move(order)), w_(std::move(w)) {
  const size_t n = order_.size();
  if (n == 0) throw ValidationError("WeightMatrix: empty country order");
  if (w_.n_rows != n || w_.n_cols != n)
    throw ValidationError("WeightMatrix: matrix must be " +
                          std::to_string(n) + "x" + std::to_string(n));
  std::set<std::string> seen;
  for (const auto& c : order_)
    if (!seen.insert(c).second)
      throw ValidationError("WeightMatrix: duplicate country " + c);
  for (size_t i = 0; i < n; ++i) {
    if (w_(i, i) != 0.0)
      throw ValidationError("WeightMatrix: nonzero self-weight for " +
                            order_[i]);
    double row_sum = 0.0;
    bool all_zero = true;
    for (size_t j = 0; j < n; ++j) {
      const double v = w_(i, j);
      if (!(v >= 0.0 && v <= 1.0))
        throw ValidationError("WeightMatrix: entry (" + order_[i] + ", " +
                              order_[j] + ") outside [0, 1]");
      row_sum += v;
      all_zero = all_zero && v == 0.0;
    }
    // an exactly-zero row means the country takes no foreign input (the
    // degenerate one-country world); anything else must be row-stochastic
    if (!all_zero && std::abs(row_sum - 1.0) > 1e-12)
      throw ValidationError("WeightMatrix: row for " + order_[i] +
                            " sums to " + std::to_string(row_sum) +
                            ", not 1 within 1e-12");
  }
}

int WeightMatrix::index_of(const std::string& country) const {
  auto it = std::find(order_.begin(), order_.end(), country);
  if (it == order_.end())
    throw DataError("WeightMatrix: unknown country " + country);
  return static_cast<int>(it - order_.begin());
}

double WeightMatrix::weight(const std::string& from,
                            const std::string& to) const {
  return w_(index_of(from), index_of(to));
}

bool IdentificationMatrix::signs_ok(const arma::mat& a_tilde,
                                    bool shock_origin) {
  if (!shock_origin || a_tilde.n_rows < 3) return true;
  return a_tilde(1, 0) <= 0.0 && a_tilde(2, 0) <= 0.0;
}

IdentificationMatrix::IdentificationMatrix(arma::mat a_tilde,
                                           std::vector<VariableKind> ordering,
                                           bool shock_origin)
    : a_tilde_(std::move(a_tilde)),
      ordering_(std::move(ordering)),
      shock_origin_(shock_origin) {
  const size_t k = ordering_.size();
  if (k == 0) throw ValidationError("IdentificationMatrix: empty ordering");
  check_ordered_unique("IdentificationMatrix", ordering_);
  if (a_tilde_.n_rows != k || a_tilde_.n_cols != k)
    throw ValidationError("IdentificationMatrix: matrix must be " +
                          std::to_string(k) + "x" + std::to_string(k));
  if (!a_tilde_.is_finite())
    throw ValidationError("IdentificationMatrix: non-finite entries");
  for (size_t i = 0; i < k; ++i) {
    if (a_tilde_(i, i) != 1.0)
      throw ValidationError(
          "IdentificationMatrix: unit diagonal violated at row " +
          std::to_string(i));
    for (size_t j = i + 1; j < k; ++j)
      if (a_tilde_(i, j) != 0.0)
        throw ValidationError(
            "IdentificationMatrix: upper triangle must be zero at (" +
            std::to_string(i) + ", " + std::to_string(j) + ")");
  }
  if (shock_origin_ && k >= 3) {
    if (ordering_[0] != VariableKind::ShortRate ||
        ordering_[1] != VariableKind::OutputGrowth ||
        ordering_[2] != VariableKind::Inflation)
      throw ValidationError(
          "IdentificationMatrix: shock-origin ordering must start with "
          "(short_rate, output_growth, inflation)");
    if (!signs_ok(a_tilde_, true))
      throw ValidationError(
          "IdentificationMatrix: shock-origin sign restrictions violated "
          "(rate-column entries for output and inflation must be <= 0)");
  }
}

void CountryParameters::validate(const CountrySpec& spec) const {
  const auto k = static_cast<arma::uword>(spec.k());
  const auto ks = static_cast<arma::uword>(spec.kstar());
  if (intercept.n_elem != k)
    throw ValidationError("CountryParameters " + spec.id +
                          ": intercept length != k");
  if (static_cast<int>(domestic_lags.size()) != spec.lags.p)
    throw ValidationError("CountryParameters " + spec.id +
                          ": expected p domestic lag matrices");
  for (const auto& matrix : domestic_lags)
    if (matrix.n_rows != k || matrix.n_cols != k)
      throw ValidationError("CountryParameters " + spec.id +
                            ": domestic lag matrix must be k x k");
  if (static_cast<int>(foreign_lags.size()) != spec.lags.q + 1)
    throw ValidationError("CountryParameters " + spec.id +
                          ": expected q+1 foreign lag matrices");
  for (const auto& matrix : foreign_lags)
    if (matrix.n_rows != k || matrix.n_cols != ks)
      throw ValidationError("CountryParameters " + spec.id +
                            ": foreign lag matrix must be k x kstar");
  if (static_cast<int>(vol_in_mean.size()) != spec.lags.s + 1)
    throw ValidationError("CountryParameters " + spec.id +
                          ": expected s+1 volatility-in-mean matrices");
  for (const auto& matrix : vol_in_mean)
    if (matrix.n_rows != k || matrix.n_cols != k)
      throw ValidationError("CountryParameters " + spec.id +
                            ": volatility-in-mean matrix must be k x k");
  if (ident.k() != spec.k())
    throw ValidationError("CountryParameters " + spec.id +
                          ": identification matrix dimension != k");
}

void VolatilityParameters::validate(const CountrySpec& spec) const {
  const auto k = static_cast<arma::uword>(spec.k());
  if (intercept.n_elem != k)
    throw ValidationError("VolatilityParameters " + spec.id +
                          ": intercept length != k");
  if (static_cast<int>(vol_lags.size()) != spec.lags.m)
    throw ValidationError("VolatilityParameters " + spec.id +
                          ": expected m volatility lag matrices");
  for (const auto& matrix : vol_lags)
    if (matrix.n_rows != k || matrix.n_cols != k)
      throw ValidationError("VolatilityParameters " + spec.id +
                            ": volatility lag matrix must be k x k");
  if (static_cast<int>(macro_feedback.size()) != spec.lags.q)
    throw ValidationError("VolatilityParameters " + spec.id +
                          ": expected q macro-feedback matrices");
  for (const auto& matrix : macro_feedback)
    if (matrix.n_rows != k || matrix.n_cols != k)
      throw ValidationError("VolatilityParameters " + spec.id +
                            ": macro-feedback matrix must be k x k");
  if (innovation_var.n_elem != k)
    throw ValidationError("VolatilityParameters " + spec.id +
                          ": innovation variance length != k");
  for (arma::uword i = 0; i < k; ++i)
    if (!(innovation_var[i] >= 0.0) || !std::isfinite(innovation_var[i]))
      throw ValidationError("VolatilityParameters " + spec.id +
                            ": innovation variances must be >= 0 and finite");
}

LatentVolPath::LatentVolPath(arma::mat h, int n_pre)
    : h_(std::move(h)), n_pre_(n_pre) {
  if (n_pre_ < 0 || static_cast<arma::uword>(n_pre_) >= h_.n_rows)
    throw ValidationError("LatentVolPath: n_pre outside path length");
  if (!h_.is_finite())
    throw ValidationError("LatentVolPath: non-finite log volatility");
}

std::vector<VariableKind> canonical_order(std::vector<VariableKind> kinds) {
  std::sort(kinds.begin(), kinds.end(), [](VariableKind a, VariableKind b) {
    return static_cast<int>(a) < static_cast<int>(b);
  });
  return kinds;
}

}  // namespace gvarsv

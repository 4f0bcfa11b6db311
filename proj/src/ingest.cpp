#include "gvarsv/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gvarsv/csv.hpp"
#include "gvarsv/util.hpp"

namespace gvarsv {

const char* raw_token(RawKind kind) {
  switch (kind) {
    case RawKind::Gdp: return "gdp";
    case RawKind::Cpi: return "cpi";
    case RawKind::NominalRate: return "rate";
    case RawKind::NominalFx: return "fx_usd";
    case RawKind::Equity: return "equity";
  }
  throw ValidationError("RawKind: unknown enum value");
}

RawKind raw_kind_from_token(const std::string& token) {
  if (token == "gdp") return RawKind::Gdp;
  if (token == "cpi") return RawKind::Cpi;
  if (token == "rate") return RawKind::NominalRate;
  if (token == "fx_usd") return RawKind::NominalFx;
  if (token == "equity") return RawKind::Equity;
  throw DataError("raw variable: unknown token '" + token + "'");
}

RawPanel::RawPanel(std::vector<std::string> countries,
                   std::vector<arma::mat> data, Quarter start)
    : countries_(std::move(countries)), data_(std::move(data)), start_(start) {
  if (countries_.empty()) throw ValidationError("RawPanel: no countries");
  if (data_.size() != countries_.size())
    throw ValidationError("RawPanel: countries/data size mismatch");
  T_ = static_cast<int>(data_.front().n_rows);
  for (const auto& m : data_)
    if (static_cast<int>(m.n_rows) != T_ || m.n_cols != kRawKinds)
      throw ValidationError("RawPanel: each country needs T x " +
                            std::to_string(kRawKinds) + " levels");
}

int RawPanel::country_index(const std::string& country) const {
  auto it = std::find(countries_.begin(), countries_.end(), country);
  if (it == countries_.end())
    throw DataError("RawPanel: unknown country " + country);
  return static_cast<int>(it - countries_.begin());
}

const arma::mat& RawPanel::data(const std::string& country) const {
  return data_[country_index(country)];
}

arma::mat& RawPanel::data(const std::string& country) {
  return data_[country_index(country)];
}

RawPanel load_raw(const std::string& path) {
  CsvTable table = read_csv(path);
  if (table.rows.empty()) throw DataError(path + ": no rows");
  const int c_country = table.col("country");
  const int c_variable = table.col("variable");
  const int c_quarter = table.col("quarter");
  const int c_value = table.col("value");

  std::vector<std::string> countries;
  int qmin = 0, qmax = 0;
  bool first = true;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = path + ":" + std::to_string(table.line_numbers[r]);
    Quarter q;
    try {
      q = Quarter::parse(row[c_quarter]);
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
    if (first || q.index() < qmin) qmin = q.index();
    if (first || q.index() > qmax) qmax = q.index();
    first = false;
    if (std::find(countries.begin(), countries.end(), row[c_country]) ==
        countries.end())
      countries.push_back(row[c_country]);
  }

  const int T = qmax - qmin + 1;
  std::vector<arma::mat> data(countries.size());
  for (auto& m : data) m = arma::mat(T, kRawKinds).fill(arma::datum::nan);

  // last quarter seen per (country, variable), for monotonicity
  std::map<std::pair<int, int>, int> last_seen;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = path + ":" + std::to_string(table.line_numbers[r]);
    const int ci = static_cast<int>(
        std::find(countries.begin(), countries.end(), row[c_country]) -
        countries.begin());
    RawKind kind;
    try {
      kind = raw_kind_from_token(row[c_variable]);
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
    const int vi = static_cast<int>(kind);
    const int t = Quarter::parse(row[c_quarter]).index() - qmin;
    auto key = std::make_pair(ci, vi);
    auto it = last_seen.find(key);
    if (it != last_seen.end()) {
      if (t == it->second)
        throw DataError(where + ": duplicate (" + row[c_country] + ", " +
                        row[c_variable] + ", " + row[c_quarter] + ")");
      if (t < it->second)
        throw DataError(where + ": quarters not in increasing order for (" +
                        row[c_country] + ", " + row[c_variable] + ")");
    }
    last_seen[key] = t;
    data[ci](t, vi) = parse_double(row[c_value], where);
  }
  return RawPanel(std::move(countries), std::move(data),
                  Quarter::from_index(qmin));
}

void apply_shadow_rates(RawPanel& raw, const std::string& path) {
  CsvTable table = read_csv(path);
  const int c_country = table.col("country");
  const int c_quarter = table.col("quarter");
  const int c_value = table.col("value");
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = path + ":" + std::to_string(table.line_numbers[r]);
    const Quarter q = Quarter::parse(row[c_quarter]);
    const int t = q.minus(raw.start());
    if (t < 0 || t >= raw.rows()) continue;  // outside the grid: ignore
    raw.data(row[c_country])(t, static_cast<int>(RawKind::NominalRate)) =
        parse_double(row[c_value], where);
  }
}

namespace {

// 100 * (ln v_t - ln v_{t-4}) with NaN propagation; nonpositive observed
// levels are a data error.
arma::vec annual_log_diff(const arma::vec& level, const std::string& country,
                          const std::string& token, Quarter grid_start) {
  const int T = static_cast<int>(level.n_elem);
  arma::vec logs(T);
  for (int t = 0; t < T; ++t) {
    if (std::isnan(level[t])) {
      logs[t] = arma::datum::nan;
    } else if (level[t] <= 0.0) {
      throw DataError("transform: nonpositive " + token + " level for " +
                      country + " at " + grid_start.plus(t).str());
    } else {
      logs[t] = std::log(level[t]);
    }
  }
  arma::vec growth(T);
  growth.fill(arma::datum::nan);
  for (int t = 4; t < T; ++t) growth[t] = 100.0 * (logs[t] - logs[t - 4]);
  return growth;
}

}  // namespace

Panel transform(const RawPanel& raw, const std::vector<CountrySpec>& specs,
                const std::string& base_country, Quarter training_split) {
  validate_specs(specs);
  std::string missing;
  for (const auto& spec : specs)
    if (std::find(raw.countries().begin(), raw.countries().end(), spec.id) ==
        raw.countries().end())
      missing += (missing.empty() ? "" : ", ") + spec.id;
  if (!missing.empty())
    throw DataError("transform: countries absent from raw data: " + missing);

  const int T_raw = raw.rows();
  if (T_raw < 5)
    throw DataError("transform: need at least 5 quarters of levels, have " +
                    std::to_string(T_raw));
  const arma::vec base_cpi =
      raw.data(base_country).col(static_cast<int>(RawKind::Cpi));

  std::vector<std::string> countries;
  std::vector<std::vector<VariableKind>> variables;
  std::vector<arma::mat> data;
  for (const auto& spec : specs) {
    const arma::mat& levels = raw.data(spec.id);
    arma::mat out(T_raw, spec.k());
    for (int v = 0; v < spec.k(); ++v) {
      const VariableKind kind = spec.domestic[v];
      switch (kind) {
        case VariableKind::ShortRate:
          out.col(v) = levels.col(static_cast<int>(RawKind::NominalRate));
          break;
        case VariableKind::OutputGrowth:
          out.col(v) = annual_log_diff(
              levels.col(static_cast<int>(RawKind::Gdp)), spec.id, "gdp",
              raw.start());
          break;
        case VariableKind::Inflation:
          out.col(v) = annual_log_diff(
              levels.col(static_cast<int>(RawKind::Cpi)), spec.id, "cpi",
              raw.start());
          break;
        case VariableKind::RealFxGrowth: {
          arma::vec real_fx =
              levels.col(static_cast<int>(RawKind::NominalFx)) % base_cpi /
              levels.col(static_cast<int>(RawKind::Cpi));
          out.col(v) = annual_log_diff(real_fx, spec.id, "real fx", raw.start());
          break;
        }
        case VariableKind::EquityPriceGrowth:
          out.col(v) = annual_log_diff(
              levels.col(static_cast<int>(RawKind::Equity)), spec.id, "equity",
              raw.start());
          break;
      }
      bool any_obs = false;
      for (int t = 0; t < T_raw && !any_obs; ++t)
        any_obs = !std::isnan(out(t, v));
      if (!any_obs)
        throw DataError("transform: no usable observations of " +
                        std::string(to_token(kind)) + " for " + spec.id);
    }
    countries.push_back(spec.id);
    variables.push_back(spec.domestic);
    data.push_back(out.rows(4, T_raw - 1));
  }
  return Panel(std::move(countries), std::move(variables), std::move(data),
               raw.start().plus(4), training_split);
}

Panel aggregate_region(const Panel& panel, const std::string& id,
                       const std::vector<std::string>& members,
                       const std::vector<double>& weights) {
  if (members.empty() || members.size() != weights.size())
    throw ValidationError("aggregate_region: members/weights size mismatch");
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  if (std::abs(wsum - 1.0) > 1e-10)
    throw ValidationError("aggregate_region: weights sum to " +
                          fmt_double(wsum) + ", not 1 within 1e-10");

  const auto& vars = panel.variables(members.front());
  arma::mat combined(panel.rows(), vars.size(), arma::fill::zeros);
  for (size_t m = 0; m < members.size(); ++m) {
    if (panel.variables(members[m]) != vars)
      throw ValidationError(
          "aggregate_region: member variable sets differ (" + members[m] +
          " vs " + members.front() + ")");
    combined += weights[m] * panel.data(members[m]);
  }

  std::vector<std::string> countries;
  std::vector<std::vector<VariableKind>> variables;
  std::vector<arma::mat> data;
  for (const auto& c : panel.countries()) {
    const bool member =
        std::find(members.begin(), members.end(), c) != members.end();
    if (c == members.front()) {
      countries.push_back(id);
      variables.push_back(vars);
      data.push_back(combined);
    } else if (!member) {
      countries.push_back(c);
      variables.push_back(panel.variables(c));
      data.push_back(panel.data(c));
    }
  }
  return Panel(std::move(countries), std::move(variables), std::move(data),
               panel.start(), panel.training_split());
}

TradeFlows load_trade_flows(const std::string& path) {
  CsvTable table = read_csv(path);
  if (table.rows.empty()) throw DataError(path + ": no rows");
  const int c_from = table.col("from");
  const int c_to = table.col("to");
  const int c_exports = table.col("exports");
  const int c_imports = table.col("imports");

  std::vector<std::string> order;
  auto index = [&](const std::string& c) {
    auto it = std::find(order.begin(), order.end(), c);
    if (it != order.end()) return static_cast<int>(it - order.begin());
    order.push_back(c);
    return static_cast<int>(order.size()) - 1;
  };
  struct Pair {
    int i, j;
    double ex, im;
  };
  std::vector<Pair> pairs;
  std::set<std::pair<int, int>> seen;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = path + ":" + std::to_string(table.line_numbers[r]);
    const int i = index(row[c_from]);
    const int j = index(row[c_to]);
    if (i == j)
      throw DataError(where + ": self-pair for " + row[c_from]);
    if (!seen.insert({i, j}).second)
      throw DataError(where + ": duplicate pair (" + row[c_from] + ", " +
                      row[c_to] + ")");
    const double ex = parse_double(row[c_exports], where);
    const double im = parse_double(row[c_imports], where);
    if (ex < 0.0 || im < 0.0)
      throw DataError(where + ": negative trade flow");
    pairs.push_back({i, j, ex, im});
  }
  const int n = static_cast<int>(order.size());
  TradeFlows flows;
  flows.order = order;
  flows.exports = arma::zeros(n, n);
  flows.imports = arma::zeros(n, n);
  for (const auto& p : pairs) {
    flows.exports(p.i, p.j) = p.ex;
    flows.imports(p.i, p.j) = p.im;
  }
  return flows;
}

TradeFlows aggregate_trade_flows(const TradeFlows& flows, const std::string& id,
                                 const std::vector<std::string>& members) {
  const int n = static_cast<int>(flows.order.size());
  std::vector<int> group(n, -1);  // new index per old index
  std::vector<std::string> order;
  int region_slot = -1;
  for (int i = 0; i < n; ++i) {
    const bool member = std::find(members.begin(), members.end(),
                                  flows.order[i]) != members.end();
    if (member) {
      if (region_slot < 0) {
        region_slot = static_cast<int>(order.size());
        order.push_back(id);
      }
      group[i] = region_slot;
    } else {
      group[i] = static_cast<int>(order.size());
      order.push_back(flows.order[i]);
    }
  }
  if (region_slot < 0)
    throw ValidationError("aggregate_trade_flows: no member of " + id +
                          " present");
  const int m = static_cast<int>(order.size());
  TradeFlows out;
  out.order = order;
  out.exports = arma::zeros(m, m);
  out.imports = arma::zeros(m, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (group[i] == group[j]) continue;  // intra-region flows drop out
      out.exports(group[i], group[j]) += flows.exports(i, j);
      out.imports(group[i], group[j]) += flows.imports(i, j);
    }
  return out;
}

FlowBasis flow_basis_from_token(const std::string& token) {
  if (token == "total") return FlowBasis::Total;
  if (token == "exports") return FlowBasis::Exports;
  if (token == "imports") return FlowBasis::Imports;
  throw ConfigError("flow basis: unknown token '" + token +
                    "' (want total, exports or imports)");
}

WeightMatrix build_weight_matrix(const TradeFlows& flows, FlowBasis basis) {
  arma::mat flow;
  switch (basis) {
    case FlowBasis::Total: flow = flows.exports + flows.imports; break;
    case FlowBasis::Exports: flow = flows.exports; break;
    case FlowBasis::Imports: flow = flows.imports; break;
  }
  const int n = static_cast<int>(flows.order.size());
  arma::mat w = arma::zeros(n, n);
  for (int i = 0; i < n; ++i) {
    const double total = arma::accu(flow.row(i));
    if (total <= 0.0)
      throw DataError("build_weight_matrix: isolated country " +
                      flows.order[i] + " (no recorded trade)");
    for (int j = 0; j < n; ++j)
      if (j != i) w(i, j) = flow(i, j) / total;
  }
  return WeightMatrix(flows.order, w);
}

arma::mat foreign_variables(const Panel& panel, const WeightMatrix& weights,
                            const CountrySpec& spec) {
  const int i = weights.index_of(spec.id);
  arma::mat out(panel.rows(), spec.kstar(), arma::fill::zeros);
  for (int f = 0; f < spec.kstar(); ++f) {
    const VariableKind kind = spec.foreign[f];
    arma::vec acc(panel.rows(), arma::fill::zeros);
    for (int j = 0; j < weights.size(); ++j) {
      const double w = weights.w()(i, j);
      if (w == 0.0) continue;
      const std::string& partner = weights.order()[j];
      const auto& pvars = panel.variables(partner);
      if (std::find(pvars.begin(), pvars.end(), kind) == pvars.end())
        throw DataError("foreign_variables: partner " + partner +
                        " lacks " + to_token(kind) + " needed by " + spec.id);
      acc += w * panel.series(partner, kind);
    }
    out.col(f) = acc;
  }
  return out;
}

std::map<std::string, double> load_weights_csv(const std::string& path) {
  CsvTable table = read_csv(path);
  const int c_country = table.col("country");
  const int c_weight = table.col("weight");
  std::map<std::string, double> out;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = path + ":" + std::to_string(table.line_numbers[r]);
    if (!out.emplace(row[c_country], parse_double(row[c_weight], where)).second)
      throw DataError(where + ": duplicate country " + row[c_country]);
  }
  return out;
}

void write_panel_csv(const Panel& panel, const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  // grid metadata first so the file is self-describing
  rows.push_back({"_meta", "start", panel.start().str(), ""});
  rows.push_back({"_meta", "training_split", panel.training_split().str(), ""});
  for (const auto& country : panel.countries()) {
    const auto& vars = panel.variables(country);
    const auto& data = panel.data(country);
    for (size_t v = 0; v < vars.size(); ++v)
      for (int t = 0; t < panel.rows(); ++t) {
        const double value = data(t, v);
        rows.push_back({country, to_token(vars[v]), panel.quarter_of(t).str(),
                        std::isnan(value) ? "NA" : fmt_double(value)});
      }
  }
  write_csv(path, {"country", "variable", "quarter", "value"}, rows);
}

Panel read_panel_csv(const std::string& path,
                     const std::vector<CountrySpec>& specs,
                     Quarter training_split) {
  CsvTable table = read_csv(path);
  const int c_country = table.col("country");
  const int c_variable = table.col("variable");
  const int c_quarter = table.col("quarter");
  const int c_value = table.col("value");

  int qmin = 0, qmax = 0;
  bool first = true;
  for (const auto& row : table.rows) {
    if (row[c_country] == "_meta") continue;
    const int qi = Quarter::parse(row[c_quarter]).index();
    if (first || qi < qmin) qmin = qi;
    if (first || qi > qmax) qmax = qi;
    first = false;
  }
  if (first) throw DataError(path + ": no observations");
  const int T = qmax - qmin + 1;

  std::vector<std::string> countries;
  std::vector<std::vector<VariableKind>> variables;
  std::vector<arma::mat> data;
  for (const auto& spec : specs) {
    countries.push_back(spec.id);
    variables.push_back(spec.domestic);
    data.emplace_back(arma::mat(T, spec.k()).fill(arma::datum::nan));
  }
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row[c_country] == "_meta") continue;
    const std::string where = path + ":" + std::to_string(table.line_numbers[r]);
    auto it = std::find(countries.begin(), countries.end(), row[c_country]);
    if (it == countries.end()) continue;  // country not requested
    const size_t ci = it - countries.begin();
    const VariableKind kind = kind_from_token(row[c_variable]);
    const auto& vars = variables[ci];
    auto vit = std::find(vars.begin(), vars.end(), kind);
    if (vit == vars.end()) continue;
    const int t = Quarter::parse(row[c_quarter]).index() - qmin;
    data[ci](t, vit - vars.begin()) =
        row[c_value] == "NA" ? arma::datum::nan
                             : parse_double(row[c_value], where);
  }
  return Panel(std::move(countries), std::move(variables), std::move(data),
               Quarter::from_index(qmin), training_split);
}

void write_weight_matrix_csv(const WeightMatrix& weights,
                             const std::string& path) {
  std::vector<std::string> header = {"country"};
  for (const auto& c : weights.order()) header.push_back(c);
  std::vector<std::vector<std::string>> rows;
  for (int i = 0; i < weights.size(); ++i) {
    std::vector<std::string> row = {weights.order()[i]};
    for (int j = 0; j < weights.size(); ++j)
      row.push_back(fmt_double(weights.w()(i, j)));
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

WeightMatrix read_weight_matrix_csv(const std::string& path) {
  CsvTable table = read_csv(path);
  if (table.header.empty() || table.header.front() != "country")
    throw DataError(path + ": expected leading 'country' column");
  std::vector<std::string> order(table.header.begin() + 1, table.header.end());
  const int n = static_cast<int>(order.size());
  if (static_cast<int>(table.rows.size()) != n)
    throw DataError(path + ": expected " + std::to_string(n) + " rows");
  arma::mat w(n, n);
  for (int i = 0; i < n; ++i) {
    const auto& row = table.rows[i];
    if (row[0] != order[i])
      throw DataError(path + ": row order does not match header order");
    for (int j = 0; j < n; ++j)
      w(i, j) = parse_double(row[j + 1], path + " row " + order[i]);
  }
  return WeightMatrix(std::move(order), std::move(w));
}

}  // namespace gvarsv

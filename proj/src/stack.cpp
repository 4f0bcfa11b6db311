#include "gvarsv/stack.hpp"

#include <algorithm>

namespace gvarsv {

LinkMatrices::LinkMatrices(WeightMatrix weights, std::vector<CountrySpec> specs)
    : weights_(std::move(weights)), specs_(std::move(specs)) {
  validate_specs(specs_);
  if (static_cast<int>(specs_.size()) != weights_.size())
    throw ValidationError("LinkMatrices: weight order and spec list differ in "
                          "length");
  for (int i = 0; i < weights_.size(); ++i)
    if (weights_.order()[i] != specs_[i].id)
      throw ValidationError("LinkMatrices: weight order and spec order differ "
                            "at position " + std::to_string(i) + " (" +
                            weights_.order()[i] + " vs " + specs_[i].id + ")");

  offsets_.resize(specs_.size());
  for (size_t i = 0; i < specs_.size(); ++i) {
    offsets_[i] = K_;
    K_ += specs_[i].k();
  }

  links_.resize(specs_.size());
  for (size_t i = 0; i < specs_.size(); ++i) {
    CountryLinks& link = links_[i];
    link.domestic_cols = arma::regspace<arma::uvec>(
        offsets_[i], offsets_[i] + specs_[i].k() - 1);
    link.foreign_rows = arma::zeros(specs_[i].kstar(), K_);
    for (int f = 0; f < specs_[i].kstar(); ++f) {
      const VariableKind kind = specs_[i].foreign[f];
      for (size_t j = 0; j < specs_.size(); ++j) {
        const double w = weights_.w()(i, j);
        if (w == 0.0) continue;
        if (!specs_[j].has_domestic(kind))
          throw ValidationError("LinkMatrices: partner " + specs_[j].id +
                                " lacks " + to_token(kind) +
                                " needed by " + specs_[i].id +
                                " with weight " + std::to_string(w));
        link.foreign_rows(f, offsets_[j] + specs_[j].domestic_pos(kind)) = w;
      }
    }
  }
}

arma::vec LinkMatrices::domestic_of(int i, const arma::vec& x) const {
  return x(links_[i].domestic_cols);
}

arma::vec LinkMatrices::foreign_of(int i, const arma::vec& x) const {
  return links_[i].foreign_rows * x;
}

LinkMatrices build_links(const WeightMatrix& weights,
                         const std::vector<CountrySpec>& specs) {
  return LinkMatrices(weights, specs);
}

GlobalModel stack_global(const LinkMatrices& links,
                         std::vector<CountryParameters> params,
                         std::vector<VolatilityParameters> vols) {
  const int n = links.n_countries();
  if (static_cast<int>(params.size()) != n ||
      static_cast<int>(vols.size()) != n)
    throw ValidationError("stack_global: need one parameter draw per country");
  for (int i = 0; i < n; ++i) {
    params[i].validate(links.specs()[i]);
    vols[i].validate(links.specs()[i]);
  }

  GlobalModel model;
  const int K = links.K();
  model.intercept = arma::zeros(K);
  model.g0 = arma::eye(K, K);
  for (int i = 0; i < n; ++i) {
    const auto& spec = links.specs()[i];
    model.max_p = std::max(model.max_p, spec.lags.p);
    model.max_q = std::max(model.max_q, spec.lags.q);
    model.max_s = std::max(model.max_s, spec.lags.s);
    model.max_m = std::max(model.max_m, spec.lags.m);
  }
  const int L = std::max(model.max_p, model.max_q);
  model.lag_mats.assign(L, arma::zeros(K, K));

  for (int i = 0; i < n; ++i) {
    const auto& spec = links.specs()[i];
    const int off = links.offset(i);
    const arma::mat& R = links.country(i).foreign_rows;
    model.intercept.subvec(off, off + spec.k() - 1) = params[i].intercept;
    if (spec.kstar() > 0)
      model.g0.rows(off, off + spec.k() - 1) -= params[i].foreign_lags[0] * R;
    for (int l = 1; l <= L; ++l) {
      arma::mat rows = arma::zeros(spec.k(), K);
      if (l <= spec.lags.p)
        rows.cols(off, off + spec.k() - 1) = params[i].domestic_lags[l - 1];
      if (l <= spec.lags.q && spec.kstar() > 0)
        rows += params[i].foreign_lags[l] * R;
      model.lag_mats[l - 1].rows(off, off + spec.k() - 1) = rows;
    }
  }

  model.g0_condition = arma::cond(model.g0);
  if (!std::isfinite(model.g0_condition) || model.g0_condition > 1e10)
    throw NumericError(
        "stack_global: contemporaneous matrix is numerically singular "
        "(condition " + std::to_string(model.g0_condition) + ", threshold "
        "1e10)");

  model.params = std::move(params);
  model.vols = std::move(vols);
  return model;
}

double spectral_radius(const GlobalModel& model) {
  const int K = model.K();
  const int L = static_cast<int>(model.lag_mats.size());
  if (L == 0) return 0.0;
  arma::mat companion = arma::zeros(K * L, K * L);
  for (int l = 0; l < L; ++l)
    companion.submat(0, l * K, K - 1, l * K + K - 1) =
        arma::solve(model.g0, model.lag_mats[l]);
  if (L > 1)
    companion.submat(K, 0, K * L - 1, K * (L - 1) - 1) =
        arma::eye(K * (L - 1), K * (L - 1));
  arma::cx_vec eig = arma::eig_gen(companion);
  return arma::abs(eig).max();
}

StabilityReport check_stability(const std::vector<GlobalModel>& models) {
  StabilityReport report;
  report.radius.set_size(models.size());
  report.condition.set_size(models.size());
  std::vector<arma::uword> flagged;
  for (size_t d = 0; d < models.size(); ++d) {
    report.radius[d] = spectral_radius(models[d]);
    report.condition[d] = models[d].g0_condition;
    if (report.radius[d] >= 1.0) flagged.push_back(d);
  }
  report.flagged = arma::uvec(flagged);
  return report;
}

}  // namespace gvarsv

#include "gvarsv/varx.hpp"

#include <algorithm>
#include <cmath>

#include "gvarsv/ingest.hpp"
#include "gvarsv/rng.hpp"

namespace gvarsv {

namespace {

// column layout of the coefficient matrix B (k x nz):
// [intercept | domestic lags 1..p | foreign lags 0..q | vol-in-mean 0..s]
int col_domestic(const CountrySpec& spec, int lag) {
  return 1 + (lag - 1) * spec.k();
}
int col_foreign(const CountrySpec& spec, int lag) {
  return 1 + spec.lags.p * spec.k() + lag * spec.kstar();
}
int col_vol(const CountrySpec& spec, int lag) {
  return 1 + spec.lags.p * spec.k() + (spec.lags.q + 1) * spec.kstar() +
         lag * spec.k();
}

arma::mat params_to_matrix(const CountrySpec& spec,
                           const CountryParameters& params) {
  arma::mat B(spec.k(), 1 + spec.lags.p * spec.k() +
                            (spec.lags.q + 1) * spec.kstar() +
                            (spec.lags.s + 1) * spec.k());
  B.col(0) = params.intercept;
  for (int l = 1; l <= spec.lags.p; ++l)
    B.cols(col_domestic(spec, l), col_domestic(spec, l) + spec.k() - 1) =
        params.domestic_lags[l - 1];
  for (int l = 0; l <= spec.lags.q; ++l)
    if (spec.kstar() > 0)
      B.cols(col_foreign(spec, l), col_foreign(spec, l) + spec.kstar() - 1) =
          params.foreign_lags[l];
  for (int l = 0; l <= spec.lags.s; ++l)
    B.cols(col_vol(spec, l), col_vol(spec, l) + spec.k() - 1) =
        params.vol_in_mean[l];
  return B;
}

CountryParameters matrix_to_params(const CountrySpec& spec, const arma::mat& B,
                                   bool include_vol,
                                   IdentificationMatrix ident) {
  CountryParameters params{arma::vec(B.col(0)), {}, {}, {}, std::move(ident)};
  for (int l = 1; l <= spec.lags.p; ++l)
    params.domestic_lags.push_back(
        B.cols(col_domestic(spec, l), col_domestic(spec, l) + spec.k() - 1));
  for (int l = 0; l <= spec.lags.q; ++l)
    params.foreign_lags.push_back(
        spec.kstar() > 0
            ? arma::mat(B.cols(col_foreign(spec, l),
                               col_foreign(spec, l) + spec.kstar() - 1))
            : arma::mat(spec.k(), 0));
  for (int l = 0; l <= spec.lags.s; ++l)
    params.vol_in_mean.push_back(
        include_vol
            ? arma::mat(B.cols(col_vol(spec, l), col_vol(spec, l) + spec.k() - 1))
            : arma::mat(spec.k(), spec.k(), arma::fill::zeros));
  return params;
}

// draw from N(P^{-1} b, P^{-1}) given the precision P and linear term b
arma::vec gaussian_draw(const arma::mat& P, const arma::vec& b, Rng& rng,
                        const char* what) {
  arma::mat L;
  if (!arma::chol(L, arma::symmatl(P), "lower"))
    throw NumericError(std::string(what) +
                       ": posterior precision not positive definite");
  arma::vec mean = arma::solve(arma::trimatu(L.t()),
                               arma::solve(arma::trimatl(L), b));
  return mean + arma::solve(arma::trimatu(L.t()),
                            rng.normal_vec(static_cast<int>(b.n_elem)));
}

}  // namespace

EstimationFrame build_frame(const Panel& panel, const WeightMatrix& weights,
                            const CountrySpec& spec) {
  spec.validate();
  const arma::mat& x = panel.data(spec.id);
  const arma::mat xs = foreign_variables(panel, weights, spec);
  const int k = spec.k();
  const int p = spec.lags.p;
  const int q = spec.lags.q;
  const int r0 = std::max(p, q);

  const int split_row = panel.row_of(panel.training_split());
  const int w0 = split_row + 1;
  const int first = panel.first_complete_row(spec.id);
  if (w0 - r0 < first)
    throw DataError("estimation window for " + spec.id + " starts at " +
                    panel.quarter_of(w0).str() + " but needs " +
                    std::to_string(r0) + " lag rows before it");
  const int T = panel.rows() - w0;
  if (T < 8)
    throw DataError("estimation window for " + spec.id + " has only " +
                    std::to_string(T) + " quarters");

  EstimationFrame frame;
  frame.spec = spec;
  frame.window_start = panel.quarter_of(w0);
  frame.n_pre = std::max(spec.lags.m, spec.lags.s);
  frame.y = x.rows(w0, panel.rows() - 1);
  frame.z_fixed.set_size(T, 1 + p * k + (q + 1) * spec.kstar());
  for (int t = 0; t < T; ++t) {
    frame.z_fixed(t, 0) = 1.0;
    for (int l = 1; l <= p; ++l)
      frame.z_fixed.row(t).subvec(1 + (l - 1) * k, l * k) =
          x.row(w0 + t - l);
    for (int l = 0; l <= q; ++l)
      if (spec.kstar() > 0)
        frame.z_fixed.row(t).subvec(1 + p * k + l * spec.kstar(),
                                    p * k + (l + 1) * spec.kstar()) =
            xs.row(w0 + t - l);
  }
  frame.x_hist = x.rows(w0 - q, panel.rows() - 1);
  if (!frame.y.is_finite() || !frame.z_fixed.is_finite() ||
      !frame.x_hist.is_finite())
    throw DataError("estimation window for " + spec.id +
                    " contains missing values");
  return frame;
}

Priors build_priors(const Panel& panel, const WeightMatrix& weights,
                    const CountrySpec& spec) {
  spec.validate();
  const arma::mat& x = panel.data(spec.id);
  const arma::mat xs = foreign_variables(panel, weights, spec);
  const int k = spec.k();
  const int p = spec.lags.p;
  const int q = spec.lags.q;
  const int r0 = std::max(p, q);

  const int first = panel.first_complete_row(spec.id);
  const int split_row = panel.row_of(panel.training_split());
  const int t0 = first + r0;
  const int n = split_row - t0 + 1;
  if (n < 20)
    throw DataError("training window for " + spec.id + " has " +
                    std::to_string(std::max(n, 0)) +
                    " usable quarters, need at least 20");

  const int nzf = 1 + p * k + (q + 1) * spec.kstar();
  arma::mat Z0(n, nzf);
  arma::mat Y0(n, k);
  for (int i = 0; i < n; ++i) {
    const int t = t0 + i;
    Y0.row(i) = x.row(t);
    Z0(i, 0) = 1.0;
    for (int l = 1; l <= p; ++l)
      Z0.row(i).subvec(1 + (l - 1) * k, l * k) = x.row(t - l);
    for (int l = 0; l <= q; ++l)
      if (spec.kstar() > 0)
        Z0.row(i).subvec(1 + p * k + l * spec.kstar(),
                         p * k + (l + 1) * spec.kstar()) = xs.row(t - l);
  }
  if (!Z0.is_finite() || !Y0.is_finite())
    throw DataError("training window for " + spec.id +
                    " contains missing values");

  arma::mat sol = arma::solve(Z0, Y0);  // least squares, nzf x k
  arma::mat resid = Y0 - Z0 * sol;

  Priors priors;
  priors.coef_mean = arma::zeros(k, nzf + (spec.lags.s + 1) * k);
  priors.coef_mean.cols(0, nzf - 1) = sol.t();

  priors.h0_mean.set_size(k);
  for (int r = 0; r < k; ++r) {
    const double v = std::max(arma::var(resid.col(r)), 1e-8);
    priors.h0_mean[r] = std::log(v);
  }

  const int nv = 1 + k * spec.lags.m + k * q;
  priors.vol_mean = arma::zeros(k, nv);
  priors.vol_var.set_size(nv);
  priors.vol_var[0] = 1.0;
  for (int j = 0; j < k * spec.lags.m; ++j) priors.vol_var[1 + j] = 0.25;
  for (int j = 0; j < k * q; ++j)
    priors.vol_var[1 + k * spec.lags.m + j] = 0.01;
  for (int r = 0; r < k; ++r) {
    priors.vol_mean(r, 0) = 0.1 * priors.h0_mean[r];
    priors.vol_mean(r, 1 + r) = 0.9;  // own first volatility lag
  }
  return priors;
}

void McmcConfig::validate(const CountrySpec& spec) const {
  if (n_burn < 0 || n_keep < 1 || thin < 1)
    throw ConfigError("McmcConfig: need n_burn >= 0, n_keep >= 1, thin >= 1");
  if (!(h_step > 0.0))
    throw ConfigError("McmcConfig: h_step must be positive");
  if (sign_cap < 1) throw ConfigError("McmcConfig: sign_cap must be >= 1");
  if (fixed_h && static_cast<int>(fixed_h->n_elem) != spec.k())
    throw ConfigError("McmcConfig: fixed_h must have k entries");
  if (fixed_a_tilde) {
    // reuse the full invariant set, including origin signs
    IdentificationMatrix check(*fixed_a_tilde, spec.domestic,
                               spec.is_shock_origin);
    (void)check;
  }
}

PosteriorDraws sample_posterior(const EstimationFrame& frame,
                                const Priors& priors, const McmcConfig& config,
                                std::uint64_t seed) {
  const CountrySpec& spec = frame.spec;
  config.validate(spec);
  const int k = spec.k();
  const int T = frame.T();
  const int n_pre = frame.n_pre;
  const int q = spec.lags.q;
  const int s = spec.lags.s;
  const int m = spec.lags.m;
  const bool vim = config.include_vol_in_mean;
  const int nzf = frame.nz_fixed();
  const int nz = frame.nz(vim);
  const int nz_full = frame.nz(true);
  const int dim = k * nz;

  if (static_cast<int>(priors.coef_mean.n_rows) != k ||
      static_cast<int>(priors.coef_mean.n_cols) != nz_full)
    throw ValidationError("sample_posterior: prior mean is not k x nz");
  const int nv = 1 + k * m + k * q;
  if (static_cast<int>(priors.vol_mean.n_cols) != nv ||
      static_cast<int>(priors.vol_var.n_elem) != nv)
    throw ValidationError("sample_posterior: volatility prior layout is not "
                          "1 + k*m + k*q");

  Rng rng(seed);

  const arma::mat b0 = vim ? arma::mat(priors.coef_mean)
                           : arma::mat(priors.coef_mean.cols(0, nzf - 1));
  // vectorise is column-major, so beta[j*k + r] = B(r, j)
  const arma::vec prior_b = arma::vectorise(b0) / priors.coef_var;
  arma::mat B = b0;
  arma::mat a_tilde = config.fixed_a_tilde ? *config.fixed_a_tilde
                                           : arma::eye(k, k);
  arma::mat h(n_pre + T, k);
  if (config.fixed_h)
    h.each_row() = config.fixed_h->t();
  else
    h.each_row() = priors.h0_mean.t();
  arma::mat gamma = priors.vol_mean;
  arma::vec qdiag(k);
  qdiag.fill(priors.q_scale / std::max(priors.q_shape - 1.0, 0.5));

  const bool do_h = !config.fixed_h.has_value();
  const bool do_a = !config.fixed_a_tilde.has_value() && k > 1;
  double h_step = config.h_step;
  double level_step = 1.0 / std::sqrt(static_cast<double>(T));
  double scale_step = 0.1;

  // volatility macro-feedback regressors never change across sweeps
  arma::mat vx(T, k * q);
  for (int t = 0; t < T; ++t)
    for (int l = 1; l <= q; ++l)
      vx.row(t).subvec((l - 1) * k, l * k - 1) = frame.x_hist.row(q + t - l);

  const arma::vec vol_prior_prec = 1.0 / priors.vol_var.t();

  long h_props = 0, h_acc = 0, sign_rejects = 0;
  long w_props = 0, w_acc = 0, lv_props = 0, lv_acc = 0, sc_props = 0,
       sc_acc = 0;

  PosteriorDraws out;
  out.window_start = frame.window_start;
  out.params.reserve(config.n_keep);
  out.vols.reserve(config.n_keep);
  out.h.reserve(config.n_keep);

  arma::mat Z(T, nz), P(dim, dim), U(T, k);
  arma::vec bvec(dim);

  const int total = config.n_burn + config.n_keep * config.thin;
  for (int sweep = 0; sweep < total; ++sweep) {
    // (1) level coefficients by GLS given the path and identification
    Z.cols(0, nzf - 1) = frame.z_fixed;
    if (vim)
      for (int l = 0; l <= s; ++l)
        Z.cols(nzf + l * k, nzf + (l + 1) * k - 1) =
            h.rows(n_pre - l, n_pre + T - 1 - l);

    arma::mat A = arma::inv(arma::trimatl(a_tilde));
    P.zeros();
    bvec = prior_b;
    arma::vec zt(nz), w(k);
    arma::mat oinv(k, k), ha(k, k);
    for (int t = 0; t < T; ++t) {
      for (int j = 0; j < nz; ++j) zt[j] = Z(t, j);
      for (int r = 0; r < k; ++r)
        ha.row(r) = std::exp(-h(n_pre + t, r)) * A.row(r);
      oinv = A.t() * ha;  // A' H^{-1} A
      w = oinv * frame.y.row(t).t();
      for (int j1 = 0; j1 < nz; ++j1) {
        bvec.subvec(j1 * k, (j1 + 1) * k - 1) += zt[j1] * w;
        for (int j2 = 0; j2 <= j1; ++j2) {
          const double zz = zt[j1] * zt[j2];
          for (int i2 = 0; i2 < k; ++i2) {
            double* col = P.colptr(j2 * k + i2) + j1 * k;
            for (int i1 = 0; i1 < k; ++i1) col[i1] += zz * oinv(i1, i2);
          }
        }
      }
    }
    for (int j1 = 0; j1 < nz; ++j1)
      for (int j2 = j1 + 1; j2 < nz; ++j2)
        P.submat(j1 * k, j2 * k, (j1 + 1) * k - 1, (j2 + 1) * k - 1) =
            P.submat(j2 * k, j1 * k, (j2 + 1) * k - 1, (j1 + 1) * k - 1);
    P.diag() += 1.0 / priors.coef_var;
    B = arma::reshape(gaussian_draw(P, bvec, rng, "level coefficients"), k,
                      nz);

    // (2) identification rows by standardized triangular regressions
    U = frame.y - Z * B.t();
    if (do_a) {
      arma::mat sd(T, k);
      for (int t = 0; t < T; ++t)
        for (int r = 0; r < k; ++r)
          sd(t, r) = std::exp(0.5 * h(n_pre + t, r));
      bool updated = false;
      for (int attempt = 0; attempt < config.sign_cap; ++attempt) {
        arma::mat A_cand = arma::eye(k, k);
        for (int r = 1; r < k; ++r) {
          arma::vec d = U.col(r) / sd.col(r);
          arma::mat G(T, r);
          for (int c = 0; c < r; ++c) G.col(c) = -U.col(c) / sd.col(r);
          arma::mat Pr = G.t() * G;
          Pr.diag() += 1.0 / priors.ident_var;
          arma::vec theta =
              gaussian_draw(Pr, G.t() * d, rng, "identification row");
          A_cand(r, arma::span(0, r - 1)) = theta.t();
        }
        arma::mat cand = arma::inv(arma::trimatl(A_cand));
        if (!spec.is_shock_origin ||
            IdentificationMatrix::signs_ok(cand, true)) {
          a_tilde = cand;
          updated = true;
          break;
        }
        ++sign_rejects;
      }
      (void)updated;  // cap exhausted keeps the previous accepted matrix
    }

    // (3)+(4) latent path, volatility-transition rows, innovation variances
    if (do_h) {
      A = arma::inv(arma::trimatl(a_tilde));
      arma::mat mean_fixed = frame.z_fixed * B.cols(0, nzf - 1).t();
      std::vector<arma::mat> psi;
      if (vim)
        for (int l = 0; l <= s; ++l)
          psi.push_back(B.cols(nzf + l * k, nzf + (l + 1) * k - 1));

      const int s_eff = vim ? s : 0;
      const int last = n_pre + T - 1;
      const int reach = std::max(m, s_eff);

      // Log-density pieces read straight off the current h matrix.
      // Proposals mutate h in place, evaluate, and revert on rejection.
      auto meas_resid = [&](int tau) -> arma::vec {
        const int to = tau - n_pre;
        arma::rowvec mean = mean_fixed.row(to);
        if (vim)
          for (int l = 0; l <= s; ++l) mean += h.row(tau - l) * psi[l].t();
        return A * (frame.y.row(to) - mean).t();
      };
      auto trans_resid = [&](int tau) -> arma::vec {
        const int to = tau - n_pre;
        arma::rowvec eta = h.row(tau) - gamma.col(0).t();
        for (int l = 1; l <= m; ++l)
          eta -= h.row(tau - l) * gamma.cols(1 + (l - 1) * k, l * k).t();
        for (int l = 1; l <= q; ++l)
          eta -= vx.row(to).subvec((l - 1) * k, l * k - 1) *
                 gamma.cols(1 + k * m + (l - 1) * k, k * m + l * k).t();
        return eta.t();
      };
      auto meas_logp = [&](int tau) -> double {
        const arma::vec eps = meas_resid(tau);
        const arma::rowvec hvar = h.row(tau);
        double lp = 0.0;
        for (int r = 0; r < k; ++r)
          lp -= 0.5 * (hvar[r] + eps[r] * eps[r] * std::exp(-hvar[r]));
        return lp;
      };
      auto trans_logp = [&](int tau) -> double {
        const arma::vec eta = trans_resid(tau);
        double lp = 0.0;
        for (int r = 0; r < k; ++r)
          lp -= 0.5 * eta[r] * eta[r] / qdiag[r];
        return lp;
      };
      auto term_logp = [&](int tau) -> double {
        if (tau < n_pre) {
          const arma::rowvec d = h.row(tau) - priors.h0_mean.t();
          return -0.5 * arma::dot(d, d) / priors.h0_var;
        }
        return meas_logp(tau) + trans_logp(tau);
      };
      auto range_logp = [&](int lo, int hi) {
        double lp = 0.0;
        for (int tau = lo; tau <= hi; ++tau) lp += term_logp(tau);
        return lp;
      };

      long sweep_acc = 0;
      for (int trow = 0; trow <= last; ++trow) {
        const int hi = std::min(trow + reach, last);
        const double lp_cur = range_logp(trow, hi);
        const arma::rowvec step = h_step * rng.normal_vec(k).t();
        h.row(trow) += step;
        if (std::log(rng.uniform()) < range_logp(trow, hi) - lp_cur)
          ++sweep_acc;
        else
          h.row(trow) -= step;
      }

      // Single-row moves explore a persistent path only by diffusion, which
      // leaves the sampled path artificially choppy and drags the
      // transition's persistence toward zero. Window proposals fix that:
      // each window is redrawn from a Gaussian assembled from the exact
      // transition quadratic plus a second-order expansion of the
      // measurement terms around the current path, with the Hastings
      // correction evaluated in both directions so the chain still targets
      // the exact conditional.
      std::vector<arma::mat> wmat;
      if (vim)
        for (int l = 0; l <= s; ++l) wmat.push_back(A * psi[l]);
      auto window_pass = [&]() {
        const int win = 20;
        const arma::vec qinv = 1.0 / qdiag;
        int t0 = n_pre + static_cast<int>(rng.uniform() * win);
        while (t0 <= last) {
          const int t1 = std::min(last, t0 + win - 1);
          const int nw = t1 - t0 + 1;
          const int dim = nw * k;
          const int hi_trans = std::min(t1 + m, last);
          const int hi_meas = std::min(t1 + s_eff, last);

          // Precision and linear term for the stacked deltas of rows
          // t0..t1, read off the current h matrix.
          auto build_window = [&](arma::mat& P, arma::vec& bvec) {
            P.zeros(dim, dim);
            bvec.zeros(dim);
            std::vector<std::pair<int, arma::mat>> coef;
            for (int tau = t0; tau <= hi_trans; ++tau) {
              coef.clear();
              if (tau <= t1)
                coef.emplace_back(tau - t0, arma::mat(arma::eye(k, k)));
              for (int l = 1; l <= m; ++l)
                if (tau - l >= t0 && tau - l <= t1)
                  coef.emplace_back(
                      tau - l - t0,
                      arma::mat(-gamma.cols(1 + (l - 1) * k, l * k)));
              const arma::vec eta = trans_resid(tau);
              for (const auto& [j1, c1] : coef) {
                const arma::mat c1q = c1.t() * arma::diagmat(qinv);
                bvec.subvec(j1 * k, (j1 + 1) * k - 1) -= c1q * eta;
                for (const auto& [j2, c2] : coef)
                  P.submat(j1 * k, j2 * k, (j1 + 1) * k - 1,
                           (j2 + 1) * k - 1) += c1q * c2;
              }
            }
            for (int tau = t0; tau <= hi_meas; ++tau) {
              const arma::vec eps = meas_resid(tau);
              const arma::vec evar = arma::exp(-h.row(tau).t());
              if (tau <= t1) {
                const int at = (tau - t0) * k;
                for (int r = 0; r < k; ++r) {
                  const double ce = eps[r] * eps[r] * evar[r];
                  P(at + r, at + r) += 0.5 * ce;
                  bvec[at + r] += 0.5 * (ce - 1.0);
                }
              }
              if (!vim) continue;
              std::vector<int> lags;
              for (int l = 0; l <= s; ++l)
                if (tau - l >= t0 && tau - l <= t1) lags.push_back(l);
              if (lags.empty()) continue;
              arma::mat G(k, lags.size() * k);
              arma::uvec idx(lags.size() * k);
              for (std::size_t a = 0; a < lags.size(); ++a) {
                G.cols(a * k, (a + 1) * k - 1) = wmat[lags[a]];
                for (int r = 0; r < k; ++r)
                  idx[a * k + r] = (tau - lags[a] - t0) * k + r;
              }
              P.submat(idx, idx) += G.t() * arma::diagmat(evar) * G;
              bvec(idx) += G.t() * (evar % eps);
            }
          };

          arma::mat P(dim, dim), Rw;
          arma::vec bvec(dim);
          build_window(P, bvec);
          if (!arma::chol(Rw, P)) {
            t0 = t1 + 1;
            continue;
          }
          const arma::vec mu = arma::solve(
              arma::trimatu(Rw), arma::solve(arma::trimatl(Rw.t()), bvec));
          const arma::vec z = rng.normal_vec(dim);
          const arma::vec delta = mu + arma::solve(arma::trimatu(Rw), z);
          const double logq_fwd =
              arma::accu(arma::log(Rw.diag())) - 0.5 * arma::dot(z, z);

          double lp_cur = 0.0;
          for (int tau = t0; tau <= hi_trans; ++tau)
            lp_cur += trans_logp(tau);
          for (int tau = t0; tau <= hi_meas; ++tau) lp_cur += meas_logp(tau);

          const arma::mat saved = h.rows(t0, t1);
          for (int j = 0; j < nw; ++j)
            h.row(t0 + j) += delta.subvec(j * k, (j + 1) * k - 1).t();

          double lp_cand = 0.0;
          for (int tau = t0; tau <= hi_trans; ++tau)
            lp_cand += trans_logp(tau);
          for (int tau = t0; tau <= hi_meas; ++tau)
            lp_cand += meas_logp(tau);

          build_window(P, bvec);
          const bool ok = arma::chol(Rw, P);
          double logq_back = -arma::datum::inf;
          if (ok) {
            const arma::vec mu2 = arma::solve(
                arma::trimatu(Rw), arma::solve(arma::trimatl(Rw.t()), bvec));
            const arma::vec d2 = Rw * (-delta - mu2);
            logq_back =
                arma::accu(arma::log(Rw.diag())) - 0.5 * arma::dot(d2, d2);
          }
          const bool accept =
              ok && std::log(rng.uniform()) <
                        lp_cand - lp_cur + logq_back - logq_fwd;
          if (!accept) h.rows(t0, t1) = saved;
          if (sweep >= config.n_burn) {
            ++w_props;
            if (accept) ++w_acc;
          }
          t0 = t1 + 1;
        }
      };

      // Translating the whole path together with a matching shift of the
      // transition intercept leaves every transition residual unchanged,
      // so the ratio involves only the measurement, the pre-sample prior
      // and the intercept prior. The path level and the intercept are the
      // slowest joint direction of the conditional samplers above.
      long lv_sw_props = 0, lv_sw_acc = 0, sc_sw_props = 0, sc_sw_acc = 0;
      auto level_moves = [&]() {
        arma::mat usum = arma::eye(k, k);
        for (int l = 1; l <= m; ++l)
          usum -= gamma.cols(1 + (l - 1) * k, l * k);
        double cur_meas = 0.0;
        for (int tau = n_pre; tau <= last; ++tau) cur_meas += meas_logp(tau);
        for (int rep = 0; rep < 4; ++rep) {
          const arma::vec dc = level_step * rng.normal_vec(k);
          const arma::vec dg = usum * dc;
          double lr = 0.0;
          for (int r = 0; r < k; ++r) {
            const double g0 = gamma(r, 0) - priors.vol_mean(r, 0);
            const double g1 = g0 + dg[r];
            lr -= 0.5 * (g1 * g1 - g0 * g0) / priors.vol_var[0];
          }
          for (int tau = 0; tau < n_pre; ++tau) {
            const arma::rowvec d0 = h.row(tau) - priors.h0_mean.t();
            const arma::rowvec d1 = d0 + dc.t();
            lr -= 0.5 * (arma::dot(d1, d1) - arma::dot(d0, d0)) /
                  priors.h0_var;
          }
          h.each_row() += dc.t();
          double cand_meas = 0.0;
          for (int tau = n_pre; tau <= last; ++tau)
            cand_meas += meas_logp(tau);
          const bool accept =
              std::log(rng.uniform()) < lr + cand_meas - cur_meas;
          if (accept) {
            gamma.col(0) += dg;
            cur_meas = cand_meas;
          } else {
            h.each_row() -= dc.t();
          }
          ++lv_sw_props;
          if (accept) ++lv_sw_acc;
          if (sweep >= config.n_burn) {
            ++lv_props;
            if (accept) ++lv_acc;
          }
        }
      };

      // Stretching the path about its column means while rescaling the
      // innovation variances to match moves the roughness of the path and
      // Q together; separately, each pins the other in place. The ratio is
      // computed in full, with the transition normalization, the variance
      // priors and the Jacobian of the stretch (f per non-mean direction,
      // f^2 per variance).
      auto scale_moves = [&]() {
        const int nrows = n_pre + T;
        for (int rep = 0; rep < 2; ++rep) {
          const double chi = scale_step * rng.normal();
          const double f = std::exp(chi);
          double lr = static_cast<double>(k) * (nrows - 1) * chi +
                      2.0 * k * chi - static_cast<double>(k * T) * chi;
          for (int r = 0; r < k; ++r)
            lr += -(priors.q_shape + 1.0) * 2.0 * chi -
                  priors.q_scale * (std::exp(-2.0 * chi) - 1.0) / qdiag[r];
          double lp0 = 0.0;
          for (int tau = 0; tau < n_pre; ++tau) lp0 += term_logp(tau);
          for (int tau = n_pre; tau <= last; ++tau)
            lp0 += meas_logp(tau) + trans_logp(tau);
          const arma::rowvec cmean = arma::mean(h, 0);
          const arma::mat saved_h = h;
          const arma::vec saved_q = qdiag;
          h.each_row() -= cmean;
          h *= f;
          h.each_row() += cmean;
          qdiag *= f * f;
          double lp1 = 0.0;
          for (int tau = 0; tau < n_pre; ++tau) lp1 += term_logp(tau);
          for (int tau = n_pre; tau <= last; ++tau)
            lp1 += meas_logp(tau) + trans_logp(tau);
          const bool accept = std::log(rng.uniform()) < lr + lp1 - lp0;
          if (!accept) {
            h = saved_h;
            qdiag = saved_q;
          }
          ++sc_sw_props;
          if (accept) ++sc_sw_acc;
          if (sweep >= config.n_burn) {
            ++sc_props;
            if (accept) ++sc_acc;
          }
        }
      };

      // volatility-transition rows and innovation variances
      auto vol_rows = [&]() {
        arma::mat V(T, nv);
        V.col(0).ones();
        for (int l = 1; l <= m; ++l)
          V.cols(1 + (l - 1) * k, l * k) =
              h.rows(n_pre - l, n_pre + T - 1 - l);
        if (q > 0) V.cols(1 + k * m, nv - 1) = vx;
        const arma::mat vtv = V.t() * V;
        for (int r = 0; r < k; ++r) {
          const arma::vec yr = h.col(r).subvec(n_pre, n_pre + T - 1);
          arma::mat Pg = vtv / qdiag[r];
          Pg.diag() += vol_prior_prec;
          const arma::vec bg = vol_prior_prec % priors.vol_mean.row(r).t() +
                               V.t() * yr / qdiag[r];
          const arma::vec g = gaussian_draw(Pg, bg, rng, "volatility row");
          gamma.row(r) = g.t();
          const arma::vec resid = yr - V * g;
          qdiag[r] =
              rng.inv_gamma(priors.q_shape + 0.5 * T,
                            priors.q_scale + 0.5 * arma::dot(resid, resid));
        }
      };

      // Two rounds per sweep: refreshing the transition parameters between
      // window passes lets the path roughness and the innovation variances
      // move together instead of pinning each other in place.
      for (int round = 0; round < 2; ++round) {
        window_pass();
        level_moves();
        scale_moves();
        vol_rows();
      }

      if (sweep < config.n_burn) {
        // tune toward ~35% acceptance while burning in, frozen afterwards
        const double rate =
            static_cast<double>(sweep_acc) / static_cast<double>(last + 1);
        h_step = std::clamp(h_step * std::exp(0.66 * (rate - 0.35)), 1e-4,
                            3.0);
        const double lv_rate = static_cast<double>(lv_sw_acc) /
                               static_cast<double>(std::max(lv_sw_props, 1L));
        level_step = std::clamp(
            level_step * std::exp(0.66 * (lv_rate - 0.3)), 1e-6, 3.0);
        const double sc_rate = static_cast<double>(sc_sw_acc) /
                               static_cast<double>(std::max(sc_sw_props, 1L));
        scale_step = std::clamp(
            scale_step * std::exp(0.66 * (sc_rate - 0.3)), 1e-6, 3.0);
      } else {
        h_props += last + 1;
        h_acc += sweep_acc;
      }
    }

    if (sweep >= config.n_burn &&
        (sweep - config.n_burn) % config.thin == 0) {
      IdentificationMatrix ident(a_tilde, spec.domestic, spec.is_shock_origin);
      out.params.push_back(matrix_to_params(spec, B, vim, std::move(ident)));

      VolatilityParameters vol;
      if (do_h) {
        vol.intercept = gamma.col(0);
        for (int l = 1; l <= m; ++l)
          vol.vol_lags.push_back(gamma.cols(1 + (l - 1) * k, l * k));
        for (int l = 1; l <= q; ++l)
          vol.macro_feedback.push_back(
              gamma.cols(1 + k * m + (l - 1) * k, k * m + l * k));
        vol.innovation_var = qdiag;
      } else {
        vol.intercept = *config.fixed_h;
        vol.vol_lags.assign(m, arma::zeros(k, k));
        vol.macro_feedback.assign(q, arma::zeros(k, k));
        vol.innovation_var = arma::zeros(k);
      }
      out.vols.push_back(std::move(vol));
      out.h.emplace_back(h, n_pre);
    }
  }

  auto rate_of = [](long acc, long props) {
    return props > 0 ? static_cast<double>(acc) / static_cast<double>(props)
                     : 0.0;
  };
  out.h_accept_rate = rate_of(h_acc, h_props);
  out.window_accept_rate = rate_of(w_acc, w_props);
  out.level_accept_rate = rate_of(lv_acc, lv_props);
  out.scale_accept_rate = rate_of(sc_acc, sc_props);
  out.sign_rejections = sign_rejects;
  return out;
}

double loglik_path(const EstimationFrame& frame,
                   const CountryParameters& params, const LatentVolPath& path,
                   bool include_vol_in_mean) {
  const CountrySpec& spec = frame.spec;
  params.validate(spec);
  const int k = spec.k();
  const int T = frame.T();
  if (path.n_pre() != frame.n_pre || path.n_obs() != T)
    throw ValidationError("loglik_path: path does not align with the frame");

  const arma::mat B = params_to_matrix(spec, params);
  const arma::mat A = arma::inv(arma::trimatl(params.ident.a_tilde()));
  const arma::mat mean_fixed =
      frame.z_fixed * B.cols(0, frame.nz_fixed() - 1).t();

  double ll = -0.5 * static_cast<double>(k * T) *
              std::log(2.0 * arma::datum::pi);
  for (int t = 0; t < T; ++t) {
    arma::rowvec mean = mean_fixed.row(t);
    if (include_vol_in_mean)
      for (int l = 0; l <= spec.lags.s; ++l)
        mean += path.h().row(path.n_pre() + t - l) *
                params.vol_in_mean[l].t();
    const arma::vec eps = A * (frame.y.row(t) - mean).t();
    const arma::rowvec hrow = path.at_obs(t);
    for (int r = 0; r < k; ++r)
      ll -= 0.5 * (hrow[r] + eps[r] * eps[r] * std::exp(-hrow[r]));
  }
  return ll;
}

}  // namespace gvarsv

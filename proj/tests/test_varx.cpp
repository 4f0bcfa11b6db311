#include <doctest.h>

#include <algorithm>
#include <armadillo>
#include <cmath>

#include "gvarsv/rng.hpp"
#include "gvarsv/synthetic.hpp"
#include "gvarsv/varx.hpp"

using namespace gvarsv;

namespace {

struct DegenerateSetup {
  TrueWorld world;
  GeneratedData data;
  EstimationFrame frame;
  Priors priors;
  McmcConfig config;

  DegenerateSetup()
      : world([] {
          auto w = linear_world(404);
          w.T = 150;
          return w;
        }()),
        data(generate(world, Quarter(1985, 1), 60)),
        frame(build_frame(data.panel, world.weights, world.specs[0])),
        priors(build_priors(data.panel, world.weights, world.specs[0])) {
    config.include_vol_in_mean = false;
    config.fixed_h = arma::vec(world.h_init.subvec(0, 2));
    config.fixed_a_tilde = world.params[0].ident.a_tilde();
    config.n_burn = 20;
    config.n_keep = 4000;
  }
};

// Exact posterior of the fixed-covariance regression by a whitened stacked
// least-squares route (QR), sharing no algebra with the sampler's
// kron-precision assembly.
struct ExactPosterior {
  arma::vec mean;
  arma::vec sd;
};

ExactPosterior exact_posterior(const DegenerateSetup& s) {
  const int k = 3;
  const int T = s.frame.T();
  const int nz = s.frame.nz(false);
  const int dim = k * nz;

  arma::vec hbar = *s.config.fixed_h;
  arma::mat omega = *s.config.fixed_a_tilde *
                    arma::diagmat(arma::exp(hbar)) *
                    s.config.fixed_a_tilde->t();
  arma::mat cinv = arma::inv(arma::chol(omega, "lower"));

  arma::mat big(T * k + dim, dim, arma::fill::zeros);
  arma::vec rhs(T * k + dim);
  for (int t = 0; t < T; ++t) {
    big.rows(t * k, (t + 1) * k - 1) =
        arma::kron(s.frame.z_fixed.row(t), cinv);
    rhs.subvec(t * k, (t + 1) * k - 1) = cinv * s.frame.y.row(t).t();
  }
  const double w0 = 1.0 / std::sqrt(s.priors.coef_var);
  const arma::vec beta0 =
      arma::vectorise(s.priors.coef_mean.cols(0, nz - 1));
  big.rows(T * k, T * k + dim - 1) = w0 * arma::eye(dim, dim);
  rhs.subvec(T * k, T * k + dim - 1) = w0 * beta0;

  ExactPosterior exact;
  exact.mean = arma::solve(big, rhs);
  arma::mat cov = arma::inv_sympd(big.t() * big);
  exact.sd = arma::sqrt(cov.diag());
  return exact;
}

arma::mat collect_beta(const PosteriorDraws& draws, const CountrySpec& spec) {
  const int k = spec.k();
  const int nz = 1 + spec.lags.p * k + (spec.lags.q + 1) * spec.kstar();
  arma::mat beta(draws.n_draws(), k * nz);
  for (int d = 0; d < draws.n_draws(); ++d) {
    const auto& pr = draws.params[d];
    arma::mat B(k, nz);
    B.col(0) = pr.intercept;
    B.cols(1, k) = pr.domestic_lags[0];
    B.cols(1 + k, k + spec.kstar()) = pr.foreign_lags[0];
    B.cols(1 + k + spec.kstar(), k + 2 * spec.kstar()) = pr.foreign_lags[1];
    beta.row(d) = arma::vectorise(B).t();
  }
  return beta;
}

double ks_against_normal(arma::vec draws, double mean, double sd) {
  draws = arma::sort(draws);
  const int n = static_cast<int>(draws.n_elem);
  double d = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = (draws[i] - mean) / (sd * std::sqrt(2.0));
    const double cdf = 0.5 * (1.0 + std::erf(z));
    d = std::max(d, std::abs(cdf - (i + 1.0) / n));
    d = std::max(d, std::abs(cdf - static_cast<double>(i) / n));
  }
  return d;
}

}  // namespace

TEST_CASE("estimation frame aligns rows, lags and the training split") {
  auto world = canonical_world(55);
  world.T = 120;
  auto data = generate(world, Quarter(1990, 1), 40);
  EstimationFrame frame = build_frame(data.panel, world.weights,
                                      world.specs[1]);

  CHECK(frame.window_start == Quarter(2000, 1));
  CHECK(frame.T() == 80);
  CHECK(frame.n_pre == 1);
  CHECK(frame.nz_fixed() == 1 + 3 + 6);
  CHECK(frame.nz(true) == 1 + 3 + 6 + 6);

  const arma::mat& x = data.panel.data("AA");
  const int w0 = data.panel.row_of(data.panel.training_split()) + 1;
  CHECK(arma::abs(frame.y.row(0) - x.row(w0)).max() == 0.0);
  CHECK(frame.z_fixed(0, 0) == 1.0);
  CHECK(arma::abs(frame.z_fixed.row(5).subvec(1, 3) - x.row(w0 + 4)).max()
        == 0.0);
  // contemporaneous foreign block is the weighted partner average
  arma::rowvec xstar = 0.7 * data.panel.data("US").row(w0 + 5) +
                       0.3 * data.panel.data("BB").row(w0 + 5);
  CHECK(arma::abs(frame.z_fixed.row(5).subvec(4, 6) - xstar).max() <= 1e-12);
  CHECK(arma::abs(frame.x_hist.row(1 + 5) - x.row(w0 + 5)).max() == 0.0);

  SUBCASE("a split too close to a late-starting sample leaves no lag rows") {
    std::vector<arma::mat> mats;
    for (const auto& spec : world.specs)
      mats.push_back(data.panel.data(spec.id));
    mats[1].rows(0, 9).fill(arma::datum::nan);
    Panel gappy({"US", "AA", "BB"},
                {world.specs[0].domestic, world.specs[1].domestic,
                 world.specs[2].domestic},
                mats, data.panel.start(), Quarter(1992, 2));
    CHECK_THROWS_WITH_AS(build_frame(gappy, world.weights, world.specs[1]),
                         doctest::Contains("lag rows"), DataError);
  }
  SUBCASE("a split near the end leaves too few estimation rows") {
    auto late = data.panel.with_training_split(Quarter(1990, 1).plus(115));
    CHECK_THROWS_WITH_AS(build_frame(late, world.weights, world.specs[1]),
                         doctest::Contains("quarters"), DataError);
  }
}

TEST_CASE("training-window priors center on OLS and the persistence default") {
  auto world = canonical_world(66);
  auto data = generate(world, Quarter(1980, 1), 80);
  Priors priors = build_priors(data.panel, world.weights, world.specs[0]);

  REQUIRE(priors.coef_mean.n_rows == 3);
  REQUIRE(priors.coef_mean.n_cols == 1 + 3 + 4 + 6);
  CHECK(priors.coef_mean.is_finite());
  // the volatility-in-mean block is centered at zero
  CHECK(arma::abs(priors.coef_mean.cols(8, 13)).max() == 0.0);
  // OLS on 79 training quarters of a persistent VAR puts the own-lag
  // coefficients in a sane range
  for (int r = 0; r < 3; ++r) {
    CHECK(priors.coef_mean(r, 1 + r) > 0.0);
    CHECK(priors.coef_mean(r, 1 + r) < 1.0);
  }
  // log residual variances near the true average log variance
  for (int r = 0; r < 3; ++r) {
    CHECK(priors.h0_mean[r] > world.h_init[r] - 2.0);
    CHECK(priors.h0_mean[r] < world.h_init[r] + 2.0);
  }
  CHECK(priors.vol_mean(1, 2) == 0.9);
  CHECK(priors.vol_mean(1, 1) == 0.0);
  CHECK(priors.vol_var[0] == 1.0);
  CHECK(priors.vol_var[1] == 0.25);
  CHECK(priors.vol_var[1 + 3] == 0.01);

  SUBCASE("too short a training window is an error") {
    auto short_split =
        data.panel.with_training_split(Quarter(1980, 1).plus(12));
    CHECK_THROWS_WITH_AS(build_priors(short_split, world.weights,
                                      world.specs[0]),
                         doctest::Contains("at least 20"), DataError);
  }
}

TEST_CASE("degenerate sampler matches the exact Gaussian posterior") {
  DegenerateSetup s;
  PosteriorDraws draws = sample_posterior(s.frame, s.priors, s.config, 9001);
  REQUIRE(draws.n_draws() == 4000);

  ExactPosterior exact = exact_posterior(s);
  arma::mat beta = collect_beta(draws, s.world.specs[0]);
  REQUIRE(beta.n_cols == exact.mean.n_elem);

  // iid Gaussian draws: Monte Carlo error of the mean is sd/sqrt(4000)
  for (arma::uword j = 0; j < beta.n_cols; ++j) {
    const double mc_mean = arma::mean(beta.col(j));
    const double mc_sd = arma::stddev(beta.col(j));
    CHECK(std::abs(mc_mean - exact.mean[j]) < 0.08 * exact.sd[j]);
    CHECK(mc_sd / exact.sd[j] > 0.9);
    CHECK(mc_sd / exact.sd[j] < 1.1);
  }

  // full-distribution agreement for a handful of coordinates
  for (arma::uword j : {0u, 5u, 17u, 23u}) {
    const double ks = ks_against_normal(beta.col(j), exact.mean[j],
                                        exact.sd[j]);
    CHECK(ks < 0.1);
  }

  // degenerate runs never touch the path, signs or volatility blocks
  CHECK(draws.h_accept_rate == 0.0);
  CHECK(draws.sign_rejections == 0);
  for (const auto& vol : draws.vols) {
    CHECK(arma::abs(vol.innovation_var).max() == 0.0);
    CHECK(arma::abs(vol.intercept - *s.config.fixed_h).max() == 0.0);
  }
  for (const auto& path : draws.h) {
    CHECK(path.n_obs() == s.frame.T());
    CHECK(arma::abs(path.at_obs(3).t() - *s.config.fixed_h).max() == 0.0);
  }
}

TEST_CASE("conditional log likelihood equals the direct Gaussian formula") {
  DegenerateSetup s;
  s.config.n_keep = 5;
  PosteriorDraws draws = sample_posterior(s.frame, s.priors, s.config, 31);

  const auto& pr = draws.params[2];
  const auto& path = draws.h[2];
  const double got = loglik_path(s.frame, pr, path, false);

  arma::mat omega = pr.ident.a_tilde() *
                    arma::diagmat(arma::exp(*s.config.fixed_h)) *
                    pr.ident.a_tilde().t();
  const double logdet = arma::log_det_sympd(omega);
  arma::mat oinv = arma::inv_sympd(omega);
  double want = 0.0;
  for (int t = 0; t < s.frame.T(); ++t) {
    arma::vec mean = pr.intercept +
                     pr.domestic_lags[0] *
                         s.frame.z_fixed.row(t).subvec(1, 3).t() +
                     pr.foreign_lags[0] *
                         s.frame.z_fixed.row(t).subvec(4, 5).t() +
                     pr.foreign_lags[1] *
                         s.frame.z_fixed.row(t).subvec(6, 7).t();
    arma::vec resid = s.frame.y.row(t).t() - mean;
    want += -0.5 * (3.0 * std::log(2.0 * arma::datum::pi) + logdet +
                    arma::as_scalar(resid.t() * oinv * resid));
  }
  CHECK(got == doctest::Approx(want).epsilon(1e-10));
  CHECK(std::abs(got - want) < 1e-6);
}

TEST_CASE("the sampler is a pure function of the seed") {
  auto world = canonical_world(77);
  world.T = 140;
  auto data = generate(world, Quarter(1985, 1), 60);
  EstimationFrame frame = build_frame(data.panel, world.weights,
                                      world.specs[2]);
  Priors priors = build_priors(data.panel, world.weights, world.specs[2]);
  McmcConfig config;
  config.n_burn = 30;
  config.n_keep = 25;

  PosteriorDraws a = sample_posterior(frame, priors, config, 555);
  PosteriorDraws b = sample_posterior(frame, priors, config, 555);
  PosteriorDraws c = sample_posterior(frame, priors, config, 556);

  REQUIRE(a.n_draws() == b.n_draws());
  for (int d : {0, 12, 24}) {
    CHECK(arma::abs(a.params[d].intercept - b.params[d].intercept).max()
          == 0.0);
    CHECK(arma::abs(a.params[d].domestic_lags[0] -
                    b.params[d].domestic_lags[0]).max() == 0.0);
    CHECK(arma::abs(a.h[d].h() - b.h[d].h()).max() == 0.0);
    CHECK(arma::abs(a.vols[d].innovation_var -
                    b.vols[d].innovation_var).max() == 0.0);
  }
  CHECK(arma::abs(a.params[0].intercept - c.params[0].intercept).max() > 0.0);
  CHECK(a.h_accept_rate == b.h_accept_rate);
}

TEST_CASE("retained draws respect shapes, thinning and the sign restrictions") {
  auto world = canonical_world(88);
  world.T = 140;
  auto data = generate(world, Quarter(1985, 1), 60);
  EstimationFrame frame = build_frame(data.panel, world.weights,
                                      world.specs[0]);
  Priors priors = build_priors(data.panel, world.weights, world.specs[0]);
  McmcConfig config;
  config.n_burn = 60;
  config.n_keep = 40;
  config.thin = 2;

  PosteriorDraws draws = sample_posterior(frame, priors, config, 2718);
  REQUIRE(draws.n_draws() == 40);
  CHECK(draws.window_start == frame.window_start);
  CHECK(static_cast<int>(draws.vols.size()) == 40);
  CHECK(static_cast<int>(draws.h.size()) == 40);
  CHECK(draws.h_accept_rate > 0.05);
  CHECK(draws.h_accept_rate < 0.98);

  for (const auto& pr : draws.params) {
    pr.validate(world.specs[0]);
    CHECK(pr.ident.a_tilde()(1, 0) <= 0.0);
    CHECK(pr.ident.a_tilde()(2, 0) <= 0.0);
  }
  for (const auto& vol : draws.vols) {
    vol.validate(world.specs[0]);
    CHECK(vol.innovation_var.min() > 0.0);
  }
  for (const auto& path : draws.h) {
    CHECK(path.n_pre() == 1);
    CHECK(path.n_obs() == frame.T());
    CHECK(path.h().is_finite());
  }
}

TEST_CASE("a moderate chain recovers the world it was fed") {
  auto world = canonical_world(99);
  auto data = generate(world, Quarter(1979, 1), 60);
  EstimationFrame frame = build_frame(data.panel, world.weights,
                                      world.specs[0]);
  Priors priors = build_priors(data.panel, world.weights, world.specs[0]);
  McmcConfig config;
  config.n_burn = 300;
  config.n_keep = 300;

  PosteriorDraws draws = sample_posterior(frame, priors, config, 4242);

  arma::mat phi_mean = arma::zeros(3, 3);
  double a10 = 0.0;
  arma::vec q_mean = arma::zeros(3);
  for (const auto& pr : draws.params) {
    phi_mean += pr.domestic_lags[0];
    a10 += pr.ident.a_tilde()(1, 0);
  }
  for (const auto& vol : draws.vols) q_mean += vol.innovation_var;
  phi_mean /= draws.n_draws();
  a10 /= draws.n_draws();
  q_mean /= draws.n_draws();

  const arma::mat& phi_true = world.params[0].domestic_lags[0];
  for (int r = 0; r < 3; ++r)
    CHECK(std::abs(phi_mean(r, r) - phi_true(r, r)) < 0.25);
  CHECK(a10 < 0.0);
  CHECK(std::abs(a10 - (-0.35)) < 0.3);
  for (int r = 0; r < 3; ++r) {
    CHECK(q_mean[r] > 1e-4);
    CHECK(q_mean[r] < 0.5);
  }

  // the sampled path tracks the true log-variance level
  arma::mat h_mean = arma::zeros(arma::size(draws.h[0].h()));
  for (const auto& path : draws.h) h_mean += path.h();
  h_mean /= draws.n_draws();
  const double truth_level = world.h_init[0];
  CHECK(std::abs(arma::mean(h_mean.col(0)) - truth_level) < 1.5);
}

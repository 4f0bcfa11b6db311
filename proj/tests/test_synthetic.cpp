#include <doctest.h>

#include <armadillo>
#include <cmath>

#include "gvarsv/stack.hpp"
#include "gvarsv/synthetic.hpp"

using namespace gvarsv;

TEST_CASE("generated sample has the requested shape and split") {
  auto world = canonical_world(42);
  auto data = generate(world, Quarter(1979, 2), 60);

  CHECK(data.panel.rows() == 400);
  CHECK(data.panel.start() == Quarter(1979, 2));
  CHECK(data.panel.training_split() == Quarter(1994, 1));
  REQUIRE(data.h_truth.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(data.h_truth[i].n_pre() == 1);
    CHECK(data.h_truth[i].n_obs() == 400);
    CHECK(data.panel.data(world.specs[i].id).is_finite());
    CHECK(data.h_truth[i].h().is_finite());
  }
  CHECK_THROWS_AS(generate(world, Quarter(1979, 2), 0), ValidationError);
  CHECK_THROWS_AS(generate(world, Quarter(1979, 2), 400), ValidationError);
}

TEST_CASE("generation is a pure function of world and seed") {
  auto world = canonical_world(7);
  auto a = generate(world, Quarter(1990, 1), 80);
  auto b = generate(world, Quarter(1990, 1), 80);
  for (int i = 0; i < 3; ++i) {
    const auto& id = world.specs[i].id;
    CHECK(arma::abs(a.panel.data(id) - b.panel.data(id)).max() == 0.0);
    CHECK(arma::abs(a.h_truth[i].h() - b.h_truth[i].h()).max() == 0.0);
  }
  world.seed = 8;
  auto c = generate(world, Quarter(1990, 1), 80);
  CHECK(arma::abs(a.panel.data("US") - c.panel.data("US")).max() > 0.0);
}

TEST_CASE("generated paths satisfy the model equations they claim to follow") {
  auto world = canonical_world(123);
  auto data = generate(world, Quarter(1980, 1), 60);
  LinkMatrices links = build_links(world.weights, world.specs);
  GlobalModel model = stack_global(links, world.params, world.vols);

  const int T = data.panel.rows();
  const int K = links.K();
  arma::mat X(T, K);
  for (int i = 0; i < 3; ++i)
    X.cols(links.offset(i), links.offset(i) + 2) =
        data.panel.data(world.specs[i].id);

  // standardized level shocks e_t recovered from the stacked identity
  arma::vec all_e, all_eta;
  for (int t = 1; t < T; ++t) {
    arma::vec u = model.g0 * X.row(t).t() - model.intercept -
                  model.lag_mats[0] * X.row(t - 1).t();
    for (int i = 0; i < 3; ++i) {
      const int off = links.offset(i);
      arma::vec h_now = data.h_truth[i].at_obs(t).t();
      arma::vec h_prev = data.h_truth[i].at_obs(t - 1).t();
      u.subvec(off, off + 2) -=
          world.params[i].vol_in_mean[0] * h_now +
          world.params[i].vol_in_mean[1] * h_prev;
      arma::vec eps = arma::solve(arma::trimatl(world.params[i].ident.a_tilde()),
                                  u.subvec(off, off + 2));
      all_e = arma::join_cols(all_e, eps / arma::exp(0.5 * h_now));

      arma::vec eta = h_now - world.vols[i].intercept -
                      world.vols[i].vol_lags[0] * h_prev -
                      world.vols[i].macro_feedback[0] * X.row(t - 1)
                          .subvec(off, off + 2).t();
      all_eta = arma::join_cols(all_eta,
                                eta / arma::sqrt(world.vols[i].innovation_var));
    }
  }

  const double n = static_cast<double>(all_e.n_elem);
  CHECK(std::abs(arma::mean(all_e)) < 4.0 / std::sqrt(n));
  CHECK(arma::var(all_e) == doctest::Approx(1.0).epsilon(0.1));
  CHECK(std::abs(arma::mean(all_eta)) < 4.0 / std::sqrt(n));
  CHECK(arma::var(all_eta) == doctest::Approx(1.0).epsilon(0.1));
  // independence across the two shock sets
  CHECK(std::abs(arma::as_scalar(arma::cor(all_e, all_eta))) <
        4.0 / std::sqrt(n));
}

TEST_CASE("unstable worlds are rejected up front") {
  auto world = canonical_world(1);
  world.params[0].domestic_lags[0] = arma::eye(3, 3) * 1.2;
  CHECK_THROWS_WITH_AS(generate(world, Quarter(1990, 1), 60),
                       doctest::Contains("unstable"), ValidationError);
}

TEST_CASE("the volatility-free world keeps h constant to the bit") {
  auto world = linear_world(9);
  auto data = generate(world, Quarter(1990, 1), 60);
  for (int i = 0; i < 3; ++i) {
    const arma::mat& h = data.h_truth[i].h();
    for (arma::uword r = 0; r < h.n_rows; ++r)
      for (arma::uword c = 0; c < h.n_cols; ++c)
        CHECK(h(r, c) == world.h_init[world.offset(i) + static_cast<int>(c)]);
  }
}

TEST_CASE("brute-force responses collapse to the closed form when linear") {
  auto world = linear_world(31);
  auto data = generate(world, Quarter(1990, 1), 60);

  ShockSpec shock;
  shock.origin = "US";
  shock.level_size = 1.0;
  shock.horizon = 12;

  // with every volatility channel off, paired paths cancel exactly, so a
  // handful of replications already equals the deterministic IRF
  OracleIrf mc = brute_force_irf(world, data, shock, 3, 555);

  const double sigma = std::exp(0.5 * world.h_init[0]);
  CHECK(sigma == doctest::Approx(0.40).epsilon(1e-12));
  arma::vec eps0 = arma::zeros(world.K());
  eps0[0] = sigma;
  arma::mat exact = linear_irf(world, eps0, shock.horizon);

  CHECK(arma::abs(mc.x - exact).max() <= 1e-8);
  CHECK(arma::abs(mc.h).max() == 0.0);

  // impact: the origin rate moves by one average standard deviation times
  // the unit impact of the solved system
  CHECK(mc.x(0, 0) == doctest::Approx(exact(0, 0)).epsilon(1e-10));
  CHECK(std::abs(mc.x(0, 0)) > 0.2);

  // spillovers reach the partners on impact through Lambda_0
  CHECK(arma::abs(mc.x.col(0).subvec(3, 8)).max() > 1e-4);
}

TEST_CASE("a zero-size shock produces an exactly zero brute-force response") {
  auto world = canonical_world(17);
  auto data = generate(world, Quarter(1990, 1), 60);
  ShockSpec shock;
  shock.origin = "US";
  shock.level_size = 0.0;
  shock.vol_shock = 0.0;
  shock.horizon = 6;
  OracleIrf irf = brute_force_irf(world, data, shock, 4, 777);
  CHECK(arma::abs(irf.x).max() == 0.0);
  CHECK(arma::abs(irf.h).max() == 0.0);
}

TEST_CASE("brute-force paths are reproducible and seed-sensitive") {
  auto world = canonical_world(23);
  auto data = generate(world, Quarter(1990, 1), 60);
  ShockSpec shock;
  shock.origin = "US";
  shock.horizon = 8;
  OracleIrf a = brute_force_irf(world, data, shock, 5, 1000);
  OracleIrf b = brute_force_irf(world, data, shock, 5, 1000);
  OracleIrf c = brute_force_irf(world, data, shock, 5, 1001);
  CHECK(arma::abs(a.x - b.x).max() == 0.0);
  CHECK(arma::abs(a.h - b.h).max() == 0.0);
  CHECK(arma::abs(a.x - c.x).max() > 0.0);
}

TEST_CASE("a volatility co-shock raises origin rate volatility on impact") {
  auto world = canonical_world(29);
  auto data = generate(world, Quarter(1990, 1), 60);
  ShockSpec shock;
  shock.origin = "US";
  shock.level_size = 1.0;
  shock.vol_shock = 1.0;
  shock.horizon = 8;
  OracleIrf irf = brute_force_irf(world, data, shock, 50, 2024);
  const double step = std::sqrt(world.vols[0].innovation_var[0]);
  CHECK(irf.h(0, 0) == doctest::Approx(step).epsilon(1e-10));
  // the volatility bump feeds the level block through the in-mean terms
  CHECK(arma::abs(irf.h.row(0)).max() == doctest::Approx(step).epsilon(1e-10));

  ShockSpec level_only = shock;
  level_only.vol_shock = 0.0;
  OracleIrf base = brute_force_irf(world, data, level_only, 50, 2024);
  CHECK(arma::abs(base.h.row(0)).max() < 0.5 * step);
  CHECK(std::abs(irf.x(1, 0) - base.x(1, 0)) > 1e-6);
}

TEST_CASE("canonical and linear worlds pass their own validation") {
  CHECK_NOTHROW(canonical_world(2).validate());
  CHECK_NOTHROW(linear_world(2).validate());
  auto world = canonical_world(2);
  CHECK(world.K() == 9);
  CHECK(world.offset(2) == 6);
  CHECK(world.specs[0].is_shock_origin);
  CHECK(world.params[0].ident.a_tilde()(1, 0) <= 0.0);
  CHECK(world.params[0].ident.a_tilde()(2, 0) <= 0.0);
}

#include <doctest.h>

#include <armadillo>

#include "gvarsv/ingest.hpp"
#include "gvarsv/rng.hpp"
#include "gvarsv/stack.hpp"
#include "gvarsv/synthetic.hpp"

using namespace gvarsv;

namespace {

const std::vector<VariableKind> kRateOutInf = {VariableKind::ShortRate,
                                               VariableKind::OutputGrowth,
                                               VariableKind::Inflation};

CountrySpec small_spec(const std::string& id, bool origin) {
  CountrySpec spec;
  spec.id = id;
  spec.domestic = kRateOutInf;
  spec.foreign = origin ? std::vector<VariableKind>{VariableKind::OutputGrowth,
                                                    VariableKind::Inflation}
                        : kRateOutInf;
  spec.lags = LagOrders{1, 1, 1, 1};
  spec.is_shock_origin = origin;
  return spec;
}

}  // namespace

TEST_CASE("link matrices reproduce the ingest foreign-variable construction") {
  auto world = canonical_world(11);
  auto data = generate(world, Quarter(1990, 1), 60);
  LinkMatrices links = build_links(world.weights, world.specs);

  const int T = data.panel.rows();
  arma::mat stacked(T, links.K());
  for (int i = 0; i < links.n_countries(); ++i)
    stacked.cols(links.offset(i), links.offset(i) + world.specs[i].k() - 1) =
        data.panel.data(world.specs[i].id);

  for (int i = 0; i < links.n_countries(); ++i) {
    arma::mat direct = foreign_variables(data.panel, world.weights,
                                         world.specs[i]);
    for (int t = 0; t < T; ++t) {
      arma::vec via_links = links.foreign_of(i, stacked.row(t).t());
      CHECK(arma::abs(via_links - direct.row(t).t()).max() <= 1e-12);
    }
    arma::vec own = links.domestic_of(i, stacked.row(5).t());
    CHECK(arma::abs(own - data.panel.data(world.specs[i].id).row(5).t()).max()
          == 0.0);
  }
}

TEST_CASE("origin selection rows never touch partner policy rates") {
  auto world = canonical_world(3);
  LinkMatrices links = build_links(world.weights, world.specs);
  const arma::mat& r_us = links.country(0).foreign_rows;
  REQUIRE(r_us.n_rows == 2);  // output, inflation only
  for (int j = 1; j < links.n_countries(); ++j) {
    const int rate_col =
        links.offset(j) + world.specs[j].domestic_pos(VariableKind::ShortRate);
    CHECK(arma::abs(r_us.col(rate_col)).max() == 0.0);
  }
  // non-origin countries do load on partner rates
  CHECK(arma::abs(links.country(1).foreign_rows.col(0)).max() > 0.0);
}

TEST_CASE("link construction validates order agreement and partner coverage") {
  auto world = canonical_world(3);

  SUBCASE("weight order must match spec order") {
    std::vector<CountrySpec> swapped = {world.specs[0], world.specs[2],
                                        world.specs[1]};
    CHECK_THROWS_WITH_AS(build_links(world.weights, swapped),
                         doctest::Contains("order"), ValidationError);
  }

  SUBCASE("a positively weighted partner must carry the needed kind") {
    auto specs = world.specs;
    specs[2].domestic = {VariableKind::OutputGrowth, VariableKind::Inflation};
    specs[2].foreign = {VariableKind::OutputGrowth, VariableKind::Inflation};
    CHECK_THROWS_WITH_AS(build_links(world.weights, specs),
                         doctest::Contains("lacks"), ValidationError);
  }

  SUBCASE("zero-weight rows are allowed and yield zero selection rows") {
    std::vector<CountrySpec> specs = {small_spec("US", true),
                                      small_spec("AA", false)};
    specs[1].foreign = {};
    arma::mat w = {{0.0, 1.0}, {0.0, 0.0}};
    LinkMatrices links = build_links(WeightMatrix({"US", "AA"}, w), specs);
    CHECK(links.country(1).foreign_rows.n_rows == 0);
    CHECK(links.K() == 6);
  }
}

TEST_CASE("stacked system dimension for a 26-region layout") {
  // 25 regions with (rate, output, inflation, fx) plus a 3-variable origin:
  // 25 * 4 + 3 = 103 stacked variables.
  std::vector<CountrySpec> specs;
  CountrySpec us = small_spec("US", true);
  specs.push_back(us);
  for (int c = 0; c < 25; ++c) {
    CountrySpec spec;
    spec.id = "C" + std::to_string(c);
    spec.domestic = {VariableKind::ShortRate, VariableKind::OutputGrowth,
                     VariableKind::Inflation, VariableKind::RealFxGrowth};
    spec.foreign = kRateOutInf;
    spec.lags = LagOrders{2, 1, 1, 1};
    specs.push_back(spec);
  }
  const int n = static_cast<int>(specs.size());
  arma::mat w(n, n, arma::fill::ones);
  w.diag().zeros();
  w /= static_cast<double>(n - 1);
  std::vector<std::string> ids;
  for (const auto& s : specs) ids.push_back(s.id);
  LinkMatrices links = build_links(WeightMatrix(ids, w), specs);
  CHECK(links.K() == 103);
  CHECK(links.offset(1) == 3);
  CHECK(links.offset(2) == 7);
}

TEST_CASE("stack_global solves the contemporaneous identity") {
  auto world = canonical_world(5);
  LinkMatrices links = build_links(world.weights, world.specs);
  GlobalModel model = stack_global(links, world.params, world.vols);

  REQUIRE(model.K() == 9);
  CHECK(model.max_p == 1);
  CHECK(model.lag_mats.size() == 1);
  CHECK(model.g0_condition > 1.0);

  // g0 x must equal x minus each country's contemporaneous foreign term
  Rng rng(99);
  arma::vec x = rng.normal_vec(model.K());
  arma::vec lhs = model.g0 * x;
  arma::vec rhs = x;
  for (int i = 0; i < links.n_countries(); ++i) {
    const int off = links.offset(i);
    rhs.subvec(off, off + world.specs[i].k() - 1) -=
        world.params[i].foreign_lags[0] * links.foreign_of(i, x);
  }
  CHECK(arma::abs(lhs - rhs).max() <= 1e-13);

  // first-lag block: own Phi plus Lambda_1 spread over partners
  arma::vec lag = model.lag_mats[0] * x;
  arma::vec lag_ref(model.K());
  for (int i = 0; i < links.n_countries(); ++i) {
    const int off = links.offset(i);
    lag_ref.subvec(off, off + world.specs[i].k() - 1) =
        world.params[i].domestic_lags[0] * links.domestic_of(i, x) +
        world.params[i].foreign_lags[1] * links.foreign_of(i, x);
  }
  CHECK(arma::abs(lag - lag_ref).max() <= 1e-13);

  CHECK(model.intercept[0] == world.params[0].intercept[0]);
}

TEST_CASE("stack_global rejects draw lists of the wrong length") {
  auto world = canonical_world(5);
  LinkMatrices links = build_links(world.weights, world.specs);
  auto params = world.params;
  params.pop_back();
  CHECK_THROWS_AS(stack_global(links, params, world.vols), ValidationError);
}

TEST_CASE("near-singular contemporaneous coupling raises a numeric error") {
  std::vector<CountrySpec> specs;
  for (int i = 0; i < 2; ++i) {
    CountrySpec spec;
    spec.id = i == 0 ? "US" : "AA";
    spec.domestic = {VariableKind::ShortRate};
    spec.foreign = {VariableKind::ShortRate};
    spec.lags = LagOrders{1, 1, 1, 1};
    spec.is_shock_origin = i == 0;
    specs.push_back(spec);
  }
  arma::mat w = {{0.0, 1.0}, {1.0, 0.0}};
  LinkMatrices links = build_links(WeightMatrix({"US", "AA"}, w), specs);

  auto scalar = [](double v) {
    arma::mat m(1, 1);
    m(0, 0) = v;
    return m;
  };
  auto one_param = [&](bool origin) {
    CountryParameters p{arma::vec{0.1},
                        {scalar(0.5)},
                        {scalar(1.0), scalar(0.0)},
                        {scalar(0.0), scalar(0.0)},
                        IdentificationMatrix(scalar(1.0),
                                             {VariableKind::ShortRate},
                                             origin)};
    return p;
  };
  auto one_vol = [&] {
    VolatilityParameters vol;
    vol.intercept = arma::vec{-1.0};
    vol.vol_lags = {scalar(0.5)};
    vol.macro_feedback = {scalar(0.0)};
    vol.innovation_var = arma::vec{0.01};
    return vol;
  };
  // Lambda_0 = 1 with unit cross weights makes g0 = [[1,-1],[-1,1]]
  CHECK_THROWS_WITH_AS(
      stack_global(links, {one_param(true), one_param(false)},
                   {one_vol(), one_vol()}),
      doctest::Contains("condition"), NumericError);
}

TEST_CASE("spectral radius matches hand-computable cases") {
  std::vector<CountrySpec> specs = {small_spec("US", true)};
  specs[0].foreign = {};
  arma::mat w(1, 1, arma::fill::zeros);
  LinkMatrices links = build_links(WeightMatrix({"US"}, w), specs);

  auto diag_param = [&](double rho) {
    CountryParameters p{arma::zeros(3),
                        {arma::eye(3, 3) * rho},
                        {arma::mat(3, 0), arma::mat(3, 0)},
                        {arma::zeros(3, 3), arma::zeros(3, 3)},
                        IdentificationMatrix(arma::eye(3, 3), kRateOutInf,
                                             true)};
    return p;
  };
  VolatilityParameters vol;
  vol.intercept = arma::vec{-1.0, -1.0, -1.0};
  vol.vol_lags = {arma::eye(3, 3) * 0.5};
  vol.macro_feedback = {arma::zeros(3, 3)};
  vol.innovation_var = arma::vec{0.01, 0.01, 0.01};

  GlobalModel stable = stack_global(links, {diag_param(0.5)}, {vol});
  CHECK(spectral_radius(stable) == doctest::Approx(0.5).epsilon(1e-12));

  GlobalModel unit = stack_global(links, {diag_param(1.0)}, {vol});
  CHECK(spectral_radius(unit) == doctest::Approx(1.0).epsilon(1e-12));

  StabilityReport report = check_stability({stable, unit, stable});
  CHECK(report.radius.n_elem == 3);
  REQUIRE(report.flagged.n_elem == 1);
  CHECK(report.flagged[0] == 1);
  CHECK(report.condition[0] == doctest::Approx(1.0));
}

TEST_CASE("a healthy posterior world flags no draws") {
  auto world = canonical_world(7);
  LinkMatrices links = build_links(world.weights, world.specs);
  std::vector<GlobalModel> draws;
  for (int d = 0; d < 20; ++d)
    draws.push_back(stack_global(links, world.params, world.vols));
  StabilityReport report = check_stability(draws);
  CHECK(report.flagged.n_elem == 0);
  CHECK(report.radius.max() < 1.0);
}

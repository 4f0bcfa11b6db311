#include "gvarsv/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "gvarsv/rng.hpp"
#include "gvarsv/util.hpp"

namespace gvarsv {

int TrueWorld::K() const {
  int k = 0;
  for (const auto& spec : specs) k += spec.k();
  return k;
}

int TrueWorld::offset(int i) const {
  int off = 0;
  for (int j = 0; j < i; ++j) off += specs[j].k();
  return off;
}

namespace {

// every stacked matrix in this module is assembled with plain index loops;
// this file is the measuring stick for the production engine, so it stays
// deliberately naive

arma::mat stack_g0(const TrueWorld& world) {
  const int K = world.K();
  arma::mat g0 = arma::eye(K, K);
  for (int i = 0; i < world.n_countries(); ++i) {
    const auto& spec = world.specs[i];
    const int off = world.offset(i);
    for (int f = 0; f < spec.kstar(); ++f) {
      const VariableKind kind = spec.foreign[f];
      for (int j = 0; j < world.n_countries(); ++j) {
        const double w = world.weights.w()(i, j);
        if (w == 0.0) continue;
        const int col = world.offset(j) + world.specs[j].domestic_pos(kind);
        for (int r = 0; r < spec.k(); ++r)
          g0(off + r, col) -= world.params[i].foreign_lags[0](r, f) * w;
      }
    }
  }
  return g0;
}

std::vector<arma::mat> stack_lags(const TrueWorld& world) {
  const int K = world.K();
  int L = 0;
  for (const auto& spec : world.specs)
    L = std::max(L, std::max(spec.lags.p, spec.lags.q));
  std::vector<arma::mat> mats(L, arma::zeros(K, K));
  for (int i = 0; i < world.n_countries(); ++i) {
    const auto& spec = world.specs[i];
    const int off = world.offset(i);
    for (int l = 1; l <= L; ++l) {
      if (l <= spec.lags.p)
        for (int r = 0; r < spec.k(); ++r)
          for (int c = 0; c < spec.k(); ++c)
            mats[l - 1](off + r, off + c) =
                world.params[i].domestic_lags[l - 1](r, c);
      if (l <= spec.lags.q)
        for (int f = 0; f < spec.kstar(); ++f) {
          const VariableKind kind = spec.foreign[f];
          for (int j = 0; j < world.n_countries(); ++j) {
            const double w = world.weights.w()(i, j);
            if (w == 0.0) continue;
            const int col =
                world.offset(j) + world.specs[j].domestic_pos(kind);
            for (int r = 0; r < spec.k(); ++r)
              mats[l - 1](off + r, col) +=
                  world.params[i].foreign_lags[l](r, f) * w;
          }
        }
    }
  }
  return mats;
}

struct WorldArrays {
  arma::mat g0;
  std::vector<arma::mat> lag_mats;
  int r_level;  // max over countries of max(p, q)
  int r_vol;    // max over countries of max(m, s)
};

WorldArrays assemble(const TrueWorld& world) {
  WorldArrays a;
  a.g0 = stack_g0(world);
  a.lag_mats = stack_lags(world);
  a.r_level = 1;
  a.r_vol = 1;
  for (const auto& spec : world.specs) {
    a.r_level = std::max(a.r_level, std::max(spec.lags.p, spec.lags.q));
    a.r_vol = std::max(a.r_vol, std::max(spec.lags.m, spec.lags.s));
  }
  return a;
}

// One forward step. X and H are (history + steps) x K with `tx`/`th` the row
// being written; e/eta are the standardized innovations for this step.
void step_forward(const TrueWorld& world, const WorldArrays& a, arma::mat& X,
                  arma::mat& H, int tx, int th, const arma::vec& e,
                  const arma::vec& eta, const arma::vec* d_eps,
                  const arma::vec* d_h) {
  const int K = world.K();

  arma::vec h_t(K);
  for (int i = 0; i < world.n_countries(); ++i) {
    const auto& spec = world.specs[i];
    const auto& vol = world.vols[i];
    const int off = world.offset(i);
    arma::vec hi = vol.intercept;
    for (int l = 1; l <= spec.lags.m; ++l)
      hi += vol.vol_lags[l - 1] *
            H.row(th - l).subvec(off, off + spec.k() - 1).t();
    for (int l = 1; l <= spec.lags.q; ++l)
      hi += vol.macro_feedback[l - 1] *
            X.row(tx - l).subvec(off, off + spec.k() - 1).t();
    for (int r = 0; r < spec.k(); ++r)
      hi[r] += std::sqrt(vol.innovation_var[r]) * eta[off + r];
    h_t.subvec(off, off + spec.k() - 1) = hi;
  }
  if (d_h) h_t += *d_h;
  H.row(th) = h_t.t();

  arma::vec u(K);
  for (int i = 0; i < world.n_countries(); ++i) {
    const auto& spec = world.specs[i];
    const int off = world.offset(i);
    arma::vec eps(spec.k());
    for (int r = 0; r < spec.k(); ++r)
      eps[r] = std::exp(0.5 * h_t[off + r]) * e[off + r];
    if (d_eps)
      for (int r = 0; r < spec.k(); ++r) eps[r] += (*d_eps)[off + r];
    u.subvec(off, off + spec.k() - 1) =
        world.params[i].ident.a_tilde() * eps;
  }

  arma::vec rhs = u;
  for (int i = 0; i < world.n_countries(); ++i) {
    const auto& spec = world.specs[i];
    const int off = world.offset(i);
    arma::vec ri = world.params[i].intercept;
    for (int l = 0; l <= spec.lags.s; ++l)
      ri += world.params[i].vol_in_mean[l] *
            H.row(th - l).subvec(off, off + spec.k() - 1).t();
    rhs.subvec(off, off + spec.k() - 1) += ri;
  }
  for (size_t l = 1; l <= a.lag_mats.size(); ++l)
    rhs += a.lag_mats[l - 1] * X.row(tx - static_cast<int>(l)).t();

  arma::vec x_t = arma::solve(a.g0, rhs);
  if (!x_t.is_finite() || arma::abs(x_t).max() > 1e8)
    throw NumericError("synthetic: unstable world (state exploded)");
  X.row(tx) = x_t.t();
}

}  // namespace

void TrueWorld::validate() const {
  validate_specs(specs);
  if (static_cast<int>(params.size()) != n_countries() ||
      static_cast<int>(vols.size()) != n_countries())
    throw ValidationError("TrueWorld: one parameter set per country required");
  if (weights.order().size() != specs.size())
    throw ValidationError("TrueWorld: weight matrix order length mismatch");
  for (int i = 0; i < n_countries(); ++i) {
    if (weights.order()[i] != specs[i].id)
      throw ValidationError("TrueWorld: weight order differs from spec order");
    params[i].validate(specs[i]);
    vols[i].validate(specs[i]);
  }
  if (static_cast<int>(h_init.n_elem) != K())
    throw ValidationError("TrueWorld: h_init must have one entry per stacked "
                          "variable");
  if (T < 10) throw ValidationError("TrueWorld: T too small");

  WorldArrays a = assemble(*this);
  const int K_ = K();
  const int L = static_cast<int>(a.lag_mats.size());
  arma::mat companion = arma::zeros(K_ * L, K_ * L);
  for (int l = 0; l < L; ++l)
    companion.submat(0, l * K_, K_ - 1, l * K_ + K_ - 1) =
        arma::solve(a.g0, a.lag_mats[l]);
  if (L > 1)
    companion.submat(K_, 0, K_ * L - 1, K_ * (L - 1) - 1) =
        arma::eye(K_ * (L - 1), K_ * (L - 1));
  const double radius = arma::abs(arma::eig_gen(companion)).max();
  if (radius >= 1.0)
    throw ValidationError("TrueWorld: level dynamics unstable (spectral "
                          "radius " + std::to_string(radius) + ")");
}

GeneratedData generate(const TrueWorld& world, Quarter start,
                       int training_rows) {
  world.validate();
  if (training_rows < 2 || training_rows > world.T - 2)
    throw ValidationError("generate: training_rows must lie inside the "
                          "sample");
  WorldArrays a = assemble(world);
  const int K = world.K();
  const int burn = 50;
  const int total = burn + world.T;

  std::vector<Rng> rngs;
  for (const auto& spec : world.specs)
    rngs.emplace_back(
        derive_seed(world.seed, {fnv1a64("generate"), fnv1a64(spec.id)}));

  arma::mat X(a.r_level + total, K, arma::fill::zeros);
  arma::mat H(a.r_vol + total, K);
  for (int r = 0; r < a.r_vol; ++r) H.row(r) = world.h_init.t();

  arma::vec e(K), eta(K);
  for (int step = 0; step < total; ++step) {
    for (int i = 0; i < world.n_countries(); ++i) {
      const int off = world.offset(i);
      const int k = world.specs[i].k();
      e.subvec(off, off + k - 1) = rngs[i].normal_vec(k);
      eta.subvec(off, off + k - 1) = rngs[i].normal_vec(k);
    }
    step_forward(world, a, X, H, a.r_level + step, a.r_vol + step, e, eta,
                 nullptr, nullptr);
  }

  std::vector<std::string> countries;
  std::vector<std::vector<VariableKind>> variables;
  std::vector<arma::mat> data;
  std::vector<LatentVolPath> h_truth;
  for (int i = 0; i < world.n_countries(); ++i) {
    const auto& spec = world.specs[i];
    const int off = world.offset(i);
    countries.push_back(spec.id);
    variables.push_back(spec.domestic);
    data.push_back(X.submat(a.r_level + burn, off, a.r_level + total - 1,
                            off + spec.k() - 1));
    h_truth.emplace_back(
        H.submat(burn, off, a.r_vol + total - 1, off + spec.k() - 1),
        a.r_vol);
  }
  Panel panel(std::move(countries), std::move(variables), std::move(data),
              start, start.plus(training_rows - 1));
  return GeneratedData{std::move(panel), std::move(h_truth)};
}

OracleIrf brute_force_irf(const TrueWorld& world, const GeneratedData& data,
                          const ShockSpec& shock, int reps,
                          std::uint64_t seed) {
  shock.validate();
  if (reps < 1) throw ValidationError("brute_force_irf: reps must be >= 1");
  WorldArrays a = assemble(world);
  const int K = world.K();
  const int H_len = shock.horizon + 1;

  int origin = -1;
  for (int i = 0; i < world.n_countries(); ++i)
    if (world.specs[i].id == shock.origin) origin = i;
  if (origin < 0)
    throw ValidationError("brute_force_irf: unknown origin " + shock.origin);
  const int rate_pos = world.specs[origin].domestic_pos(VariableKind::ShortRate);
  const int rate_col = world.offset(origin) + rate_pos;

  const LatentVolPath& hp = data.h_truth[origin];
  double sigma_sum = 0.0;
  for (int t = 0; t < hp.n_obs(); ++t)
    sigma_sum += std::exp(0.5 * hp.h()(hp.n_pre() + t, rate_pos));
  const double sigma_bar = sigma_sum / hp.n_obs();

  arma::vec d_eps = arma::zeros(K);
  d_eps[rate_col] = shock.level_size * sigma_bar;
  arma::vec d_h = arma::zeros(K);
  d_h[rate_col] =
      shock.vol_shock *
      std::sqrt(world.vols[origin].innovation_var[rate_pos]);

  // trailing history from the generated sample
  const int T = data.panel.rows();
  arma::mat x_hist(a.r_level, K);
  for (int i = 0; i < world.n_countries(); ++i) {
    const auto& m = data.panel.data(world.specs[i].id);
    for (int r = 0; r < a.r_level; ++r)
      x_hist.row(r).subvec(world.offset(i),
                           world.offset(i) + world.specs[i].k() - 1) =
          m.row(T - a.r_level + r);
  }
  arma::mat h_hist(a.r_vol, K);
  for (int i = 0; i < world.n_countries(); ++i) {
    const auto& hm = data.h_truth[i].h();
    for (int r = 0; r < a.r_vol; ++r)
      h_hist.row(r).subvec(world.offset(i),
                           world.offset(i) + world.specs[i].k() - 1) =
          hm.row(hm.n_rows - a.r_vol + r);
  }

  arma::mat dx = arma::zeros(K, H_len);
  arma::mat dh = arma::zeros(K, H_len);
  for (int rep = 0; rep < reps; ++rep) {
    std::vector<arma::mat> e_arr, eta_arr;
    for (int i = 0; i < world.n_countries(); ++i) {
      Rng rng(derive_seed(seed, {0, static_cast<std::uint64_t>(rep),
                                 fnv1a64(world.specs[i].id)}));
      const int k = world.specs[i].k();
      arma::mat e(k, H_len), eta(k, H_len);
      for (int t = 0; t < H_len; ++t) {
        e.col(t) = rng.normal_vec(k);
        eta.col(t) = rng.normal_vec(k);
      }
      e_arr.push_back(std::move(e));
      eta_arr.push_back(std::move(eta));
    }

    auto run = [&](const arma::vec* de, const arma::vec* dhv, arma::mat& Xout,
                   arma::mat& Hout) {
      arma::mat X(a.r_level + H_len, K);
      X.rows(0, a.r_level - 1) = x_hist;
      arma::mat Hm(a.r_vol + H_len, K);
      Hm.rows(0, a.r_vol - 1) = h_hist;
      arma::vec e(K), eta(K);
      for (int t = 0; t < H_len; ++t) {
        for (int i = 0; i < world.n_countries(); ++i) {
          const int off = world.offset(i);
          const int k = world.specs[i].k();
          e.subvec(off, off + k - 1) = e_arr[i].col(t);
          eta.subvec(off, off + k - 1) = eta_arr[i].col(t);
        }
        step_forward(world, a, X, Hm, a.r_level + t, a.r_vol + t, e, eta,
                     t == 0 ? de : nullptr, t == 0 ? dhv : nullptr);
      }
      Xout = X.rows(a.r_level, a.r_level + H_len - 1);
      Hout = Hm.rows(a.r_vol, a.r_vol + H_len - 1);
    };

    arma::mat xb, hb, xs, hs;
    run(nullptr, nullptr, xb, hb);
    run(&d_eps, &d_h, xs, hs);
    dx += (xs - xb).t();
    dh += (hs - hb).t();
  }
  return OracleIrf{dx / reps, dh / reps};
}

arma::mat linear_irf(const TrueWorld& world, const arma::vec& eps0,
                     int horizon) {
  WorldArrays a = assemble(world);
  const int K = world.K();
  arma::vec u0(K);
  for (int i = 0; i < world.n_countries(); ++i) {
    const int off = world.offset(i);
    const int k = world.specs[i].k();
    u0.subvec(off, off + k - 1) =
        world.params[i].ident.a_tilde() * eps0.subvec(off, off + k - 1);
  }
  arma::mat irf(K, horizon + 1, arma::fill::zeros);
  irf.col(0) = arma::solve(a.g0, u0);
  for (int hzn = 1; hzn <= horizon; ++hzn) {
    arma::vec rhs(K, arma::fill::zeros);
    for (size_t l = 1; l <= a.lag_mats.size() && static_cast<int>(l) <= hzn;
         ++l)
      rhs += a.lag_mats[l - 1] * irf.col(hzn - l);
    irf.col(hzn) = arma::solve(a.g0, rhs);
  }
  return irf;
}

namespace {

IdentificationMatrix make_ident(const arma::mat& lower,
                                const std::vector<VariableKind>& ordering,
                                bool origin) {
  return IdentificationMatrix(lower, ordering, origin);
}

}  // namespace

TrueWorld canonical_world(std::uint64_t seed) {
  const std::vector<VariableKind> vars = {VariableKind::ShortRate,
                                          VariableKind::OutputGrowth,
                                          VariableKind::Inflation};
  TrueWorld world;
  world.seed = seed;
  world.T = 400;

  CountrySpec us;
  us.id = "US";
  us.domestic = vars;
  us.foreign = {VariableKind::OutputGrowth, VariableKind::Inflation};
  us.lags = LagOrders{1, 1, 1, 1};
  us.is_shock_origin = true;

  CountrySpec aa = us;
  aa.id = "AA";
  aa.foreign = vars;
  aa.is_shock_origin = false;

  CountrySpec bb = aa;
  bb.id = "BB";

  world.specs = {us, aa, bb};

  arma::mat w = {{0.0, 0.6, 0.4}, {0.7, 0.0, 0.3}, {0.5, 0.5, 0.0}};
  world.weights = WeightMatrix({"US", "AA", "BB"}, w);

  auto vol_for = [&](const arma::vec& h_bar, const arma::mat& xi) {
    VolatilityParameters vol;
    vol.intercept = 0.2 * h_bar;
    vol.vol_lags = {arma::eye(3, 3) * 0.8};
    vol.macro_feedback = {xi};
    vol.innovation_var = {0.09, 0.0625, 0.04};
    return vol;
  };

  const arma::vec h_us = {2.0 * std::log(0.40), 2.0 * std::log(0.30),
                          2.0 * std::log(0.25)};
  const arma::vec h_aa = {2.0 * std::log(0.50), 2.0 * std::log(0.35),
                          2.0 * std::log(0.30)};
  const arma::vec h_bb = {2.0 * std::log(0.45), 2.0 * std::log(0.40),
                          2.0 * std::log(0.28)};

  {
    CountryParameters p{
        arma::vec{0.30, 0.20, 0.25},
        {arma::mat{{0.55, 0.08, 0.10},
                   {-0.12, 0.45, 0.05},
                   {0.10, 0.12, 0.50}}},
        {arma::mat{{0.10, 0.05}, {0.12, 0.02}, {0.03, 0.10}},
         arma::mat{{0.04, 0.02}, {0.05, 0.01}, {0.01, 0.06}}},
        {arma::mat{{0.30, 0.00, 0.10},
                   {-0.40, 0.20, 0.00},
                   {0.10, -0.25, 0.15}},
         arma::mat{{0.15, 0.00, 0.05},
                   {-0.20, 0.10, 0.00},
                   {0.05, -0.10, 0.08}}},
        make_ident(arma::mat{{1.0, 0.0, 0.0},
                             {-0.35, 1.0, 0.0},
                             {-0.18, 0.22, 1.0}},
                   vars, true)};
    world.params.push_back(std::move(p));
    world.vols.push_back(vol_for(
        h_us, arma::mat{{0.020, 0.010, 0.000},
                        {0.000, 0.015, 0.000},
                        {0.010, 0.000, 0.020}}));
  }
  {
    CountryParameters p{
        arma::vec{0.40, 0.30, 0.35},
        {arma::mat{{0.50, 0.06, 0.08},
                   {-0.10, 0.40, 0.06},
                   {0.08, 0.10, 0.45}}},
        {arma::mat{{0.15, 0.08, 0.05},
                   {0.06, 0.14, 0.03},
                   {0.04, 0.05, 0.12}},
         arma::mat{{0.05, 0.03, 0.02},
                   {0.02, 0.06, 0.01},
                   {0.01, 0.02, 0.05}}},
        {arma::mat{{0.25, 0.00, 0.05},
                   {-0.30, 0.15, 0.00},
                   {0.05, -0.20, 0.10}},
         arma::mat{{0.10, 0.00, 0.05},
                   {-0.15, 0.08, 0.00},
                   {0.05, -0.10, 0.05}}},
        make_ident(arma::mat{{1.0, 0.0, 0.0},
                             {0.25, 1.0, 0.0},
                             {-0.10, -0.30, 1.0}},
                   vars, false)};
    world.params.push_back(std::move(p));
    world.vols.push_back(vol_for(
        h_aa, arma::mat{{0.015, 0.000, 0.010},
                        {0.000, 0.020, 0.000},
                        {0.000, 0.010, 0.015}}));
  }
  {
    CountryParameters p{
        arma::vec{0.35, 0.25, 0.30},
        {arma::mat{{0.45, 0.05, 0.07},
                   {-0.08, 0.42, 0.05},
                   {0.06, 0.09, 0.48}}},
        {arma::mat{{0.12, 0.06, 0.04},
                   {0.05, 0.12, 0.02},
                   {0.03, 0.04, 0.10}},
         arma::mat{{0.04, 0.02, 0.02},
                   {0.02, 0.05, 0.01},
                   {0.01, 0.02, 0.04}}},
        {arma::mat{{0.20, 0.00, 0.05},
                   {-0.25, 0.12, 0.00},
                   {0.05, -0.15, 0.10}},
         arma::mat{{0.10, 0.00, 0.03},
                   {-0.10, 0.06, 0.00},
                   {0.03, -0.08, 0.05}}},
        make_ident(arma::mat{{1.0, 0.0, 0.0},
                             {-0.20, 1.0, 0.0},
                             {0.15, 0.10, 1.0}},
                   vars, false)};
    world.params.push_back(std::move(p));
    world.vols.push_back(vol_for(
        h_bb, arma::mat{{0.018, 0.008, 0.000},
                        {0.000, 0.016, 0.008},
                        {0.008, 0.000, 0.018}}));
  }

  world.h_init = arma::join_cols(h_us, arma::join_cols(h_aa, h_bb));
  world.validate();
  return world;
}

TrueWorld linear_world(std::uint64_t seed) {
  TrueWorld world = canonical_world(seed);
  for (int i = 0; i < world.n_countries(); ++i) {
    const int k = world.specs[i].k();
    for (auto& psi : world.params[i].vol_in_mean) psi.zeros();
    world.vols[i].intercept =
        world.h_init.subvec(world.offset(i), world.offset(i) + k - 1);
    for (auto& ups : world.vols[i].vol_lags) ups.zeros();
    for (auto& xi : world.vols[i].macro_feedback) xi.zeros();
    world.vols[i].innovation_var.zeros();
  }
  world.validate();
  return world;
}

}  // namespace gvarsv

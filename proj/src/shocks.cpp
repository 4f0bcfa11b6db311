#include "gvarsv/shocks.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "gvarsv/csv.hpp"
#include "gvarsv/rng.hpp"
#include "gvarsv/util.hpp"

namespace gvarsv {

void ShockSpec::validate() const {
  if (origin.empty()) throw ValidationError("ShockSpec: origin required");
  if (!std::isfinite(level_size) || !std::isfinite(vol_shock))
    throw ValidationError("ShockSpec: shock sizes must be finite");
  if (horizon < 0) throw ValidationError("ShockSpec: horizon must be >= 0");
}

double shock_size_level(const std::vector<LatentVolPath>& h_draws,
                        int column) {
  if (h_draws.empty())
    throw ValidationError("shock_size_level: no volatility draws");
  double sum = 0.0;
  long n = 0;
  for (const auto& path : h_draws) {
    if (column < 0 || column >= static_cast<int>(path.h().n_cols))
      throw ValidationError("shock_size_level: column out of range");
    for (int t = 0; t < path.n_obs(); ++t) {
      sum += std::exp(0.5 * path.h()(path.n_pre() + t, column));
      ++n;
    }
  }
  return sum / static_cast<double>(n);
}

namespace {

int level_history(const std::vector<CountrySpec>& specs) {
  int r = 1;
  for (const auto& spec : specs)
    r = std::max(r, std::max(spec.lags.p, spec.lags.q));
  return r;
}

int vol_history(const std::vector<CountrySpec>& specs) {
  int r = 1;
  for (const auto& spec : specs)
    r = std::max(r, std::max(spec.lags.m, spec.lags.s));
  return r;
}

}  // namespace

void SimInput::validate() const {
  if (draws.empty()) throw ValidationError("SimInput: no draws");
  if (states.size() != draws.size())
    throw ValidationError("SimInput: need one trailing state per draw");
  if (!(level_unit > 0.0) || !std::isfinite(level_unit))
    throw ValidationError("SimInput: level_unit must be positive");
  const int K = links.K();
  const int rl = level_history(links.specs());
  const int rv = vol_history(links.specs());
  for (size_t d = 0; d < draws.size(); ++d) {
    if (draws[d].K() != K)
      throw ValidationError("SimInput: draw dimension mismatch");
    const auto& st = states[d];
    if (static_cast<int>(st.x_lags.n_rows) != rl ||
        static_cast<int>(st.x_lags.n_cols) != K ||
        static_cast<int>(st.h_lags.n_rows) != rv ||
        static_cast<int>(st.h_lags.n_cols) != K)
      throw ValidationError("SimInput: state history has wrong shape");
    if (!st.x_lags.is_finite() || !st.h_lags.is_finite())
      throw ValidationError("SimInput: state history has non-finite entries");
  }
}

SimInput build_sim_input(const LinkMatrices& links,
                         const std::vector<PosteriorDraws>& by_country,
                         const Panel& panel) {
  const int n = links.n_countries();
  if (static_cast<int>(by_country.size()) != n)
    throw ValidationError("build_sim_input: need one posterior per country");
  const int n_draws = by_country[0].n_draws();
  if (n_draws < 1)
    throw ValidationError("build_sim_input: posterior has no draws");
  for (const auto& post : by_country)
    if (post.n_draws() != n_draws)
      throw ValidationError(
          "build_sim_input: countries carry different draw counts");

  const int rl = level_history(links.specs());
  const int rv = vol_history(links.specs());
  if (panel.rows() < rl)
    throw ValidationError("build_sim_input: panel shorter than the lag "
                          "history it must supply");

  SimInput input{links, {}, {}, 1.0};

  arma::mat x_tail(rl, links.K());
  for (int i = 0; i < n; ++i) {
    const auto& spec = links.specs()[i];
    if (!panel.has_country(spec.id))
      throw ValidationError("build_sim_input: panel lacks " + spec.id);
    if (panel.variables(spec.id) != spec.domestic)
      throw ValidationError("build_sim_input: panel variables for " +
                            spec.id + " do not match its specification");
    const arma::mat& data = panel.data(spec.id);
    const arma::mat tail = data.rows(panel.rows() - rl, panel.rows() - 1);
    if (!tail.is_finite())
      throw DataError("build_sim_input: trailing rows for " + spec.id +
                      " contain missing values");
    x_tail.cols(links.offset(i), links.offset(i) + spec.k() - 1) = tail;
  }

  for (int d = 0; d < n_draws; ++d) {
    std::vector<CountryParameters> params;
    std::vector<VolatilityParameters> vols;
    SimState state;
    state.x_lags = x_tail;
    state.h_lags.set_size(rv, links.K());
    for (int i = 0; i < n; ++i) {
      params.push_back(by_country[i].params[d]);
      vols.push_back(by_country[i].vols[d]);
      const arma::mat& h = by_country[i].h[d].h();
      const int rows = static_cast<int>(h.n_rows);
      if (rows < rv)
        throw ValidationError("build_sim_input: volatility path for " +
                              links.specs()[i].id + " too short");
      const int off = links.offset(i);
      state.h_lags.cols(off, off + links.specs()[i].k() - 1) =
          h.rows(rows - rv, rows - 1);
    }
    input.draws.push_back(stack_global(links, std::move(params),
                                       std::move(vols)));
    input.states.push_back(std::move(state));
  }

  int origin = -1;
  for (int i = 0; i < n; ++i)
    if (links.specs()[i].is_shock_origin) origin = i;
  if (origin < 0)
    throw ValidationError("build_sim_input: no shock-origin country");
  const int rate_pos =
      links.specs()[origin].domestic_pos(VariableKind::ShortRate);
  input.level_unit = shock_size_level(by_country[origin].h, rate_pos);
  input.validate();
  return input;
}

namespace {

// Per-replication standardized innovations, one stream per country so the
// result is independent of draw scheduling. Consumed as e_t then eta_t.
struct DrawNoise {
  std::vector<arma::mat> e;    // k_i x (H+1)
  std::vector<arma::mat> eta;  // k_i x (H+1)
};

DrawNoise make_noise(const LinkMatrices& links, std::uint64_t seed,
                     std::uint64_t draw, std::uint64_t rep, int horizon) {
  DrawNoise noise;
  for (int i = 0; i < links.n_countries(); ++i) {
    Rng rng(derive_seed(seed, {draw, rep, fnv1a64(links.specs()[i].id)}));
    const int k = links.specs()[i].k();
    arma::mat e(k, horizon + 1), eta(k, horizon + 1);
    for (int t = 0; t <= horizon; ++t) {
      e.col(t) = rng.normal_vec(k);
      eta.col(t) = rng.normal_vec(k);
    }
    noise.e.push_back(std::move(e));
    noise.eta.push_back(std::move(eta));
  }
  return noise;
}

// A scenario fixes which countries evolve (live) and which are replayed from
// previously computed paths. Every run, baseline included, flows through the
// same per-country arithmetic so paired paths cancel exactly wherever the
// shock cannot reach.
struct Scenario {
  std::vector<int> live;
  std::vector<const arma::mat*> ext_x;  // full path per non-live country
  std::vector<const arma::mat*> ext_h;
  bool sequential = true;
  bool shocked = false;
};

// The country-order pass is valid when no live country loads, with nonzero
// weight, on a live country at or after it in the ordering.
bool sequential_ok(const LinkMatrices& links, const std::vector<int>& live) {
  for (int i : live)
    for (int j : live) {
      if (j < i) continue;
      const auto& spec_j = links.specs()[j];
      const arma::mat& R = links.country(i).foreign_rows;
      if (R.n_rows == 0) continue;
      const arma::mat block = R.cols(links.offset(j),
                                     links.offset(j) + spec_j.k() - 1);
      if (arma::any(arma::vectorise(block) != 0.0)) return false;
    }
  return true;
}

struct PathPair {
  arma::mat x;  // (r_level + H + 1) x K
  arma::mat h;  // (r_vol + H + 1) x K
};

// One forward simulation. Returns rows aligned so that row r_level + t of x
// (r_vol + t of h) is horizon t. Levels are completed against the partially
// filled current row: already-computed live entries are present, not-yet
// computed live entries are zero, non-live entries come from the scenario's
// external paths. The contemporaneous foreign term is always evaluated as
// Lambda_0 * (R * row), never through a premultiplied product, so identical
// inputs give bitwise identical outputs across scenarios.
PathPair run_path(const SimInput& input, const GlobalModel& model,
                  const SimState& state, const DrawNoise& noise,
                  const Scenario& sc, const arma::vec& d_eps,
                  const arma::vec& d_h, int origin, int horizon) {
  const LinkMatrices& links = input.links;
  const int K = links.K();
  const int n = links.n_countries();
  const int rl = static_cast<int>(state.x_lags.n_rows);
  const int rv = static_cast<int>(state.h_lags.n_rows);

  PathPair path;
  path.x = arma::zeros(rl + horizon + 1, K);
  path.h = arma::zeros(rv + horizon + 1, K);
  path.x.rows(0, rl - 1) = state.x_lags;
  path.h.rows(0, rv - 1) = state.h_lags;

  std::vector<bool> is_live(n, false);
  for (int i : sc.live) is_live[i] = true;
  for (int c = 0; c < n; ++c) {
    if (is_live[c]) continue;
    const int off = links.offset(c);
    const int k = links.specs()[c].k();
    path.x.cols(off, off + k - 1) = sc.ext_x[c]->cols(off, off + k - 1);
    path.h.cols(off, off + k - 1) = sc.ext_h[c]->cols(off, off + k - 1);
  }

  arma::uvec live_cols;
  if (!sc.sequential) {
    std::vector<arma::uword> cols;
    for (int i : sc.live)
      for (int r = 0; r < links.specs()[i].k(); ++r)
        cols.push_back(static_cast<arma::uword>(links.offset(i) + r));
    live_cols = arma::uvec(cols);
  }

  std::vector<arma::vec> rhs(n);
  for (int t = 0; t <= horizon; ++t) {
    const int xr = rl + t;
    const int hr = rv + t;

    for (int i : sc.live) {
      const auto& spec = links.specs()[i];
      const auto& vol = model.vols[i];
      const int off = links.offset(i);
      const int k = spec.k();
      arma::vec hi = vol.intercept;
      for (int l = 1; l <= spec.lags.m; ++l)
        hi += vol.vol_lags[l - 1] *
              path.h.row(hr - l).subvec(off, off + k - 1).t();
      for (int l = 1; l <= spec.lags.q; ++l)
        hi += vol.macro_feedback[l - 1] *
              path.x.row(xr - l).subvec(off, off + k - 1).t();
      for (int r = 0; r < k; ++r)
        hi[r] += std::sqrt(vol.innovation_var[r]) * noise.eta[i](r, t);
      if (sc.shocked && t == 0 && i == origin)
        hi += d_h.subvec(off, off + k - 1);
      path.h.row(hr).subvec(off, off + k - 1) = hi.t();
    }

    for (int i : sc.live) {
      const auto& spec = links.specs()[i];
      const auto& par = model.params[i];
      const int off = links.offset(i);
      const int k = spec.k();
      arma::vec eps(k);
      for (int r = 0; r < k; ++r)
        eps[r] = std::exp(0.5 * path.h(hr, off + r)) * noise.e[i](r, t);
      if (sc.shocked && t == 0 && i == origin)
        eps += d_eps.subvec(off, off + k - 1);
      arma::vec acc = par.intercept + par.ident.a_tilde() * eps;
      for (int l = 1; l <= spec.lags.p; ++l)
        acc += par.domestic_lags[l - 1] *
               path.x.row(xr - l).subvec(off, off + k - 1).t();
      for (int l = 1; l <= spec.lags.q; ++l) {
        const arma::vec f = links.country(i).foreign_rows *
                            path.x.row(xr - l).t();
        acc += par.foreign_lags[l] * f;
      }
      for (int l = 0; l <= spec.lags.s; ++l)
        acc += par.vol_in_mean[l] *
               path.h.row(hr - l).subvec(off, off + k - 1).t();
      rhs[i] = std::move(acc);
    }

    if (sc.sequential) {
      for (int i : sc.live) {
        const auto& par = model.params[i];
        const int off = links.offset(i);
        const int k = links.specs()[i].k();
        const arma::vec f = links.country(i).foreign_rows * path.x.row(xr).t();
        const arma::vec x_i = rhs[i] + par.foreign_lags[0] * f;
        path.x.row(xr).subvec(off, off + k - 1) = x_i.t();
      }
    } else {
      arma::vec b(static_cast<arma::uword>(live_cols.n_elem));
      arma::uword pos = 0;
      for (int i : sc.live) {
        const auto& par = model.params[i];
        const int k = links.specs()[i].k();
        const arma::vec f = links.country(i).foreign_rows * path.x.row(xr).t();
        b.subvec(pos, pos + k - 1) = rhs[i] + par.foreign_lags[0] * f;
        pos += k;
      }
      const arma::mat m_ll = model.g0(live_cols, live_cols);
      const arma::vec x_l = arma::solve(m_ll, b);
      pos = 0;
      for (int i : sc.live) {
        const int off = links.offset(i);
        const int k = links.specs()[i].k();
        path.x.row(xr).subvec(off, off + k - 1) =
            x_l.subvec(pos, pos + k - 1).t();
        pos += k;
      }
    }

    for (int i : sc.live) {
      const int off = links.offset(i);
      const int k = links.specs()[i].k();
      for (int r = 0; r < k; ++r) {
        const double v = path.x(xr, off + r);
        if (!std::isfinite(v) || std::abs(v) > 1e8)
          throw NumericError("girf: simulated path exploded");
      }
    }
  }
  return path;
}

struct ShockVectors {
  arma::vec d_eps;
  arma::vec d_h;
};

ShockVectors shock_vectors(const SimInput& input, const ShockSpec& shock,
                           const GlobalModel& model, int origin,
                           int rate_pos) {
  ShockVectors v;
  const int K = input.links.K();
  const int col = input.links.offset(origin) + rate_pos;
  v.d_eps = arma::zeros(K);
  v.d_eps[col] = shock.level_size * input.level_unit;
  v.d_h = arma::zeros(K);
  v.d_h[col] = shock.vol_shock *
               std::sqrt(model.vols[origin].innovation_var[rate_pos]);
  return v;
}

int find_origin(const LinkMatrices& links, const ShockSpec& shock) {
  for (int i = 0; i < links.n_countries(); ++i)
    if (links.specs()[i].id == shock.origin) {
      if (!links.specs()[i].is_shock_origin)
        throw ValidationError("shock origin " + shock.origin +
                              " is not the designated shock-origin country");
      return i;
    }
  throw ValidationError("unknown shock origin " + shock.origin);
}

}  // namespace

IrfDraws girf(const SimInput& input, const ShockSpec& shock, int reps,
              std::uint64_t seed, int jobs) {
  input.validate();
  shock.validate();
  if (reps < 1) throw ValidationError("girf: reps must be >= 1");
  const LinkMatrices& links = input.links;
  const int origin = find_origin(links, shock);
  const int rate_pos =
      links.specs()[origin].domestic_pos(VariableKind::ShortRate);
  const int H = shock.horizon;
  const int K = links.K();
  const int rl = level_history(links.specs());
  const int rv = vol_history(links.specs());

  Scenario all;
  for (int i = 0; i < links.n_countries(); ++i) all.live.push_back(i);
  all.ext_x.assign(links.n_countries(), nullptr);
  all.ext_h.assign(links.n_countries(), nullptr);
  all.sequential = sequential_ok(links, all.live);

  IrfDraws out;
  out.x.zeros(K, H + 1, input.n_draws());
  out.h.zeros(K, H + 1, input.n_draws());

  parallel_for(input.n_draws(), jobs, [&](int d) {
    const GlobalModel& model = input.draws[d];
    const SimState& state = input.states[d];
    const ShockVectors sv = shock_vectors(input, shock, model, origin,
                                          rate_pos);
    arma::mat acc_x = arma::zeros(K, H + 1);
    arma::mat acc_h = arma::zeros(K, H + 1);
    for (int rep = 0; rep < reps; ++rep) {
      const DrawNoise noise = make_noise(links, seed, d, rep, H);
      Scenario base = all;
      base.shocked = false;
      Scenario hit = all;
      hit.shocked = true;
      PathPair pb = run_path(input, model, state, noise, base, sv.d_eps,
                             sv.d_h, origin, H);
      PathPair ph = run_path(input, model, state, noise, hit, sv.d_eps,
                             sv.d_h, origin, H);
      acc_x += (ph.x.rows(rl, rl + H) - pb.x.rows(rl, rl + H)).t();
      acc_h += (ph.h.rows(rv, rv + H) - pb.h.rows(rv, rv + H)).t();
    }
    out.x.slice(d) = acc_x / reps;
    out.h.slice(d) = acc_h / reps;
  });
  return out;
}

Decomposition decompose_direct_total(const SimInput& input,
                                     const ShockSpec& shock, int reps,
                                     std::uint64_t seed, int jobs) {
  input.validate();
  shock.validate();
  if (reps < 1)
    throw ValidationError("decompose_direct_total: reps must be >= 1");
  const LinkMatrices& links = input.links;
  const int n = links.n_countries();
  const int origin = find_origin(links, shock);
  const int rate_pos =
      links.specs()[origin].domestic_pos(VariableKind::ShortRate);
  const int H = shock.horizon;
  const int K = links.K();
  const int rl = level_history(links.specs());
  const int rv = vol_history(links.specs());

  Scenario all;
  for (int i = 0; i < n; ++i) all.live.push_back(i);
  all.ext_x.assign(n, nullptr);
  all.ext_h.assign(n, nullptr);
  all.sequential = sequential_ok(links, all.live);

  Decomposition out;
  out.total.x.zeros(K, H + 1, input.n_draws());
  out.total.h.zeros(K, H + 1, input.n_draws());
  out.direct.x.zeros(K, H + 1, input.n_draws());
  out.direct.h.zeros(K, H + 1, input.n_draws());

  parallel_for(input.n_draws(), jobs, [&](int d) {
    const GlobalModel& model = input.draws[d];
    const SimState& state = input.states[d];
    const ShockVectors sv = shock_vectors(input, shock, model, origin,
                                          rate_pos);
    arma::mat tot_x = arma::zeros(K, H + 1), tot_h = arma::zeros(K, H + 1);
    arma::mat dir_x = arma::zeros(K, H + 1), dir_h = arma::zeros(K, H + 1);

    for (int rep = 0; rep < reps; ++rep) {
      const DrawNoise noise = make_noise(links, seed, d, rep, H);

      Scenario base = all;
      Scenario hit = all;
      hit.shocked = true;
      PathPair pb = run_path(input, model, state, noise, base, sv.d_eps,
                             sv.d_h, origin, H);
      PathPair pt = run_path(input, model, state, noise, hit, sv.d_eps,
                             sv.d_h, origin, H);
      tot_x += (pt.x.rows(rl, rl + H) - pb.x.rows(rl, rl + H)).t();
      tot_h += (pt.h.rows(rv, rv + H) - pb.h.rows(rv, rv + H)).t();

      // the origin rerun with its foreign inputs pinned to the baseline
      Scenario solo;
      solo.live = {origin};
      solo.ext_x.assign(n, &pb.x);
      solo.ext_h.assign(n, &pb.h);
      solo.sequential = sequential_ok(links, solo.live);
      Scenario solo_hit = solo;
      solo_hit.shocked = true;
      PathPair on = run_path(input, model, state, noise, solo, sv.d_eps,
                             sv.d_h, origin, H);
      PathPair os = run_path(input, model, state, noise, solo_hit, sv.d_eps,
                             sv.d_h, origin, H);
      {
        const int off = links.offset(origin);
        const int k = links.specs()[origin].k();
        dir_x.rows(off, off + k - 1) +=
            (os.x.rows(rl, rl + H).cols(off, off + k - 1) -
             on.x.rows(rl, rl + H).cols(off, off + k - 1)).t();
        dir_h.rows(off, off + k - 1) +=
            (os.h.rows(rv, rv + H).cols(off, off + k - 1) -
             on.h.rows(rv, rv + H).cols(off, off + k - 1)).t();
      }

      // each responder hears only the origin's rerun; everyone else stays
      // on the baseline
      for (int i = 0; i < n; ++i) {
        if (i == origin) continue;
        Scenario resp;
        resp.live = {i};
        resp.ext_x.assign(n, &pb.x);
        resp.ext_h.assign(n, &pb.h);
        resp.sequential = sequential_ok(links, resp.live);
        Scenario resp_base = resp;
        resp_base.ext_x[origin] = &on.x;
        resp_base.ext_h[origin] = &on.h;
        Scenario resp_hit = resp;
        resp_hit.ext_x[origin] = &os.x;
        resp_hit.ext_h[origin] = &os.h;
        PathPair rb = run_path(input, model, state, noise, resp_base,
                               sv.d_eps, sv.d_h, origin, H);
        PathPair rs = run_path(input, model, state, noise, resp_hit,
                               sv.d_eps, sv.d_h, origin, H);
        const int off = links.offset(i);
        const int k = links.specs()[i].k();
        dir_x.rows(off, off + k - 1) +=
            (rs.x.rows(rl, rl + H).cols(off, off + k - 1) -
             rb.x.rows(rl, rl + H).cols(off, off + k - 1)).t();
        dir_h.rows(off, off + k - 1) +=
            (rs.h.rows(rv, rv + H).cols(off, off + k - 1) -
             rb.h.rows(rv, rv + H).cols(off, off + k - 1)).t();
      }
    }

    out.total.x.slice(d) = tot_x / reps;
    out.total.h.slice(d) = tot_h / reps;
    out.direct.x.slice(d) = dir_x / reps;
    out.direct.h.slice(d) = dir_h / reps;
  });
  return out;
}

namespace {

double quantile_sorted(const arma::vec& sorted, double p) {
  const arma::uword n = sorted.n_elem;
  if (n == 1) return sorted[0];
  const double idx = p * static_cast<double>(n - 1);
  const auto lo = static_cast<arma::uword>(std::floor(idx));
  if (lo >= n - 1) return sorted[n - 1];
  const double frac = idx - static_cast<double>(lo);
  return (1.0 - frac) * sorted[lo] + frac * sorted[lo + 1];
}

}  // namespace

BandSet bands(const arma::cube& per_draw, double coverage) {
  if (!(coverage >= 0.0) || coverage >= 1.0)
    throw ValidationError("bands: coverage must lie in [0, 1)");
  const arma::uword n = per_draw.n_slices;
  if (n == 0) throw ValidationError("bands: no draws");
  if (coverage > 0.0 && n < 30)
    throw ValidationError("bands: need at least 30 draws for interval "
                          "estimates, got " + std::to_string(n));
  BandSet set;
  set.median.set_size(per_draw.n_rows, per_draw.n_cols);
  set.lo.set_size(per_draw.n_rows, per_draw.n_cols);
  set.hi.set_size(per_draw.n_rows, per_draw.n_cols);
  const double p_lo = 0.5 - 0.5 * coverage;
  const double p_hi = 0.5 + 0.5 * coverage;
  for (arma::uword r = 0; r < per_draw.n_rows; ++r)
    for (arma::uword c = 0; c < per_draw.n_cols; ++c) {
      arma::vec v = per_draw.tube(r, c);
      v = arma::sort(v);
      set.median(r, c) = quantile_sorted(v, 0.5);
      set.lo(r, c) = quantile_sorted(v, p_lo);
      set.hi(r, c) = quantile_sorted(v, p_hi);
    }
  return set;
}

arma::cube aggregate_group(const arma::cube& per_draw_x,
                           const LinkMatrices& links, const Group& group,
                           const std::vector<VariableKind>& kinds) {
  if (group.members.empty())
    throw ValidationError("aggregate_group: empty group " + group.name);
  if (group.members.size() != group.weights.size())
    throw ValidationError("aggregate_group: one weight per member required");
  if (kinds.empty())
    throw ValidationError("aggregate_group: no variable kinds requested");
  double sum = 0.0;
  for (double w : group.weights) sum += w;
  if (std::abs(sum - 1.0) > 1e-8)
    throw ValidationError("aggregate_group: weights for " + group.name +
                          " sum to " + std::to_string(sum) + ", expected 1");

  arma::cube out(kinds.size(), per_draw_x.n_cols, per_draw_x.n_slices,
                 arma::fill::zeros);
  for (size_t m = 0; m < group.members.size(); ++m) {
    int idx = -1;
    for (int i = 0; i < links.n_countries(); ++i)
      if (links.specs()[i].id == group.members[m]) idx = i;
    if (idx < 0)
      throw ValidationError("aggregate_group: unknown member " +
                            group.members[m]);
    for (size_t v = 0; v < kinds.size(); ++v) {
      const int row = links.offset(idx) +
                      links.specs()[idx].domestic_pos(kinds[v]);
      for (arma::uword s = 0; s < per_draw_x.n_slices; ++s)
        out.slice(s).row(v) +=
            group.weights[m] * per_draw_x.slice(s).row(row);
    }
  }
  return out;
}

void append_irf_records(IrfSet& set, const LinkMatrices& links,
                        const std::string& regime, const BandSet& x_bands,
                        const BandSet& h_bands) {
  const auto push = [&](const BandSet& bands_in, bool vol_block) {
    for (int i = 0; i < links.n_countries(); ++i) {
      const auto& spec = links.specs()[i];
      for (int v = 0; v < spec.k(); ++v) {
        const int row = links.offset(i) + v;
        for (arma::uword hz = 0; hz < bands_in.median.n_cols; ++hz) {
          IrfRecord rec;
          rec.country = spec.id;
          rec.variable = std::string(vol_block ? "h:" : "") +
                         to_token(spec.domestic[v]);
          rec.regime = regime;
          rec.horizon = static_cast<int>(hz);
          rec.median = bands_in.median(row, hz);
          rec.lo = bands_in.lo(row, hz);
          rec.hi = bands_in.hi(row, hz);
          if (!(rec.lo <= rec.median && rec.median <= rec.hi))
            throw NumericError("irf record bands out of order for " +
                               rec.country + "/" + rec.variable);
          set.records.push_back(std::move(rec));
        }
      }
    }
  };
  push(x_bands, false);
  push(h_bands, true);
}

void write_irf_csv(const IrfSet& set, const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(set.records.size());
  for (const auto& rec : set.records)
    rows.push_back({rec.country, rec.variable, rec.regime,
                    std::to_string(rec.horizon), fmt_double(rec.median),
                    fmt_double(rec.lo), fmt_double(rec.hi)});
  write_csv(path, {"country", "variable", "regime", "horizon", "median",
                   "lo", "hi"},
            rows);
}

void write_irf_json(const IrfSet& set, const std::string& path) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& rec : set.records) {
    nlohmann::json obj;
    obj["country"] = rec.country;
    obj["variable"] = rec.variable;
    obj["regime"] = rec.regime;
    obj["horizon"] = rec.horizon;
    obj["median"] = rec.median;
    obj["lo"] = rec.lo;
    obj["hi"] = rec.hi;
    arr.push_back(std::move(obj));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << arr.dump(2) << "\n";
}

}  // namespace gvarsv

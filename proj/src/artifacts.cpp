#include "gvarsv/artifacts.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>

#include "gvarsv/csv.hpp"
#include "gvarsv/util.hpp"

static_assert(std::endian::native == std::endian::little,
              "draw artifacts assume a little-endian host");

namespace gvarsv {

namespace {

constexpr char kMagic[8] = {'G', 'V', 'S', 'V', 'D', 'R', 'W', '1'};

struct Writer {
  std::FILE* f;
  explicit Writer(const std::string& path) : f(std::fopen(path.c_str(), "wb")) {
    if (!f) throw DataError("cannot open " + path + " for writing");
  }
  ~Writer() {
    if (f) std::fclose(f);
  }
  void bytes(const void* p, std::size_t n) {
    if (std::fwrite(p, 1, n, f) != n)
      throw DataError("short write on draw artifact");
  }
  void u32(std::uint32_t v) { bytes(&v, sizeof v); }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void i64(std::int64_t v) { bytes(&v, sizeof v); }
  void f64(double v) { bytes(&v, sizeof v); }
  void mat(const arma::mat& m) { bytes(m.memptr(), m.n_elem * sizeof(double)); }
  void vec(const arma::vec& v) { bytes(v.memptr(), v.n_elem * sizeof(double)); }
};

struct Reader {
  std::FILE* f;
  std::string path;
  explicit Reader(const std::string& p)
      : f(std::fopen(p.c_str(), "rb")), path(p) {
    if (!f) throw DataError("cannot open draw artifact " + p);
  }
  ~Reader() {
    if (f) std::fclose(f);
  }
  void bytes(void* p, std::size_t n) {
    if (std::fread(p, 1, n, f) != n)
      throw DataError("draw artifact " + path + " is truncated");
  }
  std::uint32_t u32() {
    std::uint32_t v;
    bytes(&v, sizeof v);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    bytes(&v, sizeof v);
    return v;
  }
  std::int64_t i64() {
    std::int64_t v;
    bytes(&v, sizeof v);
    return v;
  }
  double f64() {
    double v;
    bytes(&v, sizeof v);
    return v;
  }
  arma::mat mat(int rows, int cols) {
    arma::mat m(rows, cols);
    bytes(m.memptr(), m.n_elem * sizeof(double));
    return m;
  }
  arma::vec vec(int n) {
    arma::vec v(n);
    bytes(v.memptr(), v.n_elem * sizeof(double));
    return v;
  }
};

}  // namespace

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot hash missing file " + path);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    const auto n = static_cast<std::size_t>(in.gcount());
    for (std::size_t i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001B3ULL;
    }
  }
  return hex64(h);
}

void write_manifest(const Manifest& manifest, const std::string& path) {
  nlohmann::ordered_json doc;
  doc["stage"] = manifest.stage;
  doc["version"] = kVersion;
  doc["seed"] = manifest.seed;
  doc["config_hash"] = manifest.config_hash;
  auto inputs = nlohmann::ordered_json::object();
  for (const auto& [name, hash] : manifest.inputs) inputs[name] = hash;
  doc["inputs"] = std::move(inputs);
  auto outputs = nlohmann::ordered_json::object();
  for (const auto& [name, hash] : manifest.outputs) outputs[name] = hash;
  doc["outputs"] = std::move(outputs);
  doc["diagnostics"] = manifest.diagnostics;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  out << doc.dump(2) << "\n";
}

void write_draws(const std::string& path, const PosteriorDraws& draws,
                 const CountrySpec& spec) {
  if (draws.n_draws() == 0)
    throw ValidationError("write_draws: no draws for " + spec.id);
  const int k = spec.k(), kstar = spec.kstar();
  const auto& lags = spec.lags;
  const int h_rows = static_cast<int>(draws.h[0].h().n_rows);
  const int n_pre = draws.h[0].n_pre();

  Writer w(path);
  w.bytes(kMagic, sizeof kMagic);
  w.u32(static_cast<std::uint32_t>(spec.id.size()));
  w.bytes(spec.id.data(), spec.id.size());
  w.u32(k);
  w.u32(kstar);
  w.u32(lags.p);
  w.u32(lags.q);
  w.u32(lags.s);
  w.u32(lags.m);
  w.u64(static_cast<std::uint64_t>(draws.n_draws()));
  w.u32(h_rows);
  w.u32(n_pre);
  w.u32(static_cast<std::uint32_t>(draws.window_start.year));
  w.u32(static_cast<std::uint32_t>(draws.window_start.q));
  w.f64(draws.h_accept_rate);
  w.i64(draws.sign_rejections);

  for (int d = 0; d < draws.n_draws(); ++d) {
    const auto& par = draws.params[d];
    const auto& vol = draws.vols[d];
    w.vec(par.intercept);
    for (const auto& m : par.domestic_lags) w.mat(m);
    for (const auto& m : par.foreign_lags) w.mat(m);
    for (const auto& m : par.vol_in_mean) w.mat(m);
    w.mat(par.ident.a_tilde());
    w.vec(vol.intercept);
    for (const auto& m : vol.vol_lags) w.mat(m);
    for (const auto& m : vol.macro_feedback) w.mat(m);
    w.vec(vol.innovation_var);
    w.mat(draws.h[d].h());
  }
}

PosteriorDraws read_draws(const std::string& path, const CountrySpec& spec) {
  Reader r(path);
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw DataError(path + " is not a draw artifact (bad magic)");
  const auto id_len = r.u32();
  std::string id(id_len, '\0');
  r.bytes(id.data(), id_len);
  if (id != spec.id)
    throw DataError("draw artifact " + path + " holds country " + id +
                    ", expected " + spec.id);
  const int k = static_cast<int>(r.u32());
  const int kstar = static_cast<int>(r.u32());
  const int p = static_cast<int>(r.u32());
  const int q = static_cast<int>(r.u32());
  const int s = static_cast<int>(r.u32());
  const int m = static_cast<int>(r.u32());
  if (k != spec.k() || kstar != spec.kstar() || p != spec.lags.p ||
      q != spec.lags.q || s != spec.lags.s || m != spec.lags.m)
    throw DataError("draw artifact " + path +
                    " does not match the configured model shape for " +
                    spec.id);
  const auto n_draws = static_cast<int>(r.u64());
  const int h_rows = static_cast<int>(r.u32());
  const int n_pre = static_cast<int>(r.u32());
  const int wy = static_cast<int>(r.u32());
  const int wq = static_cast<int>(r.u32());

  PosteriorDraws draws;
  draws.window_start = Quarter(wy, wq);
  draws.h_accept_rate = r.f64();
  draws.sign_rejections = r.i64();

  for (int d = 0; d < n_draws; ++d) {
    CountryParameters par{
        r.vec(k), {}, {}, {},
        IdentificationMatrix(arma::eye(k, k), spec.domestic,
                             spec.is_shock_origin)};
    for (int l = 0; l < p; ++l) par.domestic_lags.push_back(r.mat(k, k));
    for (int l = 0; l <= q; ++l) par.foreign_lags.push_back(r.mat(k, kstar));
    for (int l = 0; l <= s; ++l) par.vol_in_mean.push_back(r.mat(k, k));
    par.ident = IdentificationMatrix(r.mat(k, k), spec.domestic,
                                     spec.is_shock_origin);
    VolatilityParameters vol;
    vol.intercept = r.vec(k);
    for (int l = 0; l < m; ++l) vol.vol_lags.push_back(r.mat(k, k));
    for (int l = 0; l < q; ++l) vol.macro_feedback.push_back(r.mat(k, k));
    vol.innovation_var = r.vec(k);
    par.validate(spec);
    vol.validate(spec);
    draws.params.push_back(std::move(par));
    draws.vols.push_back(std::move(vol));
    draws.h.emplace_back(r.mat(h_rows, k), n_pre);
  }
  return draws;
}

void write_stability_csv(const StabilityReport& report,
                         const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  std::set<arma::uword> flagged(report.flagged.begin(), report.flagged.end());
  for (arma::uword d = 0; d < report.radius.n_elem; ++d)
    rows.push_back({std::to_string(d), fmt_double(report.radius[d]),
                    fmt_double(report.condition[d]),
                    flagged.count(d) ? "1" : "0"});
  write_csv(path, {"draw", "radius", "condition", "flagged"}, rows);
}

}  // namespace gvarsv

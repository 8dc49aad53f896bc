#include "specobs/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace specobs {

namespace fs = std::filesystem;

namespace {

template <class T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config key '") + key + "': " + e.what());
  }
}

json section(const json& doc, const char* key) {
  if (!doc.contains(key)) return json::object();
  const json& s = doc.at(key);
  if (!s.is_object()) throw std::invalid_argument(std::string("config section '") + key + "' must be an object");
  return s;
}

InitProfile profile_from(const json& obj, const InitProfile& fallback) {
  InitProfile p = fallback;
  p.kind = get_or<std::string>(obj, "kind", p.kind);
  p.amplitude = get_or<double>(obj, "amplitude", p.amplitude);
  (void)p(0.0);  // rejects unknown kinds
  return p;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path, const std::string& header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != header)
    throw std::runtime_error(path.string() + ": expected header '" + header + "'");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

void append_row(std::string& out, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) out += ',';
    out += format_double(v);
    first = false;
  }
  out += '\n';
}

json complex_list(const Eigen::VectorXcd& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(complex_json(v[i]));
  return arr;
}

json fit_json(const DecayFit& fit) {
  json j;
  j["valid"] = fit.valid;
  j["rate"] = fit.valid ? json(fit.rate) : json(nullptr);
  j["M"] = fit.valid ? json(fit.M) : json(nullptr);
  j["window"] = {fit.t_begin, fit.t_end};
  j["warnings"] = fit.warnings;
  return j;
}

}  // namespace

RunConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
  RunConfig cfg;
  ExperimentConfig& e = cfg.experiment;

  const json params = section(doc, "params");
  e.params = ExchangerParams(get_or<double>(params, "u1", 1.0), get_or<double>(params, "u2", 1.0),
                             get_or<double>(params, "c1", 1.0), get_or<double>(params, "c2", 1.0));

  const json grid = section(doc, "grid");
  e.n = get_or<Index>(grid, "n", e.n);

  const json time = section(doc, "time");
  e.dt = get_or<double>(time, "dt", e.dt);
  e.t_final = get_or<double>(time, "t_final", e.t_final);
  e.snapshot_stride = get_or<Index>(time, "snapshot_stride", e.snapshot_stride);

  if (doc.contains("rates")) {
    try {
      e.lambda_o_list = doc.at("rates").get<std::vector<double>>();
    } catch (const json::exception& ex) {
      throw std::invalid_argument(std::string("config key 'rates': ") + ex.what());
    }
  }

  const json init = section(doc, "init");
  e.init_h = profile_from(section(init, "h"), e.init_h);
  e.init_c = profile_from(section(init, "c"), e.init_c);
  e.seed = get_or<std::uint64_t>(init, "seed", e.seed);

  const json output = section(doc, "output");
  cfg.output_dir = get_or<std::string>(output, "dir", cfg.output_dir);

  e.validate();
  return cfg;
}

json config_to_json(const RunConfig& cfg) {
  const ExperimentConfig& e = cfg.experiment;
  json j;
  j["params"] = {{"u1", e.params.u1()}, {"u2", e.params.u2()}, {"c1", e.params.c1()}, {"c2", e.params.c2()}};
  j["grid"] = {{"n", e.n}};
  j["time"] = {{"dt", e.dt}, {"t_final", e.t_final}, {"snapshot_stride", e.snapshot_stride}};
  j["rates"] = e.lambda_o_list;
  j["init"] = {{"h", {{"kind", e.init_h.kind}, {"amplitude", e.init_h.amplitude}}},
               {"c", {{"kind", e.init_c.kind}, {"amplitude", e.init_c.amplitude}}},
               {"seed", e.seed}};
  j["output"] = {{"dir", cfg.output_dir}};
  return j;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(doc);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);  // no "-0"
  return buf;
}

std::string rate_tag(double lambda_o) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", lambda_o);
  return std::string("lambda") + buf;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

void write_norms_csv(const fs::path& path, const SimResult& r) {
  std::string out = "t,norm_complex,norm_real,scaled_real\n";
  const double n0 = r.initial_norm_real();
  for (std::size_t k = 0; k < r.norm_real.size(); ++k) {
    const double scaled = n0 > 0.0 ? r.norm_real.values[k] / n0 : 0.0;
    append_row(out, {r.norm_real.times[k], r.norm_complex.values[k], r.norm_real.values[k], scaled});
  }
  write_text(path, out);
}

void write_snapshots_csv(const fs::path& path, const TimeSeries<Field>& snaps, const SpatialGrid& grid) {
  std::string out = "t,x,re_h,im_h,re_c,im_c\n";
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    const Field& f = snaps.values[k];
    require_on_grid(f, grid, "write_snapshots_csv");
    for (Index i = 0; i < grid.n(); ++i)
      append_row(out, {snaps.times[k], grid.x()[i], f.h()[i].real(), f.h()[i].imag(), f.c()[i].real(),
                       f.c()[i].imag()});
  }
  write_text(path, out);
}

void write_kappa_csv(const fs::path& path, const Field& kappa, const SpatialGrid& grid) {
  require_on_grid(kappa, grid, "write_kappa_csv");
  std::string out = "x,re_h,im_h,re_c,im_c\n";
  for (Index i = 0; i < grid.n(); ++i)
    append_row(out, {grid.x()[i], kappa.h()[i].real(), kappa.h()[i].imag(), kappa.c()[i].real(),
                     kappa.c()[i].imag()});
  write_text(path, out);
}

Field read_kappa_csv(const fs::path& path, const SpatialGrid& grid) {
  const auto rows = read_csv(path, "x,re_h,im_h,re_c,im_c");
  if (static_cast<Index>(rows.size()) != grid.n())
    throw std::runtime_error(path.string() + ": expected " + std::to_string(grid.n()) + " rows");
  Field f(grid.n());
  for (Index i = 0; i < grid.n(); ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    if (r.size() != 5) throw std::runtime_error(path.string() + ": malformed row");
    f.h()[i] = cplx(std::stod(r[1]), std::stod(r[2]));
    f.c()[i] = cplx(std::stod(r[3]), std::stod(r[4]));
  }
  return f;
}

void write_basis_csv(const fs::path& path, const UnstableBasis& basis) {
  const SpatialGrid& grid = basis.grid;
  std::string out = "mode,x,re_h,im_h,re_c,im_c\n";
  for (Index j = 0; j < basis.q(); ++j)
    for (Index i = 0; i < grid.n(); ++i) {
      const cplx h = basis.w(grid.hot(i), j), c = basis.w(grid.cold(i), j);
      append_row(out, {static_cast<double>(j), grid.x()[i], h.real(), h.imag(), c.real(), c.imag()});
    }
  write_text(path, out);
}

UnstableBasis read_basis_csv(const fs::path& path, const SpatialGrid& grid, double lambda_o) {
  const auto rows = read_csv(path, "mode,x,re_h,im_h,re_c,im_c");
  if (rows.size() % static_cast<std::size_t>(grid.n()) != 0)
    throw std::runtime_error(path.string() + ": row count is not a multiple of n");
  const Index q = static_cast<Index>(rows.size()) / grid.n();
  UnstableBasis b = UnstableBasis::empty(grid, lambda_o);
  b.w.resize(grid.size(), q);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    if (r.size() != 6) throw std::runtime_error(path.string() + ": malformed row");
    const Index j = static_cast<Index>(k) / grid.n(), i = static_cast<Index>(k) % grid.n();
    b.w(grid.hot(i), j) = cplx(std::stod(r[2]), std::stod(r[3]));
    b.w(grid.cold(i), j) = cplx(std::stod(r[4]), std::stod(r[5]));
  }
  b.v = b.w;
  b.combo = Eigen::MatrixXcd::Identity(q, q);
  return b;
}

json complex_json(cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

json spectrum_json(const Spectrum& spectrum, double lambda_o, std::size_t max_modes) {
  json j;
  j["lambda_o"] = lambda_o;
  j["n"] = spectrum.grid.n();
  j["shift"] = spectrum.shift;
  j["count"] = spectrum.modes.size();
  json modes = json::array();
  std::size_t limit = max_modes ? std::min(max_modes, spectrum.modes.size()) : spectrum.modes.size();
  for (std::size_t k = 0; k < limit; ++k) {
    const Mode& m = spectrum.modes[k];
    modes.push_back({{"re", m.lambda.real()},
                     {"im", m.lambda.imag()},
                     {"residual", m.residual},
                     {"source", to_string(m.source)}});
  }
  j["eigenvalues"] = std::move(modes);
  return j;
}

json design_report_json(const ObserverDesign& d) {
  json j = design_brief(d);
  j["n"] = d.basis.grid.n();
  json modes = json::array();
  for (const Mode& m : d.selection.modes) {
    json mj{{"lambda_shifted", complex_json(m.lambda)},
            {"lambda", complex_json(m.lambda - d.lambda_o)},
            {"residual", m.residual},
            {"source", to_string(m.source)}};
    mj["polished"] = m.polished_lambda ? complex_json(*m.polished_lambda) : json(nullptr);
    modes.push_back(std::move(mj));
  }
  j["modes"] = std::move(modes);
  j["gram_deviation"] = gram_deviation(d.basis);
  j["eig_match_distance"] = d.eig_match_distance;
  j["hautus"] = {{"observable", d.observability.observable},
                 {"min_margin", d.observability.min_margin},
                 {"margins", d.observability.margins},
                 {"tol", d.observability.tol}};
  j["riccati_residual"] = d.system.riccati_residual;
  j["Q_scale"] = (d.lambda_o + 2.0) * (d.lambda_o + 2.0);
  j["R"] = d.system.R;
  j["K"] = complex_list(d.gain.coefficients);
  j["kappa_norm"] = d.q() ? l2_norm(d.gain.kappa, d.basis.grid) : 0.0;
  j["notes"] = d.notes;
  return j;
}

json design_brief(const ObserverDesign& d) {
  json j;
  j["lambda_o"] = d.lambda_o;
  j["q"] = d.q();
  j["spectrum_before"] = complex_list((d.basis.lambdas.array() - cplx(d.lambda_o)).matrix());
  j["spectrum_after"] = complex_list((d.projected_closed_loop.array() - cplx(d.lambda_o)).matrix());
  return j;
}

json summary_json(const SimResult& r, const RunConfig& cfg, const json& brief,
                  const DiagnosticsReport* diag) {
  json j;
  j["tag"] = r.tag;
  j["lambda_o"] = brief.value("lambda_o", json(nullptr));
  j["q"] = brief.value("q", 0);
  j["spectrum_before"] = brief.value("spectrum_before", json::array());
  j["spectrum_after"] = brief.value("spectrum_after", json::array());
  j["initial_norm"] = r.initial_norm_real();
  j["final_norm"] = r.norm_real.values.empty() ? 0.0 : r.norm_real.values.back();
  j["fit"] = fit_json(r.fit);
  j["fitted_rate"] = r.fit.valid ? json(r.fit.rate) : json(nullptr);
  j["fitted_M"] = r.fit.valid ? json(r.fit.M) : json(nullptr);
  if (diag) {
    j["diagnostics"] = {{"xi_fit", fit_json(diag->xi_fit)},
                        {"T_l2_total", diag->T_l2_total},
                        {"tail_increment", diag->tail_increment},
                        {"tail_fraction", diag->tail_fraction}};
  } else {
    j["diagnostics"] = nullptr;
  }
  j["warnings"] = r.warnings;
  j["config"] = config_to_json(cfg);
  return j;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t fnv1a_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return fnv1a(ss.str());
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

void RunManifest::add_file(const fs::path& dir, const std::string& file) {
  const fs::path p = dir / file;
  files.push_back({file, fs::file_size(p), hex64(fnv1a_file(p))});
}

json RunManifest::to_json() const {
  json j;
  j["tool_version"] = tool_version;
  j["config_hash"] = config_hash;
  json fl = json::array();
  for (const auto& e : files) fl.push_back({{"file", e.file}, {"size", e.size}, {"fnv1a64", e.checksum}});
  j["files"] = std::move(fl);
  json st = json::object();
  for (const auto& [name, sec] : stage_seconds) st[name] = sec;
  j["stage_seconds"] = std::move(st);
  return j;
}

std::vector<std::string> RunManifest::verify(const fs::path& dir) const {
  std::vector<std::string> bad;
  for (const auto& e : files) {
    const fs::path p = dir / e.file;
    if (!fs::exists(p) || fs::file_size(p) != e.size || hex64(fnv1a_file(p)) != e.checksum)
      bad.push_back(e.file);
  }
  return bad;
}

}  // namespace specobs

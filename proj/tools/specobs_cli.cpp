// specobs: design, simulate and validate spectral boundary observers for the
// counter-flow heat exchanger.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>
#include <variant>

#include "CLI11.hpp"

#include "specobs/design.hpp"
#include "specobs/experiment.hpp"
#include "specobs/io.hpp"
#include "specobs/validate.hpp"

namespace fs = std::filesystem;
using namespace specobs;

namespace {

enum Exit : int { kOk = 0, kFailure = 1, kHautus = 2, kRiccati = 3, kMissingDesign = 4 };

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string config_hash(const RunConfig& cfg) { return hex64(fnv1a(config_to_json(cfg).dump())); }

unsigned thread_budget() {
  if (const char* env = std::getenv("SPECOBS_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return static_cast<unsigned>(v);
    std::cerr << "warning: ignoring SPECOBS_THREADS=" << env << "\n";
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs jobs with at most `threads` in flight; results keep submission order.
template <class R>
std::vector<R> run_jobs(std::vector<std::function<R()>> jobs, unsigned threads) {
  std::vector<R> out;
  out.reserve(jobs.size());
  if (threads <= 1) {
    for (auto& j : jobs) out.push_back(j());
    return out;
  }
  std::vector<std::future<R>> pending;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    pending.push_back(std::async(std::launch::async, jobs[i]));
    if (pending.size() == threads || i + 1 == jobs.size()) {
      for (auto& f : pending) out.push_back(f.get());
      pending.clear();
    }
  }
  return out;
}

struct DesignFailure {
  int code;
  json report;
};

json eig_json(const Eigen::VectorXcd& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(complex_json(v[i]));
  return a;
}

// Designs for one rate; on failure returns the exit code and a diagnostic document.
std::variant<ObserverDesign, DesignFailure> try_design(const RunConfig& cfg, double lo) {
  const SpatialGrid grid(cfg.experiment.n);
  json diag{{"lambda_o", lo}};
  try {
    return design_observer(cfg.experiment.params, grid, lo);
  } catch (const ObservabilityError& e) {
    diag["error"] = "hautus";
    diag["message"] = e.what();
    diag["margins"] = e.report.margins;
    diag["eigenvalues"] = eig_json(e.report.eigenvalues);
    return DesignFailure{kHautus, diag};
  } catch (const GainDesignError& e) {
    diag["error"] = "riccati";
    diag["message"] = e.what();
    diag["residual"] = std::isfinite(e.residual) ? json(e.residual) : json(nullptr);
    diag["open_loop"] = eig_json(e.open_loop);
    diag["closed_loop"] = eig_json(e.closed_loop);
    return DesignFailure{kRiccati, diag};
  } catch (const RankDeficientModes& e) {
    diag["error"] = "rank_deficient_modes";
    diag["message"] = e.what();
    diag["indices"] = e.indices();
    return DesignFailure{kFailure, diag};
  }
}

int report_failure(const fs::path& out, const std::string& tag, const DesignFailure& f) {
  const fs::path log = out / ("design_error_" + tag + ".json");
  write_json(log, f.report);
  std::cerr << "error: " << f.report.value("message", std::string("design failed")) << "\n"
            << "       details in " << log.string() << "\n";
  return f.code;
}

int cmd_design(const RunConfig& cfg, const fs::path& out) {
  fs::create_directories(out);
  RunManifest manifest;
  manifest.config_hash = config_hash(cfg);
  const SpatialGrid grid(cfg.experiment.n);
  for (double lo : cfg.experiment.lambda_o_list) {
    const std::string tag = rate_tag(lo);
    Stopwatch sw;
    auto result = try_design(cfg, lo);
    if (auto* f = std::get_if<DesignFailure>(&result)) return report_failure(out, tag, *f);
    const auto& d = std::get<ObserverDesign>(result);
    for (const auto& note : d.notes) std::cerr << "note [" << tag << "]: " << note << "\n";

    json report = design_report_json(d);
    report["config"] = config_to_json(cfg);
    write_json(out / ("design_" + tag + ".json"), report);
    write_kappa_csv(out / ("kappa_" + tag + ".csv"), d.gain.kappa, grid);
    write_basis_csv(out / ("basis_" + tag + ".csv"), d.basis);
    manifest.add_file(out, "design_" + tag + ".json");
    manifest.add_file(out, "kappa_" + tag + ".csv");
    manifest.add_file(out, "basis_" + tag + ".csv");
    manifest.stage_seconds.emplace_back("design_" + tag, sw.seconds());
    std::cout << tag << ": q = " << d.q() << "\n";
  }
  write_json(out / "manifest_design.json", manifest.to_json());
  return kOk;
}

struct RunOutcome {
  int code = kOk;
  std::string tag;
  std::vector<std::string> files;
  double seconds = 0.0;
  std::string message;
};

RunOutcome simulate_one(const RunConfig& cfg, const fs::path& out, std::optional<double> lo,
                        const std::optional<fs::path>& design_dir) {
  Stopwatch sw;
  RunOutcome o;
  o.tag = lo ? rate_tag(*lo) : "direct";
  const SpatialGrid grid(cfg.experiment.n);

  SimResult result;
  json brief = json::object();
  std::optional<DiagnosticsReport> diag;
  if (!lo) {
    result = run_error_experiment(cfg.experiment);
    diag = diagnostics(result, UnstableBasis::empty(grid, 0.0));
  } else {
    ObserverGain gain;
    if (design_dir) {
      const fs::path kappa = *design_dir / ("kappa_" + o.tag + ".csv");
      const fs::path basis = *design_dir / ("basis_" + o.tag + ".csv");
      const fs::path report = *design_dir / ("design_" + o.tag + ".json");
      for (const auto& p : {kappa, basis, report}) {
        if (!fs::exists(p)) {
          o.code = kMissingDesign;
          o.message = "missing design artifact " + p.string();
          return o;
        }
      }
      gain.kappa = read_kappa_csv(kappa, grid);
      gain.basis = read_basis_csv(basis, grid, *lo);
      std::ifstream in(report);
      const json doc = json::parse(in);
      for (const char* key : {"lambda_o", "q", "spectrum_before", "spectrum_after"}) brief[key] = doc.at(key);
    } else {
      auto designed = try_design(cfg, *lo);
      if (auto* f = std::get_if<DesignFailure>(&designed)) {
        o.code = report_failure(out, o.tag, *f);
        o.message = "design failed";
        return o;
      }
      const auto& d = std::get<ObserverDesign>(designed);
      gain = d.gain;
      brief = design_brief(d);
    }
    result = run_error_experiment(cfg.experiment, &gain);
    result.tag = o.tag;
    diag = diagnostics(result, gain.basis);
  }
  result.tag = o.tag;

  const std::string norms = "norms_" + o.tag + ".csv";
  const std::string snaps = "snapshots_" + o.tag + ".csv";
  const std::string summary = "summary_" + o.tag + ".json";
  write_norms_csv(out / norms, result);
  write_snapshots_csv(out / snaps, result.snapshots, grid);
  write_json(out / summary, summary_json(result, cfg, brief, diag ? &*diag : nullptr));
  o.files = {norms, snaps, summary};
  o.seconds = sw.seconds();
  return o;
}

std::vector<double> parse_rates(const std::string& text) {
  std::vector<double> rates;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size() || !(v > 0.0)) throw std::invalid_argument("bad rate '" + item + "'");
    rates.push_back(v);
  }
  return rates;
}

int cmd_simulate(const RunConfig& cfg, const fs::path& out, const std::string& rates_arg, bool direct_flag,
                 const std::optional<fs::path>& design_dir) {
  fs::create_directories(out);
  // no selection flags: direct model plus every configured rate
  const bool any_flag = !rates_arg.empty() || direct_flag;
  const std::vector<double> rates =
      rates_arg.empty() ? (any_flag ? std::vector<double>{} : cfg.experiment.lambda_o_list) : parse_rates(rates_arg);
  const bool with_direct = direct_flag || !any_flag;

  std::vector<std::function<RunOutcome()>> jobs;
  if (with_direct) jobs.push_back([&] { return simulate_one(cfg, out, std::nullopt, design_dir); });
  for (double lo : rates) jobs.push_back([&, lo] { return simulate_one(cfg, out, lo, design_dir); });

  const auto outcomes = run_jobs(std::move(jobs), thread_budget());
  RunManifest manifest;
  manifest.config_hash = config_hash(cfg);
  int code = kOk;
  for (const auto& o : outcomes) {
    if (o.code != kOk) {
      std::cerr << "error [" << o.tag << "]: " << o.message << "\n";
      if (code == kOk) code = o.code;
      continue;
    }
    for (const auto& f : o.files) manifest.add_file(out, f);
    manifest.stage_seconds.emplace_back("simulate_" + o.tag, o.seconds);
    std::cout << o.tag << ": wrote " << o.files.size() << " files\n";
  }
  if (code == kOk) write_json(out / "manifest_simulate.json", manifest.to_json());
  return code;
}

int cmd_validate(const RunConfig& cfg) {
  const auto checks = run_validation(cfg.experiment);
  std::size_t width = 5;
  for (const auto& c : checks) width = std::max(width, c.name.size());
  int failed = 0;
  for (const auto& c : checks) {
    std::cout << (c.passed ? "PASS  " : "FAIL  ") << c.name << std::string(width - c.name.size() + 2, ' ')
              << c.detail << "\n";
    if (!c.passed) ++failed;
  }
  std::cout << (failed ? std::to_string(failed) + " check(s) failed" : "all checks passed") << "\n";
  return failed ? kFailure : kOk;
}

int cmd_spectrum(const RunConfig& cfg, double lo, const fs::path& out) {
  const SpatialGrid grid(cfg.experiment.n);
  const DiscreteGenerator gen = assemble_generator(cfg.experiment.params, grid, lo);
  json doc = spectrum_json(discrete_spectrum(gen), lo);
  doc["config"] = config_to_json(cfg);
  write_json(out, doc);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral boundary observer for counter-flow heat exchangers"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  std::string config_path, out_path, rates, design_dir;
  bool direct = false;
  double lambda_o = 0.0;

  auto* design = app.add_subcommand("design", "compute observer gains for every configured rate");
  design->add_option("--config", config_path, "config JSON")->required()->check(CLI::ExistingFile);
  design->add_option("--out", out_path, "output directory")->required();

  auto* simulate = app.add_subcommand("simulate", "simulate the error system (direct and observer runs)");
  simulate->add_option("--config", config_path, "config JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", out_path, "output directory")->required();
  simulate->add_option("--rates", rates, "comma-separated prescribed rates, e.g. 3,5");
  simulate->add_flag("--direct", direct, "include the direct model (kappa = 0)");
  simulate->add_option("--design-dir", design_dir, "reuse gains written by `design`");

  auto* validate = app.add_subcommand("validate", "run the invariant suite");
  validate->add_option("--config", config_path, "config JSON")->required()->check(CLI::ExistingFile);

  auto* spectrum = app.add_subcommand("spectrum", "export the shifted generator spectrum");
  spectrum->add_option("--config", config_path, "config JSON")->required()->check(CLI::ExistingFile);
  spectrum->add_option("--lambda-o", lambda_o, "prescribed rate")->required();
  spectrum->add_option("--out", out_path, "output JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return kFailure;
  }

  try {
    if (*design) return cmd_design(cfg, out_path);
    if (*simulate)
      return cmd_simulate(cfg, out_path, rates, direct,
                          design_dir.empty() ? std::nullopt : std::optional<fs::path>(design_dir));
    if (*validate) return cmd_validate(cfg);
    if (*spectrum) return cmd_spectrum(cfg, lambda_o, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

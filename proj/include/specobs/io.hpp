#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "specobs/design.hpp"
#include "specobs/experiment.hpp"

namespace specobs {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

/// Config document with sections {params, grid, time, rates, init, output}.
/// Missing keys fall back to the defaults of ExperimentConfig.
struct RunConfig {
  ExperimentConfig experiment;
  std::string output_dir = "out";
};

RunConfig config_from_json(const json& doc);
json config_to_json(const RunConfig& cfg);
/// Parses and validates; throws std::invalid_argument with the offending key.
RunConfig load_config(const std::filesystem::path& path);

/// %.17g
std::string format_double(double v);

/// "direct", "lambda3", "lambda5", "lambda0.5", ...
std::string rate_tag(double lambda_o);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const json& doc);

/// t,norm_complex,norm_real,scaled_real
void write_norms_csv(const std::filesystem::path& path, const SimResult& result);
/// t,x,re_h,im_h,re_c,im_c (long format)
void write_snapshots_csv(const std::filesystem::path& path, const TimeSeries<Field>& snapshots,
                         const SpatialGrid& grid);
/// x,re_h,im_h,re_c,im_c
void write_kappa_csv(const std::filesystem::path& path, const Field& kappa, const SpatialGrid& grid);
Field read_kappa_csv(const std::filesystem::path& path, const SpatialGrid& grid);
/// mode,x,re_h,im_h,re_c,im_c for the orthonormal basis columns.
void write_basis_csv(const std::filesystem::path& path, const UnstableBasis& basis);
UnstableBasis read_basis_csv(const std::filesystem::path& path, const SpatialGrid& grid,
                             double lambda_o);

json complex_json(cplx z);
json spectrum_json(const Spectrum& spectrum, double lambda_o, std::size_t max_modes = 0);
json design_report_json(const ObserverDesign& design);
/// {lambda_o, q, spectrum_before, spectrum_after} in the unshifted frame;
/// also embedded in the design report so summaries can be rebuilt from disk.
json design_brief(const ObserverDesign& design);
json summary_json(const SimResult& result, const RunConfig& cfg, const json& brief,
                  const DiagnosticsReport* diag);

std::uint64_t fnv1a(const std::string& bytes);
std::uint64_t fnv1a_file(const std::filesystem::path& path);
std::string hex64(std::uint64_t v);

struct RunManifest {
  struct Entry {
    std::string file;
    std::uintmax_t size = 0;
    std::string checksum;
  };
  std::string config_hash;
  std::string tool_version = kToolVersion;
  std::vector<Entry> files;
  std::vector<std::pair<std::string, double>> stage_seconds;

  /// Records size and checksum of `dir / file`.
  void add_file(const std::filesystem::path& dir, const std::string& file);
  json to_json() const;
  /// Empty if every listed file exists with a matching checksum, otherwise
  /// the names of the mismatching files.
  std::vector<std::string> verify(const std::filesystem::path& dir) const;
};

}  // namespace specobs

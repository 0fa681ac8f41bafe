#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cfaf/experiment.hpp"

namespace cfaf {

class IoError : public Error {
 public:
  using Error::Error;
};

/// Column order of the sample CSV.
inline constexpr const char* kSampleHeader =
    "scenario,setup_id,realization_id,ue_id,scheme,combiner,M,sinr,se";

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

void write_samples_csv(const std::filesystem::path& path, const std::vector<SeSample>& samples);
std::vector<SeSample> read_samples_csv(const std::filesystem::path& path);

/// Columns: label,se,cdf
void write_cdf_csv(const std::filesystem::path& path, const std::vector<CdfSeries>& cdfs);

void write_failure_log(const std::filesystem::path& path,
                       const std::vector<FailureRecord>& failures);

struct ExportPaths {
  std::filesystem::path samples;
  std::filesystem::path cdf;
  std::filesystem::path config;
};

/// Writes samples.csv, cdf.csv and config.json (the resolved configuration,
/// including master_seed) into the directory, creating it if needed.
ExportPaths export_results(const std::vector<SeSample>& samples, const std::vector<CdfSeries>& cdfs,
                           const ExperimentConfig& config, const std::filesystem::path& dir);

}  // namespace cfaf

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cfaf/config.hpp"

namespace cfaf {

/// One (setup, realization, UE, scheme, combiner, M) SE record.
struct SeSample {
  std::string scenario;
  std::int64_t setup_id = 0;
  std::int64_t realization_id = 0;
  std::int64_t ue_id = 0;
  std::string scheme;    // identity | bisvd | wired
  std::string combiner;  // aware | unaware | centralized
  std::int64_t M = 0;    // 0 for the wired benchmark
  double sinr = 0.0;
  double se = 0.0;

  friend bool operator==(const SeSample&, const SeSample&) = default;
};

/// Total order used for export: by series, then by trial, then by UE.
bool sample_less(const SeSample& a, const SeSample& b);

struct FailureRecord {
  std::int64_t setup_id = 0;
  std::optional<std::int64_t> realization_id;  // empty when the setup itself failed
  std::string message;
};

struct ExperimentResult {
  std::vector<SeSample> samples;  // sorted with sample_less
  std::vector<FailureRecord> failures;
};

/// Runs the campaign. Per-trial randomness is derived from (master_seed,
/// setup_id, realization_id), so the result does not depend on the number of
/// worker threads. Errors abort only the affected trial.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Samples of one realization. Exposed for tests; run_experiment calls it for
/// every trial.
std::vector<SeSample> evaluate_realization(const ExperimentConfig& config, const Setup& setup,
                                           const std::vector<std::vector<FronthaulLink>>& links,
                                           std::int64_t realization_id);

/// Scenario column value for AF samples of a hardware variant.
std::string scenario_label(const ExperimentConfig& config, const HardwareVariant& hv);

struct CdfSeries {
  std::string label;
  std::vector<double> values;  // nondecreasing
  std::vector<double> levels;  // i / n, strictly increasing to 1

  /// Fraction of values <= x.
  double evaluate(double x) const;
  /// Smallest value v with evaluate(v) >= q, q in (0, 1].
  double quantile(double q) const;
  double median() const { return quantile(0.5); }
};

CdfSeries empirical_cdf(std::vector<double> values, std::string label);

/// "scenario|scheme|combiner|M"
std::string series_label(const SeSample& s);

/// One CDF per distinct series label, ordered by label.
std::vector<CdfSeries> cdfs_by_series(const std::vector<SeSample>& samples);

/// SE values of the samples whose label equals the given one.
std::vector<double> series_values(const std::vector<SeSample>& samples, const std::string& label);

}  // namespace cfaf

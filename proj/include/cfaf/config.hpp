#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cfaf/channel_model.hpp"
#include "cfaf/impairments.hpp"
#include "cfaf/precoding.hpp"

namespace cfaf {

/// One hardware-quality combination evaluated in a campaign.
struct HardwareVariant {
  std::string label;
  double kappa_ac = 0.9;
  double kappa_frt = 0.9;
};

struct ExperimentConfig {
  std::string scenario = "custom";
  GeometryConfig geometry;
  std::vector<Index> m_values{128};
  LargeScaleModel large_scale;
  std::vector<HardwareVariant> hardware{{"impaired", 0.9, 0.9}};

  double noise_dbm = -94.0;
  double bandwidth_hz = 50e6;  // recorded only
  double ue_power_w = 0.1;
  double fronthaul_power_w = 10.0;
  // Optional per-UE / per-AP overrides of the two scalar powers above.
  std::vector<double> ue_powers_w;
  std::vector<double> fronthaul_powers_w;

  std::vector<PrecoderScheme> precoders{PrecoderScheme::kBiSvd};
  bool aware = true;
  bool unaware = true;
  bool centralized = true;
  InterferenceForm interference = InterferenceForm::kPerAp;
  double se_prelog = 1.0;

  std::int64_t n_setups = 50;
  std::int64_t n_realizations = 20;
  std::uint64_t master_seed = 1;
  int threads = 1;
  std::filesystem::path output_dir = "results";

  /// Throws InvalidConfiguration on the first violated constraint.
  void validate() const;

  double sigma2() const;
  RVector<double> ue_powers() const;
  std::vector<double> fronthaul_budgets() const;
};

/// Scenario presets: fig1 (ideal hardware, bi-SVD, M sweep, centralized
/// benchmark), fig2 / fig3 (impaired, identity / bi-SVD, M = 128), fig4
/// (access-only vs joint impairments), custom (defaults).
ExperimentConfig scenario_preset(const std::string& name);

std::string to_json(const ExperimentConfig& config);

/// Reads a config file. Keys absent from the file keep the values of base.
ExperimentConfig config_from_json(const std::string& text, const ExperimentConfig& base);
ExperimentConfig load_config(const std::filesystem::path& path, const ExperimentConfig& base);

}  // namespace cfaf

#include "cfaf/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace cfaf {

using nlohmann::json;

namespace {

std::string interference_name(InterferenceForm f) {
  return f == InterferenceForm::kPerAp ? "per_ap" : "coherent";
}

InterferenceForm parse_interference(const std::string& s) {
  if (s == "per_ap") return InterferenceForm::kPerAp;
  if (s == "coherent") return InterferenceForm::kCoherent;
  throw InvalidConfiguration("unknown interference form '" + s + "'");
}

// JSON has no infinity; the K-factor uses the strings "inf" / "-inf".
json number_or_inf(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double read_number(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw InvalidConfiguration("expected a number, got '" + s + "'");
  }
  return j.get<double>();
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void ExperimentConfig::validate() const {
  geometry.validate();
  large_scale.validate();
  if (m_values.empty()) throw InvalidConfiguration("m_values must not be empty");
  for (auto m : m_values) {
    if (m < 1) throw InvalidConfiguration("every M must be at least 1");
    if (m < geometry.ap_antennas &&
        std::find(precoders.begin(), precoders.end(), PrecoderScheme::kBiSvd) != precoders.end())
      throw InvalidConfiguration("bi-SVD precoding requires M >= N (M = " + std::to_string(m) +
                                 ", N = " + std::to_string(geometry.ap_antennas) + ")");
  }
  if (hardware.empty()) throw InvalidConfiguration("at least one hardware variant is required");
  for (const auto& hv : hardware) {
    if (hv.label.empty()) throw InvalidConfiguration("hardware variant labels must be non-empty");
    if (!(hv.kappa_ac > 0.0 && hv.kappa_ac <= 1.0) || !(hv.kappa_frt > 0.0 && hv.kappa_frt <= 1.0))
      throw InvalidConfiguration("hardware variant '" + hv.label + "': kappa must lie in (0, 1]");
  }
  if (!std::isfinite(noise_dbm)) throw InvalidConfiguration("noise_dbm must be finite");
  if (!(ue_power_w > 0.0)) throw InvalidConfiguration("ue_power_w must be positive");
  if (!(fronthaul_power_w > 0.0)) throw InvalidConfiguration("fronthaul_power_w must be positive");
  if (!ue_powers_w.empty() && static_cast<Index>(ue_powers_w.size()) != geometry.num_ues)
    throw InvalidConfiguration("ue_powers_w must have K entries");
  for (double p : ue_powers_w)
    if (!(p > 0.0)) throw InvalidConfiguration("UE powers must be positive");
  if (!fronthaul_powers_w.empty() &&
      static_cast<Index>(fronthaul_powers_w.size()) != geometry.num_aps)
    throw InvalidConfiguration("fronthaul_powers_w must have L entries");
  for (double p : fronthaul_powers_w)
    if (!(p > 0.0)) throw InvalidConfiguration("fronthaul budgets must be positive");
  if (precoders.empty()) throw InvalidConfiguration("at least one precoder scheme is required");
  if (!aware && !unaware && !centralized)
    throw InvalidConfiguration("no combiner selected");
  if (!(se_prelog > 0.0 && se_prelog <= 1.0))
    throw InvalidConfiguration("se_prelog must lie in (0, 1]");
  if (n_setups < 1 || n_realizations < 1)
    throw InvalidConfiguration("n_setups and n_realizations must be at least 1");
  if (threads < 1) throw InvalidConfiguration("threads must be at least 1");
}

double ExperimentConfig::sigma2() const { return std::pow(10.0, (noise_dbm - 30.0) / 10.0); }

RVector<double> ExperimentConfig::ue_powers() const {
  if (!ue_powers_w.empty())
    return Eigen::Map<const Eigen::VectorXd>(ue_powers_w.data(),
                                             static_cast<Index>(ue_powers_w.size()));
  return Eigen::VectorXd::Constant(geometry.num_ues, ue_power_w);
}

std::vector<double> ExperimentConfig::fronthaul_budgets() const {
  if (!fronthaul_powers_w.empty()) return fronthaul_powers_w;
  return std::vector<double>(static_cast<std::size_t>(geometry.num_aps), fronthaul_power_w);
}

ExperimentConfig scenario_preset(const std::string& name) {
  ExperimentConfig c;
  c.scenario = name;
  if (name == "fig1") {
    c.hardware = {{"perfect", 1.0, 1.0}};
    c.precoders = {PrecoderScheme::kBiSvd};
    c.m_values = {32, 64, 128};
    c.aware = true;
    c.unaware = false;
    c.centralized = true;
  } else if (name == "fig2" || name == "fig3") {
    c.hardware = {{"impaired", 0.9, 0.9}};
    c.precoders = {name == "fig2" ? PrecoderScheme::kIdentity : PrecoderScheme::kBiSvd};
    c.m_values = {128};
    c.centralized = true;
  } else if (name == "fig4") {
    c.hardware = {{"ac-only", 0.9, 1.0}, {"ac-frt", 0.9, 0.9}};
    c.precoders = {PrecoderScheme::kBiSvd};
    c.m_values = {128};
    c.centralized = false;
  } else if (name != "custom") {
    throw InvalidConfiguration("unknown scenario '" + name + "'");
  }
  return c;
}

std::string to_json(const ExperimentConfig& c) {
  json j;
  j["scenario"] = c.scenario;
  j["geometry"] = {
      {"L", c.geometry.num_aps},           {"K", c.geometry.num_ues},
      {"N", c.geometry.ap_antennas},       {"area_side_m", c.geometry.area_side},
      {"ue_height_m", c.geometry.ue_height}, {"elevation_m", c.geometry.elevation},
  };
  if (c.geometry.cpu_position) {
    const auto& p = *c.geometry.cpu_position;
    j["geometry"]["cpu_position_m"] = {p.x(), p.y(), p.z()};
  } else {
    j["geometry"]["cpu_position_m"] = nullptr;
  }
  j["M"] = c.m_values;
  const auto& ls = c.large_scale;
  j["large_scale"] = {
      {"pathloss_offset_db", ls.pathloss_offset_db},
      {"pathloss_exponent_factor", ls.pathloss_exponent_factor},
      {"shadow_std_db", ls.shadow_std_db},
      {"shadow_decorrelation_m", ls.shadow_decorrelation_m},
      {"asd_deg", ls.asd_deg},
      {"rician_k_db", number_or_inf(ls.rician_k_db)},
      {"fronthaul_shadowing", ls.fronthaul_shadowing},
      {"scattering", ls.scattering == LocalScatteringMethod::kClosedForm ? "closed_form"
                                                                          : "quadrature"},
  };
  j["hardware"] = json::array();
  for (const auto& hv : c.hardware)
    j["hardware"].push_back({{"label", hv.label}, {"kappa_ac", hv.kappa_ac}, {"kappa_frt", hv.kappa_frt}});
  j["noise_dbm"] = c.noise_dbm;
  j["sigma2_w"] = c.sigma2();
  j["bandwidth_hz"] = c.bandwidth_hz;
  j["ue_power_w"] = c.ue_power_w;
  j["fronthaul_power_w"] = c.fronthaul_power_w;
  j["ue_powers_w"] = c.ue_powers_w;
  j["fronthaul_powers_w"] = c.fronthaul_powers_w;
  j["precoders"] = json::array();
  for (auto p : c.precoders) j["precoders"].push_back(std::string(to_string(p)));
  j["combiners"] = {{"aware", c.aware}, {"unaware", c.unaware}, {"centralized", c.centralized}};
  j["interference"] = interference_name(c.interference);
  j["se_prelog"] = c.se_prelog;
  j["n_setups"] = c.n_setups;
  j["n_realizations"] = c.n_realizations;
  j["master_seed"] = c.master_seed;
  j["threads"] = c.threads;
  j["output_dir"] = c.output_dir.string();
  return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text, const ExperimentConfig& base) {
  ExperimentConfig c = base;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidConfiguration(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    read_if(j, "scenario", c.scenario);
    if (j.contains("geometry")) {
      const auto& g = j.at("geometry");
      read_if(g, "L", c.geometry.num_aps);
      read_if(g, "K", c.geometry.num_ues);
      read_if(g, "N", c.geometry.ap_antennas);
      read_if(g, "area_side_m", c.geometry.area_side);
      read_if(g, "ue_height_m", c.geometry.ue_height);
      read_if(g, "elevation_m", c.geometry.elevation);
      if (g.contains("cpu_position_m")) {
        const auto& p = g.at("cpu_position_m");
        if (p.is_null()) {
          c.geometry.cpu_position.reset();
        } else {
          const auto v = p.get<std::vector<double>>();
          if (v.size() != 3) throw InvalidConfiguration("cpu_position_m needs three coordinates");
          c.geometry.cpu_position = Eigen::Vector3d(v[0], v[1], v[2]);
        }
      }
    }
    if (j.contains("M")) c.m_values = j.at("M").get<std::vector<Index>>();
    if (j.contains("large_scale")) {
      const auto& ls = j.at("large_scale");
      read_if(ls, "pathloss_offset_db", c.large_scale.pathloss_offset_db);
      read_if(ls, "pathloss_exponent_factor", c.large_scale.pathloss_exponent_factor);
      read_if(ls, "shadow_std_db", c.large_scale.shadow_std_db);
      read_if(ls, "shadow_decorrelation_m", c.large_scale.shadow_decorrelation_m);
      read_if(ls, "asd_deg", c.large_scale.asd_deg);
      if (ls.contains("rician_k_db")) c.large_scale.rician_k_db = read_number(ls.at("rician_k_db"));
      read_if(ls, "fronthaul_shadowing", c.large_scale.fronthaul_shadowing);
      if (ls.contains("scattering")) {
        const auto m = ls.at("scattering").get<std::string>();
        if (m == "quadrature") {
          c.large_scale.scattering = LocalScatteringMethod::kQuadrature;
        } else if (m == "closed_form") {
          c.large_scale.scattering = LocalScatteringMethod::kClosedForm;
        } else {
          throw InvalidConfiguration("unknown scattering method '" + m + "'");
        }
      }
    }
    if (j.contains("hardware")) {
      c.hardware.clear();
      for (const auto& hv : j.at("hardware"))
        c.hardware.push_back({hv.at("label").get<std::string>(), hv.at("kappa_ac").get<double>(),
                              hv.at("kappa_frt").get<double>()});
    }
    read_if(j, "noise_dbm", c.noise_dbm);
    read_if(j, "bandwidth_hz", c.bandwidth_hz);
    read_if(j, "ue_power_w", c.ue_power_w);
    read_if(j, "fronthaul_power_w", c.fronthaul_power_w);
    read_if(j, "ue_powers_w", c.ue_powers_w);
    read_if(j, "fronthaul_powers_w", c.fronthaul_powers_w);
    if (j.contains("precoders")) {
      c.precoders.clear();
      for (const auto& p : j.at("precoders"))
        c.precoders.push_back(parse_precoder_scheme(p.get<std::string>()));
    }
    if (j.contains("combiners")) {
      const auto& cb = j.at("combiners");
      read_if(cb, "aware", c.aware);
      read_if(cb, "unaware", c.unaware);
      read_if(cb, "centralized", c.centralized);
    }
    if (j.contains("interference"))
      c.interference = parse_interference(j.at("interference").get<std::string>());
    read_if(j, "se_prelog", c.se_prelog);
    read_if(j, "n_setups", c.n_setups);
    read_if(j, "n_realizations", c.n_realizations);
    read_if(j, "master_seed", c.master_seed);
    read_if(j, "threads", c.threads);
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  } catch (const json::exception& e) {
    throw InvalidConfiguration(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, const ExperimentConfig& base) {
  std::ifstream in(path);
  if (!in) throw InvalidConfiguration("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str(), base);
}

}  // namespace cfaf

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cfaf/random.hpp"
#include "cfaf/types.hpp"

namespace cfaf {

struct GeometryConfig {
  Index num_aps = 16;
  Index num_ues = 8;
  Index ap_antennas = 4;
  Index cpu_antennas = 128;
  double area_side = 800.0;  // meters
  double ue_height = 1.5;    // meters
  double elevation = 10.0;   // AP and CPU height above the UEs, meters
  // Defaults to the area center at AP height.
  std::optional<Eigen::Vector3d> cpu_position;

  void validate() const;
};

struct NetworkGeometry {
  Index num_aps = 0;
  Index num_ues = 0;
  Index ap_antennas = 0;
  Index cpu_antennas = 0;
  std::vector<Eigen::Vector3d> ap_positions;
  std::vector<Eigen::Vector3d> ue_positions;
  Eigen::Vector3d cpu_position = Eigen::Vector3d::Zero();
  double area_side = 0.0;
};

/// Uniform i.i.d. AP/UE drop in [0, area_side]^2.
NetworkGeometry generate_geometry(const GeometryConfig& config, std::uint64_t seed);

/// How the local scattering correlation is evaluated.
///  kQuadrature:  exact expectation over the Gaussian angle, by numerical integration.
///  kClosedForm:  small-angle approximation, accurate only for small ASD.
enum class LocalScatteringMethod { kQuadrature, kClosedForm };

struct LargeScaleModel {
  double pathloss_offset_db = -30.5;
  double pathloss_exponent_factor = 36.7;  // dB per decade of distance
  double shadow_std_db = 4.0;
  double shadow_decorrelation_m = 9.0;
  double asd_deg = 15.0;
  double rician_k_db = 10.0;  // +inf gives a pure line-of-sight fronthaul
  bool fronthaul_shadowing = true;
  LocalScatteringMethod scattering = LocalScatteringMethod::kQuadrature;

  void validate() const;
};

/// Channel gain in dB without shadowing at the given 3-D distance.
double pathloss_db(const LargeScaleModel& model, double distance_m);

struct LargeScaleGains {
  Eigen::MatrixXd access;     // K x L, linear beta_kl
  Eigen::VectorXd fronthaul;  // L, linear beta_l of the AP-CPU link
};

/// Pathloss plus spatially correlated shadowing. Shadow terms toward one AP
/// are jointly Gaussian across UEs with correlation 2^(-delta / d_decorr);
/// fronthaul shadow terms are correlated across APs the same way and drawn
/// independently of the access terms.
LargeScaleGains large_scale_coefficients(const NetworkGeometry& geometry,
                                         const LargeScaleModel& model, std::uint64_t seed);

/// Response of a half-wavelength uniform linear array: exp(j*pi*n*sin(angle)).
CVectorXd ula_response(Index n_antennas, double angle);

/// Local scattering correlation of a half-wavelength ULA with Gaussian
/// angular spread around nominal_angle:
///   R(m,n) = beta * E{exp(j*pi*(m-n)*sin(phi + delta))},  delta ~ N(0, asd^2).
/// kClosedForm replaces the expectation by
///   exp(j*pi*(m-n)*sin(phi)) * exp(-asd^2/2 * (pi*(m-n)*cos(phi))^2).
/// The diagonal is exactly beta either way.
CMatrixXd local_scattering_correlation(
    double beta, double nominal_angle, double asd, Index n_antennas,
    LocalScatteringMethod method = LocalScatteringMethod::kQuadrature);

/// Hermitian square root of a PSD matrix. Throws FactorizationError when the
/// smallest eigenvalue is below -1e-9 * trace.
CMatrixXd psd_sqrt(const CMatrixXd& r);

/// Draws h = R^{1/2} w for every link. correlations[l][k] is R_kl; the result
/// holds one N x K matrix per AP whose column k is h_kl.
std::vector<CMatrixXd> sample_access_channels(
    const std::vector<std::vector<CMatrixXd>>& correlations, Rng& rng);

/// Statistics of one AP-to-CPU link, independent of the small-scale draw.
struct FronthaulLink {
  double beta = 0.0;
  double cpu_angle = 0.0;  // azimuth of the AP seen from the CPU
  double ap_angle = 0.0;   // azimuth of the CPU seen from the AP
  CMatrixXd cpu_corr_sqrt;  // M x M, unit diagonal correlation
  CMatrixXd ap_corr_sqrt;   // N x N, unit diagonal correlation

  Index cpu_antennas() const { return cpu_corr_sqrt.rows(); }
  Index ap_antennas() const { return ap_corr_sqrt.rows(); }
};

FronthaulLink make_fronthaul_link(
    const NetworkGeometry& geometry, Index ap, double beta, double asd_rad, Index cpu_antennas,
    LocalScatteringMethod method = LocalScatteringMethod::kQuadrature);

/// a_M(cpu_angle) a_N(ap_angle)^H, unit-modulus entries.
CMatrixXd fronthaul_los_component(const FronthaulLink& link);

/// Kronecker-correlated Rayleigh part R_M^{1/2} Z R_N^{1/2, T}, unit mean-square entries.
CMatrixXd sample_fronthaul_nlos(const FronthaulLink& link, Rng& rng);

/// G = sqrt(beta) (sqrt(k/(k+1)) LoS + sqrt(1/(k+1)) NLoS) with k the linear K-factor.
CMatrixXd sample_fronthaul_channel(const FronthaulLink& link, double rician_k_db, Rng& rng);

/// One random network setup with its second-order channel statistics.
struct Setup {
  std::uint64_t setup_id = 0;
  NetworkGeometry geometry;
  LargeScaleGains gains;
  std::vector<std::vector<CMatrixXd>> access_corr;  // [l][k], N x N
};

Setup draw_setup(const GeometryConfig& config, const LargeScaleModel& model,
                 std::uint64_t master_seed, std::uint64_t setup_id);

/// Channels of one coherence block.
struct ChannelRealization {
  std::uint64_t setup_id = 0;
  std::uint64_t realization_id = 0;
  std::vector<CMatrixXd> access;     // per AP, N x K; column k is h_kl
  std::vector<CMatrixXd> fronthaul;  // per AP, M x N

  Index num_aps() const { return static_cast<Index>(access.size()); }
  Index num_ues() const { return access.empty() ? 0 : access.front().cols(); }
  auto h(Index k, Index l) const { return access[static_cast<std::size_t>(l)].col(k); }
};

/// Fronthaul link statistics of every AP of a setup at the given CPU array size.
std::vector<FronthaulLink> fronthaul_links(const Setup& setup, const LargeScaleModel& model,
                                           Index cpu_antennas);

/// Small-scale draw for one realization. The access channels depend only on
/// (master_seed, setup_id, realization_id), so draws with links of different
/// CPU array sizes share them.
ChannelRealization draw_realization(const Setup& setup, const std::vector<FronthaulLink>& links,
                                    const LargeScaleModel& model, std::uint64_t master_seed,
                                    std::uint64_t realization_id);

}  // namespace cfaf

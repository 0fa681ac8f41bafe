#include "cfaf/channel_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace cfaf {

namespace {

constexpr double kPi = std::numbers::pi;

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double azimuth(const Eigen::Vector3d& from, const Eigen::Vector3d& to) {
  return std::atan2(to.y() - from.y(), to.x() - from.x());
}

// Jointly Gaussian N(0, std^2 C) draws with C(i,j) = 2^(-|p_i - p_j| / d).
Eigen::VectorXd correlated_shadowing(const std::vector<Eigen::Vector3d>& points, double std_db,
                                     double decorrelation, Rng& rng) {
  const auto n = static_cast<Index>(points.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  if (std_db == 0.0 || n == 0) return out;

  Eigen::MatrixXd corr(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const double delta = (points[static_cast<std::size_t>(i)].head<2>() -
                            points[static_cast<std::size_t>(j)].head<2>())
                               .norm();
      corr(i, j) = std::exp2(-delta / decorrelation);
    }
  }
  // Symmetric square root keeps co-located terminals identical even though
  // the correlation matrix is then singular.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr);
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd factor = eig.eigenvectors() * root.asDiagonal() *
                                 eig.eigenvectors().transpose();

  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd w(n);
  for (Index i = 0; i < n; ++i) w(i) = normal(rng);
  out = std_db * (factor * w);
  return out;
}

}  // namespace

void GeometryConfig::validate() const {
  if (num_aps < 1 || num_ues < 1 || ap_antennas < 1 || cpu_antennas < 1)
    throw InvalidConfiguration("geometry: L, K, N and M must all be at least 1");
  if (!(area_side > 0.0) || !std::isfinite(area_side))
    throw InvalidConfiguration("geometry: area_side must be positive");
  if (!std::isfinite(ue_height) || !std::isfinite(elevation) || elevation < 0.0)
    throw InvalidConfiguration("geometry: heights must be finite and elevation >= 0");
}

NetworkGeometry generate_geometry(const GeometryConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  std::uniform_real_distribution<double> coord(0.0, config.area_side);

  NetworkGeometry g;
  g.num_aps = config.num_aps;
  g.num_ues = config.num_ues;
  g.ap_antennas = config.ap_antennas;
  g.cpu_antennas = config.cpu_antennas;
  g.area_side = config.area_side;

  const double ap_height = config.ue_height + config.elevation;
  g.ap_positions.reserve(static_cast<std::size_t>(config.num_aps));
  for (Index l = 0; l < config.num_aps; ++l) {
    const double x = coord(rng);
    const double y = coord(rng);
    g.ap_positions.emplace_back(x, y, ap_height);
  }
  g.ue_positions.reserve(static_cast<std::size_t>(config.num_ues));
  for (Index k = 0; k < config.num_ues; ++k) {
    const double x = coord(rng);
    const double y = coord(rng);
    g.ue_positions.emplace_back(x, y, config.ue_height);
  }
  g.cpu_position = config.cpu_position.value_or(
      Eigen::Vector3d(0.5 * config.area_side, 0.5 * config.area_side, ap_height));
  return g;
}

void LargeScaleModel::validate() const {
  if (!std::isfinite(pathloss_offset_db) || !std::isfinite(pathloss_exponent_factor))
    throw InvalidConfiguration("large-scale model: pathloss constants must be finite");
  if (!(shadow_std_db >= 0.0)) throw InvalidConfiguration("large-scale model: shadow_std_db < 0");
  if (!(shadow_decorrelation_m > 0.0))
    throw InvalidConfiguration("large-scale model: decorrelation distance must be positive");
  if (!(asd_deg > 0.0)) throw InvalidConfiguration("large-scale model: asd_deg must be positive");
  if (std::isnan(rician_k_db))
    throw InvalidConfiguration("large-scale model: rician_k_db is NaN");
}

double pathloss_db(const LargeScaleModel& model, double distance_m) {
  if (!(distance_m > 0.0))
    throw InvalidGeometry("pathloss: zero distance between transmitter and receiver");
  return model.pathloss_offset_db - model.pathloss_exponent_factor * std::log10(distance_m);
}

LargeScaleGains large_scale_coefficients(const NetworkGeometry& geometry,
                                         const LargeScaleModel& model, std::uint64_t seed) {
  model.validate();
  const Index L = geometry.num_aps;
  const Index K = geometry.num_ues;
  Rng rng(seed);

  LargeScaleGains gains;
  gains.access.resize(K, L);
  for (Index l = 0; l < L; ++l) {
    const auto& ap = geometry.ap_positions[static_cast<std::size_t>(l)];
    const Eigen::VectorXd shadow = correlated_shadowing(
        geometry.ue_positions, model.shadow_std_db, model.shadow_decorrelation_m, rng);
    for (Index k = 0; k < K; ++k) {
      const double d = (geometry.ue_positions[static_cast<std::size_t>(k)] - ap).norm();
      gains.access(k, l) = db_to_linear(pathloss_db(model, d) + shadow(k));
    }
  }

  Eigen::VectorXd frt_shadow = Eigen::VectorXd::Zero(L);
  if (model.fronthaul_shadowing)
    frt_shadow = correlated_shadowing(geometry.ap_positions, model.shadow_std_db,
                                      model.shadow_decorrelation_m, rng);
  gains.fronthaul.resize(L);
  for (Index l = 0; l < L; ++l) {
    const double d = (geometry.ap_positions[static_cast<std::size_t>(l)] - geometry.cpu_position).norm();
    gains.fronthaul(l) = db_to_linear(pathloss_db(model, d) + frt_shadow(l));
  }
  return gains;
}

CVectorXd ula_response(Index n_antennas, double angle) {
  CVectorXd a(n_antennas);
  const double s = std::sin(angle);
  for (Index n = 0; n < n_antennas; ++n)
    a(n) = std::polar(1.0, kPi * static_cast<double>(n) * s);
  return a;
}

CMatrixXd local_scattering_correlation(double beta, double nominal_angle, double asd,
                                       Index n_antennas, LocalScatteringMethod method) {
  if (!(beta > 0.0)) throw InvalidParameter("local scattering: beta must be positive");
  if (!(asd > 0.0)) throw InvalidParameter("local scattering: asd must be positive");
  if (n_antennas < 1) throw InvalidParameter("local scattering: need at least one antenna");

  // Toeplitz: first column holds lags d = m - n >= 0.
  CVectorXd column(n_antennas);
  if (method == LocalScatteringMethod::kClosedForm) {
    const double s = std::sin(nominal_angle);
    const double c = std::cos(nominal_angle);
    for (Index d = 0; d < n_antennas; ++d) {
      const double dist = static_cast<double>(d);
      const double spread = kPi * dist * c;
      column(d) = std::polar(std::exp(-0.5 * asd * asd * spread * spread), kPi * dist * s);
    }
  } else {
    // Composite Simpson over +-10 ASD; the step resolves the fastest phase
    // rotation pi*(n-1) rad per rad of angle.
    const double half_range = 10.0 * asd;
    const double omega = kPi * static_cast<double>(std::max<Index>(n_antennas - 1, 1));
    Index intervals = std::max<Index>(2000, 8 * static_cast<Index>(std::ceil(2.0 * half_range * omega)));
    intervals += intervals % 2;
    const double h = 2.0 * half_range / static_cast<double>(intervals);

    // Real arithmetic in the inner loop: std::complex products go through
    // the slow NaN-aware path.
    Eigen::VectorXd re = Eigen::VectorXd::Zero(n_antennas);
    Eigen::VectorXd im = Eigen::VectorXd::Zero(n_antennas);
    double total = 0.0;
    for (Index i = 0; i <= intervals; ++i) {
      const double delta = -half_range + h * static_cast<double>(i);
      const double simpson = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      const double w = simpson * std::exp(-0.5 * delta * delta / (asd * asd));
      total += w;
      const double phase = kPi * std::sin(nominal_angle + delta);
      const double zr = std::cos(phase), zi = std::sin(phase);
      double pr = w, pi = 0.0;
      for (Index d = 0; d < n_antennas; ++d) {
        re(d) += pr;
        im(d) += pi;
        const double next = pr * zr - pi * zi;
        pi = pr * zi + pi * zr;
        pr = next;
      }
    }
    for (Index d = 0; d < n_antennas; ++d) column(d) = std::complex<double>(re(d), im(d)) / total;
  }
  column *= beta;
  column(0) = beta;

  CMatrixXd r(n_antennas, n_antennas);
  for (Index m = 0; m < n_antennas; ++m) {
    for (Index n = 0; n < n_antennas; ++n)
      r(m, n) = m >= n ? column(m - n) : std::conj(column(n - m));
  }
  return r;
}

CMatrixXd psd_sqrt(const CMatrixXd& r) {
  if (r.rows() != r.cols()) throw ShapeError("psd_sqrt: matrix must be square");
  if (r.size() == 0) return r;
  if (!r.isApprox(r.adjoint(), 1e-10) && r.norm() > 0.0)
    throw FactorizationError("psd_sqrt: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrixXd> eig(r);
  if (eig.info() != Eigen::Success) throw FactorizationError("psd_sqrt: eigensolver failed");
  const double trace = r.trace().real();
  const double floor = -1e-9 * std::max(std::abs(trace), std::numeric_limits<double>::min());
  if (eig.eigenvalues().minCoeff() < floor)
    throw FactorizationError("psd_sqrt: matrix is not positive semidefinite (min eigenvalue " +
                             std::to_string(eig.eigenvalues().minCoeff()) + ")");
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().adjoint();
}

std::vector<CMatrixXd> sample_access_channels(
    const std::vector<std::vector<CMatrixXd>>& correlations, Rng& rng) {
  std::vector<CMatrixXd> channels;
  channels.reserve(correlations.size());
  for (const auto& per_ap : correlations) {
    const Index K = static_cast<Index>(per_ap.size());
    const Index N = K > 0 ? per_ap.front().rows() : 0;
    CMatrixXd h(N, K);
    for (Index k = 0; k < K; ++k) {
      const auto& r = per_ap[static_cast<std::size_t>(k)];
      detail::require_shape(r.rows() == N && r.cols() == N, "access correlations differ in size");
      const CVectorXd w = standard_complex_normal(N, 1, rng);
      h.col(k) = psd_sqrt(r) * w;
    }
    channels.push_back(std::move(h));
  }
  return channels;
}

FronthaulLink make_fronthaul_link(const NetworkGeometry& geometry, Index ap, double beta,
                                  double asd_rad, Index cpu_antennas,
                                  LocalScatteringMethod method) {
  if (!(beta > 0.0)) throw InvalidParameter("fronthaul link: beta must be positive");
  const auto& ap_pos = geometry.ap_positions.at(static_cast<std::size_t>(ap));
  FronthaulLink link;
  link.beta = beta;
  link.cpu_angle = azimuth(geometry.cpu_position, ap_pos);
  link.ap_angle = azimuth(ap_pos, geometry.cpu_position);
  link.cpu_corr_sqrt =
      psd_sqrt(local_scattering_correlation(1.0, link.cpu_angle, asd_rad, cpu_antennas, method));
  link.ap_corr_sqrt = psd_sqrt(
      local_scattering_correlation(1.0, link.ap_angle, asd_rad, geometry.ap_antennas, method));
  return link;
}

CMatrixXd fronthaul_los_component(const FronthaulLink& link) {
  return ula_response(link.cpu_antennas(), link.cpu_angle) *
         ula_response(link.ap_antennas(), link.ap_angle).adjoint();
}

CMatrixXd sample_fronthaul_nlos(const FronthaulLink& link, Rng& rng) {
  const CMatrixXd z = standard_complex_normal(link.cpu_antennas(), link.ap_antennas(), rng);
  return link.cpu_corr_sqrt * z * link.ap_corr_sqrt.transpose();
}

CMatrixXd sample_fronthaul_channel(const FronthaulLink& link, double rician_k_db, Rng& rng) {
  if (!(link.beta > 0.0)) throw InvalidParameter("fronthaul channel: beta must be positive");
  if (std::isnan(rician_k_db)) throw InvalidParameter("fronthaul channel: K-factor is NaN");
  double los_weight = 1.0;
  double nlos_weight = 0.0;
  if (std::isfinite(rician_k_db)) {
    const double kappa = db_to_linear(rician_k_db);
    los_weight = std::sqrt(kappa / (kappa + 1.0));
    nlos_weight = std::sqrt(1.0 / (kappa + 1.0));
  } else if (rician_k_db < 0.0) {
    los_weight = 0.0;
    nlos_weight = 1.0;
  }
  // Draw unconditionally so the stream position does not depend on the K-factor.
  const CMatrixXd nlos = sample_fronthaul_nlos(link, rng);
  return std::sqrt(link.beta) * (los_weight * fronthaul_los_component(link) + nlos_weight * nlos);
}

Setup draw_setup(const GeometryConfig& config, const LargeScaleModel& model,
                 std::uint64_t master_seed, std::uint64_t setup_id) {
  model.validate();
  Setup setup;
  setup.setup_id = setup_id;
  setup.geometry =
      generate_geometry(config, derive_seed(master_seed, {setup_id, tag(Stream::kGeometry)}));
  setup.gains = large_scale_coefficients(
      setup.geometry, model, derive_seed(master_seed, {setup_id, tag(Stream::kShadowing)}));

  const double asd = model.asd_deg * kPi / 180.0;
  const auto& g = setup.geometry;
  setup.access_corr.resize(static_cast<std::size_t>(g.num_aps));
  for (Index l = 0; l < g.num_aps; ++l) {
    auto& per_ap = setup.access_corr[static_cast<std::size_t>(l)];
    per_ap.reserve(static_cast<std::size_t>(g.num_ues));
    for (Index k = 0; k < g.num_ues; ++k) {
      const double angle = azimuth(g.ap_positions[static_cast<std::size_t>(l)],
                                   g.ue_positions[static_cast<std::size_t>(k)]);
      per_ap.push_back(local_scattering_correlation(setup.gains.access(k, l), angle, asd,
                                                    g.ap_antennas, model.scattering));
    }
  }
  return setup;
}

std::vector<FronthaulLink> fronthaul_links(const Setup& setup, const LargeScaleModel& model,
                                           Index cpu_antennas) {
  if (cpu_antennas < 1) throw InvalidConfiguration("fronthaul: M must be at least 1");
  const double asd = model.asd_deg * kPi / 180.0;
  std::vector<FronthaulLink> links;
  links.reserve(static_cast<std::size_t>(setup.geometry.num_aps));
  for (Index l = 0; l < setup.geometry.num_aps; ++l)
    links.push_back(make_fronthaul_link(setup.geometry, l, setup.gains.fronthaul(l), asd,
                                        cpu_antennas, model.scattering));
  return links;
}

ChannelRealization draw_realization(const Setup& setup, const std::vector<FronthaulLink>& links,
                                    const LargeScaleModel& model, std::uint64_t master_seed,
                                    std::uint64_t realization_id) {
  detail::require_shape(static_cast<Index>(links.size()) == setup.geometry.num_aps,
                        "one fronthaul link per AP");
  ChannelRealization out;
  out.setup_id = setup.setup_id;
  out.realization_id = realization_id;

  Rng access_rng(
      derive_seed(master_seed, {setup.setup_id, realization_id, tag(Stream::kAccessFading)}));
  out.access = sample_access_channels(setup.access_corr, access_rng);

  const auto m = static_cast<std::uint64_t>(links.empty() ? 0 : links.front().cpu_antennas());
  Rng frt_rng(derive_seed(master_seed,
                          {setup.setup_id, realization_id, tag(Stream::kFronthaulFading), m}));
  out.fronthaul.reserve(links.size());
  for (const auto& link : links)
    out.fronthaul.push_back(sample_fronthaul_channel(link, model.rician_k_db, frt_rng));
  return out;
}

}  // namespace cfaf

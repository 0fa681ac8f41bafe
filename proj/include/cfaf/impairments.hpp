#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cfaf/random.hpp"
#include "cfaf/types.hpp"

namespace cfaf {

/// Hardware quality factors of the access (AP receive) and fronthaul (AP
/// transmit) chains, plus the thermal noise variance shared by both hops.
struct HardwareProfile {
  double kappa_ac = 0.9;
  double kappa_frt = 0.9;
  double sigma2 = 1.0;

  void validate() const {
    if (!(kappa_ac > 0.0 && kappa_ac <= 1.0))
      throw InvalidParameter("kappa_ac must lie in (0, 1]");
    if (!(kappa_frt > 0.0 && kappa_frt <= 1.0))
      throw InvalidParameter("kappa_frt must lie in (0, 1]");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
      throw InvalidParameter("sigma2 must be positive");
  }

  HardwareProfile ideal() const { return {1.0, 1.0, sigma2}; }
};

/// How the multiuser interference enters the CPU covariance.
///  kPerAp:    sum_i p_i sum_l b_il b_il^H (no cross-AP terms).
///  kCoherent: sum_i p_i (sum_l b_il)(sum_l b_il)^H, the covariance of the
///             physical signal where every AP forwards the same symbol s_i.
enum class InterferenceForm { kPerAp, kCoherent };

/// One channel realization seen end to end: access channels H_l (N x K),
/// fronthaul channels G_l (M x N), fronthaul precoders P_l (N x N), UE powers.
template <typename Real>
struct TwoHopSystem {
  std::vector<CMatrix<Real>> access;
  std::vector<CMatrix<Real>> fronthaul;
  std::vector<CMatrix<Real>> precoders;
  RVector<Real> powers;
  HardwareProfile hw;

  Index num_aps() const { return static_cast<Index>(access.size()); }
  Index num_ues() const { return powers.size(); }
  Index ap_antennas() const { return access.empty() ? 0 : access.front().rows(); }
  Index cpu_antennas() const { return fronthaul.empty() ? 0 : fronthaul.front().rows(); }

  void validate() const {
    hw.validate();
    const Index L = num_aps();
    const Index K = num_ues();
    const Index N = ap_antennas();
    const Index M = cpu_antennas();
    detail::require_shape(L >= 1, "at least one AP");
    detail::require_shape(static_cast<Index>(fronthaul.size()) == L &&
                              static_cast<Index>(precoders.size()) == L,
                          "one access channel, fronthaul channel and precoder per AP");
    for (Index l = 0; l < L; ++l) {
      const auto i = static_cast<std::size_t>(l);
      detail::require_shape(access[i].rows() == N && access[i].cols() == K,
                            "access channel of AP " + std::to_string(l) + " must be N x K");
      detail::require_shape(fronthaul[i].rows() == M && fronthaul[i].cols() == N,
                            "fronthaul channel of AP " + std::to_string(l) + " must be M x N");
      detail::require_shape(precoders[i].rows() == N && precoders[i].cols() == N,
                            "precoder of AP " + std::to_string(l) + " must be N x N");
    }
    for (Index k = 0; k < K; ++k)
      if (!(powers(k) > Real(0))) throw InvalidParameter("UE powers must be positive");
  }
};

/// Diagonal distortion covariances per AP, stored as their diagonals.
template <typename Real>
struct DistortionCovariances {
  std::vector<RVector<Real>> d_ac;
  std::vector<RVector<Real>> d_frt;
};

/// Effective UE-to-CPU channels b_kl = G_l P_l h_kl.
template <typename Real>
struct EffectiveChannelSet {
  std::vector<CMatrix<Real>> per_ap;  // per AP, M x K; column k is b_kl
  CMatrix<Real> sum;                  // M x K; column k is sum_l b_kl

  auto b(Index k, Index l) const { return per_ap[static_cast<std::size_t>(l)].col(k); }
  auto b_sum(Index k) const { return sum.col(k); }
};

namespace detail {

inline void require_kappa(double kappa, const char* name) {
  if (!(kappa > 0.0 && kappa <= 1.0))
    throw InvalidParameter(std::string(name) + " must lie in (0, 1]");
}

}  // namespace detail

/// diag((1 - kappa_ac) sum_k p_k h_kl h_kl^H) for one AP.
template <typename Real>
RVector<Real> access_distortion_cov(const CMatrix<Real>& channels, const RVector<Real>& powers,
                                    double kappa_ac) {
  detail::require_kappa(kappa_ac, "kappa_ac");
  detail::require_shape(channels.cols() == powers.size(), "one power per access channel column");
  return Real(1.0 - kappa_ac) * (channels.cwiseAbs2() * powers);
}

/// diag((1 - kappa_frt)(sum_k p_k P h_kl h_kl^H P^H + sigma2 P P^H)) for one AP.
template <typename Real>
RVector<Real> fronthaul_distortion_cov(const CMatrix<Real>& precoder, const CMatrix<Real>& channels,
                                       const RVector<Real>& powers, double sigma2,
                                       double kappa_frt) {
  detail::require_kappa(kappa_frt, "kappa_frt");
  detail::require_shape(precoder.cols() == channels.rows(), "precoder columns match N");
  detail::require_shape(channels.cols() == powers.size(), "one power per access channel column");
  const CMatrix<Real> ph = precoder * channels;
  const RVector<Real> signal = ph.cwiseAbs2() * powers;
  const RVector<Real> noise = Real(sigma2) * precoder.rowwise().squaredNorm();
  return Real(1.0 - kappa_frt) * (signal + noise);
}

template <typename Real>
DistortionCovariances<Real> distortion_covariances(const TwoHopSystem<Real>& sys) {
  DistortionCovariances<Real> out;
  out.d_ac.reserve(sys.access.size());
  out.d_frt.reserve(sys.access.size());
  for (std::size_t l = 0; l < sys.access.size(); ++l) {
    out.d_ac.push_back(access_distortion_cov(sys.access[l], sys.powers, sys.hw.kappa_ac));
    out.d_frt.push_back(fronthaul_distortion_cov(sys.precoders[l], sys.access[l], sys.powers,
                                                 sys.hw.sigma2, sys.hw.kappa_frt));
  }
  return out;
}

template <typename Real>
EffectiveChannelSet<Real> effective_channels(const std::vector<CMatrix<Real>>& fronthaul,
                                             const std::vector<CMatrix<Real>>& precoders,
                                             const std::vector<CMatrix<Real>>& access) {
  detail::require_shape(!access.empty() && fronthaul.size() == access.size() &&
                            precoders.size() == access.size(),
                        "one fronthaul channel and precoder per AP");
  EffectiveChannelSet<Real> out;
  out.per_ap.reserve(access.size());
  for (std::size_t l = 0; l < access.size(); ++l) {
    detail::require_shape(fronthaul[l].cols() == precoders[l].rows() &&
                              precoders[l].cols() == access[l].rows(),
                          "G_l P_l h_kl must be conformable at AP " + std::to_string(l));
    if (l > 0)
      detail::require_shape(fronthaul[l].rows() == fronthaul[0].rows() &&
                                access[l].cols() == access[0].cols(),
                            "all APs share M and K");
    out.per_ap.push_back(fronthaul[l] * (precoders[l] * access[l]));
  }
  out.sum = out.per_ap.front();
  for (std::size_t l = 1; l < out.per_ap.size(); ++l) out.sum += out.per_ap[l];
  return out;
}

template <typename Real>
EffectiveChannelSet<Real> effective_channels(const TwoHopSystem<Real>& sys) {
  return effective_channels(sys.fronthaul, sys.precoders, sys.access);
}

/// UE-independent part of the CPU covariance:
///   kappa_frt sum_l G_l P_l (D_ac,l + sigma2 I) P_l^H G_l^H
///   + sum_l G_l D_frt,l G_l^H + sigma2 I_M.
template <typename Real>
CMatrix<Real> cpu_noise_distortion_cov(const TwoHopSystem<Real>& sys,
                                       const DistortionCovariances<Real>& dist) {
  const Index M = sys.cpu_antennas();
  const Real sigma2 = Real(sys.hw.sigma2);
  CMatrix<Real> out = sigma2 * CMatrix<Real>::Identity(M, M);
  for (std::size_t l = 0; l < sys.access.size(); ++l) {
    const CMatrix<Real> gp = sys.fronthaul[l] * sys.precoders[l];
    const RVector<Real> access_diag = dist.d_ac[l].array() + sigma2;
    out.noalias() += Real(sys.hw.kappa_frt) * (gp * access_diag.asDiagonal() * gp.adjoint());
    out.noalias() +=
        sys.fronthaul[l] * dist.d_frt[l].asDiagonal() * sys.fronthaul[l].adjoint();
  }
  make_hermitian(out);
  return out;
}

/// Interference term without the kappa gain: sum_{i != k} p_i sum_l b_il b_il^H
/// (per-AP form) or sum_{i != k} p_i b_i b_i^H with b_i = sum_l b_il (coherent).
template <typename Real>
CMatrix<Real> interference_cov(Index k, const EffectiveChannelSet<Real>& eff,
                               const RVector<Real>& powers,
                               InterferenceForm form = InterferenceForm::kPerAp) {
  const Index K = eff.sum.cols();
  if (k < 0 || k >= K)
    throw InvalidParameter("UE index " + std::to_string(k) + " out of range [0, " +
                           std::to_string(K) + ")");
  // Interferer columns scaled by sqrt(p_i), gathered for one rank update.
  const Index per_ue = form == InterferenceForm::kCoherent ? 1 : static_cast<Index>(eff.per_ap.size());
  const Index M = eff.sum.rows();
  CMatrix<Real> w(M, (K - 1) * per_ue);
  Index c = 0;
  for (Index i = 0; i < K; ++i) {
    if (i == k) continue;
    const Real a = std::sqrt(powers(i));
    if (form == InterferenceForm::kCoherent) {
      w.col(c++) = a * eff.b_sum(i);
    } else {
      for (const auto& b : eff.per_ap) w.col(c++) = a * b.col(i);
    }
  }
  CMatrix<Real> out = CMatrix<Real>::Zero(M, M);
  out.template selfadjointView<Eigen::Lower>().rankUpdate(w);
  out.template triangularView<Eigen::StrictlyUpper>() = out.adjoint();
  return out;
}

/// Interference-plus-distortion covariance R_k given the UE-independent part.
template <typename Real>
CMatrix<Real> cpu_covariance(Index k, const EffectiveChannelSet<Real>& eff,
                             const CMatrix<Real>& noise_distortion, const HardwareProfile& hw,
                             const RVector<Real>& powers,
                             InterferenceForm form = InterferenceForm::kPerAp) {
  CMatrix<Real> r = noise_distortion;
  r.noalias() += Real(hw.kappa_frt * hw.kappa_ac) * interference_cov(k, eff, powers, form);
  make_hermitian(r);
  return r;
}

/// R_k assembled from scratch.
template <typename Real>
CMatrix<Real> cpu_covariance(Index k, const TwoHopSystem<Real>& sys,
                             InterferenceForm form = InterferenceForm::kPerAp) {
  sys.validate();
  const auto eff = effective_channels(sys);
  const auto dist = distortion_covariances(sys);
  return cpu_covariance(k, eff, cpu_noise_distortion_cov(sys, dist), sys.hw, sys.powers, form);
}

/// Covariance of the AP-received signal y_l:
/// kappa_ac sum_k p_k h h^H + D_ac,l + sigma2 I.
template <typename Real>
CMatrix<Real> ap_received_cov(const CMatrix<Real>& channels, const RVector<Real>& powers,
                              const HardwareProfile& hw) {
  CMatrix<Real> c = Real(hw.kappa_ac) * (channels * powers.asDiagonal() * channels.adjoint());
  c.diagonal().array() += access_distortion_cov(channels, powers, hw.kappa_ac).array() + Real(hw.sigma2);
  make_hermitian(c);
  return c;
}

/// Analytic E{||y~_l||^2} = kappa_frt tr(P_l C_y,l P_l^H) + tr(D_frt,l).
template <typename Real>
Real radiated_power(const CMatrix<Real>& precoder, const CMatrix<Real>& channels,
                    const RVector<Real>& powers, const HardwareProfile& hw) {
  const CMatrix<Real> c = ap_received_cov(channels, powers, hw);
  const Real shaped = (precoder * c * precoder.adjoint()).trace().real();
  const Real distortion =
      fronthaul_distortion_cov(precoder, channels, powers, hw.sigma2, hw.kappa_frt).sum();
  return Real(hw.kappa_frt) * shaped + distortion;
}

struct OracleOptions {
  // UE whose desired term is removed when estimating the residual covariance.
  Index target_ue = 0;
  // kPerAp makes every AP see an independent copy of each interfering
  // symbol, which reproduces the per-AP interference covariance. kCoherent
  // is the physical transmission.
  InterferenceForm interference = InterferenceForm::kCoherent;
  // Fixed combiner whose empirical SINR for target_ue is reported.
  std::optional<CVectorXd> combiner;
  // Number of raw CPU samples kept in the report.
  Index stored_samples = 256;
  Index batch = 4096;
};

/// Empirical second-order statistics of the two-hop chain.
template <typename Real>
struct OracleReport {
  Index n_symbols = 0;
  CMatrix<Real> samples;        // M x stored_samples raw CPU samples
  CMatrix<Real> cpu_cov;        // E{y y^H}
  CMatrix<Real> residual_cov;   // E{(y - desired)(y - desired)^H} for target_ue
  CVector<Real> desired_coeff;  // E{y s_k^*}; analytic sqrt(kk p_k) sum_l b_kl
  // (1-kappa_ac) diag of the sampled noiseless access signal covariance.
  std::vector<RVector<Real>> d_ac_estimate;
  // (1-kappa_frt) diag of P_l times the sampled covariance of signal plus access noise.
  std::vector<RVector<Real>> d_frt_estimate;
  // Sample variances of the distortion draws themselves.
  std::vector<RVector<Real>> d_ac_drawn;
  std::vector<RVector<Real>> d_frt_drawn;
  RVector<Real> radiated_power;  // E{||y~_l||^2} per AP
  std::optional<Real> combiner_sinr;
};

/// Symbol-level Monte-Carlo of the impaired two-hop chain. Draws Gaussian
/// unit-power symbols, distortion and noise per symbol, propagates them
/// through access reception, AF fronthaul transmission and CPU reception, and
/// accumulates sample moments.
template <typename Real>
OracleReport<Real> simulate_symbol_transmission(const TwoHopSystem<Real>& sys, Index n_symbols,
                                                std::uint64_t seed,
                                                const OracleOptions& options = {}) {
  sys.validate();
  if (n_symbols < 1) throw InvalidParameter("oracle: n_symbols must be at least 1");
  const Index L = sys.num_aps();
  const Index K = sys.num_ues();
  const Index N = sys.ap_antennas();
  const Index M = sys.cpu_antennas();
  const Index target = options.target_ue;
  if (target < 0 || target >= K) throw InvalidParameter("oracle: target_ue out of range");
  if (options.combiner)
    detail::require_shape(options.combiner->size() == M, "oracle combiner must have length M");

  const auto dist = distortion_covariances(sys);
  const auto eff = effective_channels(sys);
  const Real sigma = std::sqrt(Real(sys.hw.sigma2));
  const Real sqrt_kac = std::sqrt(Real(sys.hw.kappa_ac));
  const Real sqrt_kfrt = std::sqrt(Real(sys.hw.kappa_frt));
  const RVector<Real> amp = sys.powers.cwiseSqrt();
  const CVector<Real> desired_dir =
      std::sqrt(Real(sys.hw.kappa_ac * sys.hw.kappa_frt) * sys.powers(target)) * eff.b_sum(target);

  std::vector<RVector<Real>> d_ac_std, d_frt_std;
  for (Index l = 0; l < L; ++l) {
    d_ac_std.push_back(dist.d_ac[static_cast<std::size_t>(l)].cwiseSqrt());
    d_frt_std.push_back(dist.d_frt[static_cast<std::size_t>(l)].cwiseSqrt());
  }

  OracleReport<Real> rep;
  rep.n_symbols = n_symbols;
  const Index stored = std::min(options.stored_samples, n_symbols);
  rep.samples.resize(M, stored);
  rep.cpu_cov = CMatrix<Real>::Zero(M, M);
  rep.residual_cov = CMatrix<Real>::Zero(M, M);
  rep.desired_coeff = CVector<Real>::Zero(M);
  rep.radiated_power = RVector<Real>::Zero(L);
  std::vector<RVector<Real>> signal_power(static_cast<std::size_t>(L), RVector<Real>::Zero(N));
  std::vector<RVector<Real>> forwarded_power(static_cast<std::size_t>(L), RVector<Real>::Zero(N));
  rep.d_ac_drawn.assign(static_cast<std::size_t>(L), RVector<Real>::Zero(N));
  rep.d_frt_drawn.assign(static_cast<std::size_t>(L), RVector<Real>::Zero(N));
  Complex<Real> cross(0), target_power_sum(0);
  Real combined_power = 0;
  const bool per_ap = options.interference == InterferenceForm::kPerAp;

  Rng rng(seed);
  Index done = 0;
  while (done < n_symbols) {
    const Index B = std::min(options.batch, n_symbols - done);
    const CMatrix<Real> common = standard_complex_normal<Real>(K, B, rng);
    CMatrix<Real> y = sigma * standard_complex_normal<Real>(M, B, rng);
    for (Index l = 0; l < L; ++l) {
      const auto li = static_cast<std::size_t>(l);
      CMatrix<Real> symbols = common;
      if (per_ap) {
        symbols = standard_complex_normal<Real>(K, B, rng);
        symbols.row(target) = common.row(target);
      }
      const CMatrix<Real> clean = sys.access[li] * amp.asDiagonal() * symbols;
      const CMatrix<Real> eta_ac =
          d_ac_std[li].asDiagonal() * standard_complex_normal<Real>(N, B, rng);
      const CMatrix<Real> n_ac = sigma * standard_complex_normal<Real>(N, B, rng);
      const CMatrix<Real> y_ap = sqrt_kac * clean + eta_ac + n_ac;
      const CMatrix<Real> eta_frt =
          d_frt_std[li].asDiagonal() * standard_complex_normal<Real>(N, B, rng);
      const CMatrix<Real> y_tx = sqrt_kfrt * (sys.precoders[li] * y_ap) + eta_frt;
      y.noalias() += sys.fronthaul[li] * y_tx;

      signal_power[li] += clean.cwiseAbs2().rowwise().sum();
      forwarded_power[li] += (sys.precoders[li] * (clean + n_ac)).cwiseAbs2().rowwise().sum();
      rep.d_ac_drawn[li] += eta_ac.cwiseAbs2().rowwise().sum();
      rep.d_frt_drawn[li] += eta_frt.cwiseAbs2().rowwise().sum();
      rep.radiated_power(l) += y_tx.cwiseAbs2().sum();
    }

    const auto s_target = common.row(target);
    rep.cpu_cov.noalias() += y * y.adjoint();
    rep.desired_coeff.noalias() += y * s_target.adjoint();
    const CMatrix<Real> residual = y - desired_dir * s_target;
    rep.residual_cov.noalias() += residual * residual.adjoint();
    if (options.combiner) {
      const CVector<Real> v = options.combiner->template cast<Complex<Real>>();
      const auto shat = (v.adjoint() * y).eval();
      cross += (shat * s_target.adjoint())(0, 0);
      combined_power += shat.squaredNorm();
      target_power_sum += s_target.squaredNorm();
    }
    if (done < stored) {
      const Index keep = std::min(stored - done, B);
      rep.samples.middleCols(done, keep) = y.leftCols(keep);
    }
    done += B;
  }

  const Real inv = Real(1) / static_cast<Real>(n_symbols);
  rep.cpu_cov *= inv;
  rep.residual_cov *= inv;
  rep.desired_coeff *= inv;
  rep.radiated_power *= inv;
  make_hermitian(rep.cpu_cov);
  make_hermitian(rep.residual_cov);
  for (Index l = 0; l < L; ++l) {
    const auto li = static_cast<std::size_t>(l);
    rep.d_ac_estimate.push_back(Real(1.0 - sys.hw.kappa_ac) * inv * signal_power[li]);
    rep.d_frt_estimate.push_back(Real(1.0 - sys.hw.kappa_frt) * inv * forwarded_power[li]);
    rep.d_ac_drawn[li] *= inv;
    rep.d_frt_drawn[li] *= inv;
  }
  if (options.combiner) {
    // Project the combiner output onto the target symbol; the remainder is
    // interference, distortion and noise.
    const Real s_power = target_power_sum.real();
    const Complex<Real> coeff = cross / s_power;
    const Real signal = std::norm(coeff) * s_power;
    rep.combiner_sinr = signal / (combined_power - signal);
  }
  return rep;
}

}  // namespace cfaf

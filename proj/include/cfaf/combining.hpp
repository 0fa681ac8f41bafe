#pragma once

#include <atomic>
#include <cmath>
#include <iostream>
#include <string>
#include <string_view>
#include <vector>

#include "cfaf/impairments.hpp"
#include "cfaf/types.hpp"

namespace cfaf {

enum class CombinerKind { kAware, kUnaware, kCentralized };

inline std::string_view to_string(CombinerKind k) {
  switch (k) {
    case CombinerKind::kAware: return "aware";
    case CombinerKind::kUnaware: return "unaware";
    case CombinerKind::kCentralized: return "centralized";
  }
  return "?";
}

template <typename Real>
struct CombinerReport {
  CVector<Real> v;  // unit norm; empty for the centralized benchmark
  Real sinr = 0;
  Real se = 0;
  CombinerKind kind = CombinerKind::kAware;
  Index ue = 0;
};

/// Condition numbers above this emit a one-time warning on stderr.
inline constexpr double kConditionWarning = 1e12;

namespace detail {

inline void warn_ill_conditioned(double condition) {
  static std::atomic<bool> warned{false};
  if (!warned.exchange(true))
    std::cerr << "warning: ill-conditioned covariance in combiner solve (condition estimate "
              << condition << ")\n";
}

}  // namespace detail

/// Solves R x = b for Hermitian positive definite R by Cholesky.
template <typename Real, typename Derived>
CVector<Real> hermitian_pd_solve(const CMatrix<Real>& r, const Eigen::MatrixBase<Derived>& b) {
  detail::require_shape(r.rows() == r.cols() && r.rows() == b.rows(),
                        "Hermitian solve needs a square matrix matching the right-hand side");
  Eigen::LLT<CMatrix<Real>> llt(r);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<CMatrix<Real>> eig(r, Eigen::EigenvaluesOnly);
    const auto ev = eig.eigenvalues();
    throw NumericalError("Cholesky factorization failed; eigenvalue range [" +
                         std::to_string(static_cast<double>(ev.minCoeff())) + ", " +
                         std::to_string(static_cast<double>(ev.maxCoeff())) + "]");
  }
  const double rcond = static_cast<double>(llt.rcond());
  if (!(rcond > 0.0) || 1.0 / rcond > kConditionWarning)
    detail::warn_ill_conditioned(rcond > 0.0 ? 1.0 / rcond : INFINITY);
  return llt.solve(b.template cast<Complex<Real>>());
}

/// kappa_frt kappa_ac p_k |v^H sum_l b_kl|^2 / (v^H R_k v).
template <typename Real, typename Derived>
Real sinr_of_combiner(const Eigen::MatrixBase<Derived>& v, Index k,
                      const EffectiveChannelSet<Real>& eff, const CMatrix<Real>& r_k,
                      const HardwareProfile& hw, const RVector<Real>& powers) {
  detail::require_shape(v.size() == r_k.rows(), "combiner length must equal M");
  if (!(v.norm() > Real(0))) throw InvalidParameter("combiner must be nonzero");
  const Complex<Real> gain = v.dot(eff.b_sum(k));  // v^H b
  const Real numerator = Real(hw.kappa_frt * hw.kappa_ac) * powers(k) * std::norm(gain);
  const Real denominator = v.dot(r_k * v).real();
  return numerator / denominator;
}

/// Unit-norm R_k^{-1} sum_l b_kl.
template <typename Real>
CVector<Real> optimal_combiner(Index k, const EffectiveChannelSet<Real>& eff,
                               const CMatrix<Real>& r_k) {
  CVector<Real> v = hermitian_pd_solve<Real>(r_k, eff.b_sum(k));
  const Real n = v.norm();
  if (n > Real(0)) v /= n;
  return v;
}

/// kappa_frt kappa_ac p_k b^H R_k^{-1} b with b = sum_l b_kl.
template <typename Real>
Real max_sinr(Index k, const EffectiveChannelSet<Real>& eff, const CMatrix<Real>& r_k,
              const HardwareProfile& hw, const RVector<Real>& powers) {
  const auto b = eff.b_sum(k);
  const CVector<Real> x = hermitian_pd_solve<Real>(r_k, b);
  return Real(hw.kappa_frt * hw.kappa_ac) * powers(k) * b.dot(x).real();
}

/// CPU covariance assembled as if the hardware were ideal (kappa = 1): no
/// distortion terms, forwarded and CPU noise kept.
template <typename Real>
CMatrix<Real> ideal_hardware_cpu_covariance(Index k, const TwoHopSystem<Real>& sys,
                                            const EffectiveChannelSet<Real>& eff,
                                            InterferenceForm form = InterferenceForm::kPerAp) {
  TwoHopSystem<Real> ideal = sys;
  ideal.hw = sys.hw.ideal();
  const auto dist = distortion_covariances(ideal);
  return cpu_covariance(k, eff, cpu_noise_distortion_cov(ideal, dist), ideal.hw, sys.powers,
                        form);
}

/// Combiner designed for ideal hardware. Evaluate it with the true R_k.
template <typename Real>
CVector<Real> distortion_unaware_combiner(Index k, const TwoHopSystem<Real>& sys,
                                          const EffectiveChannelSet<Real>& eff,
                                          InterferenceForm form = InterferenceForm::kPerAp) {
  return optimal_combiner(k, eff, ideal_hardware_cpu_covariance(k, sys, eff, form));
}

/// MMSE SINR of UE k on the stacked wired-fronthaul signal [y_1; ...; y_L]
/// with ideal hardware: p_k h_k^H (sum_{i != k} p_i h_i h_i^H + sigma2 I)^{-1} h_k.
template <typename Real>
Real centralized_benchmark_sinr(Index k, const std::vector<CMatrix<Real>>& access,
                                const RVector<Real>& powers, double sigma2) {
  detail::require_shape(!access.empty(), "centralized benchmark needs at least one AP");
  const Index N = access.front().rows();
  const Index K = access.front().cols();
  if (k < 0 || k >= K) throw InvalidParameter("UE index out of range");
  const Index L = static_cast<Index>(access.size());
  CMatrix<Real> stacked(L * N, K);
  for (Index l = 0; l < L; ++l) {
    const auto& h = access[static_cast<std::size_t>(l)];
    detail::require_shape(h.rows() == N && h.cols() == K, "all APs share N and K");
    stacked.middleRows(l * N, N) = h;
  }
  CMatrix<Real> r = Real(sigma2) * CMatrix<Real>::Identity(L * N, L * N);
  for (Index i = 0; i < K; ++i)
    if (i != k) r.noalias() += powers(i) * (stacked.col(i) * stacked.col(i).adjoint());
  make_hermitian(r);
  const CVector<Real> x = hermitian_pd_solve<Real>(r, stacked.col(k));
  return powers(k) * stacked.col(k).dot(x).real();
}

/// prelog * log2(1 + sinr). The default prelog is 1.
template <typename Real>
Real spectral_efficiency(Real sinr, Real prelog = Real(1)) {
  if (!(sinr >= Real(0))) throw InvalidParameter("SINR must be non-negative");
  return prelog * std::log2(Real(1) + sinr);
}

/// Aware and unaware reports for every UE of one realization.
template <typename Real>
struct CombiningResult {
  std::vector<CombinerReport<Real>> aware;
  std::vector<CombinerReport<Real>> unaware;
};

struct CombiningOptions {
  bool aware = true;
  bool unaware = true;
  InterferenceForm interference = InterferenceForm::kPerAp;
  double prelog = 1.0;
};

template <typename Real>
CombiningResult<Real> evaluate_combiners(const TwoHopSystem<Real>& sys,
                                         const CombiningOptions& options = {}) {
  sys.validate();
  const auto eff = effective_channels(sys);
  const auto dist = distortion_covariances(sys);
  const CMatrix<Real> base = cpu_noise_distortion_cov(sys, dist);

  TwoHopSystem<Real> ideal = sys;
  ideal.hw = sys.hw.ideal();
  CMatrix<Real> ideal_base;
  if (options.unaware) ideal_base = cpu_noise_distortion_cov(ideal, distortion_covariances(ideal));

  CombiningResult<Real> out;
  const Real prelog = Real(options.prelog);
  for (Index k = 0; k < sys.num_ues(); ++k) {
    // The interference term is shared by the true and the ideal-hardware covariance.
    const CMatrix<Real> interference = interference_cov(k, eff, sys.powers, options.interference);
    CMatrix<Real> r_k = base;
    r_k.noalias() += Real(sys.hw.kappa_frt * sys.hw.kappa_ac) * interference;
    make_hermitian(r_k);
    if (options.aware) {
      CombinerReport<Real> rep;
      rep.kind = CombinerKind::kAware;
      rep.ue = k;
      rep.v = optimal_combiner(k, eff, r_k);
      rep.sinr = sinr_of_combiner(rep.v, k, eff, r_k, sys.hw, sys.powers);
      rep.se = spectral_efficiency(rep.sinr, prelog);
      out.aware.push_back(std::move(rep));
    }
    if (options.unaware) {
      CMatrix<Real> r_ideal = ideal_base + interference;
      make_hermitian(r_ideal);
      CombinerReport<Real> rep;
      rep.kind = CombinerKind::kUnaware;
      rep.ue = k;
      rep.v = optimal_combiner(k, eff, r_ideal);
      rep.sinr = sinr_of_combiner(rep.v, k, eff, r_k, sys.hw, sys.powers);
      rep.se = spectral_efficiency(rep.sinr, prelog);
      out.unaware.push_back(std::move(rep));
    }
  }
  return out;
}

}  // namespace cfaf

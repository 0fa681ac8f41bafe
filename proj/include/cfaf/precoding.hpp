#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/SVD>

#include "cfaf/types.hpp"

namespace cfaf {

enum class PrecoderScheme { kIdentity, kBiSvd };

inline std::string_view to_string(PrecoderScheme s) {
  return s == PrecoderScheme::kIdentity ? "identity" : "bisvd";
}

inline PrecoderScheme parse_precoder_scheme(std::string_view name) {
  if (name == "identity") return PrecoderScheme::kIdentity;
  if (name == "bisvd" || name == "bi_svd" || name == "bi-svd") return PrecoderScheme::kBiSvd;
  throw InvalidConfiguration("unknown precoder scheme '" + std::string(name) + "'");
}

template <typename Real>
CMatrix<Real> identity_precoder(Index n) {
  if (n < 1) throw InvalidParameter("identity precoder: N must be at least 1");
  return CMatrix<Real>::Identity(n, n);
}

/// Full SVD factors with the canonical phase convention: singular values
/// descending, and each left singular vector rotated so that its largest
/// magnitude entry (first one on ties) is real positive. The paired right
/// singular vector is rotated by the same phase, so U S V^H is unchanged.
template <typename Real>
struct CanonicalSvd {
  CMatrix<Real> u;
  RVector<Real> s;
  CMatrix<Real> v;
};

template <typename Real>
CanonicalSvd<Real> canonical_svd(const CMatrix<Real>& a) {
  Eigen::JacobiSVD<CMatrix<Real>> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  CanonicalSvd<Real> out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  const Index paired = out.s.size();
  for (Index j = 0; j < out.u.cols(); ++j) {
    Index pivot = 0;
    Real best = Real(-1);
    for (Index i = 0; i < out.u.rows(); ++i) {
      const Real mag = std::abs(out.u(i, j));
      if (mag > best * (Real(1) + Real(1e-12))) {
        best = mag;
        pivot = i;
      }
    }
    if (best <= Real(0)) continue;
    const Complex<Real> rot = std::conj(out.u(pivot, j)) / best;
    out.u.col(j) *= rot;
    out.u(pivot, j) = Complex<Real>(best, Real(0));
    if (j < paired) out.v.col(j) *= rot;
  }
  // Right singular vectors without a paired left vector (wide inputs) get
  // the same convention on their own.
  for (Index j = paired; j < out.v.cols(); ++j) {
    Index pivot = 0;
    Real best = Real(-1);
    for (Index i = 0; i < out.v.rows(); ++i) {
      const Real mag = std::abs(out.v(i, j));
      if (mag > best * (Real(1) + Real(1e-12))) {
        best = mag;
        pivot = i;
      }
    }
    if (best > Real(0)) out.v.col(j) *= std::conj(out.v(pivot, j)) / best;
  }
  return out;
}

/// P = V_G U_H^H. The fronthaul channel G (M x N) must have M >= N; H is the
/// N x K access channel matrix of the AP.
template <typename Real>
CMatrix<Real> bi_svd_precoder(const CMatrix<Real>& fronthaul, const CMatrix<Real>& access) {
  detail::require_shape(fronthaul.cols() == access.rows(),
                        "bi-SVD: fronthaul columns must equal access rows (N)");
  if (fronthaul.rows() < fronthaul.cols())
    throw InvalidConfiguration("bi-SVD precoding requires M >= N");
  const auto g = canonical_svd(fronthaul);
  const auto h = canonical_svd(access);
  return g.v * h.u.adjoint();
}

/// tr(sum_k p_k P h_k h_k^H P^H + sigma2 P P^H).
template <typename Real>
Real transmit_power(const CMatrix<Real>& precoder, const CMatrix<Real>& access,
                    const RVector<Real>& powers, double sigma2) {
  detail::require_shape(precoder.cols() == access.rows(), "precoder columns must equal N");
  detail::require_shape(access.cols() == powers.size(), "one power per UE");
  const RVector<Real> per_ue = (precoder * access).colwise().squaredNorm().transpose();
  return per_ue.dot(powers) + Real(sigma2) * precoder.squaredNorm();
}

/// alpha such that transmit_power(alpha * P_bar) equals the target.
template <typename Real>
Real power_scaling(const CMatrix<Real>& p_bar, const CMatrix<Real>& access,
                   const RVector<Real>& powers, double sigma2, double target) {
  if (!(target > 0.0)) throw InvalidParameter("power scaling: target power must be positive");
  const Real base = transmit_power(p_bar, access, powers, sigma2);
  if (!(base > Real(0)))
    throw InvalidParameter("power scaling: precoder radiates no power (invalid precoder)");
  return std::sqrt(Real(target) / base);
}

template <typename Real>
struct PrecoderSet {
  PrecoderScheme scheme = PrecoderScheme::kIdentity;
  std::vector<CMatrix<Real>> p_bar;
  std::vector<Real> alpha;
  std::vector<Real> p_frt;

  CMatrix<Real> precoder(Index l) const {
    const auto i = static_cast<std::size_t>(l);
    return alpha[i] * p_bar[i];
  }

  std::vector<CMatrix<Real>> precoders() const {
    std::vector<CMatrix<Real>> out;
    out.reserve(p_bar.size());
    for (std::size_t l = 0; l < p_bar.size(); ++l) out.push_back(alpha[l] * p_bar[l]);
    return out;
  }
};

/// Builds and scales one precoder per AP. budgets holds p_frt,l per AP.
template <typename Real>
PrecoderSet<Real> build_precoders(PrecoderScheme scheme, const std::vector<CMatrix<Real>>& fronthaul,
                                  const std::vector<CMatrix<Real>>& access,
                                  const RVector<Real>& powers, double sigma2,
                                  const std::vector<double>& budgets) {
  detail::require_shape(fronthaul.size() == access.size() && budgets.size() == access.size(),
                        "one fronthaul channel and power budget per AP");
  PrecoderSet<Real> set;
  set.scheme = scheme;
  for (std::size_t l = 0; l < access.size(); ++l) {
    CMatrix<Real> p_bar = scheme == PrecoderScheme::kIdentity
                              ? identity_precoder<Real>(access[l].rows())
                              : bi_svd_precoder(fronthaul[l], access[l]);
    set.alpha.push_back(power_scaling(p_bar, access[l], powers, sigma2, budgets[l]));
    set.p_frt.push_back(Real(budgets[l]));
    set.p_bar.push_back(std::move(p_bar));
  }
  return set;
}

}  // namespace cfaf

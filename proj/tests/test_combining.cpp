#include <doctest.h>

#include "cfaf/combining.hpp"
#include "test_util.hpp"

using namespace cfaf;
using namespace cfaf::testing;

TEST_CASE("SINR is invariant to combiner scaling") {
  auto sys = random_system(3, 2, 2, 5, 0.9, 0.9, 0.5, 41);
  const auto eff = effective_channels(sys);
  const auto r = cpu_covariance(0, sys);
  Rng rng(1);
  const CVectorXd v = random_matrix(5, 1, rng);
  const double s = sinr_of_combiner(v, 0, eff, r, sys.hw, sys.powers);
  const CVectorXd scaled = std::complex<double>(-3.0, 2.0) * v;
  CHECK(rel(sinr_of_combiner(scaled, 0, eff, r, sys.hw, sys.powers), s) <= 1e-12);
  CHECK_THROWS_AS(sinr_of_combiner(CVectorXd::Zero(5), 0, eff, r, sys.hw, sys.powers),
                  InvalidParameter);
}

TEST_CASE("optimal combiner attains the closed-form maximum") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Index M = seed % 3 == 0 ? 1 : 8;
    auto sys = random_system(4, 3, 2, std::max<Index>(M, 2), 0.9, 0.85, 0.2, 900 + seed);
    if (M == 1) {
      // Single CPU antenna: every nonzero combiner is optimal.
      sys = random_system(2, 2, 1, 1, 0.9, 0.9, 0.2, 900 + seed);
    }
    const auto eff = effective_channels(sys);
    for (Index k = 0; k < sys.num_ues(); ++k) {
      const auto r = cpu_covariance(k, sys);
      const auto v = optimal_combiner(k, eff, r);
      CHECK(std::abs(v.norm() - 1.0) <= 1e-12);
      const double achieved = sinr_of_combiner(v, k, eff, r, sys.hw, sys.powers);
      CHECK(rel(achieved, max_sinr(k, eff, r, sys.hw, sys.powers)) <= 1e-9);
      Rng rng(seed * 7 + static_cast<std::uint64_t>(k));
      for (int t = 0; t < 100; ++t) {
        const CVectorXd u = random_matrix(sys.cpu_antennas(), 1, rng).normalized();
        CHECK(sinr_of_combiner(u, k, eff, r, sys.hw, sys.powers) <= achieved * (1 + 1e-12));
      }
    }
  }
}

TEST_CASE("white residual covariance makes the optimal combiner a matched filter") {
  Rng rng(2);
  EffectiveChannelSet<double> eff;
  eff.per_ap = {random_matrix(6, 2, rng)};
  eff.sum = eff.per_ap[0];
  const CMatrixXd r = 0.7 * CMatrixXd::Identity(6, 6);
  const CVectorXd v = optimal_combiner(0, eff, r);
  const CVectorXd mf = eff.b_sum(0).normalized();
  CHECK((v - mf).norm() <= 1e-12);
}

TEST_CASE("aware and unaware combiners coincide for ideal hardware") {
  auto sys = random_system(4, 3, 2, 8, 1.0, 1.0, 0.3, 12);
  const auto res = evaluate_combiners(sys);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(rel(res.unaware[k].sinr, res.aware[k].sinr) <= 1e-12);
    CHECK((res.unaware[k].v - res.aware[k].v).norm() <= 1e-9);
  }
}

TEST_CASE("unaware combiner never beats the aware one under impairments") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto sys = random_system(4, 3, 2, 8, 0.9, 0.9, 0.05, 300 + seed);
    const auto res = evaluate_combiners(sys);
    for (std::size_t k = 0; k < 3; ++k)
      CHECK(res.unaware[k].sinr <= res.aware[k].sinr * (1 + 1e-12));
  }
}

TEST_CASE("unaware combiner: re-assembled ideal covariance") {
  auto sys = random_system(3, 2, 2, 6, 0.8, 0.7, 0.4, 55);
  const auto eff = effective_channels(sys);
  // Ideal-hardware covariance built directly from the model.
  for (Index k = 0; k < 2; ++k) {
    CMatrixXd r = 0.4 * CMatrixXd::Identity(6, 6);
    for (std::size_t l = 0; l < 3; ++l) {
      const CMatrixXd gp = sys.fronthaul[l] * sys.precoders[l];
      r += 0.4 * gp * gp.adjoint();
      for (Index i = 0; i < 2; ++i)
        if (i != k) r += sys.powers(i) * eff.b(i, static_cast<Index>(l)) *
                         eff.b(i, static_cast<Index>(l)).adjoint();
    }
    const CVectorXd expected = r.llt().solve(eff.b_sum(k)).normalized();
    CHECK((distortion_unaware_combiner(k, sys, eff) - expected).norm() <= 1e-9);
  }
}

TEST_CASE("centralized benchmark") {
  SUBCASE("single UE: p ||h||^2 / sigma2") {
    Rng rng(8);
    std::vector<CMatrixXd> h{random_matrix(3, 1, rng), random_matrix(3, 1, rng)};
    const Eigen::VectorXd p = Eigen::VectorXd::Constant(1, 0.6);
    const double expected = 0.6 * (h[0].squaredNorm() + h[1].squaredNorm()) / 0.25;
    CHECK(rel(centralized_benchmark_sinr<double>(0, h, p, 0.25), expected) <= 1e-12);
  }
  SUBCASE("stacked MMSE identity") {
    Rng rng(9);
    const Index L = 4, K = 3, N = 2;
    std::vector<CMatrixXd> h;
    for (Index l = 0; l < L; ++l) h.push_back(random_matrix(N, K, rng));
    const Eigen::VectorXd p = random_powers(K, rng);
    CMatrixXd stacked(L * N, K);
    for (Index l = 0; l < L; ++l) stacked.middleRows(l * N, N) = h[static_cast<std::size_t>(l)];
    // With the total covariance C, t = p h^H C^{-1} h gives SINR = t / (1 - t).
    const CMatrixXd c = stacked * p.cast<std::complex<double>>().asDiagonal() * stacked.adjoint() +
                        0.1 * CMatrixXd::Identity(L * N, L * N);
    for (Index k = 0; k < K; ++k) {
      const double t = p(k) * stacked.col(k).dot(c.ldlt().solve(stacked.col(k))).real();
      CHECK(rel(centralized_benchmark_sinr<double>(k, h, p, 0.1), t / (1 - t)) <= 1e-9);
    }
    CHECK_THROWS_AS(centralized_benchmark_sinr<double>(K, h, p, 0.1), InvalidParameter);
  }
  SUBCASE("an ideal AF fronthaul cannot beat the wired benchmark") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto sys = random_system(4, 3, 2, 8, 1.0, 1.0, 0.1, 700 + seed);
      const auto res = evaluate_combiners(sys, {true, false, InterferenceForm::kCoherent, 1.0});
      for (Index k = 0; k < 3; ++k) {
        const double wired =
            centralized_benchmark_sinr<double>(k, sys.access, sys.powers, sys.hw.sigma2);
        CHECK(res.aware[static_cast<std::size_t>(k)].sinr <= wired * (1 + 1e-9));
      }
    }
  }
}

TEST_CASE("zero effective channel gives zero SINR") {
  EffectiveChannelSet<double> eff;
  eff.per_ap = {CMatrixXd::Zero(3, 1)};
  eff.sum = eff.per_ap[0];
  HardwareProfile hw;
  const Eigen::VectorXd p = Eigen::VectorXd::Ones(1);
  CHECK(max_sinr<double>(0, eff, CMatrixXd::Identity(3, 3), hw, p) == 0.0);
}

TEST_CASE("spectral efficiency") {
  CHECK(spectral_efficiency(0.0) == 0.0);
  CHECK(spectral_efficiency(1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(spectral_efficiency(3.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(spectral_efficiency(3.0, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(spectral_efficiency(-1e-3), InvalidParameter);
}

TEST_CASE("non positive-definite covariance raises a numerical error") {
  CMatrixXd r = CMatrixXd::Identity(2, 2);
  r(1, 1) = -1.0;
  const CVectorXd b = CVectorXd::Ones(2);
  CHECK_THROWS_AS(hermitian_pd_solve<double>(r, b), NumericalError);
}

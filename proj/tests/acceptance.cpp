// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cfaf/combining.hpp"
#include "cfaf/experiment.hpp"
#include "cfaf/results_io.hpp"
#include "test_util.hpp"

using namespace cfaf;
using namespace cfaf::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

double median_of(const std::vector<SeSample>& samples, const std::string& label) {
  const auto v = series_values(samples, label);
  if (v.empty()) throw InvalidParameter("no samples for series " + label);
  return empirical_cdf(v, label).median();
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

// Desk campaigns share the default 50 x 20 size and the default geometry.
ExperimentConfig desk(const std::string& scenario) {
  ExperimentConfig c = scenario_preset(scenario);
  c.n_setups = 50;
  c.n_realizations = 20;
  c.master_seed = 2024;
  c.threads = threads();
  return c;
}

// Fig-2/3 paired campaign: both precoders and both combiners on the same draws.
const ExperimentResult& impaired_campaign() {
  static const ExperimentResult res = [] {
    ExperimentConfig c = desk("fig3");
    c.scenario = "fig23";
    c.precoders = {PrecoderScheme::kIdentity, PrecoderScheme::kBiSvd};
    c.centralized = false;
    return run_experiment(c);
  }();
  return res;
}

const ExperimentResult& fig4_campaign() {
  static const ExperimentResult res = run_experiment(desk("fig4"));
  return res;
}

Outcome rayleigh_optimality() {
  double worst_rel = 0.0;
  std::size_t violations = 0;
  for (std::uint64_t inst = 0; inst < 100; ++inst) {
    auto sys = random_system(4, 3, 2, 16, 0.9, 0.9, 0.1, 10'000 + inst);
    const auto eff = effective_channels(sys);
    Rng rng(derive_seed(77, {inst}));
    for (Index k = 0; k < 3; ++k) {
      const auto r = cpu_covariance(k, sys);
      const auto v = optimal_combiner(k, eff, r);
      const double best = sinr_of_combiner(v, k, eff, r, sys.hw, sys.powers);
      worst_rel = std::max(worst_rel, rel(best, max_sinr(k, eff, r, sys.hw, sys.powers)));
      for (int t = 0; t < 100; ++t) {
        const CVectorXd u = random_matrix(16, 1, rng).normalized();
        if (sinr_of_combiner(u, k, eff, r, sys.hw, sys.powers) > best) ++violations;
      }
    }
  }
  return {violations == 0 && worst_rel <= 1e-9,
          "violations " + std::to_string(violations) + ", max rel gap to closed form " +
              fmt(worst_rel)};
}

Outcome oracle_agreement() {
  auto sys = random_system(2, 2, 2, 4, 0.9, 0.9, 0.5, 4242);
  const Index k = 0;
  const auto eff = effective_channels(sys);
  const auto dist = distortion_covariances(sys);
  const CMatrixXd r = cpu_covariance(k, sys, InterferenceForm::kPerAp);
  // A fixed, deliberately suboptimal combiner.
  const CVectorXd v = (eff.b_sum(k) + 0.5 * eff.b_sum(1)).normalized();
  OracleOptions opt;
  opt.target_ue = k;
  opt.interference = InterferenceForm::kPerAp;
  opt.combiner = v;
  const auto rep = simulate_symbol_transmission(sys, 1'000'000, 31337, opt);

  double e_ac = 0, e_frt = 0;
  for (std::size_t l = 0; l < 2; ++l) {
    e_ac = std::max(e_ac, frobenius_relative(rep.d_ac_estimate[l], dist.d_ac[l]));
    e_frt = std::max(e_frt, frobenius_relative(rep.d_frt_estimate[l], dist.d_frt[l]));
    e_ac = std::max(e_ac, frobenius_relative(rep.d_ac_drawn[l], dist.d_ac[l]));
    e_frt = std::max(e_frt, frobenius_relative(rep.d_frt_drawn[l], dist.d_frt[l]));
  }
  const double e_r = frobenius_relative(rep.residual_cov, r);
  const double analytic = sinr_of_combiner(v, k, eff, r, sys.hw, sys.powers);
  const double e_sinr = rel(*rep.combiner_sinr, analytic);
  const bool pass = e_ac <= 0.03 && e_frt <= 0.03 && e_r <= 0.03 && e_sinr <= 0.03;
  return {pass, "D_ac " + fmt(e_ac) + ", D_frt " + fmt(e_frt) + ", R_k " + fmt(e_r) +
                    ", SINR " + fmt(e_sinr) + " (rel errors, 1e6 symbols)"};
}

Outcome power_conservation() {
  // Analytic check on every draw of a desk campaign at M = 128.
  const ExperimentConfig c = desk("fig3");
  const auto powers = c.ue_powers();
  const auto budgets = c.fronthaul_budgets();
  HardwareProfile hw{c.hardware[0].kappa_ac, c.hardware[0].kappa_frt, c.sigma2()};
  double worst = 0.0;
  std::size_t draws = 0;
  for (std::int64_t s = 0; s < c.n_setups; ++s) {
    const auto setup = draw_setup(c.geometry, c.large_scale, c.master_seed, s);
    const auto links = fronthaul_links(setup, c.large_scale, 128);
    for (std::int64_t r = 0; r < c.n_realizations; ++r) {
      const auto ch = draw_realization(setup, links, c.large_scale, c.master_seed, r);
      for (auto scheme : {PrecoderScheme::kIdentity, PrecoderScheme::kBiSvd}) {
        const auto set = build_precoders(scheme, ch.fronthaul, ch.access, powers, hw.sigma2, budgets);
        for (Index l = 0; l < ch.num_aps(); ++l) {
          const auto li = static_cast<std::size_t>(l);
          const double e = radiated_power(set.precoder(l), ch.access[li], powers, hw);
          worst = std::max(worst, rel(e, budgets[li]));
          ++draws;
        }
      }
    }
  }
  // Empirical check with the symbol-level oracle.
  double worst_emp = 0.0;
  for (auto scheme : {PrecoderScheme::kIdentity, PrecoderScheme::kBiSvd}) {
    auto sys = random_system(3, 3, 2, 6, 0.9, 0.9, 0.2, 99, scheme, 10.0);
    const auto rep = simulate_symbol_transmission(sys, 1'000'000, 7, {});
    for (Index l = 0; l < 3; ++l) worst_emp = std::max(worst_emp, rel(rep.radiated_power(l), 10.0));
  }
  return {worst <= 1e-12 && worst_emp <= 0.01,
          "analytic max rel " + fmt(worst) + " over " + std::to_string(draws) +
              " AP draws, empirical max rel " + fmt(worst_emp)};
}

Outcome kappa_degeneration() {
  ExperimentConfig c = desk("custom");
  c.hardware = {{"ideal", 1.0, 1.0}};
  c.precoders = {PrecoderScheme::kIdentity, PrecoderScheme::kBiSvd};
  c.centralized = false;
  const auto res = run_experiment(c);
  std::map<std::tuple<std::int64_t, std::int64_t, std::int64_t, std::string>, double> aware;
  for (const auto& s : res.samples)
    if (s.combiner == "aware") aware[{s.setup_id, s.realization_id, s.ue_id, s.scheme}] = s.sinr;
  double worst = 0.0;
  std::size_t pairs = 0;
  for (const auto& s : res.samples) {
    if (s.combiner != "unaware") continue;
    worst = std::max(worst, rel(s.sinr, aware.at({s.setup_id, s.realization_id, s.ue_id, s.scheme})));
    ++pairs;
  }
  return {res.failures.empty() && pairs > 0 && worst <= 1e-12,
          "max rel difference " + fmt(worst) + " over " + std::to_string(pairs) + " pairs"};
}

Outcome aware_dominates() {
  std::size_t violations = 0, pairs = 0, failures = 0;
  for (const auto* res : {&impaired_campaign(), &fig4_campaign()}) {
    failures += res->failures.size();
    std::map<std::tuple<std::string, std::int64_t, std::int64_t, std::int64_t, std::string, std::int64_t>,
             double>
        aware;
    for (const auto& s : res->samples)
      if (s.combiner == "aware")
        aware[{s.scenario, s.setup_id, s.realization_id, s.ue_id, s.scheme, s.M}] = s.sinr;
    for (const auto& s : res->samples) {
      if (s.combiner != "unaware") continue;
      const double a = aware.at({s.scenario, s.setup_id, s.realization_id, s.ue_id, s.scheme, s.M});
      // Relative slack of 1e-12 absorbs rounding when the two combiners coincide.
      if (s.sinr > a * (1 + 1e-12)) ++violations;
      ++pairs;
    }
  }
  return {violations == 0 && failures == 0 && pairs > 0,
          std::to_string(violations) + " violations over " + std::to_string(pairs) +
              " paired samples"};
}

Outcome fig1_trend() {
  const auto res = run_experiment(desk("fig1"));
  const double wired = median_of(res.samples, "fig1|wired|centralized|0");
  std::vector<double> med;
  for (int m : {32, 64, 128})
    med.push_back(median_of(res.samples, "fig1/perfect|bisvd|aware|" + std::to_string(m)));
  int inversions = 0;
  bool small = true;
  bool gap_shrinks = true;
  for (std::size_t i = 1; i < med.size(); ++i) {
    if (med[i] < med[i - 1]) {
      ++inversions;
      small = small && (med[i - 1] - med[i]) <= 0.02 * med[i - 1];
    }
    if (wired - med[i] > wired - med[i - 1]) gap_shrinks = false;
  }
  return {res.failures.empty() && inversions <= 1 && small && gap_shrinks,
          "medians M=32/64/128: " + fmt(med[0]) + " / " + fmt(med[1]) + " / " + fmt(med[2]) +
              ", wired " + fmt(wired)};
}

Outcome fig23_trend() {
  const auto& res = impaired_campaign();
  const double id = median_of(res.samples, "fig23/impaired|identity|aware|128");
  const double sv = median_of(res.samples, "fig23/impaired|bisvd|aware|128");
  const double id_u = median_of(res.samples, "fig23/impaired|identity|unaware|128");
  const double sv_u = median_of(res.samples, "fig23/impaired|bisvd|unaware|128");
  return {res.failures.empty() && sv > id && sv_u > id_u,
          "aware median bisvd " + fmt(sv) + " vs identity " + fmt(id) + "; unaware " + fmt(sv_u) +
              " vs " + fmt(id_u)};
}

Outcome fig4_trend() {
  const auto& res = fig4_campaign();
  const double ac = median_of(res.samples, "fig4/ac-only|bisvd|aware|128");
  const double both = median_of(res.samples, "fig4/ac-frt|bisvd|aware|128");
  return {res.failures.empty() && ac > both,
          "aware median ac-only " + fmt(ac) + " vs ac-frt " + fmt(both)};
}

Outcome determinism() {
  ExperimentConfig c = desk("fig3");
  c.precoders = {PrecoderScheme::kIdentity, PrecoderScheme::kBiSvd};
  c.n_setups = 12;
  c.n_realizations = 5;
  c.threads = 1;
  const auto serial = run_experiment(c);
  c.threads = std::max(4, threads());
  const auto parallel = run_experiment(c);
  const auto dir = std::filesystem::temp_directory_path() / "cfaf_acceptance_determinism";
  std::filesystem::create_directories(dir);
  write_samples_csv(dir / "serial.csv", serial.samples);
  write_samples_csv(dir / "parallel.csv", parallel.samples);
  auto lines = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);) out.push_back(line);
    std::sort(out.begin(), out.end());
    return out;
  };
  const auto a = lines(dir / "serial.csv");
  const auto b = lines(dir / "parallel.csv");
  std::filesystem::remove_all(dir);
  return {a == b && a.size() > 1,
          std::to_string(a.size() - 1) + " rows, threads 1 vs " + std::to_string(c.threads)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"rayleigh-optimality", rayleigh_optimality},
      {"oracle-agreement", oracle_agreement},
      {"power-conservation", power_conservation},
      {"kappa-degeneration", kappa_degeneration},
      {"aware-dominates-unaware", aware_dominates},
      {"fig1-trend", fig1_trend},
      {"fig23-trend", fig23_trend},
      {"fig4-trend", fig4_trend},
      {"determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " [" << fmt(secs)
              << " s]" << std::endl;
    if (!o.pass) ++failed;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
            << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}

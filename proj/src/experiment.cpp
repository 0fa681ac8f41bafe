#include "cfaf/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <thread>
#include <tuple>

#include "cfaf/combining.hpp"

namespace cfaf {

bool sample_less(const SeSample& a, const SeSample& b) {
  return std::tie(a.scenario, a.scheme, a.combiner, a.M, a.setup_id, a.realization_id, a.ue_id) <
         std::tie(b.scenario, b.scheme, b.combiner, b.M, b.setup_id, b.realization_id, b.ue_id);
}

std::string scenario_label(const ExperimentConfig& config, const HardwareVariant& hv) {
  return config.scenario + "/" + hv.label;
}

std::vector<SeSample> evaluate_realization(const ExperimentConfig& config, const Setup& setup,
                                           const std::vector<std::vector<FronthaulLink>>& links,
                                           std::int64_t realization_id) {
  const double sigma2 = config.sigma2();
  const RVector<double> powers = config.ue_powers();
  const auto budgets = config.fronthaul_budgets();
  const auto setup_id = static_cast<std::int64_t>(setup.setup_id);
  const auto rid = static_cast<std::uint64_t>(realization_id);
  std::vector<SeSample> out;

  CombiningOptions options;
  options.aware = config.aware;
  options.unaware = config.unaware;
  options.interference = config.interference;
  options.prelog = config.se_prelog;

  for (std::size_t mi = 0; mi < links.size(); ++mi) {
    // Access channels are identical for every M; only the fronthaul differs.
    const ChannelRealization channels =
        draw_realization(setup, links[mi], config.large_scale, config.master_seed, rid);
    const auto M = static_cast<std::int64_t>(config.m_values[mi]);

    if (mi == 0 && config.centralized) {
      for (Index k = 0; k < channels.num_ues(); ++k) {
        const double sinr = centralized_benchmark_sinr(k, channels.access, powers, sigma2);
        out.push_back({config.scenario, setup_id, realization_id, static_cast<std::int64_t>(k),
                       "wired", "centralized", 0, sinr, spectral_efficiency(sinr)});
      }
    }
    if (!config.aware && !config.unaware) continue;

    for (const auto scheme : config.precoders) {
      const auto precoders = build_precoders(scheme, channels.fronthaul, channels.access, powers,
                                             sigma2, budgets);
      TwoHopSystem<double> sys{channels.access, channels.fronthaul, precoders.precoders(), powers,
                               HardwareProfile{}};
      for (const auto& hv : config.hardware) {
        sys.hw = HardwareProfile{hv.kappa_ac, hv.kappa_frt, sigma2};
        const auto result = evaluate_combiners(sys, options);
        const std::string scenario = scenario_label(config, hv);
        const std::string scheme_name(to_string(scheme));
        for (const auto* reports : {&result.aware, &result.unaware}) {
          for (const auto& r : *reports)
            out.push_back({scenario, setup_id, realization_id, static_cast<std::int64_t>(r.ue),
                           scheme_name, std::string(to_string(r.kind)), M, r.sinr, r.se});
        }
      }
    }
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto n_setups = static_cast<std::size_t>(config.n_setups);
  std::vector<std::vector<SeSample>> per_setup(n_setups);
  std::vector<std::vector<FailureRecord>> per_setup_failures(n_setups);

  auto run_setup = [&](std::size_t s) {
    const auto setup_id = static_cast<std::int64_t>(s);
    Setup setup;
    std::vector<std::vector<FronthaulLink>> links;
    try {
      setup = draw_setup(config.geometry, config.large_scale, config.master_seed, s);
      for (auto m : config.m_values) links.push_back(fronthaul_links(setup, config.large_scale, m));
    } catch (const std::exception& e) {
      per_setup_failures[s].push_back({setup_id, std::nullopt, e.what()});
      return;
    }
    for (std::int64_t r = 0; r < config.n_realizations; ++r) {
      try {
        auto samples = evaluate_realization(config, setup, links, r);
        per_setup[s].insert(per_setup[s].end(), std::make_move_iterator(samples.begin()),
                            std::make_move_iterator(samples.end()));
      } catch (const std::exception& e) {
        per_setup_failures[s].push_back({setup_id, r, e.what()});
      }
    }
  };

  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config.threads), n_setups);
  if (workers <= 1) {
    for (std::size_t s = 0; s < n_setups; ++s) run_setup(s);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t s = next++; s < n_setups; s = next++) run_setup(s);
      });
    for (auto& t : pool) t.join();
  }

  ExperimentResult result;
  for (std::size_t s = 0; s < n_setups; ++s) {
    result.samples.insert(result.samples.end(), per_setup[s].begin(), per_setup[s].end());
    result.failures.insert(result.failures.end(), per_setup_failures[s].begin(),
                           per_setup_failures[s].end());
  }
  std::sort(result.samples.begin(), result.samples.end(), sample_less);
  return result;
}

double CdfSeries::evaluate(double x) const {
  if (values.empty()) return 0.0;
  const auto it = std::upper_bound(values.begin(), values.end(), x);
  return static_cast<double>(it - values.begin()) / static_cast<double>(values.size());
}

double CdfSeries::quantile(double q) const {
  if (values.empty()) throw InvalidParameter("quantile of an empty CDF");
  if (!(q > 0.0 && q <= 1.0)) throw InvalidParameter("quantile level must lie in (0, 1]");
  const auto n = static_cast<double>(values.size());
  auto idx = static_cast<std::size_t>(std::ceil(q * n - 1e-12));
  idx = std::clamp<std::size_t>(idx, 1, values.size());
  return values[idx - 1];
}

CdfSeries empirical_cdf(std::vector<double> values, std::string label) {
  if (values.empty()) throw InvalidParameter("empirical CDF of an empty selection ('" + label + "')");
  std::sort(values.begin(), values.end());
  CdfSeries cdf;
  cdf.label = std::move(label);
  const auto n = static_cast<double>(values.size());
  cdf.levels.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    cdf.levels.push_back(static_cast<double>(i + 1) / n);
  cdf.values = std::move(values);
  return cdf;
}

std::string series_label(const SeSample& s) {
  return s.scenario + "|" + s.scheme + "|" + s.combiner + "|" + std::to_string(s.M);
}

std::vector<CdfSeries> cdfs_by_series(const std::vector<SeSample>& samples) {
  std::map<std::string, std::vector<double>> groups;
  for (const auto& s : samples) groups[series_label(s)].push_back(s.se);
  std::vector<CdfSeries> out;
  out.reserve(groups.size());
  for (auto& [label, values] : groups) out.push_back(empirical_cdf(std::move(values), label));
  return out;
}

std::vector<double> series_values(const std::vector<SeSample>& samples, const std::string& label) {
  std::vector<double> out;
  for (const auto& s : samples)
    if (series_label(s) == label) out.push_back(s.se);
  return out;
}

}  // namespace cfaf

// cfaf: Monte-Carlo campaigns for cell-free massive MIMO with an
// amplify-and-forward wireless fronthaul.
//
//   cfaf simulate --scenario fig3 --setups 50 --realizations 20 --out results/fig3

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cfaf/experiment.hpp"
#include "cfaf/results_io.hpp"

namespace {

struct SimulateArgs {
  std::string scenario = "custom";
  std::string config_path;
  std::optional<std::int64_t> setups;
  std::optional<std::int64_t> realizations;
  std::optional<std::uint64_t> seed;
  std::vector<cfaf::Index> m_values;
  std::optional<double> kappa_ac;
  std::optional<double> kappa_frt;
  std::optional<std::string> precoder;
  std::optional<std::string> combiner;
  std::optional<int> threads;
  std::optional<std::string> out;
};

cfaf::ExperimentConfig resolve(const SimulateArgs& a) {
  cfaf::ExperimentConfig c = cfaf::scenario_preset(a.scenario);
  if (!a.config_path.empty()) c = cfaf::load_config(a.config_path, c);
  // Command-line flags override the file.
  if (a.setups) c.n_setups = *a.setups;
  if (a.realizations) c.n_realizations = *a.realizations;
  if (a.seed) c.master_seed = *a.seed;
  if (!a.m_values.empty()) c.m_values = a.m_values;
  if (a.kappa_ac || a.kappa_frt) {
    cfaf::HardwareVariant hv = c.hardware.front();
    hv.kappa_ac = a.kappa_ac.value_or(hv.kappa_ac);
    hv.kappa_frt = a.kappa_frt.value_or(hv.kappa_frt);
    hv.label = "custom";
    c.hardware = {hv};
  }
  if (a.precoder) c.precoders = {cfaf::parse_precoder_scheme(*a.precoder)};
  if (a.combiner) {
    const auto& cb = *a.combiner;
    c.aware = cb == "aware" || cb == "both";
    c.unaware = cb == "unaware" || cb == "both";
  }
  if (a.threads) c.threads = *a.threads;
  if (a.out) c.output_dir = *a.out;
  c.validate();
  return c;
}

int run_simulate(const SimulateArgs& args) {
  const cfaf::ExperimentConfig config = resolve(args);
  std::cerr << "running " << config.scenario << ": " << config.n_setups << " setups x "
            << config.n_realizations << " realizations, seed " << config.master_seed << '\n';
  const auto result = cfaf::run_experiment(config);
  const auto cdfs = cfaf::cdfs_by_series(result.samples);
  const auto paths = cfaf::export_results(result.samples, cdfs, config, config.output_dir);
  std::cout << "samples: " << paths.samples.string() << '\n'
            << "cdf:     " << paths.cdf.string() << '\n'
            << "config:  " << paths.config.string() << '\n';
  for (const auto& c : cdfs)
    std::cout << "  median SE " << c.median() << "  " << c.label << '\n';

  if (!result.failures.empty()) {
    const auto log = config.output_dir / "failures.log";
    cfaf::write_failure_log(log, result.failures);
    std::cerr << result.failures.size() << " trial(s) failed; see " << log.string() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cell-free massive MIMO with an amplify-and-forward wireless fronthaul"};
  app.require_subcommand(1);

  SimulateArgs args;
  auto* sim = app.add_subcommand("simulate", "Run a Monte-Carlo SE campaign and export CSVs");
  sim->add_option("--scenario", args.scenario, "Preset")
      ->check(CLI::IsMember({"fig1", "fig2", "fig3", "fig4", "custom"}));
  sim->add_option("--config", args.config_path, "JSON config file")->check(CLI::ExistingFile);
  sim->add_option("--setups", args.setups, "Number of random setups");
  sim->add_option("--realizations", args.realizations, "Channel realizations per setup");
  sim->add_option("--seed", args.seed, "Master seed");
  sim->add_option("--M", args.m_values, "CPU antenna counts")->delimiter(',');
  sim->add_option("--kappa-ac", args.kappa_ac, "Access hardware quality factor");
  sim->add_option("--kappa-frt", args.kappa_frt, "Fronthaul hardware quality factor");
  sim->add_option("--precoder", args.precoder, "Fronthaul precoder")
      ->check(CLI::IsMember({"identity", "bisvd"}));
  sim->add_option("--combiner", args.combiner, "CPU combiner")
      ->check(CLI::IsMember({"aware", "unaware", "both"}));
  sim->add_option("--threads", args.threads, "Worker threads");
  sim->add_option("--out", args.out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    return run_simulate(args);
  } catch (const cfaf::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

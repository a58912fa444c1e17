// Command-line entry point: four experiment subcommands with reproducible,
// seeded runs and deterministic report files.
//
// Exit codes: 0 success, 2 config error, 3 dimension overflow, 4 invariant
// failure (a thrown contract violation or a false built-in check).

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qergo/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"qergo: concentration of reduced density matrices, coarse-grained "
               "macro observables, quantum ergodicity on a ball-gas chain, and "
               "pointer-measurement branch overlaps"};
  app.set_version_flag("--version", qergo::kVersion);
  app.require_subcommand(1);
  // config values live in a [subcommand] section; command-line flags win
  app.set_config("--config", "", "config file (TOML/INI) with a [subcommand] section");

  qergo::RunConfig cfg;
  std::string c_plus_text = "0.70710678118654752,0";
  std::string c_minus_text = "0.70710678118654752,0";

  const auto add_common = [&](CLI::App* sub) {
    sub->fallthrough();  // lets --config appear after the subcommand name
    sub->add_option("--seed", cfg.seed, "seed of every random stream in the run");
    sub->add_option("--out", cfg.out, "directory for the report files")
        ->capture_default_str();
    sub->add_option("--threads", cfg.threads, "worker threads (wall time only)")
        ->capture_default_str();
  };

  CLI::App* concentration = app.add_subcommand(
      "concentration", "exceedance frequencies of reduced-entry deviations vs the "
                       "sphere-concentration bounds");
  add_common(concentration);
  concentration->add_option("--n1", cfg.n1, "kept-subsystem dimension")
      ->capture_default_str();
  concentration->add_option("--n2", cfg.n2, "traced-subsystem dimension")
      ->capture_default_str();
  concentration->add_option("--trials", cfg.trials, "number of sampled states (>= 100)")
      ->capture_default_str();
  concentration
      ->add_option("--epsilons", cfg.epsilons,
                   "strictly increasing deviation grid, comma separated")
      ->delimiter(',');

  CLI::App* qet = app.add_subcommand(
      "qet", "macro-cell weight dynamics of a ball-gas chain in a mid-spectrum shell");
  add_common(qet);
  qet->add_option("--sites", cfg.model.sites, "chain length L")->capture_default_str();
  qet->add_option("--n-gas", cfg.model.n_gas, "number of gas particles")
      ->capture_default_str();
  qet->add_option("--ball-hop", cfg.model.ball_hop, "ball hopping amplitude")
      ->capture_default_str();
  qet->add_option("--gas-hop", cfg.model.gas_hop, "gas hopping amplitude")
      ->capture_default_str();
  qet->add_option("--tilt", cfg.model.tilt, "linear potential on the ball")
      ->capture_default_str();
  qet->add_option("--eta", cfg.model.seed_perturbation,
                  "diagonal disorder strength (lifts gap degeneracies)")
      ->capture_default_str();
  qet->add_option("--shell-lo", cfg.shell_lo,
                  "lower shell energy (default: middle half of the spectrum)");
  qet->add_option("--shell-hi", cfg.shell_hi, "upper shell energy (half-open)");
  qet->add_option("--t-max", cfg.t_max,
                  "evolution window (0: 100 / min occupied gap)");
  qet->add_option("--n-times", cfg.n_times, "number of sample times")
      ->capture_default_str();
  qet->add_option("--epsilon", cfg.epsilon,
                  "ergodic tolerance (0: twice the largest temporal deviation)");
  qet->add_option("--threshold", cfg.threshold,
                  "branch occupation threshold (0: half the smallest cell target)");

  CLI::App* measure = app.add_subcommand(
      "measure", "overlap of the two pointer branches of an N-spin measurement device");
  add_common(measure);
  measure->add_option("--theta", cfg.theta, "per-spin rotation angle (radians)")
      ->capture_default_str();
  measure->add_option("--n-spins", cfg.n_spins, "number of device spins")
      ->capture_default_str();
  measure->add_option("--c-plus", c_plus_text, "qubit amplitude for +, as RE or RE,IM")
      ->capture_default_str();
  measure->add_option("--c-minus", c_minus_text, "qubit amplitude for -, as RE or RE,IM")
      ->capture_default_str();

  CLI::App* schmidt = app.add_subcommand(
      "schmidt", "Schmidt spectrum of a seeded random bipartite state");
  add_common(schmidt);
  schmidt->add_option("--n1", cfg.n1, "kept-subsystem dimension")->capture_default_str();
  schmidt->add_option("--n2", cfg.n2, "traced-subsystem dimension")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);  // prints the message or the requested help text
    return rc == 0 ? 0 : static_cast<int>(qergo::ExitCode::kConfigError);
  }

  cfg.experiment = app.get_subcommands().front()->get_name();
  try {
    if (cfg.experiment == "measure") {
      cfg.c_plus = qergo::parse_complex(c_plus_text);
      cfg.c_minus = qergo::parse_complex(c_minus_text);
    }
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return static_cast<int>(qergo::ExitCode::kConfigError);
  }

  try {
    return static_cast<int>(qergo::run(cfg, std::cout));
  } catch (const qergo::dimension_overflow_error& e) {
    std::cerr << "dimension overflow: " << e.what() << "\n";
    return static_cast<int>(qergo::ExitCode::kDimensionOverflow);
  } catch (const std::exception& e) {
    std::cerr << "invariant failure: " << e.what() << "\n";
    return static_cast<int>(qergo::ExitCode::kInvariantFailure);
  }
}

// run.hpp
// Experiment orchestration: resolved run configurations, deterministic report
// serialization (one CSV table per data product plus a JSON summary) and the
// exit-code policy shared with the command-line tool.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qergo/concentration.hpp"
#include "qergo/dynamics.hpp"
#include "qergo/hilbert.hpp"
#include "qergo/macro.hpp"
#include "qergo/sampler.hpp"
#include "qergo/superposition.hpp"

namespace qergo {

inline constexpr const char* kVersion = "0.1.0";

// Process exit codes. Config errors are caught before any computation;
// invariant failures cover both thrown contract violations and summary
// checks that come out false.
enum class ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kDimensionOverflow = 3,
  kInvariantFailure = 4,
};

// 17 significant digits: enough for exact double round-trips in the tables.
inline std::string format17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// Accepts "RE" or "RE,IM".
inline Complex parse_complex(const std::string& text) {
  std::size_t comma = text.find(',');
  try {
    if (comma == std::string::npos) {
      return Complex(std::stod(text), 0.0);
    }
    return Complex(std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1)));
  } catch (const std::exception&) {
    throw std::invalid_argument("expected a complex amplitude as RE or RE,IM, got \"" +
                                text + "\"");
  }
}

// Everything that determines a run. Reports depend only on the experiment
// fields and the seed; the output directory and worker count change where
// results go and how fast they arrive, never their bytes.
struct RunConfig {
  std::string experiment;  // concentration | qet | measure | schmidt
  std::uint64_t seed = 0;
  std::string out = "run-report";
  int threads = 1;

  // concentration / schmidt
  int n1 = 4;
  int n2 = 64;
  long trials = 10000;
  std::vector<double> epsilons = {0.02, 0.05, 0.1, 0.2};

  // qet
  BallGasConfig model;
  double shell_lo = std::numeric_limits<double>::quiet_NaN();  // NaN: middle half
  double shell_hi = std::numeric_limits<double>::quiet_NaN();
  double t_max = 0.0;     // 0: 100 / (min occupied gap)
  int n_times = 400;
  double epsilon = 0.0;   // 0: 2 max_nu sigma_nu
  double threshold = 0.0; // 0: half the smallest cell target

  // measure
  double theta = 0.451;
  int n_spins = 50;
  Complex c_plus{1.0 / std::numbers::sqrt2, 0.0};
  Complex c_minus{1.0 / std::numbers::sqrt2, 0.0};

  void validate() const {
    if (experiment != "concentration" && experiment != "qet" && experiment != "measure" &&
        experiment != "schmidt") {
      throw std::invalid_argument("experiment: must be one of concentration, qet, measure, "
                                  "schmidt; got \"" + experiment + "\"");
    }
    if (threads < 1) {
      throw std::invalid_argument("--threads: must be >= 1, got " + std::to_string(threads));
    }
    if (out.empty()) {
      throw std::invalid_argument("--out: output directory must not be empty");
    }
    if (experiment == "concentration" || experiment == "schmidt") {
      if (n1 < 1 || n2 < 1) {
        throw std::invalid_argument("--n1/--n2: factor dimensions must be >= 1, got n1=" +
                                    std::to_string(n1) + " n2=" + std::to_string(n2));
      }
    }
    if (experiment == "concentration") {
      if (trials < 100) {
        throw std::invalid_argument("--trials: must be >= 100, got " + std::to_string(trials));
      }
      if (epsilons.empty()) {
        throw std::invalid_argument("--epsilons: grid must not be empty");
      }
      for (std::size_t i = 0; i < epsilons.size(); ++i) {
        if (!(epsilons[i] > 0.0) || epsilons[i] >= 2.0) {
          throw std::invalid_argument("--epsilons: entries must lie in (0, 2), got " +
                                      format17(epsilons[i]));
        }
        if (i > 0 && epsilons[i] <= epsilons[i - 1]) {
          throw std::invalid_argument("--epsilons: grid must be strictly increasing");
        }
      }
    }
    if (experiment == "qet") {
      BallGasConfig m = model;
      m.seed = seed;
      m.validate();  // field-level messages for sites, n_gas, hops, exclusion
      if (n_times < 2) {
        throw std::invalid_argument("--n-times: must be >= 2, got " + std::to_string(n_times));
      }
      if (t_max < 0.0) {
        throw std::invalid_argument("--t-max: must be > 0, or 0 to derive it from the "
                                    "minimum occupied gap");
      }
      if (epsilon < 0.0) {
        throw std::invalid_argument("--epsilon: must be > 0, or 0 to derive it from the "
                                    "temporal-deviation oracle");
      }
      if (threshold < 0.0 || threshold >= 1.0) {
        throw std::invalid_argument("--threshold: must lie in (0, 1), or 0 to use half the "
                                    "smallest cell target");
      }
      const bool lo_set = !std::isnan(shell_lo), hi_set = !std::isnan(shell_hi);
      if (lo_set != hi_set) {
        throw std::invalid_argument("--shell-lo/--shell-hi: give both bounds or neither");
      }
      if (lo_set && !(shell_lo < shell_hi)) {
        throw std::invalid_argument("--shell-lo/--shell-hi: need shell_lo < shell_hi");
      }
    }
    if (experiment == "measure") {
      if (n_spins < 1) {
        throw std::invalid_argument("--n-spins: must be >= 1, got " + std::to_string(n_spins));
      }
      if (!std::isfinite(theta)) {
        throw std::invalid_argument("--theta: must be finite");
      }
      if (std::norm(c_plus) + std::norm(c_minus) < 1e-24) {
        throw std::invalid_argument("--c-plus/--c-minus: amplitudes must not both vanish");
      }
    }
  }
};

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  f << content;
  if (!f) {
    throw std::runtime_error("short write to " + path.string());
  }
}

// Leading comment line carried by every table: artifact version plus the
// resolved experiment config (worker count and paths excluded by design, so
// report bytes depend only on what was computed).
inline std::string csv_provenance(const nlohmann::ordered_json& config) {
  std::string line = "# qergo " + std::string(kVersion);
  for (const auto& [key, value] : config.items()) {
    line += " " + key + "=";
    line += value.is_string() ? value.get<std::string>() : value.dump();
  }
  line += "\n";
  return line;
}

struct CheckList {
  std::vector<std::pair<std::string, bool>> items;

  void add(const std::string& name, bool ok) { items.emplace_back(name, ok); }

  bool all_ok() const {
    for (const auto& [name, ok] : items) {
      if (!ok) return false;
    }
    return true;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    for (const auto& [name, ok] : items) j[name] = ok;
    return j;
  }
};

inline void emit_report(const RunConfig& cfg, const std::string& table_name,
                        const std::string& table, const nlohmann::ordered_json& summary,
                        std::ostream& log) {
  const std::filesystem::path dir(cfg.out);
  std::filesystem::create_directories(dir);
  write_file(dir / table_name, table);
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  log << "reports: " << (dir / table_name).string() << ", "
      << (dir / "summary.json").string() << "\n";
  log << "threads: " << cfg.threads << " (wall-time only; reports are worker-count "
      << "independent)\n";
}

inline void log_checks(const CheckList& checks, std::ostream& log) {
  for (const auto& [name, ok] : checks.items) {
    log << "  [" << (ok ? "PASS" : "FAIL") << "] " << name << "\n";
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// concentration: exceedance frequencies of reduced-entry deviations vs the
// sphere-concentration bounds, over an epsilon grid.
// ---------------------------------------------------------------------------
inline bool run_concentration(const RunConfig& cfg, std::ostream& log) {
  if (static_cast<long>(cfg.n1) * cfg.n2 > 4096) {
    throw dimension_overflow_error(static_cast<long>(cfg.n1) * cfg.n2, 4096);
  }
  const ConcentrationReport report = run_concentration_experiment(
      cfg.n1, cfg.n2, cfg.trials, cfg.epsilons, {cfg.seed, 0u}, cfg.threads);

  nlohmann::ordered_json config;
  config["experiment"] = "concentration";
  config["n1"] = cfg.n1;
  config["n2"] = cfg.n2;
  config["trials"] = cfg.trials;
  config["seed"] = cfg.seed;
  config["epsilons"] = cfg.epsilons;

  std::ostringstream csv;
  csv << detail::csv_provenance(config);
  csv << "kind,epsilon,empirical,bound,stderr,trials,n1,n2,seed\n";
  double worst_ratio = 0.0, max_empirical = 0.0;
  bool within_bounds = true;
  for (const auto& cell : report.cells) {
    csv << to_string(cell.kind) << ',' << format17(cell.epsilon) << ','
        << format17(cell.empirical) << ',' << format17(cell.bound) << ','
        << format17(cell.stderr_est) << ',' << report.trials << ',' << report.n1 << ','
        << report.n2 << ',' << report.seed << "\n";
    max_empirical = std::max(max_empirical, cell.empirical);
    if (cell.bound < 1.0) {
      worst_ratio = std::max(worst_ratio, cell.empirical / cell.bound);
    }
    if (cell.empirical > cell.bound + 3.0 * cell.stderr_est) within_bounds = false;
  }

  detail::CheckList checks;
  checks.add("exceedances_within_bounds", within_bounds);
  if (static_cast<long>(cfg.n1) * cfg.n2 >= 256) {
    checks.add("mean_reduced_state_near_maximally_mixed", report.mean_rho1_distance <= 0.02);
  }

  nlohmann::ordered_json summary;
  summary["version"] = kVersion;
  summary["config"] = config;
  summary["metrics"] = {
      {"worst_empirical_over_bound", worst_ratio},
      {"max_empirical_frequency", max_empirical},
      {"mean_rho1_distance_to_maximally_mixed", report.mean_rho1_distance},
      {"grid_rows_per_kind", report.epsilon_grid.size()},
  };
  summary["checks"] = checks.to_json();

  log << "concentration: n1=" << cfg.n1 << " n2=" << cfg.n2 << " trials=" << cfg.trials
      << " seed=" << cfg.seed << "\n";
  log << "  worst empirical/bound ratio: " << format17(worst_ratio) << "\n";
  log << "  mean rho1 distance to I/n1:  " << format17(report.mean_rho1_distance) << "\n";
  detail::log_checks(checks, log);
  detail::emit_report(cfg, "concentration.csv", csv.str(), summary, log);
  return checks.all_ok();
}

// ---------------------------------------------------------------------------
// qet: ball-gas model, mid-spectrum shell, position-bin macro partition,
// one evolution from a state localized in the first position cell.
// ---------------------------------------------------------------------------
inline bool run_qet(const RunConfig& cfg, std::ostream& log) {
  BallGasConfig model_cfg = cfg.model;
  model_cfg.seed = cfg.seed;
  const BallGasModel model = build_ball_gas_model(model_cfg);
  const SpectralDecomposition spec = SpectralDecomposition::compute(model.hamiltonian);

  // shell: explicit energy window, or the middle half of the spectrum
  double e_lo = cfg.shell_lo, e_hi = cfg.shell_hi;
  if (std::isnan(e_lo)) {
    e_lo = spec.eigenvalues(spec.dim() / 4);
    e_hi = spec.eigenvalues(spec.dim() - spec.dim() / 4);
  }
  const EnergyShell shell = energy_shell(spec, e_lo, e_hi);

  // four position bins across the chain
  std::vector<double> edges;
  for (int k = 0; k <= 4; ++k) {
    edges.push_back(-0.5 + static_cast<double>(model_cfg.sites) * k / 4.0);
  }
  const MacroPartition partition =
      build_macro_partition(shell, model.ball_position, BandSpec::explicit_edges(edges));

  // the flat shell state: its diagonal ensemble sits exactly on the targets,
  // so the reported ergodic fraction measures pure temporal fluctuation
  const StateVector psi0 = microcanonical_state(partition);

  const double t_max =
      cfg.t_max > 0.0 ? cfg.t_max : 100.0 / min_occupied_gap(psi0, partition);
  const QetTimeSeries series =
      qet_time_series(psi0, spec, partition, uniform_time_grid(t_max, cfg.n_times),
                      cfg.threads);

  const std::vector<double> sigmas = temporal_deviations(psi0, partition);
  const std::vector<double> diag_ensemble = diagonal_ensemble_weights(psi0, partition);
  const double epsilon =
      cfg.epsilon > 0.0 ? cfg.epsilon : 2.0 * *std::max_element(sigmas.begin(), sigmas.end());
  const double threshold =
      cfg.threshold > 0.0 ? cfg.threshold : default_branch_threshold(partition);

  const double erg = ergodic_fraction(series, epsilon);
  const std::vector<double> averages = average_cell_weights(psi0, partition, t_max);
  const NondegeneracyReport degeneracy = check_nondegeneracy(spec, 1e-9);
  const QetConditionReport condition = check_qet_condition(spec, partition);

  // branch statistics over the late two-thirds-plus of the run (t > t_max/10)
  long late = 0, multi = 0;
  int count_min = static_cast<int>(partition.cells.size()), count_max = 0;
  double count_sum = 0.0;
  bool weights_in_range = true, sums_to_one = true;
  for (long i = 0; i < series.weights.rows(); ++i) {
    double row_sum = 0.0;
    int count = 0;
    for (long c = 0; c < series.weights.cols(); ++c) {
      const double w = series.weights(i, c);
      if (w < -1e-10 || w > 1.0 + 1e-10) weights_in_range = false;
      row_sum += w;
      if (w >= threshold) ++count;
    }
    if (std::abs(row_sum - 1.0) > 1e-8) sums_to_one = false;
    if (series.times[static_cast<std::size_t>(i)] > t_max / 10.0) {
      ++late;
      if (count >= 2) ++multi;
      count_min = std::min(count_min, count);
      count_max = std::max(count_max, count);
      count_sum += count;
    }
  }
  const double multi_fraction = late > 0 ? static_cast<double>(multi) / late : 0.0;

  double avg_dev = 0.0;
  for (std::size_t c = 0; c < averages.size(); ++c) {
    avg_dev = std::max(avg_dev, std::abs(averages[c] - diag_ensemble[c]));
  }

  nlohmann::ordered_json config;
  config["experiment"] = "qet";
  config["sites"] = model_cfg.sites;
  config["n_gas"] = model_cfg.n_gas;
  config["statistics"] = model_cfg.statistics == GasStatistics::kHardcore ? "hardcore"
                                                                          : "distinguishable";
  config["ball_hop"] = model_cfg.ball_hop;
  config["gas_hop"] = model_cfg.gas_hop;
  config["tilt"] = model_cfg.tilt;
  config["exclusion"] = model_cfg.exclusion;
  config["eta"] = model_cfg.seed_perturbation;
  config["seed"] = cfg.seed;
  config["shell_lo"] = e_lo;
  config["shell_hi"] = e_hi;
  config["t_max"] = t_max;
  config["n_times"] = cfg.n_times;
  config["epsilon"] = epsilon;
  config["threshold"] = threshold;
  config["initial_state"] = "microcanonical";

  std::ostringstream csv;
  csv << detail::csv_provenance(config);
  csv << "time";
  for (const auto& label : series.labels) csv << ",w_" << label;
  csv << "\n";
  for (long i = 0; i < series.weights.rows(); ++i) {
    csv << format17(series.times[static_cast<std::size_t>(i)]);
    for (long c = 0; c < series.weights.cols(); ++c) {
      csv << ',' << format17(series.weights(i, c));
    }
    csv << "\n";
  }

  detail::CheckList checks;
  checks.add("weights_within_range", weights_in_range);
  checks.add("weights_sum_to_one", sums_to_one);
  checks.add("time_average_matches_diagonal_ensemble", avg_dev <= 1e-3);

  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < partition.cells.size(); ++c) {
    cells.push_back({{"label", partition.cells[c].label},
                     {"dim", partition.cells[c].dim},
                     {"target", series.targets[c]},
                     {"diagonal_ensemble", diag_ensemble[c]},
                     {"sigma", sigmas[c]}});
  }

  nlohmann::ordered_json summary;
  summary["version"] = kVersion;
  summary["config"] = config;
  summary["metrics"] = {
      {"dimension", model.dimension()},
      {"shell_dimension", partition.D},
      {"leakage", series.leakage},
      {"min_occupied_gap", min_occupied_gap(psi0, partition)},
      {"ergodic_fraction", erg},
      {"multi_branch_fraction_late", multi_fraction},
      {"branch_count_min_late", late > 0 ? count_min : 0},
      {"branch_count_max_late", count_max},
      {"branch_count_mean_late", late > 0 ? count_sum / late : 0.0},
      {"max_time_average_deviation", avg_dev},
      {"degenerate_level_pairs", degeneracy.degenerate_levels.size()},
      {"degenerate_gap_pairs", degeneracy.degenerate_gaps.size()},
      {"nondegenerate", degeneracy.clean()},
      {"qet_condition_max_diag_deviation",
       *std::max_element(condition.max_diagonal_deviation.begin(),
                         condition.max_diagonal_deviation.end())},
      {"qet_condition_max_offdiagonal",
       *std::max_element(condition.max_offdiagonal.begin(),
                         condition.max_offdiagonal.end())},
      {"cells", cells},
  };
  summary["checks"] = checks.to_json();

  log << "qet: sites=" << model_cfg.sites << " n_gas=" << model_cfg.n_gas
      << " dim=" << model.dimension() << " D=" << partition.D << " seed=" << cfg.seed << "\n";
  log << "  ergodic fraction (epsilon=" << format17(epsilon) << "): " << format17(erg)
      << "\n";
  log << "  multi-branch fraction (t > T/10): " << format17(multi_fraction) << "\n";
  log << "  max |time avg - diagonal ensemble|: " << format17(avg_dev) << "\n";
  log << "  nondegenerate at 1e-9: " << (degeneracy.clean() ? "yes" : "no") << "\n";
  detail::log_checks(checks, log);
  detail::emit_report(cfg, "qet_timeseries.csv", csv.str(), summary, log);
  return checks.all_ok();
}

// ---------------------------------------------------------------------------
// measure: overlap of the two N-spin pointer branches as a function of N.
// ---------------------------------------------------------------------------
inline bool run_measure(const RunConfig& cfg, std::ostream& log) {
  const double joint_norm = std::sqrt(std::norm(cfg.c_plus) + std::norm(cfg.c_minus));
  PointerModel model;
  model.theta = cfg.theta;
  model.c_plus = cfg.c_plus / joint_norm;
  model.c_minus = cfg.c_minus / joint_norm;

  nlohmann::ordered_json config;
  config["experiment"] = "measure";
  config["theta"] = cfg.theta;
  config["n_spins"] = cfg.n_spins;
  config["c_plus"] = {model.c_plus.real(), model.c_plus.imag()};
  config["c_minus"] = {model.c_minus.real(), model.c_minus.imag()};
  config["seed"] = cfg.seed;

  const double per_spin = std::abs(std::cos(cfg.theta));
  std::ostringstream csv;
  csv << detail::csv_provenance(config);
  csv << "n,overlap,log_overlap\n";
  double final_overlap = 1.0, worst_closed_form_gap = 0.0, worst_slope_gap = 0.0;
  double prev_log = 0.0;
  bool log_linear_applies = per_spin > 0.0;
  for (int n = 1; n <= cfg.n_spins; ++n) {
    model.n_spins = n;
    const double overlap = pointer_measure(model).branch_overlap;
    const double log_overlap = std::log(overlap);
    csv << n << ',' << format17(overlap) << ',' << format17(log_overlap) << "\n";
    worst_closed_form_gap =
        std::max(worst_closed_form_gap, std::abs(overlap - std::pow(per_spin, n)));
    if (log_linear_applies && overlap > 0.0 && n >= 2) {
      worst_slope_gap =
          std::max(worst_slope_gap, std::abs((log_overlap - prev_log) - std::log(per_spin)));
    }
    prev_log = log_overlap;
    final_overlap = overlap;
  }

  detail::CheckList checks;
  checks.add("overlap_matches_closed_form", worst_closed_form_gap <= 1e-12);
  if (log_linear_applies && cfg.n_spins >= 2) {
    checks.add("log_overlap_linear_in_n", worst_slope_gap <= 1e-9);
  }

  nlohmann::ordered_json summary;
  summary["version"] = kVersion;
  summary["config"] = config;
  summary["metrics"] = {
      {"branch_overlap", final_overlap},
      {"per_spin_overlap", per_spin},
      {"decay_rate_per_spin", log_linear_applies ? std::log(per_spin)
                                                 : -std::numeric_limits<double>::infinity()},
      {"max_closed_form_deviation", worst_closed_form_gap},
  };
  summary["checks"] = checks.to_json();

  log << "measure: theta=" << format17(cfg.theta) << " n_spins=" << cfg.n_spins << "\n";
  log << "  branch overlap |<M+|M->|: " << format17(final_overlap) << "\n";
  log << "  per-spin overlap |cos theta|: " << format17(per_spin) << "\n";
  detail::log_checks(checks, log);
  detail::emit_report(cfg, "overlap_curve.csv", csv.str(), summary, log);
  return checks.all_ok();
}

// ---------------------------------------------------------------------------
// schmidt: Schmidt spectrum of one seeded random bipartite state, cross-read
// against the reduced-state eigenvalues.
// ---------------------------------------------------------------------------
inline bool run_schmidt(const RunConfig& cfg, std::ostream& log) {
  if (static_cast<long>(cfg.n1) * cfg.n2 > 4096) {
    throw dimension_overflow_error(static_cast<long>(cfg.n1) * cfg.n2, 4096);
  }
  const HilbertDims dims(cfg.n1, cfg.n2);
  const StateVector psi = sample_uniform_state(dims.total(), {cfg.seed, 0u});
  const SchmidtDecomposition sd = schmidt_decompose(psi, dims);
  const DensityMatrix rho1 = partial_trace(psi, dims, 1);

  Eigen::SelfAdjointEigenSolver<Matrix> es(rho1.entries(), Eigen::EigenvaluesOnly);
  std::vector<double> spectrum(es.eigenvalues().data(), es.eigenvalues().data() + cfg.n1);
  std::sort(spectrum.begin(), spectrum.end(), std::greater<double>());

  nlohmann::ordered_json config;
  config["experiment"] = "schmidt";
  config["n1"] = cfg.n1;
  config["n2"] = cfg.n2;
  config["seed"] = cfg.seed;

  std::ostringstream csv;
  csv << detail::csv_provenance(config);
  csv << "k,coefficient,squared_coefficient,rho1_eigenvalue\n";
  double sum_sq = 0.0, worst_spectrum_gap = 0.0;
  for (std::size_t k = 0; k < sd.coefficients.size(); ++k) {
    const double sq = sd.coefficients[k] * sd.coefficients[k];
    const double eig = k < spectrum.size() ? spectrum[k] : 0.0;
    csv << k << ',' << format17(sd.coefficients[k]) << ',' << format17(sq) << ','
        << format17(eig) << "\n";
    sum_sq += sq;
    worst_spectrum_gap = std::max(worst_spectrum_gap, std::abs(sq - eig));
  }
  // reduced eigenvalues beyond the Schmidt rank bound must vanish
  for (std::size_t k = sd.coefficients.size(); k < spectrum.size(); ++k) {
    worst_spectrum_gap = std::max(worst_spectrum_gap, std::abs(spectrum[k]));
  }
  const double reconstruction_gap = (sd.reconstruct() - psi.amplitudes()).norm();

  detail::CheckList checks;
  checks.add("coefficients_normalized", std::abs(sum_sq - 1.0) <= 1e-10);
  checks.add("matches_reduced_spectrum", worst_spectrum_gap <= 1e-10);
  checks.add("reconstructs_state", reconstruction_gap <= 1e-10);

  nlohmann::ordered_json summary;
  summary["version"] = kVersion;
  summary["config"] = config;
  summary["metrics"] = {
      {"entanglement_entropy_nats", von_neumann_entropy(rho1)},
      {"max_entropy_nats", std::log(static_cast<double>(std::min(cfg.n1, cfg.n2)))},
      {"schmidt_rank", sd.rank(1e-10)},
      {"purity", purity(rho1)},
      {"max_spectrum_deviation", worst_spectrum_gap},
      {"reconstruction_error", reconstruction_gap},
  };
  summary["checks"] = checks.to_json();

  log << "schmidt: n1=" << cfg.n1 << " n2=" << cfg.n2 << " seed=" << cfg.seed << "\n";
  log << "  entanglement entropy: " << format17(von_neumann_entropy(rho1)) << " nats (max "
      << format17(std::log(static_cast<double>(std::min(cfg.n1, cfg.n2)))) << ")\n";
  log << "  max |lambda_k^2 - eig_k(rho1)|: " << format17(worst_spectrum_gap) << "\n";
  detail::log_checks(checks, log);
  detail::emit_report(cfg, "schmidt_spectrum.csv", csv.str(), summary, log);
  return checks.all_ok();
}

// Dispatches a validated config. Exceptions map to the documented exit
// codes: dimension_overflow_error -> 3, anything else thrown here -> 4.
inline ExitCode run(const RunConfig& cfg, std::ostream& log) {
  bool ok = false;
  if (cfg.experiment == "concentration") {
    ok = run_concentration(cfg, log);
  } else if (cfg.experiment == "qet") {
    ok = run_qet(cfg, log);
  } else if (cfg.experiment == "measure") {
    ok = run_measure(cfg, log);
  } else if (cfg.experiment == "schmidt") {
    ok = run_schmidt(cfg, log);
  } else {
    throw std::invalid_argument("run: unknown experiment \"" + cfg.experiment + "\"");
  }
  return ok ? ExitCode::kOk : ExitCode::kInvariantFailure;
}

}  // namespace qergo

// dynamics.hpp
// Toy ball-and-gas lattice Hamiltonian, exact-diagonalization Schrödinger
// evolution, nondegeneracy checks and macro-cell time-fraction statistics.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qergo/hilbert.hpp"
#include "qergo/macro.hpp"
#include "qergo/parallel.hpp"
#include "qergo/sampler.hpp"

namespace qergo {

// Thrown when a requested basis would exceed the configured dimension cap;
// the CLI maps this to its own exit code.
class dimension_overflow_error : public std::runtime_error {
 public:
  dimension_overflow_error(std::uint64_t computed, int cap)
      : std::runtime_error("Hilbert-space dimension " + std::to_string(computed) +
                           " exceeds the configured cap " + std::to_string(cap)),
        computed_(computed),
        cap_(cap) {}

  std::uint64_t computed_dimension() const { return computed_; }
  int cap() const { return cap_; }

 private:
  std::uint64_t computed_;
  int cap_;
};

// Gas basis choice: indistinguishable hard-core particles occupy C(L, n)
// site subsets; distinguishable particles occupy L^n position tuples.
enum class GasStatistics { kHardcore, kDistinguishable };

// One heavy "ball" particle hopping on an open 1-D lattice with a linear
// tilt, plus n_gas light gas particles. Ball-gas exclusion is either a
// hard-core basis restriction (default) or a soft same-site repulsion.
struct BallGasConfig {
  int sites = 8;                    // lattice length L
  int n_gas = 1;
  double ball_hop = 0.1;            // t_B (heavy ball: t_B << t_G)
  double gas_hop = 1.0;             // t_G
  double tilt = 1e-3;               // v, potential v * (ball site index)
  bool hardcore = true;             // exclude ball-gas coincidences from the basis
  double exclusion = 0.0;           // soft repulsion U_X per coincidence (hardcore=false)
  double seed_perturbation = 1e-6;  // eta, amplitude of the random diagonal term
  std::uint64_t seed = 0;
  GasStatistics statistics = GasStatistics::kHardcore;
  int dimension_cap = 4096;

  void validate() const {
    if (sites < 1) throw std::invalid_argument("BallGasConfig: sites must be >= 1");
    if (n_gas < 0) throw std::invalid_argument("BallGasConfig: n_gas must be >= 0");
    if (exclusion < 0.0) throw std::invalid_argument("BallGasConfig: exclusion must be >= 0");
    if (hardcore && exclusion != 0.0) {
      throw std::invalid_argument("BallGasConfig: soft exclusion energy is ignored under "
                                  "hard-core exclusion; set exclusion = 0 or hardcore = false");
    }
    if (seed_perturbation < 0.0) {
      throw std::invalid_argument("BallGasConfig: seed_perturbation must be >= 0");
    }
    if (dimension_cap < 1) throw std::invalid_argument("BallGasConfig: dimension_cap must be >= 1");
    if (statistics == GasStatistics::kHardcore && n_gas > sites) {
      throw std::invalid_argument("BallGasConfig: " + std::to_string(n_gas) +
                                  " hard-core gas particles do not fit on " +
                                  std::to_string(sites) + " sites");
    }
  }
};

// One basis state: ball site plus gas configuration (sorted site subset for
// hard-core statistics, position tuple for distinguishable).
struct BallGasBasisState {
  int ball = 0;
  std::vector<int> gas;
};

namespace detail {

inline std::vector<std::vector<int>> enumerate_gas_configs(const BallGasConfig& cfg) {
  std::vector<std::vector<int>> configs;
  if (cfg.n_gas == 0) {
    configs.push_back({});
    return configs;
  }
  if (cfg.statistics == GasStatistics::kHardcore) {
    // lexicographic size-n subsets of {0..L-1}
    std::vector<int> c(static_cast<std::size_t>(cfg.n_gas));
    for (int i = 0; i < cfg.n_gas; ++i) c[static_cast<std::size_t>(i)] = i;
    while (true) {
      configs.push_back(c);
      int i = cfg.n_gas - 1;
      while (i >= 0 && c[static_cast<std::size_t>(i)] == cfg.sites - cfg.n_gas + i) --i;
      if (i < 0) break;
      ++c[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < cfg.n_gas; ++j) {
        c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
      }
    }
  } else {
    // position tuples, first particle most significant
    std::vector<int> c(static_cast<std::size_t>(cfg.n_gas), 0);
    while (true) {
      configs.push_back(c);
      int i = cfg.n_gas - 1;
      while (i >= 0 && c[static_cast<std::size_t>(i)] == cfg.sites - 1) {
        c[static_cast<std::size_t>(i)] = 0;
        --i;
      }
      if (i < 0) break;
      ++c[static_cast<std::size_t>(i)];
    }
  }
  return configs;
}

inline std::uint64_t unrestricted_dimension(const BallGasConfig& cfg) {
  std::uint64_t gas = 1;
  if (cfg.statistics == GasStatistics::kHardcore) {
    // C(L, n) via the multiplicative formula
    for (int i = 0; i < cfg.n_gas; ++i) {
      gas = gas * static_cast<std::uint64_t>(cfg.sites - i) / static_cast<std::uint64_t>(i + 1);
    }
  } else {
    for (int i = 0; i < cfg.n_gas; ++i) {
      gas *= static_cast<std::uint64_t>(cfg.sites);
      if (gas > (1ull << 40)) return gas;  // already hopeless; avoid overflow
    }
  }
  return static_cast<std::uint64_t>(cfg.sites) * gas;
}

}  // namespace detail

// The assembled model: basis, Hamiltonian and the ball-position observable.
struct BallGasModel {
  BallGasConfig config;
  std::vector<BallGasBasisState> basis;
  HermitianOperator hamiltonian;
  HermitianOperator ball_position;  // diagonal observable, value = ball site index

  int dimension() const { return static_cast<int>(basis.size()); }
};

// Builds basis and H = H_ball + H_gas + H_ball-gas: nearest-neighbor hopping
// -t_B and -t_G with open boundaries, tilt v*Q on the ball, exclusion, and an
// eta-amplitude uniform[-1,1) random diagonal drawn from the config's seed.
inline BallGasModel build_ball_gas_model(const BallGasConfig& cfg) {
  cfg.validate();
  const std::uint64_t full_dim = detail::unrestricted_dimension(cfg);
  if (full_dim > static_cast<std::uint64_t>(cfg.dimension_cap)) {
    throw dimension_overflow_error(full_dim, cfg.dimension_cap);
  }

  const std::vector<std::vector<int>> gas_configs = detail::enumerate_gas_configs(cfg);
  std::vector<BallGasBasisState> basis;
  std::map<std::pair<int, std::vector<int>>, int> index;
  for (int b = 0; b < cfg.sites; ++b) {
    for (const auto& gas : gas_configs) {
      if (cfg.hardcore &&
          std::find(gas.begin(), gas.end(), b) != gas.end()) {
        continue;  // ball-gas coincidence excluded from the basis
      }
      index[{b, gas}] = static_cast<int>(basis.size());
      basis.push_back({b, gas});
    }
  }
  const int dim = static_cast<int>(basis.size());
  if (dim == 0) {
    throw std::invalid_argument("build_ball_gas_model: exclusion leaves an empty basis");
  }

  Matrix h = Matrix::Zero(dim, dim);
  Matrix q = Matrix::Zero(dim, dim);
  RandomStream perturbation({cfg.seed, 0u});

  for (int i = 0; i < dim; ++i) {
    const auto& s = basis[static_cast<std::size_t>(i)];

    // diagonal: tilt, soft exclusion, seed perturbation
    double diag = cfg.tilt * static_cast<double>(s.ball);
    if (!cfg.hardcore && cfg.exclusion > 0.0) {
      diag += cfg.exclusion *
              static_cast<double>(std::count(s.gas.begin(), s.gas.end(), s.ball));
    }
    diag += cfg.seed_perturbation * perturbation.uniform_symmetric();
    h(i, i) = diag;
    q(i, i) = static_cast<double>(s.ball);

    // ball hops; moves into excluded configurations are simply blocked
    for (int d : {-1, +1}) {
      const int nb = s.ball + d;
      if (nb < 0 || nb >= cfg.sites) continue;
      const auto it = index.find({nb, s.gas});
      if (it == index.end()) continue;
      h(it->second, i) += -cfg.ball_hop;
    }

    // single-gas-particle hops
    for (std::size_t g = 0; g < s.gas.size(); ++g) {
      for (int d : {-1, +1}) {
        const int ns = s.gas[g] + d;
        if (ns < 0 || ns >= cfg.sites) continue;
        std::vector<int> gas = s.gas;
        gas[g] = ns;
        if (cfg.statistics == GasStatistics::kHardcore) {
          if (std::find(s.gas.begin(), s.gas.end(), ns) != s.gas.end()) continue;
          std::sort(gas.begin(), gas.end());
        }
        const auto it = index.find({s.ball, gas});
        if (it == index.end()) continue;
        h(it->second, i) += -cfg.gas_hop;
      }
    }
  }

  HermitianOperator hamiltonian(std::move(h), "energy");
  HermitianOperator position(std::move(q), "site");
  return {cfg, std::move(basis), std::move(hamiltonian), std::move(position)};
}

inline HermitianOperator build_ball_gas_hamiltonian(const BallGasConfig& cfg) {
  return build_ball_gas_model(cfg).hamiltonian;
}

// Degeneracy diagnostics. Both lists are witnesses found by adjacent scans of
// the sorted values: empty lists prove that no pair anywhere lies within tol,
// because the closest pair of a sorted list is always adjacent.
struct NondegeneracyReport {
  // (m, n): |E_m - E_n| < tol
  std::vector<std::pair<int, int>> degenerate_levels;
  // (m, n, p, q): |(E_m - E_n) - (E_p - E_q)| < tol for distinct pairs
  std::vector<std::array<int, 4>> degenerate_gaps;

  bool clean() const { return degenerate_levels.empty() && degenerate_gaps.empty(); }
};

inline NondegeneracyReport check_nondegeneracy(const SpectralDecomposition& spec, double tol) {
  NondegeneracyReport report;
  const int n = spec.dim();
  for (int i = 0; i + 1 < n; ++i) {
    if (spec.eigenvalues(i + 1) - spec.eigenvalues(i) < tol) {
      report.degenerate_levels.push_back({i + 1, i});
    }
  }

  struct Gap {
    double value;
    int m, n;
  };
  std::vector<Gap> gaps;
  gaps.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2);
  for (int m = 1; m < n; ++m) {
    for (int j = 0; j < m; ++j) {
      gaps.push_back({spec.eigenvalues(m) - spec.eigenvalues(j), m, j});
    }
  }
  std::sort(gaps.begin(), gaps.end(),
            [](const Gap& a, const Gap& b) { return a.value < b.value; });
  for (std::size_t i = 0; i + 1 < gaps.size(); ++i) {
    if (gaps[i + 1].value - gaps[i].value < tol) {
      report.degenerate_gaps.push_back({gaps[i + 1].m, gaps[i + 1].n, gaps[i].m, gaps[i].n});
    }
  }
  return report;
}

// Exact propagator in the eigenbasis: Psi(t) = sum_n e^{-i E_n t} <phi_n|Psi0> phi_n.
inline StateVector evolve(const StateVector& state0, const SpectralDecomposition& spec,
                          double t) {
  if (state0.dim() != spec.dim()) {
    throw std::invalid_argument("evolve: state dimension " + std::to_string(state0.dim()) +
                                " does not match the spectral decomposition's " +
                                std::to_string(spec.dim()));
  }
  Vector a = spec.eigenvectors.adjoint() * state0.amplitudes();
  for (int k = 0; k < a.size(); ++k) {
    a(k) *= std::exp(Complex(0.0, -spec.eigenvalues(k) * t));
  }
  return StateVector(Vector(spec.eigenvectors * a));
}

// Macro-cell weights <Psi(t)|P_nu|Psi(t)> along a time grid, with targets d_nu/D.
struct QetTimeSeries {
  std::vector<double> times;
  Eigen::MatrixXd weights;  // times.size() x cells
  std::vector<double> targets;
  std::vector<std::string> labels;
  double leakage = 0.0;  // norm lost when projecting the initial state into the shell
};

namespace detail {

// Shell-coordinate amplitudes of a parent-space state. Leakage is the
// probability weight outside the shell, 1 - |P_shell psi|^2.
inline Vector project_into_shell(const StateVector& state0, const MacroPartition& partition,
                                 double tol, double* leakage_out) {
  if (state0.dim() != partition.shell_basis.rows()) {
    throw std::invalid_argument("state dimension " + std::to_string(state0.dim()) +
                                " does not match the partition's parent dimension " +
                                std::to_string(partition.shell_basis.rows()));
  }
  Vector z = partition.shell_basis.adjoint() * state0.amplitudes();
  const double leakage = std::max(0.0, 1.0 - std::min(z.squaredNorm(), 1.0));
  if (leakage > tol) {
    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "state lies outside the energy shell: leakage weight %.3g exceeds "
                  "tolerance %.3g",
                  leakage, tol);
    throw std::invalid_argument(msg);
  }
  if (leakage_out != nullptr) *leakage_out = leakage;
  z /= z.norm();
  return z;
}

}  // namespace detail

inline constexpr double kShellLeakageTol = 1e-8;

// Evolves inside the shell (the shell basis diagonalizes H there) and records
// the weight of every macro cell at every requested time. Time points are
// independent, so extra worker threads change nothing but wall time.
inline QetTimeSeries qet_time_series(const StateVector& state0,
                                     const SpectralDecomposition& spec,
                                     const MacroPartition& partition,
                                     const std::vector<double>& times, int threads = 1) {
  if (spec.dim() != partition.shell_basis.rows()) {
    throw std::invalid_argument("qet_time_series: decomposition dimension does not match "
                                "the partition's parent dimension");
  }
  if (times.empty()) {
    throw std::invalid_argument("qet_time_series: empty time grid");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (times[i] <= times[i - 1]) {
      throw std::invalid_argument("qet_time_series: times must be strictly increasing");
    }
  }

  QetTimeSeries series;
  series.times = times;
  const int n_cells = static_cast<int>(partition.cells.size());
  series.weights.resize(static_cast<long>(times.size()), n_cells);
  for (const auto& cell : partition.cells) {
    series.targets.push_back(static_cast<double>(cell.dim) /
                             static_cast<double>(partition.D));
    series.labels.push_back(cell.label);
  }

  const Vector z0 = detail::project_into_shell(state0, partition, kShellLeakageTol,
                                               &series.leakage);
  run_chunked(static_cast<long>(times.size()), threads,
              [&](long begin, long end, long /*chunk*/) {
                Vector zt(partition.D);
                for (long i = begin; i < end; ++i) {
                  for (int k = 0; k < partition.D; ++k) {
                    zt(k) = z0(k) * std::exp(Complex(0.0, -partition.shell_energies(k) *
                                                              times[static_cast<std::size_t>(i)]));
                  }
                  for (int c = 0; c < n_cells; ++c) {
                    series.weights(i, c) =
                        (zt.adjoint() * partition.cells[static_cast<std::size_t>(c)].projector *
                         zt)(0, 0)
                            .real();
                  }
                }
              });
  return series;
}

// Fraction of sampled times at which every cell weight is epsilon-close to
// its target d_nu/D.
inline double ergodic_fraction(const QetTimeSeries& series, double epsilon) {
  if (series.times.empty()) {
    throw std::invalid_argument("ergodic_fraction: empty series");
  }
  long good = 0;
  for (long i = 0; i < series.weights.rows(); ++i) {
    double worst = 0.0;
    for (long c = 0; c < series.weights.cols(); ++c) {
      worst = std::max(worst, std::abs(series.weights(i, c) -
                                       series.targets[static_cast<std::size_t>(c)]));
    }
    if (worst <= epsilon) ++good;
  }
  return static_cast<double>(good) / static_cast<double>(series.weights.rows());
}

// Exact time average of each cell weight over [0, T], by integrating the
// phase factors: mean of e^{i Delta t} over [0, T] is (e^{i Delta T} - 1)/(i Delta T).
inline std::vector<double> average_cell_weights(const StateVector& state0,
                                                const MacroPartition& partition, double t_max) {
  if (t_max <= 0.0) {
    throw std::invalid_argument("average_cell_weights: t_max must be positive");
  }
  const Vector z = detail::project_into_shell(state0, partition, kShellLeakageTol, nullptr);
  std::vector<double> averages;
  averages.reserve(partition.cells.size());
  for (const auto& cell : partition.cells) {
    Complex acc(0.0, 0.0);
    for (int m = 0; m < partition.D; ++m) {
      for (int n = 0; n < partition.D; ++n) {
        const double delta = partition.shell_energies(m) - partition.shell_energies(n);
        Complex kernel(1.0, 0.0);
        if (std::abs(delta * t_max) > 1e-12) {
          const Complex i_delta_t(0.0, delta * t_max);
          kernel = (std::exp(i_delta_t) - 1.0) / i_delta_t;
        }
        acc += std::conj(z(m)) * z(n) * cell.projector(m, n) * kernel;
      }
    }
    averages.push_back(acc.real());
  }
  return averages;
}

// Infinite-time average of each cell weight for a non-degenerate spectrum:
// the phases dephase and only sum_n |z_n|^2 P_nn survives.
inline std::vector<double> diagonal_ensemble_weights(const StateVector& state0,
                                                     const MacroPartition& partition) {
  const Vector z = detail::project_into_shell(state0, partition, kShellLeakageTol, nullptr);
  std::vector<double> weights;
  weights.reserve(partition.cells.size());
  for (const auto& cell : partition.cells) {
    double w = 0.0;
    for (int n = 0; n < partition.D; ++n) {
      w += std::norm(z(n)) * cell.projector(n, n).real();
    }
    weights.push_back(w);
  }
  return weights;
}

// Long-run standard deviation sigma_nu of each cell weight around its
// diagonal-ensemble mean. For non-degenerate gaps the cross terms dephase
// pairwise and sigma_nu^2 = sum_{m != n} |z_m|^2 |z_n|^2 |P_mn|^2.
inline std::vector<double> temporal_deviations(const StateVector& state0,
                                               const MacroPartition& partition) {
  const Vector z = detail::project_into_shell(state0, partition, kShellLeakageTol, nullptr);
  std::vector<double> sigmas;
  sigmas.reserve(partition.cells.size());
  for (const auto& cell : partition.cells) {
    double s2 = 0.0;
    for (int m = 0; m < partition.D; ++m) {
      for (int n = 0; n < partition.D; ++n) {
        if (m == n) continue;
        s2 += std::norm(z(m)) * std::norm(z(n)) * std::norm(cell.projector(m, n));
      }
    }
    sigmas.push_back(std::sqrt(s2));
  }
  return sigmas;
}

// Diagnostic for how close the partition is to the ergodic regime: for each
// cell, max_n |<phi_n|P|phi_n> - d/D| and max_{m != n} |<phi_m|P|phi_n>|.
// In shell coordinates the phi_n are the standard basis vectors.
struct QetConditionReport {
  std::vector<std::string> labels;
  std::vector<double> max_diagonal_deviation;
  std::vector<double> max_offdiagonal;
};

inline QetConditionReport check_qet_condition(const SpectralDecomposition& spec,
                                              const MacroPartition& partition) {
  if (spec.dim() != partition.shell_basis.rows()) {
    throw std::invalid_argument("check_qet_condition: decomposition dimension does not "
                                "match the partition's parent dimension");
  }
  QetConditionReport report;
  for (const auto& cell : partition.cells) {
    const double target = static_cast<double>(cell.dim) / static_cast<double>(partition.D);
    double diag = 0.0, offdiag = 0.0;
    for (int m = 0; m < partition.D; ++m) {
      diag = std::max(diag, std::abs(cell.projector(m, m).real() - target));
      for (int n = 0; n < partition.D; ++n) {
        if (n == m) continue;
        offdiag = std::max(offdiag, std::abs(cell.projector(m, n)));
      }
    }
    report.labels.push_back(cell.label);
    report.max_diagonal_deviation.push_back(diag);
    report.max_offdiagonal.push_back(offdiag);
  }
  return report;
}

// Smallest nonzero energy gap among levels the state actually occupies
// (|z_n|^2 > cutoff); sets the dephasing time scale for "the long run".
inline double min_occupied_gap(const StateVector& state0, const MacroPartition& partition,
                               double occupancy_cutoff = 1e-12) {
  const Vector z = detail::project_into_shell(state0, partition, kShellLeakageTol, nullptr);
  std::vector<double> occupied;
  for (int n = 0; n < partition.D; ++n) {
    if (std::norm(z(n)) > occupancy_cutoff) occupied.push_back(partition.shell_energies(n));
  }
  if (occupied.size() < 2) {
    throw std::invalid_argument("min_occupied_gap: fewer than two occupied levels");
  }
  std::sort(occupied.begin(), occupied.end());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < occupied.size(); ++i) {
    const double gap = occupied[i + 1] - occupied[i];
    if (gap > 1e-12) best = std::min(best, gap);
  }
  if (!std::isfinite(best)) {
    throw std::invalid_argument("min_occupied_gap: occupied levels are all degenerate");
  }
  return best;
}

// Deterministic unit state inside one macro cell: a seeded Gaussian vector
// projected by the cell projector, mapped back to the parent space.
inline StateVector cell_localized_state(const MacroPartition& partition, int cell_index,
                                        const SeededStream& stream) {
  if (cell_index < 0 || cell_index >= static_cast<int>(partition.cells.size())) {
    throw std::invalid_argument("cell_localized_state: cell index " +
                                std::to_string(cell_index) + " out of range");
  }
  RandomStream rng(stream);
  Vector g(partition.D);
  for (int i = 0; i < partition.D; ++i) g(i) = Complex(rng.normal(), rng.normal());
  Vector in_cell = partition.cells[static_cast<std::size_t>(cell_index)].projector * g;
  const double n = in_cell.norm();
  if (n < 1e-12) {
    throw std::runtime_error("cell_localized_state: projected sample vanished");
  }
  in_cell /= n;
  return StateVector(Vector(partition.shell_basis * in_cell));
}

// Equal-weight superposition of every eigenvector in the shell. Its diagonal
// ensemble hits the targets d_nu/D exactly (the diagonal entries of a
// projector sum to its trace), which makes it the canonical reference state
// for equilibration studies: any long-time deviation from the targets is
// purely temporal fluctuation, with no static offset.
inline StateVector microcanonical_state(const MacroPartition& partition) {
  Vector flat = Vector::Constant(partition.D, Complex(1.0, 0.0));
  flat /= flat.norm();
  return StateVector(Vector(partition.shell_basis * flat));
}

// n evenly spaced times from 0 to t_max inclusive.
inline std::vector<double> uniform_time_grid(double t_max, int n) {
  if (n < 2 || t_max <= 0.0) {
    throw std::invalid_argument("uniform_time_grid: need n >= 2 and t_max > 0");
  }
  std::vector<double> times(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    times[static_cast<std::size_t>(i)] = t_max * static_cast<double>(i) /
                                         static_cast<double>(n - 1);
  }
  return times;
}

}  // namespace qergo

// concentration.hpp
// Levy-lemma concentration bounds for entries of the reduced density matrix
// of a uniformly random pure state, the analytic gradients that give the
// Lipschitz constants, and the Monte Carlo experiment that checks the
// empirical exceedance frequencies against the bounds.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "qergo/hilbert.hpp"
#include "qergo/parallel.hpp"
#include "qergo/sampler.hpp"

namespace qergo {

// Which reduced-matrix entry function the bound refers to. Diagonal entries
// deviate from their expectation 1/n1; off-diagonal entries from 0.
enum class DeviationKind { DiagonalRe, OffDiagonalRe, OffDiagonalIm };

inline const char* to_string(DeviationKind k) {
  switch (k) {
    case DeviationKind::DiagonalRe: return "diag_re";
    case DeviationKind::OffDiagonalRe: return "offdiag_re";
    case DeviationKind::OffDiagonalIm: return "offdiag_im";
  }
  return "?";
}

enum class EntryPart { Re, Im };

// delta = sqrt(pi / (4 n1 n2)) * ||f||_L, the median-to-expectation shift
// entering the expectation-form bound.
inline double levy_delta(int n1, int n2, double lipschitz_norm) {
  return std::sqrt(std::numbers::pi / (4.0 * n1 * n2)) * lipschitz_norm;
}

// Parameters of the expectation-form bound for a Lipschitz function on
// S^{2 n1 n2 - 1}. The bound applies only for epsilon > delta.
struct LevyBoundParams {
  int n1 = 1;
  int n2 = 1;
  double epsilon = 0.0;
  double lipschitz_norm = 1.0;
  double delta = 0.0;

  static LevyBoundParams make(int n1, int n2, double epsilon, double lipschitz_norm) {
    if (n1 < 1 || n2 < 1) throw std::invalid_argument("LevyBoundParams: n1, n2 must be >= 1");
    if (epsilon <= 0.0) throw std::invalid_argument("LevyBoundParams: epsilon must be > 0");
    if (lipschitz_norm <= 0.0) {
      throw std::invalid_argument("LevyBoundParams: lipschitz_norm must be > 0");
    }
    return {n1, n2, epsilon, lipschitz_norm, levy_delta(n1, n2, lipschitz_norm)};
  }
};

// P(|f - E f| >= eps) <= exp(-n1 n2 (eps - delta)^2 / ||f||_L^2), eps > delta.
inline double levy_expectation_bound(const LevyBoundParams& p) {
  if (p.epsilon <= p.delta) {
    throw std::domain_error("levy_expectation_bound: the expectation-form bound requires "
                            "epsilon > delta; got epsilon=" + std::to_string(p.epsilon) +
                            " delta=" + std::to_string(p.delta));
  }
  const double d = p.epsilon - p.delta;
  return std::exp(-(static_cast<double>(p.n1) * p.n2) * d * d /
                  (p.lipschitz_norm * p.lipschitz_norm));
}

// P(|f - m(f)| >= eps) <= exp(-n1 n2 eps^2 / ||f||_L^2), no shift; usable for
// off-diagonal entries whose median and expectation both vanish.
inline double levy_median_bound(int n1, int n2, double epsilon, double lipschitz_norm) {
  if (epsilon <= 0.0) throw std::invalid_argument("levy_median_bound: epsilon must be > 0");
  return std::exp(-(static_cast<double>(n1) * n2) * epsilon * epsilon /
                  (lipschitz_norm * lipschitz_norm));
}

// Concentration bound for one reduced-entry deviation:
//   DiagonalRe      exp(-(n1 n2 / 4) (eps - delta)^2),  delta with ||f||_L = 2
//   OffDiagonalRe   exp(-n1 n2 eps^2)                   (median form, ||f||_L = 1)
//   OffDiagonalIm   exp(-n1 n2 eps^2)
// Throws for DiagonalRe when eps <= delta (the bound form does not apply).
inline double levy_bound(DeviationKind kind, int n1, int n2, double epsilon) {
  switch (kind) {
    case DeviationKind::DiagonalRe:
      return levy_expectation_bound(LevyBoundParams::make(n1, n2, epsilon, 2.0));
    case DeviationKind::OffDiagonalRe:
    case DeviationKind::OffDiagonalIm:
      return levy_median_bound(n1, n2, epsilon, 1.0);
  }
  throw std::logic_error("levy_bound: unknown kind");
}

// Gradient of Re/Im (rho_1)_{j1,k1} with respect to the 2 n1 n2 real sphere
// coordinates. Layout: components d/d c'_{l1,l2} (lexicographic) first, then
// d/d c''_{l1,l2}. For part = Re:
//   d/dc'_{l1,l2}  = delta_{l1,j1} c'_{k1,l2} + c'_{j1,l2} delta_{l1,k1}
//   d/dc''_{l1,l2} = delta_{l1,j1} c''_{k1,l2} + c''_{j1,l2} delta_{l1,k1}
// and for part = Im:
//   d/dc'_{l1,l2}  = c''_{j1,l2} delta_{l1,k1} - delta_{l1,j1} c''_{k1,l2}
//   d/dc''_{l1,l2} = delta_{l1,j1} c'_{k1,l2} - c'_{j1,l2} delta_{l1,k1}
inline Eigen::VectorXd gradient_of_reduced_entry(const StateVector& state,
                                                 const HilbertDims& dims, int j1, int k1,
                                                 EntryPart part) {
  state.check_dims(dims);
  if (j1 < 0 || j1 >= dims.n1 || k1 < 0 || k1 >= dims.n1) {
    throw std::out_of_range("gradient_of_reduced_entry: indices (" + std::to_string(j1) +
                            ", " + std::to_string(k1) + ") out of range for n1=" +
                            std::to_string(dims.n1));
  }
  const int n = dims.total();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(2 * n);
  const auto c = state.coefficient_matrix(dims);
  for (int l2 = 0; l2 < dims.n2; ++l2) {
    const double rj = c(j1, l2).real(), ij = c(j1, l2).imag();
    const double rk = c(k1, l2).real(), ik = c(k1, l2).imag();
    if (part == EntryPart::Re) {
      grad(dims.flat(j1, l2)) += rk;
      grad(dims.flat(k1, l2)) += rj;
      grad(n + dims.flat(j1, l2)) += ik;
      grad(n + dims.flat(k1, l2)) += ij;
    } else {
      grad(dims.flat(k1, l2)) += ij;
      grad(dims.flat(j1, l2)) -= ik;
      grad(n + dims.flat(j1, l2)) += rk;
      grad(n + dims.flat(k1, l2)) -= rj;
    }
  }
  return grad;
}

// Closed form of the squared gradient norm:
//   sum_l2 (|c_{j1,l2}|^2 + |c_{k1,l2}|^2) +- 2 delta_{j1,k1} sum_l2 |c_{j1,l2}|^2
// (+ for Re, - for Im). Bounded by 4 on the diagonal and 1 off it.
inline double reduced_entry_gradient_norm_sq(const StateVector& state,
                                             const HilbertDims& dims, int j1, int k1,
                                             EntryPart part) {
  state.check_dims(dims);
  const auto c = state.coefficient_matrix(dims);
  double row_j = 0.0, row_k = 0.0;
  for (int l2 = 0; l2 < dims.n2; ++l2) {
    row_j += std::norm(c(j1, l2));
    row_k += std::norm(c(k1, l2));
  }
  const double cross = (j1 == k1) ? 2.0 * row_j : 0.0;
  return row_j + row_k + (part == EntryPart::Re ? cross : -cross);
}

// One (kind, epsilon) row of the experiment.
struct ConcentrationCell {
  DeviationKind kind;
  double epsilon = 0.0;
  double empirical = 0.0;   // exceedance frequency over (trial, entry) events
  double bound = 1.0;       // theoretical bound; 1 when the form does not apply
  double stderr_est = 0.0;  // sqrt(bound (1 - bound) / trials)
};

struct ConcentrationReport {
  int n1 = 0;
  int n2 = 0;
  long trials = 0;
  std::uint64_t seed = 0;
  std::vector<double> epsilon_grid;
  std::vector<ConcentrationCell> cells;  // kind-major, grid order within a kind
  Matrix mean_rho1;                      // empirical mean of rho_1 over trials
  double mean_rho1_distance = 0.0;       // || mean rho_1 - I/n1 ||_F
};

// Samples `trials` uniform states (trial k on stream id stream.stream_id + k),
// reduces each to rho_1 and tallies, for every epsilon in the grid, how often
// |Re (rho_1)_{jj} - 1/n1|, |Re (rho_1)_{jk}| and |Im (rho_1)_{jk}| (j < k)
// reach epsilon. Frequencies aggregate over all entries of a kind. Trials run
// in fixed-size chunks so results are independent of the worker count.
inline ConcentrationReport run_concentration_experiment(int n1, int n2, long trials,
                                                        const std::vector<double>& epsilon_grid,
                                                        SeededStream stream, int threads = 1) {
  if (trials < 100) {
    throw std::invalid_argument("run_concentration_experiment: trials must be >= 100");
  }
  if (epsilon_grid.empty()) {
    throw std::invalid_argument("run_concentration_experiment: epsilon grid is empty");
  }
  for (std::size_t i = 1; i < epsilon_grid.size(); ++i) {
    if (epsilon_grid[i] <= epsilon_grid[i - 1]) {
      throw std::invalid_argument("run_concentration_experiment: epsilon grid must be "
                                  "strictly increasing");
    }
  }
  const HilbertDims dims(n1, n2);
  const std::size_t n_eps = epsilon_grid.size();

  struct ChunkAcc {
    std::vector<long> diag_re, off_re, off_im;  // exceedance counts per epsilon
    Matrix rho_sum;
  };
  const long n_chunks = (trials + kChunkSize - 1) / kChunkSize;
  std::vector<ChunkAcc> acc(static_cast<std::size_t>(n_chunks));

  run_chunked(trials, threads, [&](long begin, long end, long chunk) {
    ChunkAcc a{std::vector<long>(n_eps, 0), std::vector<long>(n_eps, 0),
               std::vector<long>(n_eps, 0), Matrix::Zero(n1, n1)};
    for (long k = begin; k < end; ++k) {
      const StateVector psi = sample_uniform_state(
          dims.total(), {stream.seed, stream.stream_id + static_cast<std::uint64_t>(k)});
      const DensityMatrix rho1 = partial_trace(psi, dims, 1);
      const Matrix& r = rho1.entries();
      a.rho_sum += r;
      for (int j = 0; j < n1; ++j) {
        const double dev = std::abs(r(j, j).real() - 1.0 / n1);
        for (std::size_t e = 0; e < n_eps; ++e) {
          if (dev >= epsilon_grid[e]) ++a.diag_re[e];
        }
      }
      for (int j = 0; j < n1; ++j) {
        for (int l = j + 1; l < n1; ++l) {
          const double dre = std::abs(r(j, l).real());
          const double dim_ = std::abs(r(j, l).imag());
          for (std::size_t e = 0; e < n_eps; ++e) {
            if (dre >= epsilon_grid[e]) ++a.off_re[e];
            if (dim_ >= epsilon_grid[e]) ++a.off_im[e];
          }
        }
      }
    }
    acc[static_cast<std::size_t>(chunk)] = std::move(a);
  });

  std::vector<long> diag_re(n_eps, 0), off_re(n_eps, 0), off_im(n_eps, 0);
  Matrix rho_sum = Matrix::Zero(n1, n1);
  for (const auto& a : acc) {
    for (std::size_t e = 0; e < n_eps; ++e) {
      diag_re[e] += a.diag_re[e];
      off_re[e] += a.off_re[e];
      off_im[e] += a.off_im[e];
    }
    rho_sum += a.rho_sum;
  }

  ConcentrationReport report;
  report.n1 = n1;
  report.n2 = n2;
  report.trials = trials;
  report.seed = stream.seed;
  report.epsilon_grid = epsilon_grid;
  report.mean_rho1 = rho_sum / static_cast<double>(trials);
  report.mean_rho1_distance =
      (report.mean_rho1 - Matrix::Identity(n1, n1) / static_cast<double>(n1)).norm();

  const double diag_events = static_cast<double>(trials) * n1;
  const double off_events = static_cast<double>(trials) * n1 * (n1 - 1) / 2.0;
  auto push_cells = [&](DeviationKind kind, const std::vector<long>& counts, double events) {
    if (events <= 0.0) return;  // n1 = 1 has no off-diagonal entries
    for (std::size_t e = 0; e < n_eps; ++e) {
      ConcentrationCell cell;
      cell.kind = kind;
      cell.epsilon = epsilon_grid[e];
      cell.empirical = static_cast<double>(counts[e]) / events;
      // For DiagonalRe with epsilon <= delta the lemma gives nothing; report
      // the vacuous bound 1.
      if (kind == DeviationKind::DiagonalRe &&
          cell.epsilon <= levy_delta(n1, n2, 2.0)) {
        cell.bound = 1.0;
      } else {
        cell.bound = levy_bound(kind, n1, n2, cell.epsilon);
      }
      cell.stderr_est = std::sqrt(cell.bound * (1.0 - cell.bound) / trials);
      report.cells.push_back(cell);
    }
  };
  push_cells(DeviationKind::DiagonalRe, diag_re, diag_events);
  push_cells(DeviationKind::OffDiagonalRe, off_re, off_events);
  push_cells(DeviationKind::OffDiagonalIm, off_im, off_events);
  return report;
}

}  // namespace qergo

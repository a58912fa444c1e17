// macro.hpp
// Coarse-grained (macroscopic) observables: banding a spectrum into energy
// shells, averaging eigenvalues within bands, and building the commuting
// partition {P_nu} of a shell with dimensions d_nu summing to D.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qergo/hilbert.hpp"

namespace qergo {

// Eigendecomposition of a Hermitian operator; eigenvalues ascending.
struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;
  Matrix eigenvectors;  // orthonormal columns, same order as eigenvalues

  static SpectralDecomposition compute(const HermitianOperator& op) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(op.entries());
    if (es.info() != Eigen::Success) {
      throw std::runtime_error("SpectralDecomposition: eigensolver failed");
    }
    return {es.eigenvalues(), es.eigenvectors()};
  }

  int dim() const { return static_cast<int>(eigenvalues.size()); }
};

// Band boundaries for coarse-graining: either uniform bands of a given width
// spanning the spectrum's range, or an explicit strictly increasing edge list.
// Band i covers (e_i, e_{i+1}]; a value exactly on an interior edge belongs to
// the lower band, and the lowest edge itself belongs to band 0. Values within
// kBandEdgeSlack outside the outermost edges (eigensolver noise) are absorbed
// into the first/last band.
inline constexpr double kBandEdgeSlack = 1e-10;

class BandSpec {
 public:
  static BandSpec uniform(double width) {
    if (width <= 0.0) throw std::invalid_argument("BandSpec: width must be > 0");
    BandSpec s;
    s.width_ = width;
    return s;
  }

  static BandSpec explicit_edges(std::vector<double> edges) {
    if (edges.size() < 2) {
      throw std::invalid_argument("BandSpec: need at least two edges");
    }
    for (std::size_t i = 1; i < edges.size(); ++i) {
      if (edges[i] <= edges[i - 1]) {
        throw std::invalid_argument("BandSpec: edges must be strictly increasing");
      }
    }
    BandSpec s;
    s.edges_ = std::move(edges);
    return s;
  }

  // Materializes edges for the given sorted values. Uniform specs lay bands
  // of the requested width from the smallest value; explicit specs must
  // cover every value.
  std::vector<double> resolve_edges(const Eigen::VectorXd& sorted_values) const {
    if (sorted_values.size() == 0) {
      throw std::invalid_argument("BandSpec: empty spectrum");
    }
    if (width_) {
      const double lo = sorted_values(0);
      const double hi = sorted_values(sorted_values.size() - 1);
      if (hi <= lo) {
        throw std::invalid_argument("BandSpec: spectrum range is empty; uniform bands of "
                                    "width " + std::to_string(*width_) + " need a positive "
                                    "range");
      }
      const int n_bands = std::max(1, static_cast<int>(std::ceil((hi - lo) / *width_)));
      std::vector<double> edges(static_cast<std::size_t>(n_bands) + 1);
      for (int i = 0; i <= n_bands; ++i) edges[static_cast<std::size_t>(i)] = lo + i * *width_;
      edges.back() = std::max(edges.back(), hi);
      return edges;
    }
    if (sorted_values(0) < edges_.front() - kBandEdgeSlack ||
        sorted_values(sorted_values.size() - 1) > edges_.back() + kBandEdgeSlack) {
      throw std::invalid_argument("BandSpec: edges [" + std::to_string(edges_.front()) + ", " +
                                  std::to_string(edges_.back()) + "] do not cover the spectrum [" +
                                  std::to_string(sorted_values(0)) + ", " +
                                  std::to_string(sorted_values(sorted_values.size() - 1)) + "]");
    }
    return edges_;
  }

  // Index of the band containing value, under the tie-to-lower rule.
  static int band_index(const std::vector<double>& edges, double value) {
    if (value <= edges.front()) return 0;
    const auto it = std::lower_bound(edges.begin(), edges.end(), value);
    // *it >= value and value > edges.front(): band (it-1, it]; values within
    // slack above the last edge clamp into the top band
    const int idx = static_cast<int>(it - edges.begin()) - 1;
    return std::min(idx, static_cast<int>(edges.size()) - 2);
  }

 private:
  std::optional<double> width_;
  std::vector<double> edges_;
};

struct MacroBand {
  double mean = 0.0;         // arithmetic mean of member eigenvalues
  double edge_lo = 0.0;
  double edge_hi = 0.0;
  std::vector<int> members;  // eigenvector indices of the original operator
};

// A Hermitian operator together with its banded (degenerate) version: each
// eigenvalue is replaced by the mean of its band, so the coarse operator
// commutes with anything diagonal in the same eigenbasis.
struct MacroOperator {
  HermitianOperator original;
  std::vector<MacroBand> bands;  // non-empty bands, ascending
  HermitianOperator coarse;
};

namespace detail {

// Groups eigenvalues into the given bands, dropping empty bands.
inline std::vector<MacroBand> assign_bands_to_edges(const Eigen::VectorXd& values,
                                                    const std::vector<double>& edges) {
  const int n_bands = static_cast<int>(edges.size()) - 1;
  std::vector<MacroBand> bands(static_cast<std::size_t>(n_bands));
  for (int b = 0; b < n_bands; ++b) {
    bands[static_cast<std::size_t>(b)].edge_lo = edges[static_cast<std::size_t>(b)];
    bands[static_cast<std::size_t>(b)].edge_hi = edges[static_cast<std::size_t>(b) + 1];
  }
  for (int i = 0; i < values.size(); ++i) {
    const int b = BandSpec::band_index(edges, values(i));
    bands[static_cast<std::size_t>(b)].members.push_back(i);
  }
  std::vector<MacroBand> filled;
  for (auto& band : bands) {
    if (band.members.empty()) continue;
    double sum = 0.0;
    for (int i : band.members) sum += values(i);
    band.mean = sum / static_cast<double>(band.members.size());
    filled.push_back(std::move(band));
  }
  return filled;
}

// Groups sorted eigenvalues into the spec's bands, dropping empty bands.
inline std::vector<MacroBand> assign_bands(const Eigen::VectorXd& values,
                                           const BandSpec& spec) {
  return assign_bands_to_edges(values, spec.resolve_edges(values));
}

}  // namespace detail

// Replaces each eigenvalue by the mean of its band. The coarse operator has
// one distinct eigenvalue per band, with multiplicity equal to the band size.
inline MacroOperator coarse_grain(const HermitianOperator& op, const BandSpec& spec) {
  const SpectralDecomposition sd = SpectralDecomposition::compute(op);
  std::vector<MacroBand> bands = detail::assign_bands(sd.eigenvalues, spec);
  Eigen::VectorXd coarse_values(sd.dim());
  for (const auto& band : bands) {
    for (int i : band.members) coarse_values(i) = band.mean;
  }
  Matrix coarse = sd.eigenvectors * coarse_values.asDiagonal() * sd.eigenvectors.adjoint();
  coarse = ((coarse + coarse.adjoint()) / 2.0).eval();
  return {op, std::move(bands), HermitianOperator(std::move(coarse), op.unit())};
}

// Span of the eigenvectors with eigenvalues in [e_lo, e_hi).
struct EnergyShell {
  Matrix basis;               // dim x D, orthonormal columns
  Eigen::VectorXd energies;   // ascending, length D
  std::vector<int> members;   // indices into the parent decomposition
  int D = 0;
};

inline EnergyShell energy_shell(const SpectralDecomposition& sd, double e_lo, double e_hi) {
  std::vector<int> members;
  for (int i = 0; i < sd.dim(); ++i) {
    if (sd.eigenvalues(i) >= e_lo && sd.eigenvalues(i) < e_hi) members.push_back(i);
  }
  if (members.empty()) {
    double below = -std::numeric_limits<double>::infinity();
    double above = std::numeric_limits<double>::infinity();
    for (int i = 0; i < sd.dim(); ++i) {
      const double e = sd.eigenvalues(i);
      if (e < e_lo) below = std::max(below, e);
      if (e >= e_hi) above = std::min(above, e);
    }
    throw std::invalid_argument("energy_shell: no eigenvalues in [" + std::to_string(e_lo) +
                                ", " + std::to_string(e_hi) + "); nearest below = " +
                                std::to_string(below) + ", nearest above = " +
                                std::to_string(above));
  }
  EnergyShell shell;
  shell.D = static_cast<int>(members.size());
  shell.members = members;
  shell.basis.resize(sd.eigenvectors.rows(), shell.D);
  shell.energies.resize(shell.D);
  for (int k = 0; k < shell.D; ++k) {
    shell.basis.col(k) = sd.eigenvectors.col(members[static_cast<std::size_t>(k)]);
    shell.energies(k) = sd.eigenvalues(members[static_cast<std::size_t>(k)]);
  }
  return shell;
}

// One macro cell: a projector (in shell coordinates) onto the subspace with
// a definite coarse value of the partitioning observable.
struct MacroCell {
  std::string label;
  Matrix projector;  // D x D, Hermitian idempotent
  int dim = 0;       // d_nu = rank = trace
  double value_mean = 0.0;
  double edge_lo = 0.0;
  double edge_hi = 0.0;
};

struct MacroPartition {
  Matrix shell_basis;          // dim x D
  Eigen::VectorXd shell_energies;
  int D = 0;
  std::vector<MacroCell> cells;
  bool observable_commutes_with_shell = false;  // recorded compression mode
  std::vector<std::string> warnings;            // near-edge eigenvalues, ties

  int total_cell_dim() const {
    int s = 0;
    for (const auto& c : cells) s += c.dim;
    return s;
  }
};

// Compresses the observable into the shell (P A P restricted to shell
// coordinates), diagonalizes, and groups the compressed eigenvalues into the
// spec's bands. Whether the observable commuted with the shell projector
// (within 1e-8, relative to its norm) is recorded; the construction itself
// always uses the compressed operator. Compressed eigenvalues within 1e-10
// of a band edge are tied to the lower band and recorded as warnings.
inline MacroPartition build_macro_partition(const EnergyShell& shell,
                                            const HermitianOperator& observable,
                                            const BandSpec& spec) {
  if (observable.dim() != shell.basis.rows()) {
    throw std::invalid_argument("build_macro_partition: observable dimension " +
                                std::to_string(observable.dim()) +
                                " does not match the shell's parent dimension " +
                                std::to_string(shell.basis.rows()));
  }
  MacroPartition part;
  part.shell_basis = shell.basis;
  part.shell_energies = shell.energies;
  part.D = shell.D;

  const Matrix p_shell = shell.basis * shell.basis.adjoint();
  const double comm = (observable.entries() * p_shell - p_shell * observable.entries()).norm();
  part.observable_commutes_with_shell =
      comm <= 1e-8 * std::max(1.0, observable.entries().norm());

  Matrix compressed = shell.basis.adjoint() * observable.entries() * shell.basis;
  compressed = ((compressed + compressed.adjoint()) / 2.0).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(compressed);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("build_macro_partition: eigensolver failed");
  }

  const std::vector<double> edges = spec.resolve_edges(es.eigenvalues());
  Eigen::VectorXd banded_values = es.eigenvalues();
  for (int i = 0; i < part.D; ++i) {
    for (double e : edges) {
      const double diff = banded_values(i) - e;
      if (diff != 0.0 && std::abs(diff) < 1e-10) {
        part.warnings.push_back("compressed eigenvalue " + std::to_string(banded_values(i)) +
                                " within 1e-10 of band edge " + std::to_string(e) +
                                "; tied to the lower band");
        // Snap onto the edge so the value lands in the band below it.
        if (diff > 0.0) banded_values(i) = e;
      }
    }
  }

  std::vector<MacroBand> bands = detail::assign_bands_to_edges(banded_values, edges);
  for (std::size_t b = 0; b < bands.size(); ++b) {
    MacroCell cell;
    cell.label = "nu" + std::to_string(b);
    cell.dim = static_cast<int>(bands[b].members.size());
    cell.value_mean = bands[b].mean;
    cell.edge_lo = bands[b].edge_lo;
    cell.edge_hi = bands[b].edge_hi;
    Matrix w(part.D, cell.dim);
    for (int k = 0; k < cell.dim; ++k) {
      w.col(k) = es.eigenvectors().col(bands[b].members[static_cast<std::size_t>(k)]);
    }
    cell.projector = w * w.adjoint();
    cell.projector = ((cell.projector + cell.projector.adjoint()) / 2.0).eval();
    part.cells.push_back(std::move(cell));
  }
  return part;
}

// Joint refinement of two partitions of the same shell built from commuting
// observables: joint cells are intersections, realized as products of the
// (commuting) projectors. Empty intersections are dropped.
inline MacroPartition refine_partition(const MacroPartition& a, const MacroPartition& b,
                                       double tol = 1e-10) {
  if (a.D != b.D || (a.shell_basis - b.shell_basis).norm() > 1e-12) {
    throw std::invalid_argument("refine_partition: partitions live on different shells");
  }
  MacroPartition joint;
  joint.shell_basis = a.shell_basis;
  joint.shell_energies = a.shell_energies;
  joint.D = a.D;
  joint.observable_commutes_with_shell =
      a.observable_commutes_with_shell && b.observable_commutes_with_shell;
  for (const auto& ca : a.cells) {
    for (const auto& cb : b.cells) {
      Matrix p = ca.projector * cb.projector;
      if ((p - cb.projector * ca.projector).norm() > tol) {
        throw std::invalid_argument("refine_partition: cell projectors " + ca.label + " and " +
                                    cb.label + " do not commute");
      }
      p = ((p + p.adjoint()) / 2.0).eval();
      const double tr = p.trace().real();
      const int d = static_cast<int>(std::lround(tr));
      if (std::abs(tr - d) > 1e-8) {
        throw std::runtime_error("refine_partition: non-integer intersection trace " +
                                 std::to_string(tr));
      }
      if (d == 0) continue;
      MacroCell cell;
      cell.label = ca.label + "&" + cb.label;
      cell.projector = std::move(p);
      cell.dim = d;
      cell.value_mean = 0.0;
      cell.edge_lo = ca.edge_lo;
      cell.edge_hi = ca.edge_hi;
      joint.cells.push_back(std::move(cell));
    }
  }
  return joint;
}

// Checks the projector algebra of a partition: idempotency, mutual
// orthogonality, completeness on the shell, integer traces matching d_nu and
// sum d_nu = D. Throws with a description of the first violation.
inline void validate_partition(const MacroPartition& part, double tol = 1e-10) {
  Matrix sum = Matrix::Zero(part.D, part.D);
  int total = 0;
  for (std::size_t i = 0; i < part.cells.size(); ++i) {
    const auto& cell = part.cells[i];
    const double idem = (cell.projector * cell.projector - cell.projector).norm();
    if (idem > tol) {
      throw std::runtime_error("partition cell " + cell.label + ": not idempotent, |P^2-P| = " +
                               std::to_string(idem));
    }
    const double tr = cell.projector.trace().real();
    if (std::abs(tr - cell.dim) > 1e-8) {
      throw std::runtime_error("partition cell " + cell.label + ": trace " + std::to_string(tr) +
                               " does not equal d_nu = " + std::to_string(cell.dim));
    }
    for (std::size_t j = i + 1; j < part.cells.size(); ++j) {
      const double ortho = (cell.projector * part.cells[j].projector).norm();
      if (ortho > tol) {
        throw std::runtime_error("partition cells " + cell.label + ", " + part.cells[j].label +
                                 ": not orthogonal, |P Q| = " + std::to_string(ortho));
      }
    }
    sum += cell.projector;
    total += cell.dim;
  }
  if (total != part.D) {
    throw std::runtime_error("partition: sum of d_nu = " + std::to_string(total) +
                             " does not equal D = " + std::to_string(part.D));
  }
  const double comp = (sum - Matrix::Identity(part.D, part.D)).norm();
  if (comp > tol) {
    throw std::runtime_error("partition: incomplete, |sum P - I| = " + std::to_string(comp));
  }
}

}  // namespace qergo

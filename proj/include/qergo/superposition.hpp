// superposition.hpp
// Schmidt decomposition of bipartite states, macro-branch weight profiles,
// and an N-spin pointer measurement model whose branch overlap decays as
// |cos(theta)|^N.

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "qergo/dynamics.hpp"
#include "qergo/hilbert.hpp"
#include "qergo/macro.hpp"

namespace qergo {

// Largest spin count for which pointer states are materialized as dense
// vectors (2^N amplitudes). Overlaps never need the dense form.
inline constexpr int kMaxDensePointerSpins = 20;

// Bi-orthogonal expansion state = sum_k coefficients[k] * left_k (x) right_k,
// with non-negative coefficients in descending order and orthonormal vector
// families in the columns of left_vectors / right_vectors.
struct SchmidtDecomposition {
  std::vector<double> coefficients;
  Matrix left_vectors;   // n1 x r, orthonormal columns
  Matrix right_vectors;  // n2 x r, orthonormal columns

  int rank(double cutoff = 0.0) const {
    int r = 0;
    for (double c : coefficients) {
      if (c > cutoff) ++r;
    }
    return r;
  }

  // The represented state, rebuilt from the expansion.
  Vector reconstruct() const {
    const auto n1 = left_vectors.rows();
    const auto n2 = right_vectors.rows();
    Vector out = Vector::Zero(n1 * n2);
    for (std::size_t k = 0; k < coefficients.size(); ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      for (Eigen::Index j1 = 0; j1 < n1; ++j1) {
        out.segment(j1 * n2, n2) +=
            coefficients[k] * left_vectors(j1, kk) * right_vectors.col(kk);
      }
    }
    return out;
  }
};

// Singular-value decomposition of the coefficient matrix C = U S V^dagger.
// In vector form the state is sum_k s_k u_k (x) conj(v_k), so the right
// family is the conjugated V columns. All min(n1, n2) coefficients are kept,
// including exact zeros, so rank-deficient states report trailing zeros.
inline SchmidtDecomposition schmidt_decompose(const StateVector& state,
                                              const HilbertDims& dims) {
  state.check_dims(dims);
  const Matrix c = state.coefficient_matrix(dims);
  Eigen::JacobiSVD<Matrix> svd(c, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SchmidtDecomposition out;
  const auto& sigma = svd.singularValues();
  out.coefficients.assign(sigma.data(), sigma.data() + sigma.size());
  out.left_vectors = svd.matrixU();
  out.right_vectors = svd.matrixV().conjugate();
  return out;
}

// Macro-cell weights of a state, with a branch declared "occupied" when its
// weight reaches the threshold. Weights are raw expectation values
// <state|P_nu|state>, so they sum to 1 minus the (tolerated) shell leakage.
struct BranchProfile {
  std::vector<std::string> labels;
  std::vector<double> weights;
  double threshold = 0.0;
  int branch_count = 0;

  bool macroscopic_superposition() const { return branch_count >= 2; }

  double weight_sum() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
};

inline BranchProfile branch_profile(const StateVector& state,
                                    const MacroPartition& partition, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("branch_profile: threshold must lie in (0, 1), got " +
                                std::to_string(threshold));
  }
  double leakage = 0.0;
  const Vector z = detail::project_into_shell(state, partition, kShellLeakageTol, &leakage);
  BranchProfile profile;
  profile.threshold = threshold;
  for (const auto& cell : partition.cells) {
    const double w = std::real(Complex(z.adjoint() * cell.projector * z));
    profile.labels.push_back(cell.label);
    profile.weights.push_back(w);
    if (w >= threshold) ++profile.branch_count;
  }
  return profile;
}

// Branch-occupation threshold used throughout: half the ergodic target of
// the smallest cell. A cell holding at least half its typical equilibrium
// weight counts as an occupied branch.
inline double default_branch_threshold(const MacroPartition& partition) {
  double min_target = 1.0;
  for (const auto& cell : partition.cells) {
    min_target = std::min(min_target,
                          static_cast<double>(cell.dim) / static_cast<double>(partition.D));
  }
  return 0.5 * min_target;
}

// A two-level system measured by N spins: each spin rotates by +theta when
// the system is in |+> and by -theta when it is in |->, entangling the
// device with the measured qubit.
struct PointerModel {
  int n_spins = 1;
  double theta = 1.5707963267948966;  // pi/2: orthogonal single-spin pointers
  Complex c_plus{1.0, 0.0};
  Complex c_minus{0.0, 0.0};

  void validate() const {
    if (n_spins < 1) {
      throw std::invalid_argument("PointerModel: n_spins must be >= 1, got " +
                                  std::to_string(n_spins));
    }
    const double norm2 = std::norm(c_plus) + std::norm(c_minus);
    if (std::abs(norm2 - 1.0) > kNormTol) {
      throw std::invalid_argument("PointerModel: |c_plus|^2 + |c_minus|^2 deviates from 1 by " +
                                  std::to_string(std::abs(norm2 - 1.0)));
    }
  }

  // Single-spin pointer state for outcome +/-: a Bloch rotation of |0> by
  // +/-theta, i.e. (cos(theta/2), +/- sin(theta/2)). The two outcomes then
  // overlap at <m_+|m_-> = cos(theta) per spin.
  Eigen::Vector2cd spin_pointer(int sign) const {
    Eigen::Vector2cd m;
    m << Complex(std::cos(theta / 2.0), 0.0),
         Complex(static_cast<double>(sign) * std::sin(theta / 2.0), 0.0);
    return m;
  }
};

// Result of running the measurement interaction: the final state is the
// entangled superposition c_+ |+>(x)|M_+> + c_- |->(x)|M_->, kept in
// factored (per-branch product) form so that overlaps are exact at any N.
struct PointerMeasurement {
  PointerModel model;
  double branch_overlap = 0.0;  // |<M_+|M_->| = |cos theta|^N

  // Device dimensions of the final entangled state: qubit (x) N spins.
  HilbertDims dims() const {
    if (model.n_spins > kMaxDensePointerSpins) {
      throw std::invalid_argument("PointerMeasurement: dense form limited to " +
                                  std::to_string(kMaxDensePointerSpins) + " spins, got " +
                                  std::to_string(model.n_spins));
    }
    return HilbertDims(2, 1 << model.n_spins);
  }

  // Dense device state |M_+/-> = (x)_{i=1..N} m_+/- for moderate N.
  Vector device_state(int sign) const {
    const HilbertDims d = dims();
    const Eigen::Vector2cd m = model.spin_pointer(sign);
    Vector cur(1);
    cur(0) = Complex(1.0, 0.0);
    for (int i = 0; i < model.n_spins; ++i) {
      Vector next(cur.size() * 2);
      next.segment(0, cur.size()) = m(0) * cur;
      next.segment(cur.size(), cur.size()) = m(1) * cur;
      cur.swap(next);
    }
    (void)d;
    return cur;
  }

  // Dense entangled final state, qubit index major.
  StateVector final_state() const {
    const HilbertDims d = dims();
    Vector out(d.total());
    out.segment(0, d.n2) = model.c_plus * device_state(+1);
    out.segment(d.n2, d.n2) = model.c_minus * device_state(-1);
    return StateVector(std::move(out));
  }
};

// Runs the measurement interaction. The overlap is computed as the product
// of per-spin inner products, which never requires the 2^N-dimensional
// device space, so arbitrarily large N is exact.
inline PointerMeasurement pointer_measure(const PointerModel& model) {
  model.validate();
  const Complex per_spin = model.spin_pointer(+1).adjoint() * model.spin_pointer(-1);
  Complex product(1.0, 0.0);
  for (int i = 0; i < model.n_spins; ++i) product *= per_spin;
  PointerMeasurement result;
  result.model = model;
  result.branch_overlap = std::abs(product);
  return result;
}

// Entanglement entropy -sum_k p_k ln p_k of the subsystem-1 spectrum, in
// nats, with 0 ln 0 := 0. Eigenvalues within kPsdTol below zero are clamped.
inline double von_neumann_entropy(const DensityMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.entries(), Eigen::EigenvaluesOnly);
  double entropy = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double p = es.eigenvalues()(i);
    if (p < -kPsdTol) {
      throw std::invalid_argument("von_neumann_entropy: spectrum has eigenvalue " +
                                  std::to_string(p) + " below -" + std::to_string(kPsdTol));
    }
    if (p > 0.0) entropy -= p * std::log(p);
  }
  return entropy;
}

// Subsystem-1 entanglement entropy for each state in a trajectory: 0 for
// product states, up to ln(min(n1, n2)) at maximal entanglement.
inline std::vector<double> branch_purity_series(const std::vector<StateVector>& states,
                                                const HilbertDims& dims) {
  std::vector<double> entropies;
  entropies.reserve(states.size());
  for (const auto& state : states) {
    entropies.push_back(von_neumann_entropy(partial_trace(state, dims, 1)));
  }
  return entropies;
}

}  // namespace qergo

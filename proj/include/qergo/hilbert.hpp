// hilbert.hpp
// Finite-dimensional Hilbert-space types: bipartite states, density
// matrices, Hermitian operators, partial trace and distance utilities.

#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace qergo {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

// Tolerances for algebraic identities at dims <= 4096.
inline constexpr double kNormTol = 1e-12;
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;

// Bipartite factor dimensions. Amplitudes are indexed lexicographically,
// subsystem-1 index major: flat index = j1 * n2 + j2.
struct HilbertDims {
  int n1 = 1;
  int n2 = 1;

  HilbertDims(int n1_, int n2_) : n1(n1_), n2(n2_) {
    if (n1 < 1 || n2 < 1) {
      throw std::invalid_argument("HilbertDims: factors must be >= 1, got n1=" +
                                  std::to_string(n1) + " n2=" + std::to_string(n2));
    }
  }

  int total() const { return n1 * n2; }
  int flat(int j1, int j2) const { return j1 * n2 + j2; }
};

// Unit-norm pure state. Construction enforces normalization to 1e-12.
class StateVector {
 public:
  explicit StateVector(Vector amplitudes) : amps_(std::move(amplitudes)) {
    if (amps_.size() == 0) {
      throw std::invalid_argument("StateVector: empty amplitude vector");
    }
    const double n = amps_.norm();
    if (std::abs(n - 1.0) > kNormTol) {
      throw std::invalid_argument("StateVector: norm deviates from 1 by " +
                                  std::to_string(std::abs(n - 1.0)));
    }
  }

  // Normalizes the input, then constructs.
  static StateVector normalized(Vector amplitudes) {
    const double n = amplitudes.norm();
    if (n == 0.0) {
      throw std::invalid_argument("StateVector: cannot normalize the zero vector");
    }
    return StateVector(Vector(amplitudes / n));
  }

  static StateVector basis_state(int dim, int index) {
    Vector v = Vector::Zero(dim);
    v(index) = Complex(1.0, 0.0);
    return StateVector(std::move(v));
  }

  int dim() const { return static_cast<int>(amps_.size()); }
  const Vector& amplitudes() const { return amps_; }
  Complex operator()(int i) const { return amps_(i); }

  // Coefficient-matrix view C with C(j1, j2) = c_{j1 j2}; rows index subsystem 1.
  Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
  coefficient_matrix(const HilbertDims& dims) const {
    check_dims(dims);
    return {amps_.data(), dims.n1, dims.n2};
  }

  void check_dims(const HilbertDims& dims) const {
    if (dims.total() != dim()) {
      throw std::invalid_argument("state dimension " + std::to_string(dim()) +
                                  " does not equal n1*n2 = " + std::to_string(dims.n1) +
                                  "*" + std::to_string(dims.n2) + " = " +
                                  std::to_string(dims.total()));
    }
  }

 private:
  Vector amps_;
};

// Hermitian, unit-trace matrix. Positive semidefiniteness is checked on
// demand (min_eigenvalue) since it costs a full eigendecomposition.
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix entries) : m_(std::move(entries)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0) {
      throw std::invalid_argument("DensityMatrix: matrix must be square and non-empty");
    }
    const double herm = (m_ - m_.adjoint()).norm();
    if (herm > kHermitianTol) {
      throw std::invalid_argument("DensityMatrix: non-Hermitian by " + std::to_string(herm));
    }
    const double tr_gap = std::abs(m_.trace() - Complex(1.0, 0.0));
    if (tr_gap > kTraceTol) {
      throw std::invalid_argument("DensityMatrix: trace deviates from 1 by " +
                                  std::to_string(tr_gap));
    }
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& entries() const { return m_; }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

  bool is_positive_semidefinite(double tol = kPsdTol) const {
    return min_eigenvalue() >= -tol;
  }

 private:
  Matrix m_;
};

// Hermitian operator with a unit label carried as metadata so that
// energy*time products in evolution stay dimensionless phases.
class HermitianOperator {
 public:
  explicit HermitianOperator(Matrix entries, std::string unit = "")
      : m_(std::move(entries)), unit_(std::move(unit)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0) {
      throw std::invalid_argument("HermitianOperator: matrix must be square and non-empty");
    }
    const double herm = (m_ - m_.adjoint()).norm();
    if (herm > kHermitianTol) {
      throw std::invalid_argument("HermitianOperator: non-Hermitian by " +
                                  std::to_string(herm));
    }
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& entries() const { return m_; }
  const std::string& unit() const { return unit_; }

 private:
  Matrix m_;
  std::string unit_;
};

// rho_1[j1,k1] = sum_j2 c_{j1 j2} conj(c_{k1 j2}); keep=2 traces out
// subsystem 1 instead. Computed as C C^dagger on the coefficient matrix.
inline DensityMatrix partial_trace(const StateVector& state, const HilbertDims& dims,
                                   int keep) {
  state.check_dims(dims);
  if (keep != 1 && keep != 2) {
    throw std::invalid_argument("partial_trace: keep must be 1 or 2, got " +
                                std::to_string(keep));
  }
  const auto c = state.coefficient_matrix(dims);
  Matrix rho;
  if (keep == 1) {
    rho = c * c.adjoint();
  } else {
    rho = c.transpose() * c.conjugate();
  }
  // symmetrize away last-ulp noise so the Hermiticity invariant holds exactly
  rho = ((rho + rho.adjoint()) / 2.0).eval();
  return DensityMatrix(std::move(rho));
}

// tr(rho^2); equals the squared Frobenius norm for Hermitian rho.
inline double purity(const DensityMatrix& rho) { return rho.entries().squaredNorm(); }

// Frobenius distance to the maximally mixed state I/dim.
inline double distance_to_maximally_mixed(const DensityMatrix& rho) {
  const int d = rho.dim();
  Matrix delta = rho.entries() - Matrix::Identity(d, d) / static_cast<double>(d);
  return delta.norm();
}

// Lexicographic tensor product (subsystem-1 index major).
inline StateVector tensor(const StateVector& a, const StateVector& b) {
  Vector out(a.dim() * b.dim());
  for (int i = 0; i < a.dim(); ++i) {
    out.segment(i * b.dim(), b.dim()) = a(i) * b.amplitudes();
  }
  return StateVector(std::move(out));
}

}  // namespace qergo

// sampler.hpp
// Uniform (Haar) sampling of pure states on the unit sphere of complex
// amplitudes, with reproducible counter-keyed streams and moment estimators.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

#include "qergo/hilbert.hpp"

namespace qergo {

// Identifies one reproducible random stream. Identical (seed, stream_id)
// pairs reproduce identical sample sequences bit-exactly; distinct stream
// ids give statistically independent streams for parallel trials.
struct SeededStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

namespace detail {

// SplitMix64 finalizer (stateless mixing step).
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace detail

// Deterministic random stream. The generator algorithm is fixed:
//   engine   = std::mt19937_64 seeded with mix64(mix64(seed) ^ stream_id),
//   uniform  = (engine() >> 11) * 2^-53            (in [0, 1)),
//   normal   = Marsaglia polar method on uniform pairs.
// mt19937_64 and the conversions above are fully specified, so sequences
// are identical across platforms with the same floating-point libm.
class RandomStream {
 public:
  explicit RandomStream(SeededStream s)
      : engine_(detail::mix64(detail::mix64(s.seed) ^ s.stream_id)) {}

  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [-1, 1).
  double uniform_symmetric() { return 2.0 * uniform01() - 1.0; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = uniform_symmetric();
      v = uniform_symmetric();
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Draws a state uniformly on S^{2 dim - 1}: 2*dim independent standard
// normals as real/imaginary parts, then normalize.
inline StateVector sample_uniform_state(int dim, SeededStream stream) {
  if (dim < 1) {
    throw std::invalid_argument("sample_uniform_state: dim must be >= 1, got " +
                                std::to_string(dim));
  }
  RandomStream rng(stream);
  Vector v(dim);
  double norm_sq = 0.0;
  do {
    for (int i = 0; i < dim; ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      v(i) = Complex(re, im);
    }
    norm_sq = v.squaredNorm();
  } while (norm_sq == 0.0);
  return StateVector(Vector(v / std::sqrt(norm_sq)));
}

// Empirical second-moment matrix M[a,b] = mean over trials of c_a conj(c_b).
// Trial k uses stream id (stream.stream_id + k). For the uniform measure the
// diagonal approaches 1/dim and off-diagonal entries vanish.
inline Matrix estimate_coefficient_moments(int dim, long trials, SeededStream stream) {
  if (trials < 1) {
    throw std::invalid_argument("estimate_coefficient_moments: trials must be >= 1");
  }
  Matrix acc = Matrix::Zero(dim, dim);
  for (long k = 0; k < trials; ++k) {
    const StateVector psi =
        sample_uniform_state(dim, {stream.seed, stream.stream_id + static_cast<std::uint64_t>(k)});
    acc.noalias() += psi.amplitudes() * psi.amplitudes().adjoint();
  }
  return acc / static_cast<double>(trials);
}

}  // namespace qergo

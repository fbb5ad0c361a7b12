#pragma once

// Seeded randomness for corpus generation and witness searches. The gaussian
// is a hand-rolled Box-Muller over mt19937_64 draws so that a given seed
// produces the same stream on every platform (std::normal_distribution does
// not promise that).

#include <cstdint>
#include <random>

#include "vnkit/linalg.hpp"

namespace vnkit {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform01() {  // in (0, 1]
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double gaussian() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  Complex complex_gaussian() {
    const double re = gaussian();
    const double im = gaussian();
    return Complex(re, im) * 0.7071067811865475244;
  }

  std::uint64_t integer(std::uint64_t bound) { return engine_() % bound; }

  std::uint64_t fork_seed() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

ComplexMatrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng);
ComplexMatrix gaussian_vector(std::size_t dim, Rng& rng);
ComplexMatrix gaussian_hermitian(std::size_t d, Rng& rng);
ComplexMatrix haar_unitary(std::size_t d, Rng& rng);

// Hermitian with eigenvalues drawn uniformly from [lo, hi] in a Haar basis.
ComplexMatrix random_positive(std::size_t d, double lo, double hi, Rng& rng);

}  // namespace vnkit

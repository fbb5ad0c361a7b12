#include "vnkit/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace vnkit {

ComplexMatrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  ComplexMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.complex_gaussian();
  return m;
}

ComplexMatrix gaussian_vector(std::size_t dim, Rng& rng) { return gaussian_matrix(dim, 1, rng); }

ComplexMatrix gaussian_hermitian(std::size_t d, Rng& rng) {
  const ComplexMatrix g = gaussian_matrix(d, d, rng);
  return (g + g.adjoint()) * 0.5;
}

ComplexMatrix haar_unitary(std::size_t d, Rng& rng) {
  // Modified Gram-Schmidt over a complex Ginibre matrix; MGS keeps the
  // diagonal of the implicit R positive, which is exactly the phase fix
  // that makes the distribution Haar.
  const ComplexMatrix g = gaussian_matrix(d, d, rng);
  ComplexMatrix q(d, d);
  for (std::size_t j = 0; j < d; ++j) {
    std::vector<Complex> col(d);
    for (std::size_t i = 0; i < d; ++i) col[i] = g(i, j);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        Complex ip = 0.0;
        for (std::size_t i = 0; i < d; ++i) ip += col[i] * std::conj(q(i, k));
        for (std::size_t i = 0; i < d; ++i) col[i] -= ip * q(i, k);
      }
    }
    double nrm = 0.0;
    for (const Complex& z : col) nrm += std::norm(z);
    nrm = std::sqrt(nrm);
    if (nrm < 1e-12) throw std::runtime_error("haar_unitary: degenerate Ginibre draw");
    for (std::size_t i = 0; i < d; ++i) q(i, j) = col[i] / nrm;
  }
  return q;
}

ComplexMatrix random_positive(std::size_t d, double lo, double hi, Rng& rng) {
  if (!(lo > 0.0) || hi < lo) throw std::invalid_argument("random_positive: bad eigenvalue range");
  const ComplexMatrix u = haar_unitary(d, rng);
  std::vector<double> eigs(d);
  for (double& e : eigs) e = rng.uniform(lo, hi);
  return u * ComplexMatrix::diagonal(eigs) * u.adjoint();
}

}  // namespace vnkit

#pragma once

// Dense complex linear algebra and antilinear-operator calculus.
// Everything is value-semantic and pure; matrices are row-major
// std::complex<double>. The eigensolver is a self-contained cyclic
// Jacobi iteration, good to a few hundred rows, and the SVD is built
// on top of it via the Gram matrix.

#include <complex>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

namespace vnkit {

using Complex = std::complex<double>;

struct Tolerances {
  double rank_tol = 1e-9;    // relative singular-value cutoff
  double assert_tol = 1e-8;  // residual bound for certificates
  int retry_seeds = 8;       // attempts for randomized constructions

  void validate() const;  // throws std::invalid_argument unless all positive
};

class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);  // zero-filled
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);
  ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows);

  static ComplexMatrix identity(std::size_t d);
  static ComplexMatrix diagonal(const std::vector<double>& entries);
  static ComplexMatrix diagonal(const std::vector<Complex>& entries);
  static ComplexMatrix column(const std::vector<Complex>& entries);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }
  bool square() const { return rows_ == cols_; }

  Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  const std::vector<Complex>& entries() const { return data_; }
  std::vector<Complex>& entries() { return data_; }

  ComplexMatrix adjoint() const;
  ComplexMatrix transpose() const;
  ComplexMatrix conjugate() const;
  Complex trace() const;
  double frobenius_norm() const;
  double max_abs() const;
  bool all_finite() const;

  ComplexMatrix& operator+=(const ComplexMatrix& other);
  ComplexMatrix& operator-=(const ComplexMatrix& other);
  ComplexMatrix& operator*=(Complex scale);

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator-(ComplexMatrix a) { return a *= Complex(-1.0); }
  friend ComplexMatrix operator*(ComplexMatrix a, Complex s) { return a *= s; }
  friend ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }
  friend ComplexMatrix operator*(ComplexMatrix a, double s) { return a *= Complex(s); }
  friend ComplexMatrix operator*(double s, ComplexMatrix a) { return a *= Complex(s); }
  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

// Hilbert-Schmidt inner product <A,B> = trace(B* A); linear in A.
Complex hs_inner(const ComplexMatrix& a, const ComplexMatrix& b);

// x += c * y without a temporary; the workhorse of span arithmetic.
void add_scaled(ComplexMatrix& x, Complex c, const ComplexMatrix& y);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

// Column-major stacking, so vec(AXB) = kron(B^T, A) vec(X).
ComplexMatrix vec(const ComplexMatrix& a);
ComplexMatrix unvec(const ComplexMatrix& v, std::size_t rows, std::size_t cols);

double hermitian_defect(const ComplexMatrix& a);       // ||A - A*||_F
double unitary_defect(const ComplexMatrix& a);         // ||A*A - 1||_F
bool is_hermitian(const ComplexMatrix& a, const Tolerances& tol = {});
bool is_unitary(const ComplexMatrix& a, const Tolerances& tol = {});

struct HermEigResult {
  std::vector<double> eigenvalues;  // ascending
  ComplexMatrix vectors;            // unitary, columns are eigenvectors
};

// Cyclic Jacobi diagonalization of a Hermitian matrix. Rejects inputs with
// ||A - A*|| > assert_tol * ||A|| and reports the defect.
HermEigResult herm_eig(const ComplexMatrix& a, const Tolerances& tol = {});

double min_eigenvalue(const ComplexMatrix& hermitian, const Tolerances& tol = {});
bool is_positive_semidefinite(const ComplexMatrix& a, const Tolerances& tol = {});

struct SvdResult {
  ComplexMatrix u;                      // rows x rows, unitary
  std::vector<double> singular_values;  // descending, length min(rows, cols)
  ComplexMatrix v;                      // cols x cols, unitary
};

// SVD through the eigendecomposition of A*A with phase fix-up.
SvdResult svd(const ComplexMatrix& a, const Tolerances& tol = {});

double op_norm(const ComplexMatrix& a);
std::size_t numerical_rank(const ComplexMatrix& a, const Tolerances& tol = {});

// Orthonormal basis of ker(A) as matrix columns (cols x nullity).
ComplexMatrix nullspace(const ComplexMatrix& a, const Tolerances& tol = {});

// General (non-Hermitian) inverse by Gauss-Jordan with partial pivoting.
ComplexMatrix inverse(const ComplexMatrix& a, const Tolerances& tol = {});

// Spectral calculus for Hermitian matrices.
ComplexMatrix matrix_apply(const ComplexMatrix& a, const std::function<double(double)>& f,
                           const Tolerances& tol = {});
ComplexMatrix matrix_sqrt(const ComplexMatrix& a, const Tolerances& tol = {});
ComplexMatrix matrix_inv_sqrt(const ComplexMatrix& a, const Tolerances& tol = {});
ComplexMatrix matrix_inv(const ComplexMatrix& a, const Tolerances& tol = {});

struct SpectralInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_closed = true;
  bool hi_closed = true;

  static SpectralInterval closed(double lo, double hi) { return {lo, hi, true, true}; }
  static SpectralInterval open(double lo, double hi) { return {lo, hi, false, false}; }
};

struct SpectralProjectionResult {
  ComplexMatrix projection;
  // Eigenvalues within rank_tol of an interval endpoint; they were assigned
  // to the closed side and the ambiguity is recorded here.
  std::vector<double> boundary_eigenvalues;
};

SpectralProjectionResult spectral_projection(const ComplexMatrix& a, const SpectralInterval& iv,
                                             const Tolerances& tol = {});

struct LeastSquaresResult {
  std::vector<Complex> coefficients;
  double residual = 0.0;
};

// Minimize || sum_i c_i eval(basis_i) - target || over c. The basis is a list
// of operators, eval maps each to a vector; never fails, the residual tells.
LeastSquaresResult least_squares_in_subspace(
    const std::vector<ComplexMatrix>& basis,
    const std::function<ComplexMatrix(const ComplexMatrix&)>& eval, const ComplexMatrix& target,
    const Tolerances& tol = {});

// Antilinear operator xi |-> linear_part * conj(xi). Kept as the pair
// (linear part, entrywise conjugation) so composition rules stay explicit;
// never materialized over R^{2d}.
class AntilinearOp {
 public:
  explicit AntilinearOp(ComplexMatrix linear_part);
  static AntilinearOp entrywise_conjugation(std::size_t d);

  const ComplexMatrix& linear_part() const { return linear_part_; }
  std::size_t dim() const { return linear_part_.rows(); }

  ComplexMatrix apply(const ComplexMatrix& v) const;

  // Adjoint for the convention (T xi | eta) = (T* eta | xi): linear part
  // goes to its plain transpose, so (T*)* == T exactly in representation.
  AntilinearOp adjoint() const;

  AntilinearOp inverse(const Tolerances& tol = {}) const;

  // T1 ∘ T2 of two antilinear maps is linear: B1 * conj(B2).
  ComplexMatrix compose(const AntilinearOp& rhs) const;

  AntilinearOp after_linear(const ComplexMatrix& a) const;   // T ∘ a
  AntilinearOp before_linear(const ComplexMatrix& a) const;  // a ∘ T

  // T x T^{-1} for linear x; the result is linear again.
  ComplexMatrix sandwich(const ComplexMatrix& x, const Tolerances& tol = {}) const;

  double involution_defect() const;  // ||T^2 - 1||_F
  double isometry_defect() const;    // ||L* L - 1||_F
  bool is_conjugation(const Tolerances& tol = {}) const;

 private:
  ComplexMatrix linear_part_;
};

std::string format_complex(Complex z);

}  // namespace vnkit

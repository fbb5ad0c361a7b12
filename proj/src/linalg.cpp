#include "vnkit/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace vnkit {

namespace {

void check_finite(const std::vector<Complex>& data) {
  for (const Complex& z : data) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw std::invalid_argument("ComplexMatrix: non-finite entry on construction");
    }
  }
}

void check_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
  }
}

}  // namespace

void Tolerances::validate() const {
  if (!(rank_tol > 0.0) || !(assert_tol > 0.0) || retry_seeds <= 0) {
    throw std::invalid_argument("Tolerances must be strictly positive");
  }
}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, Complex(0.0)) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows_ * cols_) {
    throw std::invalid_argument("ComplexMatrix: entry count does not match shape");
  }
  check_finite(data_);
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) throw std::invalid_argument("ComplexMatrix: ragged initializer");
    data_.insert(data_.end(), row.begin(), row.end());
  }
  check_finite(data_);
}

ComplexMatrix ComplexMatrix::identity(std::size_t d) {
  ComplexMatrix m(d, d);
  for (std::size_t i = 0; i < d; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(const std::vector<double>& entries) {
  ComplexMatrix m(entries.size(), entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) m(i, i) = entries[i];
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(const std::vector<Complex>& entries) {
  ComplexMatrix m(entries.size(), entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) m(i, i) = entries[i];
  return m;
}

ComplexMatrix ComplexMatrix::column(const std::vector<Complex>& entries) {
  return ComplexMatrix(entries.size(), 1, entries);
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix m(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
  return m;
}

ComplexMatrix ComplexMatrix::transpose() const {
  ComplexMatrix m(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) m(j, i) = (*this)(i, j);
  return m;
}

ComplexMatrix ComplexMatrix::conjugate() const {
  ComplexMatrix m(rows_, cols_);
  for (std::size_t i = 0; i < data_.size(); ++i) m.data_[i] = std::conj(data_[i]);
  return m;
}

Complex ComplexMatrix::trace() const {
  if (!square()) throw std::invalid_argument("trace: matrix not square");
  Complex t = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
  return t;
}

double ComplexMatrix::frobenius_norm() const {
  double s = 0.0;
  for (const Complex& z : data_) s += std::norm(z);
  return std::sqrt(s);
}

double ComplexMatrix::max_abs() const {
  double s = 0.0;
  for (const Complex& z : data_) s = std::max(s, std::abs(z));
  return s;
}

bool ComplexMatrix::all_finite() const {
  for (const Complex& z : data_) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
  check_same_shape(*this, other, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
  check_same_shape(*this, other, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex scale) {
  for (Complex& z : data_) z *= scale;
  return *this;
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("operator*: inner dimension mismatch");
  ComplexMatrix out(a.rows(), b.cols());
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < k; ++t) {
      const Complex aik = a(i, t);
      if (aik == Complex(0.0)) continue;
      const Complex* brow = &b.entries()[t * m];
      Complex* orow = &out.entries()[i * m];
      for (std::size_t j = 0; j < m; ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

Complex hs_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  check_same_shape(a, b, "hs_inner");
  Complex s = 0.0;
  const auto& da = a.entries();
  const auto& db = b.entries();
  for (std::size_t i = 0; i < da.size(); ++i) s += da[i] * std::conj(db[i]);
  return s;
}

void add_scaled(ComplexMatrix& x, Complex c, const ComplexMatrix& y) {
  check_same_shape(x, y, "add_scaled");
  if (c == Complex(0.0)) return;
  auto& dx = x.entries();
  const auto& dy = y.entries();
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += c * dy[i];
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const Complex aij = a(i, j);
      if (aij == Complex(0.0)) continue;
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
    }
  return out;
}

ComplexMatrix vec(const ComplexMatrix& a) {
  ComplexMatrix v(a.rows() * a.cols(), 1);
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < a.rows(); ++i) v(j * a.rows() + i, 0) = a(i, j);
  return v;
}

ComplexMatrix unvec(const ComplexMatrix& v, std::size_t rows, std::size_t cols) {
  if (v.cols() != 1 || v.rows() != rows * cols) {
    throw std::invalid_argument("unvec: vector length does not match shape");
  }
  ComplexMatrix a(rows, cols);
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) a(i, j) = v(j * rows + i, 0);
  return a;
}

double hermitian_defect(const ComplexMatrix& a) { return (a - a.adjoint()).frobenius_norm(); }

double unitary_defect(const ComplexMatrix& a) {
  return (a.adjoint() * a - ComplexMatrix::identity(a.cols())).frobenius_norm();
}

bool is_hermitian(const ComplexMatrix& a, const Tolerances& tol) {
  const double scale = a.frobenius_norm();
  return hermitian_defect(a) <= tol.assert_tol * std::max(scale, 1.0);
}

bool is_unitary(const ComplexMatrix& a, const Tolerances& tol) {
  return unitary_defect(a) <= tol.assert_tol;
}

HermEigResult herm_eig(const ComplexMatrix& a, const Tolerances& tol) {
  tol.validate();
  if (!a.square()) throw std::invalid_argument("herm_eig: matrix not square");
  const std::size_t d = a.rows();
  const double scale = a.frobenius_norm();
  const double defect = hermitian_defect(a);
  if (defect > tol.assert_tol * std::max(scale, 1.0)) {
    std::ostringstream msg;
    msg << "herm_eig: input not Hermitian, defect " << defect << " vs scale " << scale;
    throw std::invalid_argument(msg.str());
  }

  // Work on the symmetrized copy so roundoff in the input cannot leak phases.
  ComplexMatrix b = (a + a.adjoint()) * 0.5;
  // The accumulated transform is kept transposed so every rotation touches
  // two contiguous rows; Hermitian symmetry supplies the column updates.
  ComplexMatrix vt = ComplexMatrix::identity(d);

  if (d > 1) {
    const int max_sweeps = 64;
    const double conv = 1e-14 * std::max(scale, 1e-300);
    const double skip = conv / (2.0 * static_cast<double>(d));
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
      double off = 0.0;
      for (std::size_t p = 0; p + 1 < d; ++p)
        for (std::size_t q = p + 1; q < d; ++q) off += 2.0 * std::norm(b(p, q));
      off = std::sqrt(off);
      if (off <= conv) break;

      for (std::size_t p = 0; p + 1 < d; ++p) {
        for (std::size_t q = p + 1; q < d; ++q) {
          const Complex beta = b(p, q);
          const double ab = std::abs(beta);
          if (ab <= skip) continue;
          const double app = b(p, p).real();
          const double aqq = b(q, q).real();

          // Phase reduction diag(1, conj(phase)) turns the 2x2 block real
          // symmetric; then the classical Jacobi rotation annihilates it.
          const Complex phase = beta / ab;
          const double tau = (aqq - app) / (2.0 * ab);
          double t;
          if (tau >= 0.0) {
            t = 1.0 / (tau + std::sqrt(1.0 + tau * tau));
          } else {
            t = -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
          }
          const double c = 1.0 / std::sqrt(1.0 + t * t);
          const double s = t * c;
          const Complex gqp = -s * std::conj(phase);   // G[q][p]
          const Complex gqq = c * std::conj(phase);    // G[q][q]
          const Complex gqp_c = std::conj(gqp);
          const Complex gqq_c = std::conj(gqq);

          Complex* rowp = &b.entries()[p * d];
          Complex* rowq = &b.entries()[q * d];
          for (std::size_t r = 0; r < d; ++r) {
            const Complex xp = rowp[r], xq = rowq[r];
            rowp[r] = c * xp + gqp_c * xq;
            rowq[r] = s * xp + gqq_c * xq;
          }
          // Column mix restricted to the rotated rows, then mirror the two
          // columns from the rows (B stays Hermitian).
          const Complex pp = c * rowp[p] + gqp * rowp[q];
          const Complex qq = s * rowq[p] + gqq * rowq[q];
          rowp[p] = pp.real();
          rowp[q] = 0.0;
          rowq[p] = 0.0;
          rowq[q] = qq.real();
          for (std::size_t r = 0; r < d; ++r) {
            if (r == p || r == q) continue;
            b(r, p) = std::conj(rowp[r]);
            b(r, q) = std::conj(rowq[r]);
          }
          Complex* vp = &vt.entries()[p * d];
          Complex* vq = &vt.entries()[q * d];
          for (std::size_t r = 0; r < d; ++r) {
            const Complex xp = vp[r], xq = vq[r];
            vp[r] = c * xp + gqp * xq;
            vq[r] = s * xp + gqq * xq;
          }
        }
      }
    }
    if (sweep == max_sweeps) {
      throw std::runtime_error("herm_eig: Jacobi sweeps failed to converge");
    }
  }

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return b(i, i).real() < b(j, j).real(); });

  HermEigResult out;
  out.eigenvalues.resize(d);
  out.vectors = ComplexMatrix(d, d);
  for (std::size_t k = 0; k < d; ++k) {
    out.eigenvalues[k] = b(order[k], order[k]).real();
    for (std::size_t r = 0; r < d; ++r) out.vectors(r, k) = vt(order[k], r);
  }
  return out;
}

double min_eigenvalue(const ComplexMatrix& hermitian, const Tolerances& tol) {
  if (hermitian.rows() == 0) return 0.0;
  return herm_eig(hermitian, tol).eigenvalues.front();
}

bool is_positive_semidefinite(const ComplexMatrix& a, const Tolerances& tol) {
  if (!is_hermitian(a, tol)) return false;
  const double scale = std::max(a.frobenius_norm(), 1.0);
  return min_eigenvalue((a + a.adjoint()) * 0.5, tol) >= -tol.assert_tol * scale;
}

SvdResult svd(const ComplexMatrix& a, const Tolerances& tol) {
  const std::size_t r = a.rows(), c = a.cols();
  const std::size_t k = std::min(r, c);
  SvdResult out;
  out.singular_values.assign(k, 0.0);
  out.u = ComplexMatrix::identity(r);
  out.v = ComplexMatrix::identity(c);
  if (r == 0 || c == 0) return out;

  const HermEigResult eig = herm_eig(a.adjoint() * a, tol);
  // The Gram eigendecomposition pins the right singular subspaces, but
  // squaring loses half the precision in the values, so each sigma is
  // recomputed as ||A v|| before the descending sort.
  std::vector<double> sigma_all(c, 0.0);
  std::vector<ComplexMatrix> av(c);
  for (std::size_t j = 0; j < c; ++j) {
    ComplexMatrix vj(c, 1);
    for (std::size_t i = 0; i < c; ++i) vj(i, 0) = eig.vectors(i, j);
    av[j] = a * vj;
    sigma_all[j] = av[j].frobenius_norm();
  }
  std::vector<std::size_t> order(c);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return sigma_all[i] > sigma_all[j]; });
  out.v = ComplexMatrix(c, c);
  for (std::size_t j = 0; j < c; ++j)
    for (std::size_t i = 0; i < c; ++i) out.v(i, j) = eig.vectors(i, order[j]);
  for (std::size_t j = 0; j < k; ++j) out.singular_values[j] = sigma_all[order[j]];

  // Left vectors u_j = A v_j / sigma_j where sigma is meaningfully nonzero,
  // then complete to a unitary with Gram-Schmidt over the standard basis.
  const double sigma_max = out.singular_values.empty() ? 0.0 : out.singular_values[0];
  const double split = sigma_max * 1e-13;
  std::vector<std::vector<Complex>> ucols;
  for (std::size_t j = 0; j < k && out.singular_values[j] > split && out.singular_values[j] > 0.0;
       ++j) {
    std::vector<Complex> u(r, Complex(0.0));
    const ComplexMatrix& avj = av[order[j]];
    for (std::size_t i = 0; i < r; ++i) u[i] = avj(i, 0) / out.singular_values[j];
    // One re-orthogonalization pass guards clustered singular values.
    for (const auto& prev : ucols) {
      Complex ip = 0.0;
      for (std::size_t i = 0; i < r; ++i) ip += u[i] * std::conj(prev[i]);
      for (std::size_t i = 0; i < r; ++i) u[i] -= ip * prev[i];
    }
    double nrm = 0.0;
    for (const Complex& z : u) nrm += std::norm(z);
    nrm = std::sqrt(nrm);
    if (nrm <= 0.0) break;
    for (Complex& z : u) z /= nrm;
    ucols.push_back(std::move(u));
  }
  while (ucols.size() < r) {
    // Greedy pick of the standard basis vector with the largest component
    // orthogonal to what we have; that component is at least 1/sqrt(r).
    std::vector<Complex> best;
    double best_nrm = -1.0;
    for (std::size_t e = 0; e < r; ++e) {
      std::vector<Complex> u(r, Complex(0.0));
      u[e] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& prev : ucols) {
          Complex ip = 0.0;
          for (std::size_t i = 0; i < r; ++i) ip += u[i] * std::conj(prev[i]);
          for (std::size_t i = 0; i < r; ++i) u[i] -= ip * prev[i];
        }
      }
      double nrm = 0.0;
      for (const Complex& z : u) nrm += std::norm(z);
      nrm = std::sqrt(nrm);
      if (nrm > best_nrm) {
        best_nrm = nrm;
        best = std::move(u);
      }
    }
    if (best_nrm <= 0.0) throw std::runtime_error("svd: unitary completion failed");
    for (Complex& z : best) z /= best_nrm;
    ucols.push_back(std::move(best));
  }
  out.u = ComplexMatrix(r, r);
  for (std::size_t j = 0; j < r; ++j)
    for (std::size_t i = 0; i < r; ++i) out.u(i, j) = ucols[j][i];
  return out;
}

double op_norm(const ComplexMatrix& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  const HermEigResult eig = herm_eig(a.adjoint() * a);
  return std::sqrt(std::max(0.0, eig.eigenvalues.back()));
}

std::size_t numerical_rank(const ComplexMatrix& a, const Tolerances& tol) {
  if (a.rows() == 0 || a.cols() == 0) return 0;
  const SvdResult s = svd(a, tol);
  const double smax = s.singular_values.empty() ? 0.0 : s.singular_values[0];
  if (smax <= tol.rank_tol) return 0;  // exact-zero matrices use the absolute cutoff
  std::size_t rank = 0;
  for (double sv : s.singular_values)
    if (sv > tol.rank_tol * smax) ++rank;
  return rank;
}

ComplexMatrix nullspace(const ComplexMatrix& a, const Tolerances& tol) {
  tol.validate();
  const std::size_t c = a.cols();
  const SvdResult s = svd(a, tol);
  const double smax = s.singular_values.empty() ? 0.0 : s.singular_values[0];
  std::size_t rank = 0;
  if (smax > tol.rank_tol) {
    for (double sv : s.singular_values)
      if (sv > tol.rank_tol * smax) ++rank;
  }
  ComplexMatrix basis(c, c - rank);
  for (std::size_t j = rank; j < c; ++j)
    for (std::size_t i = 0; i < c; ++i) basis(i, j - rank) = s.v(i, j);
  return basis;
}

ComplexMatrix inverse(const ComplexMatrix& a, const Tolerances& tol) {
  if (!a.square()) throw std::invalid_argument("inverse: matrix not square");
  const std::size_t d = a.rows();
  ComplexMatrix work = a;
  ComplexMatrix inv = ComplexMatrix::identity(d);
  const double pivot_floor = tol.rank_tol * std::max(a.max_abs(), 1e-300);
  for (std::size_t col = 0; col < d; ++col) {
    std::size_t piv = col;
    double best = std::abs(work(col, col));
    for (std::size_t r = col + 1; r < d; ++r) {
      const double cand = std::abs(work(r, col));
      if (cand > best) {
        best = cand;
        piv = r;
      }
    }
    if (best <= pivot_floor) {
      throw std::domain_error("inverse: matrix numerically singular");
    }
    if (piv != col) {
      for (std::size_t j = 0; j < d; ++j) {
        std::swap(work(col, j), work(piv, j));
        std::swap(inv(col, j), inv(piv, j));
      }
    }
    const Complex p = work(col, col);
    for (std::size_t j = 0; j < d; ++j) {
      work(col, j) /= p;
      inv(col, j) /= p;
    }
    for (std::size_t r = 0; r < d; ++r) {
      if (r == col) continue;
      const Complex f = work(r, col);
      if (f == Complex(0.0)) continue;
      for (std::size_t j = 0; j < d; ++j) {
        work(r, j) -= f * work(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

namespace {

ComplexMatrix assemble_from_eig(const HermEigResult& eig, const std::vector<double>& fvals) {
  const std::size_t d = eig.eigenvalues.size();
  ComplexMatrix out(d, d);
  for (std::size_t k = 0; k < d; ++k) {
    if (fvals[k] == 0.0) continue;
    for (std::size_t i = 0; i < d; ++i) {
      const Complex vik = eig.vectors(i, k);
      if (vik == Complex(0.0)) continue;
      for (std::size_t j = 0; j < d; ++j) {
        out(i, j) += fvals[k] * vik * std::conj(eig.vectors(j, k));
      }
    }
  }
  return out;
}

[[noreturn]] void domain_failure(const char* fname, double lambda) {
  std::ostringstream msg;
  msg << "matrix_function(" << fname << "): eigenvalue " << lambda << " outside domain";
  throw std::domain_error(msg.str());
}

}  // namespace

ComplexMatrix matrix_apply(const ComplexMatrix& a, const std::function<double(double)>& f,
                           const Tolerances& tol) {
  const HermEigResult eig = herm_eig(a, tol);
  std::vector<double> fvals(eig.eigenvalues.size());
  for (std::size_t k = 0; k < fvals.size(); ++k) fvals[k] = f(eig.eigenvalues[k]);
  return assemble_from_eig(eig, fvals);
}

ComplexMatrix matrix_sqrt(const ComplexMatrix& a, const Tolerances& tol) {
  const HermEigResult eig = herm_eig(a, tol);
  const double scale =
      eig.eigenvalues.empty()
          ? 0.0
          : std::max(std::abs(eig.eigenvalues.front()), std::abs(eig.eigenvalues.back()));
  std::vector<double> fvals(eig.eigenvalues.size());
  for (std::size_t k = 0; k < fvals.size(); ++k) {
    const double lambda = eig.eigenvalues[k];
    if (lambda < -tol.rank_tol * std::max(scale, 1.0)) domain_failure("sqrt", lambda);
    fvals[k] = std::sqrt(std::max(0.0, lambda));
  }
  return assemble_from_eig(eig, fvals);
}

ComplexMatrix matrix_inv_sqrt(const ComplexMatrix& a, const Tolerances& tol) {
  const HermEigResult eig = herm_eig(a, tol);
  const double scale = eig.eigenvalues.empty() ? 0.0 : std::abs(eig.eigenvalues.back());
  std::vector<double> fvals(eig.eigenvalues.size());
  for (std::size_t k = 0; k < fvals.size(); ++k) {
    const double lambda = eig.eigenvalues[k];
    if (lambda <= tol.rank_tol * std::max(scale, 1e-300)) domain_failure("inv_sqrt", lambda);
    fvals[k] = 1.0 / std::sqrt(lambda);
  }
  return assemble_from_eig(eig, fvals);
}

ComplexMatrix matrix_inv(const ComplexMatrix& a, const Tolerances& tol) {
  const HermEigResult eig = herm_eig(a, tol);
  double scale = 0.0;
  for (double lambda : eig.eigenvalues) scale = std::max(scale, std::abs(lambda));
  std::vector<double> fvals(eig.eigenvalues.size());
  for (std::size_t k = 0; k < fvals.size(); ++k) {
    const double lambda = eig.eigenvalues[k];
    if (std::abs(lambda) <= tol.rank_tol * std::max(scale, 1e-300)) domain_failure("inv", lambda);
    fvals[k] = 1.0 / lambda;
  }
  return assemble_from_eig(eig, fvals);
}

SpectralProjectionResult spectral_projection(const ComplexMatrix& a, const SpectralInterval& iv,
                                             const Tolerances& tol) {
  if (iv.hi < iv.lo) {  // empty interval
    SpectralProjectionResult out;
    out.projection = ComplexMatrix(a.rows(), a.cols());
    return out;
  }
  const HermEigResult eig = herm_eig(a, tol);
  double scale = 0.0;
  for (double lambda : eig.eigenvalues) scale = std::max(scale, std::abs(lambda));
  const double near = tol.rank_tol * std::max(scale, 1.0);

  SpectralProjectionResult out;
  std::vector<double> fvals(eig.eigenvalues.size(), 0.0);
  for (std::size_t k = 0; k < fvals.size(); ++k) {
    const double lambda = eig.eigenvalues[k];
    bool in;
    // Eigenvalues within rank_tol of an endpoint are treated as sitting on
    // it and assigned to the closed side; the ambiguity is recorded.
    if (std::abs(lambda - iv.lo) <= near) {
      in = iv.lo_closed;
      out.boundary_eigenvalues.push_back(lambda);
    } else if (std::abs(lambda - iv.hi) <= near) {
      in = iv.hi_closed;
      out.boundary_eigenvalues.push_back(lambda);
    } else {
      in = lambda > iv.lo && lambda < iv.hi;
    }
    fvals[k] = in ? 1.0 : 0.0;
  }
  out.projection = assemble_from_eig(eig, fvals);
  return out;
}

LeastSquaresResult least_squares_in_subspace(
    const std::vector<ComplexMatrix>& basis,
    const std::function<ComplexMatrix(const ComplexMatrix&)>& eval, const ComplexMatrix& target,
    const Tolerances& tol) {
  LeastSquaresResult out;
  out.coefficients.assign(basis.size(), Complex(0.0));
  if (target.cols() != 1) throw std::invalid_argument("least_squares_in_subspace: target not a column");
  if (basis.empty()) {
    out.residual = target.frobenius_norm();
    return out;
  }
  const std::size_t dim = target.rows();
  ComplexMatrix design(dim, basis.size());
  for (std::size_t j = 0; j < basis.size(); ++j) {
    const ComplexMatrix col = eval(basis[j]);
    if (col.rows() != dim || col.cols() != 1) {
      throw std::invalid_argument("least_squares_in_subspace: eval image shape mismatch");
    }
    for (std::size_t i = 0; i < dim; ++i) design(i, j) = col(i, 0);
  }
  const SvdResult s = svd(design, tol);
  const double smax = s.singular_values.empty() ? 0.0 : s.singular_values[0];
  const double cutoff = smax * tol.rank_tol;
  for (std::size_t k = 0; k < s.singular_values.size(); ++k) {
    const double sv = s.singular_values[k];
    if (sv <= cutoff || sv == 0.0) continue;
    Complex ut = 0.0;  // u_k^* target
    for (std::size_t i = 0; i < dim; ++i) ut += std::conj(s.u(i, k)) * target(i, 0);
    const Complex w = ut / sv;
    for (std::size_t j = 0; j < basis.size(); ++j) out.coefficients[j] += w * s.v(j, k);
  }
  ComplexMatrix fit(dim, 1);
  for (std::size_t j = 0; j < basis.size(); ++j)
    for (std::size_t i = 0; i < dim; ++i) fit(i, 0) += out.coefficients[j] * design(i, j);
  out.residual = (fit - target).frobenius_norm();
  return out;
}

AntilinearOp::AntilinearOp(ComplexMatrix linear_part) : linear_part_(std::move(linear_part)) {
  if (!linear_part_.square()) throw std::invalid_argument("AntilinearOp: linear part not square");
}

AntilinearOp AntilinearOp::entrywise_conjugation(std::size_t d) {
  return AntilinearOp(ComplexMatrix::identity(d));
}

ComplexMatrix AntilinearOp::apply(const ComplexMatrix& v) const {
  return linear_part_ * v.conjugate();
}

AntilinearOp AntilinearOp::adjoint() const { return AntilinearOp(linear_part_.transpose()); }

AntilinearOp AntilinearOp::inverse(const Tolerances& tol) const {
  return AntilinearOp(vnkit::inverse(linear_part_, tol).conjugate());
}

ComplexMatrix AntilinearOp::compose(const AntilinearOp& rhs) const {
  return linear_part_ * rhs.linear_part_.conjugate();
}

AntilinearOp AntilinearOp::after_linear(const ComplexMatrix& a) const {
  return AntilinearOp(linear_part_ * a.conjugate());
}

AntilinearOp AntilinearOp::before_linear(const ComplexMatrix& a) const {
  return AntilinearOp(a * linear_part_);
}

ComplexMatrix AntilinearOp::sandwich(const ComplexMatrix& x, const Tolerances& tol) const {
  return linear_part_ * x.conjugate() * vnkit::inverse(linear_part_, tol);
}

double AntilinearOp::involution_defect() const {
  return (linear_part_ * linear_part_.conjugate() - ComplexMatrix::identity(dim()))
      .frobenius_norm();
}

double AntilinearOp::isometry_defect() const { return unitary_defect(linear_part_); }

bool AntilinearOp::is_conjugation(const Tolerances& tol) const {
  return involution_defect() <= tol.assert_tol && isometry_defect() <= tol.assert_tol;
}

std::string format_complex(Complex z) {
  std::ostringstream os;
  os.precision(17);
  os << z.real();
  if (z.imag() >= 0.0) {
    os << "+" << z.imag() << "i";
  } else {
    os << z.imag() << "i";
  }
  return os.str();
}

}  // namespace vnkit

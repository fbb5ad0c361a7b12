#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "vnkit/linalg.hpp"
#include "vnkit/rng.hpp"

using namespace vnkit;

namespace {

// (a|b), linear in the first slot, as in the rest of the library.
Complex inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (b.adjoint() * a)(0, 0);
}

ComplexMatrix basis_vector(std::size_t d, std::size_t i) {
  ComplexMatrix e(d, 1);
  e(i, 0) = 1.0;
  return e;
}

}  // namespace

TEST_CASE("herm_eig diagonal input is sorted ascending with permutation vectors") {
  const ComplexMatrix a = ComplexMatrix::diagonal(std::vector<double>{3.0, 1.0});
  const HermEigResult eig = herm_eig(a);
  CHECK(eig.eigenvalues[0] == doctest::Approx(1.0));
  CHECK(eig.eigenvalues[1] == doctest::Approx(3.0));
  CHECK(std::abs(eig.vectors(1, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(eig.vectors(0, 1)) == doctest::Approx(1.0));
}

TEST_CASE("herm_eig identity") {
  const HermEigResult eig = herm_eig(ComplexMatrix::identity(4));
  for (double l : eig.eigenvalues) CHECK(l == doctest::Approx(1.0));
  CHECK(unitary_defect(eig.vectors) < 1e-12);
}

TEST_CASE("herm_eig reconstruction oracle on seeded Hermitian matrices") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    Rng rng(seed);
    for (std::size_t d : {2u, 5u, 9u, 16u}) {
      const ComplexMatrix a = gaussian_hermitian(d, rng);
      const HermEigResult eig = herm_eig(a);
      const ComplexMatrix lam = ComplexMatrix::diagonal(eig.eigenvalues);
      const double resid = (eig.vectors * lam * eig.vectors.adjoint() - a).frobenius_norm();
      CHECK(resid <= 1e-10 * a.frobenius_norm());
      CHECK(unitary_defect(eig.vectors) <= 1e-10);
      for (std::size_t k = 0; k + 1 < d; ++k)
        CHECK(eig.eigenvalues[k] <= eig.eigenvalues[k + 1]);
    }
  }
}

TEST_CASE("herm_eig rejects non-Hermitian input") {
  const ComplexMatrix a{{1.0, 2.0}, {0.0, 1.0}};
  CHECK_THROWS_AS(herm_eig(a), std::invalid_argument);
}

TEST_CASE("matrix_sqrt on diag(4,9)") {
  const ComplexMatrix s = matrix_sqrt(ComplexMatrix::diagonal(std::vector<double>{4.0, 9.0}));
  CHECK(std::abs(s(0, 0) - 2.0) < 1e-12);
  CHECK(std::abs(s(1, 1) - 3.0) < 1e-12);
}

TEST_CASE("sqrt squares back to A on random positive matrices") {
  Rng rng(7);
  for (std::size_t d : {3u, 6u, 10u}) {
    const ComplexMatrix a = random_positive(d, 0.1, 4.0, rng);
    const ComplexMatrix s = matrix_sqrt(a);
    CHECK((s * s - a).frobenius_norm() <= 1e-9 * a.frobenius_norm());
  }
}

TEST_CASE("matrix_inv_sqrt and matrix_inv reject out-of-domain spectra") {
  const ComplexMatrix sing = ComplexMatrix::diagonal(std::vector<double>{1.0, 0.0});
  CHECK_THROWS_AS(matrix_inv(sing), std::domain_error);
  CHECK_THROWS_AS(matrix_inv_sqrt(sing), std::domain_error);
  const ComplexMatrix neg = ComplexMatrix::diagonal(std::vector<double>{1.0, -2.0});
  CHECK_THROWS_AS(matrix_sqrt(neg), std::domain_error);
}

TEST_CASE("spectral projection onto [0,1] of diag(0.1, 0.5, 2)") {
  const ComplexMatrix a = ComplexMatrix::diagonal(std::vector<double>{0.1, 0.5, 2.0});
  const auto pr = spectral_projection(a, SpectralInterval::closed(0.0, 1.0));
  const ComplexMatrix expect = ComplexMatrix::diagonal(std::vector<double>{1.0, 1.0, 0.0});
  CHECK((pr.projection - expect).frobenius_norm() < 1e-12);
  CHECK(pr.boundary_eigenvalues.empty());
}

TEST_CASE("boundary eigenvalues go to the closed side and are recorded") {
  const ComplexMatrix a = ComplexMatrix::diagonal(std::vector<double>{0.0, 1.0, 2.0});
  const auto closed = spectral_projection(a, SpectralInterval::closed(0.0, 1.0));
  CHECK(std::abs(closed.projection.trace().real() - 2.0) < 1e-12);
  CHECK(closed.boundary_eigenvalues.size() == 2);
  const auto open = spectral_projection(a, SpectralInterval::open(0.0, 1.0));
  CHECK(std::abs(open.projection.trace().real() - 0.0) < 1e-12);
}

TEST_CASE("char projections of disjoint intervals are orthogonal") {
  Rng rng(11);
  const ComplexMatrix a = gaussian_hermitian(8, rng);
  const auto p1 = spectral_projection(a, SpectralInterval::closed(-10.0, 0.0));
  const auto p2 = spectral_projection(a, SpectralInterval::open(0.0, 10.0));
  CHECK(op_norm(p1.projection * p2.projection) <= 1e-8);
}

TEST_CASE("op_norm basics") {
  CHECK(op_norm(ComplexMatrix::diagonal(std::vector<double>{1.0, -3.0})) ==
        doctest::Approx(3.0));
  // rank one uv*: norm is ||u|| ||v||
  const ComplexMatrix u = ComplexMatrix::column({Complex(1.0), Complex(0.0, 2.0)});
  const ComplexMatrix v = ComplexMatrix::column({Complex(3.0), Complex(4.0)});
  const double expect = u.frobenius_norm() * v.frobenius_norm();
  CHECK(op_norm(u * v.adjoint()) == doctest::Approx(expect));
}

TEST_CASE("op_norm Gram identity on random matrices") {
  Rng rng(5);
  for (int rep = 0; rep < 4; ++rep) {
    const ComplexMatrix a = gaussian_matrix(6, 6, rng);
    const double lhs = op_norm(a) * op_norm(a);
    const double rhs = op_norm(a.adjoint() * a);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, rhs));
  }
}

TEST_CASE("nullspace basics") {
  const ComplexMatrix zero(3, 3);
  CHECK(nullspace(zero).cols() == 3);
  CHECK(nullspace(ComplexMatrix::identity(4)).cols() == 0);
  const ComplexMatrix ones{{1.0, 1.0}, {1.0, 1.0}};
  const ComplexMatrix ker = nullspace(ones);
  REQUIRE(ker.cols() == 1);
  // proportional to (1,-1)/sqrt(2)
  CHECK(std::abs(std::abs(ker(0, 0)) - 1.0 / std::sqrt(2.0)) < 1e-12);
  CHECK(std::abs(ker(0, 0) + ker(1, 0)) < 1e-12);
  CHECK((ones * ker).frobenius_norm() <= 1e-12);
}

TEST_CASE("nullspace columns are orthonormal and annihilated") {
  Rng rng(13);
  ComplexMatrix a = gaussian_matrix(6, 4, rng);
  // force rank 2: last two columns are combinations of the first two
  for (std::size_t i = 0; i < 6; ++i) {
    a(i, 2) = a(i, 0) + a(i, 1);
    a(i, 3) = a(i, 0) - 2.0 * a(i, 1);
  }
  const ComplexMatrix ker = nullspace(a);
  REQUIRE(ker.cols() == 2);
  CHECK(unitary_defect(ker) <= 1e-10);
  CHECK(op_norm(a * ker) <= 1e-9 * op_norm(a));
}

TEST_CASE("svd reconstructs rectangular matrices") {
  Rng rng(17);
  for (auto [r, c] : {std::pair<std::size_t, std::size_t>{5, 3}, {3, 5}, {4, 4}}) {
    const ComplexMatrix a = gaussian_matrix(r, c, rng);
    const SvdResult s = svd(a);
    ComplexMatrix sigma(r, c);
    for (std::size_t i = 0; i < s.singular_values.size(); ++i)
      sigma(i, i) = s.singular_values[i];
    CHECK((s.u * sigma * s.v.adjoint() - a).frobenius_norm() <= 1e-10 * a.frobenius_norm());
    CHECK(unitary_defect(s.u) <= 1e-10);
    CHECK(unitary_defect(s.v) <= 1e-10);
  }
}

TEST_CASE("least squares: target in range has tiny residual") {
  Rng rng(19);
  std::vector<ComplexMatrix> basis;
  for (int i = 0; i < 3; ++i) basis.push_back(gaussian_matrix(4, 4, rng));
  const ComplexMatrix x0 = gaussian_vector(4, rng);
  const auto eval = [&](const ComplexMatrix& b) { return b * x0; };
  ComplexMatrix target(4, 1);
  target += basis[0] * x0;
  target += (basis[1] * x0) * Complex(0.0, 2.0);
  const auto ls = least_squares_in_subspace(basis, eval, target);
  CHECK(ls.residual <= 1e-9 * target.frobenius_norm());
}

TEST_CASE("least squares: orthogonal target yields zero coefficients") {
  const std::vector<ComplexMatrix> basis = {ComplexMatrix{{1.0, 0.0}, {0.0, 0.0}}};
  const ComplexMatrix x0 = ComplexMatrix::column({Complex(1.0), Complex(0.0)});
  const auto eval = [&](const ComplexMatrix& b) { return b * x0; };
  const ComplexMatrix target = ComplexMatrix::column({Complex(0.0), Complex(1.0)});
  const auto ls = least_squares_in_subspace(basis, eval, target);
  CHECK(std::abs(ls.coefficients[0]) <= 1e-12);
  CHECK(ls.residual == doctest::Approx(1.0));
}

TEST_CASE("least squares agrees with the normal-equation oracle") {
  Rng rng(23);
  std::vector<ComplexMatrix> basis;
  for (int i = 0; i < 4; ++i) basis.push_back(gaussian_matrix(6, 6, rng));
  const ComplexMatrix x0 = gaussian_vector(6, rng);
  const ComplexMatrix target = gaussian_vector(6, rng);
  const auto eval = [&](const ComplexMatrix& b) { return b * x0; };
  const auto ls = least_squares_in_subspace(basis, eval, target);

  ComplexMatrix design(6, 4);
  for (std::size_t j = 0; j < 4; ++j) {
    const ComplexMatrix col = basis[j] * x0;
    for (std::size_t i = 0; i < 6; ++i) design(i, j) = col(i, 0);
  }
  const ComplexMatrix gram = design.adjoint() * design;
  const ComplexMatrix rhs = design.adjoint() * target;
  const ComplexMatrix sol = inverse(gram) * rhs;
  for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(ls.coefficients[j] - sol(j, 0)) <= 1e-8);
  const double oracle_resid = (design * sol - target).frobenius_norm();
  CHECK(std::abs(ls.residual - oracle_resid) <= 1e-9);
}

TEST_CASE("operator monotonicity of sqrt on random ordered pairs") {
  Rng rng(29);
  const Tolerances tol;
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t d = 2 + rep % 7;  // up to 8
    const ComplexMatrix a = random_positive(d, 0.05, 2.0, rng);
    const ComplexMatrix gap = random_positive(d, 0.05, 1.5, rng);
    const ComplexMatrix b = a + gap;  // 0 <= A <= B
    const double lo = min_eigenvalue(matrix_sqrt(b) - matrix_sqrt(a));
    CHECK(lo >= -tol.assert_tol);
  }
}

TEST_CASE("operator antitonicity of inverse on random ordered pairs") {
  Rng rng(31);
  const Tolerances tol;
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t d = 2 + rep % 7;
    const ComplexMatrix a = random_positive(d, 0.2, 2.0, rng);
    const ComplexMatrix b = a + random_positive(d, 0.1, 1.0, rng);
    const double lo = min_eigenvalue(matrix_inv(a) - matrix_inv(b));
    CHECK(lo >= -tol.assert_tol);
  }
}

TEST_CASE("antilinear composition is linear with the stated rule") {
  Rng rng(37);
  const AntilinearOp t1(gaussian_matrix(5, 5, rng));
  const AntilinearOp t2(gaussian_matrix(5, 5, rng));
  const ComplexMatrix composed = t1.compose(t2);
  const ComplexMatrix xi = gaussian_vector(5, rng);
  const ComplexMatrix lhs = t1.apply(t2.apply(xi));
  CHECK((lhs - composed * xi).frobenius_norm() <= 1e-12);
  CHECK((composed - t1.linear_part() * t2.linear_part().conjugate()).frobenius_norm() <= 1e-15);
}

TEST_CASE("antilinear adjoint pairing on basis vectors and exact involutivity") {
  Rng rng(41);
  const AntilinearOp t(gaussian_matrix(4, 4, rng));
  const AntilinearOp ts = t.adjoint();
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      const ComplexMatrix xi = basis_vector(4, i);
      const ComplexMatrix eta = basis_vector(4, j);
      // (T xi | eta) = (T* eta | xi) is the antilinear adjoint pairing.
      CHECK(std::abs(inner(t.apply(xi), eta) - inner(ts.apply(eta), xi)) <= 1e-13);
    }
  }
  const AntilinearOp tss = ts.adjoint();
  CHECK((tss.linear_part() - t.linear_part()).frobenius_norm() == 0.0);  // exact
}

TEST_CASE("entrywise conjugation is a conjugation and flips inner products") {
  Rng rng(43);
  const AntilinearOp j = AntilinearOp::entrywise_conjugation(3);
  CHECK(j.is_conjugation());
  const ComplexMatrix xi = gaussian_vector(3, rng);
  const ComplexMatrix eta = gaussian_vector(3, rng);
  CHECK(std::abs(inner(j.apply(xi), j.apply(eta)) - inner(eta, xi)) <= 1e-13);
}

TEST_CASE("antilinear sandwich T x T^{-1} is the stated linear map") {
  Rng rng(47);
  ComplexMatrix l = gaussian_matrix(4, 4, rng) + 3.0 * ComplexMatrix::identity(4);
  const AntilinearOp t(l);
  const ComplexMatrix x = gaussian_matrix(4, 4, rng);
  const ComplexMatrix sand = t.sandwich(x);
  const ComplexMatrix xi = gaussian_vector(4, rng);
  const ComplexMatrix lhs = t.apply(x * t.inverse().apply(xi));
  CHECK((lhs - sand * xi).frobenius_norm() <= 1e-10);
}

TEST_CASE("inverse round-trips and rejects singular input") {
  Rng rng(53);
  const ComplexMatrix a = gaussian_matrix(6, 6, rng) + 2.0 * ComplexMatrix::identity(6);
  const ComplexMatrix ai = inverse(a);
  CHECK((a * ai - ComplexMatrix::identity(6)).frobenius_norm() <= 1e-10);
  ComplexMatrix sing(3, 3);
  sing(0, 0) = 1.0;
  CHECK_THROWS_AS(inverse(sing), std::domain_error);
}

TEST_CASE("ComplexMatrix rejects non-finite entries on construction") {
  std::vector<Complex> bad = {Complex(1.0), Complex(std::nan(""), 0.0)};
  CHECK_THROWS_AS(ComplexMatrix(1, 2, bad), std::invalid_argument);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "vnkit/modular.hpp"
#include "vnkit/rng.hpp"

using namespace vnkit;

namespace {

StateDensity ambient_state(const ComplexMatrix& rho) { return StateDensity::from_density(rho); }

// Seeded faithful state with eigenvalues bounded away from zero.
StateDensity seeded_state(std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  ComplexMatrix rho = random_positive(d, 0.2, 2.0, rng);
  rho *= 1.0 / rho.trace().real();
  return StateDensity::from_density(rho);
}

ComplexMatrix lift(const Block& blk, const ComplexMatrix& n_side, const ComplexMatrix& m_side) {
  return blk.w.adjoint() * kron(n_side, m_side) * blk.w;
}

}  // namespace

TEST_CASE("gns for the tracial state on M2 has Delta = 1 and J = adjoint") {
  const VNAlgebra m = random_algebra({{2, 1}}, 3).algebra;
  const StateDensity tau = ambient_state(ComplexMatrix::identity(2) * 0.5);
  const GNSData g = gns(m, tau);
  CHECK(g.gns_dim == 4);
  CHECK((g.delta - ComplexMatrix::identity(4)).frobenius_norm() <= 1e-9);
  // J x_phi = (x*)_phi in the tracial case
  for (const ComplexMatrix& b : m.basis()) {
    const ComplexMatrix lhs = g.j_op.apply(g.lambda_vec(b));
    const ComplexMatrix rhs = g.lambda_vec(b.adjoint());
    CHECK((lhs - rhs).frobenius_norm() <= 1e-9);
  }
  CHECK(g.certificates.all_pass());
}

TEST_CASE("gns modular spectrum for rho = diag(0.2, 0.8) on M2") {
  const VNAlgebra m = random_algebra({{2, 1}}, 5).algebra;
  const StateDensity phi =
      ambient_state(ComplexMatrix::diagonal(std::vector<double>{0.2, 0.8}));
  const GNSData g = gns(m, phi);
  const HermEigResult eig = herm_eig(g.delta);
  REQUIRE(eig.eigenvalues.size() == 4);
  CHECK(eig.eigenvalues[0] == doctest::Approx(0.25).epsilon(1e-8));
  CHECK(eig.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(eig.eigenvalues[2] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(eig.eigenvalues[3] == doctest::Approx(4.0).epsilon(1e-8));
  CHECK(g.certificates.all_pass());
}

TEST_CASE("gns standard-form certificates hold on a small corpus") {
  const std::vector<std::vector<std::pair<std::size_t, std::size_t>>> corpus = {
      {{1, 1}}, {{2, 1}}, {{1, 3}}, {{2, 2}}, {{2, 3}}, {{2, 1}, {1, 2}}};
  std::uint64_t seed = 211;
  for (const auto& spec : corpus) {
    const VNAlgebra m = random_algebra(spec, seed++).algebra;
    const GNSData g = gns(m, seeded_state(m.ambient_dim(), seed++));
    INFO("corpus entry with dim ", m.dim());
    CHECK(g.certificates.all_pass());
    CHECK(g.certificates.find("gns.jmj_commutant") != nullptr);
  }
}

TEST_CASE("gns rejects a non-faithful state") {
  const VNAlgebra m = random_algebra({{2, 1}}, 7).algebra;
  const StateDensity bad =
      ambient_state(ComplexMatrix::diagonal(std::vector<double>{1.0, 0.0}));
  CHECK(!bad.faithful);
  CHECK_THROWS_AS(gns(m, bad), std::invalid_argument);
}

TEST_CASE("is_standard on balanced and unbalanced algebras") {
  const VNAlgebra balanced = random_algebra({{2, 2}}, 11).algebra;
  const auto rep = is_standard(balanced);
  CHECK(rep.standard);
  REQUIRE(rep.j.has_value());
  CHECK(rep.certificates.all_pass());

  const VNAlgebra scalars = generate_algebra({}, 1);
  const auto rep1 = is_standard(scalars);
  CHECK(rep1.standard);
  CHECK(rep1.j->is_conjugation());

  const VNAlgebra tall = random_algebra({{2, 3}}, 13).algebra;
  const auto rep2 = is_standard(tall);
  CHECK(!rep2.standard);
  CHECK(rep2.dim_m == 4);
  CHECK(rep2.dim_commutant == 9);
  CHECK(rep2.obstruction.find("unbalanced") != std::string::npos);
}

TEST_CASE("check_T_criterion accepts the constructed J and m'J variants") {
  const VNAlgebra m = random_algebra({{2, 2}, {1, 1}}, 17).algebra;
  const auto rep = is_standard(m);
  REQUIRE(rep.standard);
  const VNAlgebra mp = commutant(m);
  const auto base = check_T_criterion(m, *rep.j, mp);
  CHECK(base.passes);
  CHECK(base.conjugated_span_residual <= 1e-8);
  CHECK(base.central_residual <= 1e-8);

  Rng rng(219);
  int tried = 0;
  while (tried < 5) {
    ComplexMatrix mprime(m.ambient_dim(), m.ambient_dim());
    for (const ComplexMatrix& b : mp.basis()) mprime += rng.complex_gaussian() * b;
    const SvdResult s = svd(mprime);
    if (s.singular_values.back() < 1e-3 * s.singular_values.front()) continue;
    ++tried;
    const AntilinearOp t = rep.j->before_linear(mprime);  // m' J
    const auto res = check_T_criterion(m, t, mp);
    CHECK(res.passes);
  }
}

TEST_CASE("check_T_criterion dimension obstruction on unbalanced algebras") {
  const VNAlgebra m = random_algebra({{2, 3}}, 19).algebra;
  // any bijective antilinear operator; take plain conjugation
  const auto res = check_T_criterion(m, AntilinearOp::entrywise_conjugation(6));
  CHECK(!res.dimension_ok);
  CHECK(!res.passes);
}

TEST_CASE("check_T_criterion rejects singular T") {
  const VNAlgebra m = random_algebra({{2, 1}}, 23).algebra;
  ComplexMatrix sing(2, 2);
  sing(0, 0) = 1.0;
  CHECK_THROWS_AS(check_T_criterion(m, AntilinearOp(sing)), std::invalid_argument);
}

TEST_CASE("okayasu_correct with unitary T is trivial") {
  const VNAlgebra m = random_algebra({{2, 2}}, 29).algebra;
  Rng rng(301);
  // unitary normalizing M: exp through a product of unitaries in M and M'
  const Block& blk = m.structure().blocks[0];
  const ComplexMatrix u = lift(blk, haar_unitary(2, rng), haar_unitary(2, rng));
  const auto res = okayasu_correct(m, u);
  CHECK((res.m_factor - ComplexMatrix::identity(4)).frobenius_norm() <= 1e-7);
  CHECK((res.m_prime_factor - ComplexMatrix::identity(4)).frobenius_norm() <= 1e-7);
  CHECK((res.a - ComplexMatrix::identity(4)).frobenius_norm() <= 1e-7);
  CHECK(res.certificates.all_pass());
}

TEST_CASE("okayasu_correct recovers a constructed tensor factorization") {
  const VNAlgebra m = random_algebra({{2, 2}}, 31).algebra;
  const Block& blk = m.structure().blocks[0];
  const ComplexMatrix q = ComplexMatrix::diagonal(std::vector<double>{1.0, 2.0});
  const ComplexMatrix qp = ComplexMatrix::diagonal(std::vector<double>{1.0, 3.0});
  const ComplexMatrix t = lift(blk, matrix_sqrt(q), matrix_sqrt(qp));
  const auto res = okayasu_correct(m, t);
  CHECK(res.certificates.all_pass());
  CHECK(res.star_defect_after <= 1e-8);
  // factor recovered up to a reciprocal scalar pair
  const ComplexMatrix qlift = lift(blk, q, ComplexMatrix::identity(2));
  const double scale = hs_inner(res.m_factor, qlift).real() / std::norm(qlift.frobenius_norm());
  CHECK(scale > 0.0);
  CHECK((res.m_factor - scale * qlift).frobenius_norm() <= 1e-7);
  // a proportional to q^{-1/2}
  const ComplexMatrix ainv_lift = lift(blk, matrix_inv_sqrt(q), ComplexMatrix::identity(2));
  const double s2 = hs_inner(res.a, ainv_lift).real() / std::norm(ainv_lift.frobenius_norm());
  CHECK((res.a - s2 * ainv_lift).frobenius_norm() <= 1e-7);
}

TEST_CASE("okayasu_correct fixes the star defect on random normalizing T") {
  std::uint64_t seed = 400;
  int raw_defect_large = 0;
  for (int rep = 0; rep < 10; ++rep) {
    const VNAlgebra m = random_algebra({{2, 2}, {2, 2}}, seed++).algebra;
    Rng rng(seed++);
    ComplexMatrix t(m.ambient_dim(), m.ambient_dim());
    for (const Block& blk : m.structure().blocks) {
      const ComplexMatrix u = lift(blk, haar_unitary(blk.n, rng), haar_unitary(blk.m, rng));
      const ComplexMatrix pos = lift(blk, random_positive(blk.n, 0.4, 2.5, rng),
                                     random_positive(blk.m, 0.4, 2.5, rng));
      t += u * blk.p * matrix_sqrt(pos);
    }
    const auto res = okayasu_correct(m, t);
    CHECK(res.star_defect_after <= 1e-8);
    CHECK(res.certificates.all_pass());
    if (res.star_defect_before > 1e-2) ++raw_defect_large;
  }
  CHECK(raw_defect_large >= 9);  // non-vacuity: the raw conjugation is genuinely non-*
}

TEST_CASE("okayasu_correct rejects T that does not normalize M") {
  const VNAlgebra m = random_algebra({{2, 2}}, 37).algebra;
  Rng rng(303);
  const ComplexMatrix t = gaussian_matrix(4, 4, rng) + 3.0 * ComplexMatrix::identity(4);
  CHECK_THROWS_AS(okayasu_correct(m, t), std::invalid_argument);
}

TEST_CASE("spatial_implement accepts the identity map") {
  const VNAlgebra m = random_algebra({{2, 2}}, 41).algebra;
  const StarMap pi(m, m, [](const ComplexMatrix& x) { return x; });
  const auto res = spatial_implement(pi);
  CHECK(res.certificates.all_pass());
  // Ad_U restricted to M is the identity; U itself may be any unitary in M'.
  for (const ComplexMatrix& b : m.basis()) {
    CHECK((res.u * b * res.u.adjoint() - b).frobenius_norm() <= 1e-8);
  }
}

TEST_CASE("spatial_implement reproduces a unitary conjugation") {
  const VNAlgebra m = random_algebra({{2, 2}, {1, 1}}, 43).algebra;
  Rng rng(305);
  const ComplexMatrix v = haar_unitary(m.ambient_dim(), rng);
  std::vector<ComplexMatrix> images;
  for (const ComplexMatrix& b : m.basis()) images.push_back(v * b * v.adjoint());
  const VNAlgebra n = VNAlgebra::from_span(m.ambient_dim(), images, m.tol());
  const StarMap pi(m, n, [&](const ComplexMatrix& x) { return v * x * v.adjoint(); });
  const auto res = spatial_implement(pi);
  CHECK(res.certificates.all_pass());
  for (const ComplexMatrix& b : m.basis()) {
    CHECK((res.u * b * res.u.adjoint() - v * b * v.adjoint()).frobenius_norm() <= 1e-8);
  }
}

TEST_CASE("spatial_implement of Ad_{Ta} leaves U* T a in the commutant") {
  const VNAlgebra m = random_algebra({{2, 2}}, 47).algebra;
  Rng rng(307);
  const Block& blk = m.structure().blocks[0];
  const ComplexMatrix u0 = lift(blk, haar_unitary(2, rng), haar_unitary(2, rng));
  const ComplexMatrix pos =
      lift(blk, random_positive(2, 0.4, 2.0, rng), random_positive(2, 0.4, 2.0, rng));
  const ComplexMatrix t = u0 * matrix_sqrt(pos);
  const auto ok = okayasu_correct(m, t);
  REQUIRE(ok.star_defect_after <= 1e-8);
  const ComplexMatrix ta = t * ok.a;
  const StarMap pi(m, m, [&](const ComplexMatrix& x) { return ta * x * inverse(ta); });
  const auto res = spatial_implement(pi);
  CHECK(res.certificates.all_pass());
  // finite-dimensional shadow of the boundedness argument: U* (T a) commutes
  // with M elementwise, so it lies in the commutant
  const ComplexMatrix c = res.u.adjoint() * ta;
  const VNAlgebra mp = commutant(m);
  CHECK(mp.span_residual(c) <= 1e-8 * std::max(c.frobenius_norm(), 1.0));
}

TEST_CASE("spatial_implement rejects a non-star map") {
  const VNAlgebra m = random_algebra({{2, 2}}, 53).algebra;
  Rng rng(309);
  // conjugation by an invertible non-unitary that normalizes M but skews *
  const Block& blk = m.structure().blocks[0];
  const ComplexMatrix s = lift(blk, random_positive(2, 0.3, 3.0, rng), ComplexMatrix::identity(2));
  const StarMap pi(m, m, [&](const ComplexMatrix& x) { return s * x * inverse(s); });
  CHECK(pi.star_defect() > 1e-2);
  CHECK_THROWS_AS(spatial_implement(pi), std::invalid_argument);
}

TEST_CASE("cyclic_separating_split across block profiles") {
  const VNAlgebra balanced = random_algebra({{2, 2}, {1, 1}}, 59).algebra;
  const auto full = cyclic_separating_split(balanced);
  CHECK((full.p - ComplexMatrix::identity(balanced.ambient_dim())).frobenius_norm() <= 1e-9);
  CHECK(full.certificates.all_pass());

  const VNAlgebra mixed = random_algebra({{2, 3}, {3, 1}}, 61).algebra;
  const auto split = cyclic_separating_split(mixed);
  // cyclic side is exactly the (3,1) block
  double match = 1e300;
  for (const Block& blk : mixed.structure().blocks) {
    if (blk.n == 3) match = (split.p - blk.p).frobenius_norm();
  }
  CHECK(match <= 1e-8);
  CHECK(split.certificates.all_pass());
  CHECK(!split.cyclic_witness.empty());
  CHECK(!split.separating_witness.empty());

  const VNAlgebra scalars = generate_algebra({}, 2);
  const auto none = cyclic_separating_split(scalars);
  CHECK(none.p.frobenius_norm() <= 1e-12);  // separating only
  CHECK(!none.separating_witness.empty());
}

TEST_CASE("verify_intertwining on the identity representation") {
  const VNAlgebra m = random_algebra({{2, 2}}, 67).algebra;
  const VNAlgebra mp = commutant(m);
  const RealLinearMap phi = RealLinearMap::sample(m, [](const ComplexMatrix& x) { return x; });
  const ComplexMatrix t = mp.basis()[mp.dim() - 1];
  const auto rep = verify_intertwining(m, phi, t, t);
  CHECK(rep.max_residual <= 1e-10);
  CHECK(rep.joint_kernel_dim == 0);
}

TEST_CASE("verify_intertwining on a constructed Ad_U solution and its perturbation") {
  const VNAlgebra m = random_algebra({{2, 1}, {1, 2}}, 71).algebra;
  Rng rng(311);
  const ComplexMatrix u = haar_unitary(m.ambient_dim(), rng);
  const RealLinearMap phi =
      RealLinearMap::sample(m, [&](const ComplexMatrix& x) { return u * x * u.adjoint(); });
  const VNAlgebra mp = commutant(m);
  ComplexMatrix w(m.ambient_dim(), m.ambient_dim());
  for (const ComplexMatrix& b : mp.basis()) w += rng.complex_gaussian() * b;
  const ComplexMatrix t = u * w;
  const auto good = verify_intertwining(m, phi, t, t);
  CHECK(good.max_residual <= 1e-12 * std::max(1.0, t.frobenius_norm()));

  ComplexMatrix t2 = t;
  t2(0, 0) += 0.1;
  const auto bad = verify_intertwining(m, phi, t, t2);
  CHECK(bad.max_residual > 1e-3);  // no false pass
}

TEST_CASE("vector_functional_decomposition reproduces a vector functional") {
  const VNAlgebra m = random_algebra({{2, 2}}, 73).algebra;
  Rng rng(313);
  const ComplexMatrix zeta = gaussian_vector(4, rng);
  const StateDensity omega = StateDensity::from_density(zeta * zeta.adjoint());
  const auto dec = vector_functional_decomposition(m, omega);
  CHECK(dec.vectors.size() == 1);
  CHECK(dec.certificates.all_pass());
}

TEST_CASE("vector_functional_decomposition rank bounds") {
  // scalars on C^2 with a full-rank commutant density need 2 vectors
  const VNAlgebra scalars = generate_algebra({}, 2);
  Rng rng(317);
  const StateDensity rho2 = StateDensity::from_density(random_positive(2, 0.3, 1.0, rng));
  const auto two = vector_functional_decomposition(scalars, rho2);
  CHECK(two.vectors.size() == 2);
  CHECK(two.certificates.all_pass());

  // balanced M2 x 1_2: generic functional still needs only one vector
  const VNAlgebra m = random_algebra({{2, 2}}, 79).algebra;
  const StateDensity rho4 = StateDensity::from_density(random_positive(4, 0.2, 1.0, rng));
  const auto one = vector_functional_decomposition(m, rho4);
  CHECK(one.vectors.size() == 1);
  CHECK(one.certificates.all_pass());
}

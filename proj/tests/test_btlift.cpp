#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "vnkit/btlift.hpp"
#include "vnkit/rng.hpp"

using namespace vnkit;

namespace {

struct MadeInstance {
  VNAlgebra algebra;
  ComplexMatrix xi0;
  std::vector<ComplexMatrix> xis;
};

// xi_k = (random algebra element) xi0 with norms decaying like 2^{-k}.
MadeInstance seeded_vectors(const std::vector<std::pair<std::size_t, std::size_t>>& spec,
                            std::uint64_t seed, std::size_t kcount) {
  MadeInstance out;
  out.algebra = random_algebra(spec, seed).algebra;
  Rng rng(seed ^ 0xb7ull);
  const std::size_t d = out.algebra.ambient_dim();
  out.xi0 = gaussian_vector(d, rng);
  out.xi0 *= 1.0 / out.xi0.frobenius_norm();
  for (std::size_t k = 0; k < kcount; ++k) {
    ComplexMatrix op(d, d);
    for (const ComplexMatrix& b : out.algebra.basis()) op += rng.complex_gaussian() * b;
    ComplexMatrix xi = op * out.xi0;
    const double n = xi.frobenius_norm();
    if (n > 0.0) xi *= std::ldexp(1.0, -static_cast<int>(k)) / n;
    out.xis.push_back(xi);
  }
  return out;
}

}  // namespace

TEST_CASE("gamma_schedule single positive term") {
  const auto g = gamma_schedule({1.0, 0.0, 0.0, 0.0});
  REQUIRE(g.size() == 4);
  CHECK(g[0] == doctest::Approx(1.0));
  CHECK(g[1] == doctest::Approx(0.25));
  CHECK(g[2] == doctest::Approx(0.125));
  CHECK(g[3] == doctest::Approx(0.0625));
  CHECK(1.0 / g[0] == doctest::Approx(1.0));  // sum alpha_k/gamma_k = sqrt(T_1)
}

TEST_CASE("gamma_schedule zero input uses the dyadic branch") {
  const auto g = gamma_schedule({0.0, 0.0, 0.0});
  CHECK(g == std::vector<double>{0.5, 0.25, 0.125});
}

TEST_CASE("gamma_schedule rejects negative alphas") {
  CHECK_THROWS_AS(gamma_schedule({1.0, -0.5}), std::invalid_argument);
}

TEST_CASE("gamma_schedule telescoping identity for strictly positive alphas") {
  SUBCASE("geometric alphas 4^{-k}") {
    const std::size_t kmax = 8;
    std::vector<double> alphas(kmax);
    for (std::size_t k = 0; k < kmax; ++k) alphas[k] = std::ldexp(1.0, -2 * (static_cast<int>(k) + 1));
    const auto g = gamma_schedule(alphas);
    double sum = 0.0, t1 = 0.0;
    for (std::size_t k = 0; k < kmax; ++k) {
      sum += alphas[k] / g[k];
      t1 += alphas[k];
    }
    CHECK(std::abs(sum - std::sqrt(t1)) <= 1e-12 * std::sqrt(t1));
  }
  SUBCASE("long geometric run approaches sqrt(1/3) and gamma_1 the worked value") {
    const std::size_t kmax = 20;
    std::vector<double> alphas(kmax);
    for (std::size_t k = 0; k < kmax; ++k) alphas[k] = std::ldexp(1.0, -2 * (static_cast<int>(k) + 1));
    const auto g = gamma_schedule(alphas);
    CHECK(std::abs(g[0] - 0.8660254037844386) <= 1e-6);
    double sum = 0.0;
    for (std::size_t k = 0; k < kmax; ++k) sum += alphas[k] / g[k];
    CHECK(std::abs(sum - 0.5773502691896258) <= 1e-6);
  }
  SUBCASE("random positive alphas") {
    Rng rng(405);
    std::vector<double> alphas(12);
    for (double& a : alphas) a = 0.01 + rng.uniform01();
    const auto g = gamma_schedule(alphas);
    std::vector<double> tails(alphas.size() + 1, 0.0);
    for (std::size_t k = alphas.size(); k-- > 0;) tails[k] = alphas[k] + tails[k + 1];
    double sum = 0.0;
    for (std::size_t k = 0; k < alphas.size(); ++k) sum += alphas[k] / g[k];
    const double expect = std::sqrt(tails[0]) - std::sqrt(tails.back());
    CHECK(std::abs(sum - expect) <= 1e-12 * expect);
  }
}

TEST_CASE("approximants: zero vector gives zero corrections") {
  const auto made = seeded_vectors({{2, 1}}, 501, 0);
  const ComplexMatrix zero(made.algebra.ambient_dim(), 1);
  const BTInstance inst =
      BTInstance::make(made.algebra, made.xi0, {zero}, {1.0}, 4, ApproximantMode::Scheduled, 0.5);
  const auto res = approximants(inst);
  for (const auto& xj : res.x[0]) CHECK(xj.frobenius_norm() == 0.0);
  CHECK(res.certificates.all_pass());
}

TEST_CASE("approximants exact mode: one least-squares shot within the cap") {
  const auto made = seeded_vectors({{2, 2}}, 503, 2);
  const BTInstance inst = BTInstance::make(made.algebra, made.xi0, made.xis, {1.0, 1.0}, 5,
                                           ApproximantMode::Exact);
  const auto res = approximants(inst);
  CHECK(res.certificates.all_pass());
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(res.residuals[k][0] <= 1e-9 * made.xis[k].frobenius_norm());
    for (std::size_t j = 1; j <= 5; ++j) CHECK(res.x[k][j].frobenius_norm() == 0.0);
  }
}

TEST_CASE("approximants scheduled mode hits the damped residual exactly") {
  const auto made = seeded_vectors({{3, 2}}, 505, 1);
  const BTInstance inst =
      BTInstance::make(made.algebra, made.xi0, made.xis, {0.7}, 6, ApproximantMode::Scheduled, 0.5);
  const auto res = approximants(inst);
  CHECK(res.certificates.all_pass());
  const double norm0 = made.xis[0].frobenius_norm();
  for (std::size_t n = 0; n <= 6; ++n) {
    const double expect = 0.5 * norm0 / std::pow(4.0, static_cast<double>(n) + 2.0);
    CHECK(res.residuals[0][n] == doctest::Approx(expect).epsilon(1e-6));
  }
  // paper growth bounds, strict under the 1/2 schedule
  CHECK((res.x[0][0] * made.xi0).frobenius_norm() <= (17.0 / 16.0) * norm0);
  for (std::size_t n = 1; n <= 6; ++n) {
    CHECK((res.x[0][n] * made.xi0).frobenius_norm() <=
          5.0 / std::pow(4.0, static_cast<double>(n) + 2.0) * norm0);
  }
}

TEST_CASE("bt_lift closed-form scalar case") {
  const VNAlgebra scalars = generate_algebra({}, 1);
  const ComplexMatrix one = ComplexMatrix::column({Complex(1.0)});
  const BTInstance inst =
      BTInstance::make(scalars, one, {one}, {1.0}, 6, ApproximantMode::Exact);
  const auto res = bt_lift(inst);
  CHECK(res.certificates.all_pass());
  CHECK(std::abs(res.a(0, 0).real() - 1.0 / std::sqrt(5.0)) <= 1e-12);
  CHECK(std::abs(res.eta0(0, 0).real() - std::sqrt(5.0)) <= 1e-12);
  CHECK(std::abs(op_norm(res.bs[0]) - 0.4472135954999579) <= 1e-12);
  CHECK(op_norm(res.bs[0]) <= 1.0);  // sqrt(gamma_1)
  // ||y xi0||^2 = 5 <= 1 + 5 = c^2
  CHECK(std::abs(res.yp_norms.back() * res.yp_norms.back() - 5.0) <= 1e-10);
  CHECK(std::abs(res.c_bound * res.c_bound - 6.0) <= 1e-12);
}

TEST_CASE("bt_lift with an empty sequence is trivial") {
  const auto made = seeded_vectors({{2, 1}}, 507, 0);
  const BTInstance inst = BTInstance::make(made.algebra, made.xi0, {}, {}, 6);
  const auto res = bt_lift(inst);
  CHECK(res.certificates.all_pass());
  CHECK((res.a - ComplexMatrix::identity(2)).frobenius_norm() <= 1e-10);
  CHECK((res.eta0 - made.xi0).frobenius_norm() <= 1e-10);
  CHECK(res.bs.empty());
}

TEST_CASE("bt_lift full certificate chain on a random (3,3) instance") {
  const auto made = seeded_vectors({{3, 3}}, 509, 6);
  std::vector<double> alphas;
  for (const ComplexMatrix& xi : made.xis) alphas.push_back(std::norm(xi.frobenius_norm()));
  const BTInstance inst = BTInstance::make(made.algebra, made.xi0, made.xis,
                                           gamma_schedule(alphas), 6, ApproximantMode::Scheduled,
                                           0.5);
  const auto res = bt_lift(inst);
  for (const Certificate& c : res.certificates.items()) {
    INFO(c.name, " ", c.detail, ": ", c.measured, " vs ", c.bound);
    CHECK(c.pass);
  }
  // b_k eta0 reproduces xi_k up to the truncation tail
  for (std::size_t k = 0; k < made.xis.size(); ++k) {
    const double tail = made.xis[k].frobenius_norm() / std::pow(4.0, 8.0);
    CHECK((res.bs[k] * res.eta0 - made.xis[k]).frobenius_norm() <= tail + 1e-8);
  }
}

TEST_CASE("bt_lift exact and scheduled modes both satisfy every certificate") {
  const auto made = seeded_vectors({{2, 2}, {1, 1}}, 511, 4);
  std::vector<double> gammas(4, 0.8);
  for (const auto mode : {ApproximantMode::Exact, ApproximantMode::Scheduled}) {
    const BTInstance inst =
        BTInstance::make(made.algebra, made.xi0, made.xis, gammas, 6, mode, 0.5);
    const auto res = bt_lift(inst);
    CHECK(res.certificates.all_pass());
  }
}

TEST_CASE("bt_lift rejects vectors outside the orbit closure") {
  // scalars on C^2: span(M xi0) is the line through xi0
  const VNAlgebra scalars = generate_algebra({}, 2);
  const ComplexMatrix xi0 = ComplexMatrix::column({Complex(1.0), Complex(0.0)});
  const ComplexMatrix off = ComplexMatrix::column({Complex(0.0), Complex(1.0)});
  CHECK_THROWS_AS(BTInstance::make(scalars, xi0, {off}, {1.0}), std::invalid_argument);
}

TEST_CASE("bt_convergence_run drives the lifted norms to zero") {
  const auto made = seeded_vectors({{2, 2}}, 513, 6);
  const auto res = bt_convergence_run(made.algebra, made.xi0, made.xis);
  CHECK(res.certificates.all_pass());
  CHECK(res.lift.certificates.all_pass());
  for (std::size_t k = 0; k < res.gammas.size(); ++k) {
    CHECK(res.gammas[k] > 0.0);
    // ||xi_k|| ~ 2^{-k}: the schedule and hence ||b_k|| decay geometrically
    CHECK(res.gammas[k] <= 2.1 * std::ldexp(1.0, -static_cast<int>(k)));
    CHECK(op_norm(res.lift.bs[k]) <= std::sqrt(res.gammas[k]) + 1e-8);
  }
}

TEST_CASE("bt_convergence_run classical special case and all-zero case") {
  const auto made = seeded_vectors({{2, 1}}, 517, 1);
  const std::size_t d = made.algebra.ambient_dim();
  std::vector<ComplexMatrix> xis = {made.xis[0], ComplexMatrix(d, 1), ComplexMatrix(d, 1)};
  const auto res = bt_convergence_run(made.algebra, made.xi0, xis);
  CHECK(res.certificates.all_pass());
  CHECK(op_norm(res.lift.bs[1]) <= 1e-12);
  CHECK(op_norm(res.lift.bs[2]) <= 1e-12);
  CHECK((res.lift.bs[0] * res.lift.eta0 - made.xis[0]).frobenius_norm() <=
        made.xis[0].frobenius_norm() / std::pow(4.0, 8.0) + 1e-8);

  std::vector<ComplexMatrix> zeros(3, ComplexMatrix(d, 1));
  const auto res0 = bt_convergence_run(made.algebra, made.xi0, zeros);
  CHECK(res0.certificates.all_pass());
  for (const ComplexMatrix& b : res0.lift.bs) CHECK(b.frobenius_norm() <= 1e-12);
}

#include "vnkit/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "vnkit/rng.hpp"

namespace vnkit {

namespace {

void check_positive_in(const ComplexMatrix& x, const VNAlgebra& m, const char* what) {
  const Tolerances& tol = m.tol();
  const double scale = std::max(x.frobenius_norm(), 1.0);
  if (hermitian_defect(x) > tol.assert_tol * scale ||
      min_eigenvalue((x + x.adjoint()) * 0.5, tol) < -tol.assert_tol * scale) {
    throw std::invalid_argument(std::string(what) + ": not positive semidefinite");
  }
  if (m.span_residual(x) > tol.assert_tol * scale) {
    throw std::invalid_argument(std::string(what) + ": not in the algebra");
  }
}

ComplexMatrix random_element(const VNAlgebra& m, Rng& rng) {
  ComplexMatrix x(m.ambient_dim(), m.ambient_dim());
  for (const ComplexMatrix& b : m.basis()) add_scaled(x, rng.complex_gaussian(), b);
  return x;
}

}  // namespace

Complex TraceData::value(const ComplexMatrix& x) const {
  Complex s = 0.0;
  const auto& blocks = algebra.structure().blocks;
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    s += (x * blocks[bi].p).trace() * block_weights[bi];
  }
  return s;
}

TraceData canonical_trace(const VNAlgebra& m) {
  const Tolerances& tol = m.tol();
  TraceData out;
  out.algebra = m;
  for (const Block& blk : m.structure().blocks) {
    out.block_weights.push_back(1.0 / static_cast<double>(blk.m));
  }
  // Normalization: value 1 on a minimal projection of each block.
  double norm_defect = 0.0;
  for (std::size_t bi = 0; bi < m.structure().blocks.size(); ++bi) {
    const ComplexMatrix e = m.block_unit(bi, 0, 0);
    norm_defect = std::max(norm_defect, std::abs(out.value(e) - Complex(1.0)));
  }
  out.certificates.add("trace.minimal_normalization", norm_defect, tol.assert_tol);
  // Tracial property on basis pairs and positivity on a squared sample.
  double tracial = 0.0;
  for (const ComplexMatrix& a : m.basis())
    for (const ComplexMatrix& b : m.basis()) {
      tracial = std::max(tracial, std::abs(out.value(a * b) - out.value(b * a)));
    }
  out.certificates.add("trace.tracial", tracial, tol.assert_tol);
  Rng rng(0x7a11);
  double min_pos = 0.0;
  for (int rep = 0; rep < 16; ++rep) {
    const ComplexMatrix x = random_element(m, rng);
    min_pos = std::min(min_pos, out.value(x.adjoint() * x).real());
  }
  out.certificates.add("trace.positive", -min_pos, tol.assert_tol);
  return out;
}

PTDerivative pt_derivative(const VNAlgebra& m, const StateDensity& phi) {
  const Tolerances& tol = m.tol();
  if (phi.rho.rows() != m.ambient_dim()) {
    throw std::invalid_argument("pt_derivative: density shape mismatch");
  }
  const TraceData tau = canonical_trace(m);
  const std::size_t n = m.dim();
  // tau(A B_i) = phi(B_i) as a linear system over the coordinates of A.
  ComplexMatrix system(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < n; ++a) system(i, a) = tau.value(m.basis()[a] * m.basis()[i]);
  std::vector<Complex> rhs(n);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = phi.value(m.basis()[i]);
  const ComplexMatrix sol = inverse(system, tol) * ComplexMatrix::column(rhs);
  std::vector<Complex> coords(n);
  for (std::size_t i = 0; i < n; ++i) coords[i] = sol(i, 0);

  PTDerivative out;
  ComplexMatrix a = m.from_coords(coords);
  out.certificates.add("pt.hermitian", hermitian_defect(a),
                       tol.assert_tol * std::max(a.frobenius_norm(), 1.0));
  a = (a + a.adjoint()) * 0.5;
  out.a = a;
  out.certificates.add("pt.in_algebra", m.span_residual(a),
                       tol.assert_tol * std::max(a.frobenius_norm(), 1.0));

  const HermEigResult eig = herm_eig(a, tol);
  out.lambda_min = eig.eigenvalues.front();
  const double lam_max = std::max(eig.eigenvalues.back(), 1e-300);
  const bool faithful = out.lambda_min >= tol.rank_tol * lam_max;
  // phi faithful iff A injective; the lambda certificate is the verdict.
  out.certificates.add("pt.faithful_lambda", tol.rank_tol * lam_max - out.lambda_min, 0.0,
                       "lambda_min=" + std::to_string(out.lambda_min));
  if (!faithful) {
    out.kernel_witness =
        spectral_projection(a, SpectralInterval::closed(out.lambda_min - 1.0,
                                                        tol.rank_tol * lam_max),
                            tol)
            .projection;
  }

  // Reproduction phi(x) = tau(A^{1/2} x A^{1/2}) on the basis (the
  // symmetric form needs the positive square root, so clamp tiny negatives).
  double repro = 0.0;
  if (out.lambda_min > -tol.assert_tol * lam_max) {
    const ComplexMatrix root =
        matrix_apply(a, [](double l) { return std::sqrt(std::max(l, 0.0)); }, tol);
    for (const ComplexMatrix& b : m.basis()) {
      repro = std::max(repro, std::abs(tau.value(root * b * root) - phi.value(b)));
    }
  } else {
    repro = std::numeric_limits<double>::infinity();
  }
  const double scale = std::max(phi.rho.frobenius_norm(), 1.0);
  out.certificates.add("pt.reproduces", repro, tol.assert_tol * scale);
  return out;
}

double pt_weight_cutoff(const TraceData& tau, const ComplexMatrix& a, const ComplexMatrix& b,
                        double k) {
  const VNAlgebra& m = tau.algebra;
  check_positive_in(a, m, "pt_weight_cutoff(A)");
  check_positive_in(b, m, "pt_weight_cutoff(b)");
  const Tolerances& tol = m.tol();
  const ComplexMatrix cutoff = spectral_projection(a, SpectralInterval::closed(0.0, k), tol).projection;
  const ComplexMatrix broot = matrix_sqrt((b + b.adjoint()) * 0.5, tol);
  return tau.value(broot * (a * cutoff) * broot).real();
}

SupRatioResult sup_ratio(const VNAlgebra& m, const StateDensity& phi, std::size_t samples,
                         std::uint64_t seed) {
  const Tolerances& tol = m.tol();
  const PTDerivative ptd = pt_derivative(m, phi);
  if (!(ptd.lambda_min > 0.0)) {
    throw std::invalid_argument("sup_ratio: phi is not faithful on M (derivative singular)");
  }
  SupRatioResult out;
  out.value = 1.0 / ptd.lambda_min;
  out.certificates.merge(ptd.certificates);

  // Witness: a minimal projection of M under the lambda_min eigenspace of A,
  // located in the block where the minimum is attained.
  const auto& blocks = m.structure().blocks;
  double best_gap = 1e300;
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const Block& blk = blocks[bi];
    const ComplexMatrix an = factor_component(blk.w * ptd.a * blk.w.adjoint(), blk.n, blk.m);
    const HermEigResult eig = herm_eig(an, tol);
    const double gap = eig.eigenvalues.front() - ptd.lambda_min;
    if (gap < best_gap) {
      best_gap = gap;
      ComplexMatrix u(blk.n, 1);
      for (std::size_t i = 0; i < blk.n; ++i) u(i, 0) = eig.vectors(i, 0);
      out.witness =
          blk.w.adjoint() * kron(u * u.adjoint(), ComplexMatrix::identity(blk.m)) * blk.w;
    }
  }
  out.witness_ratio = op_norm(out.witness) / phi.value(out.witness).real();
  out.certificates.add("supratio.witness_match", std::abs(out.witness_ratio - out.value),
                       tol.assert_tol * std::max(out.value, 1.0));
  out.certificates.add("supratio.lambda_identity", std::abs(out.value * ptd.lambda_min - 1.0),
                       tol.assert_tol);

  Rng rng(seed ^ 0x5faull);
  double best = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const ComplexMatrix x = random_element(m, rng);
    const ComplexMatrix b = x.adjoint() * x;
    const double denom = phi.value(b).real();
    if (denom <= 0.0) continue;
    best = std::max(best, op_norm(b) / denom);
  }
  out.search_max = std::max(best, out.witness_ratio);
  out.certificates.add("supratio.search_below", out.search_max - out.value,
                       tol.assert_tol * std::max(out.value, 1.0));
  return out;
}

WeightReport check_complement_conditions(const VNAlgebra& m, const StateDensity& phi,
                                         std::uint64_t seed) {
  const Tolerances& tol = m.tol();
  const std::size_t n = m.dim();
  WeightReport out;

  // (ii): surjectivity of x -> x_phi, i.e. the phi Gram form has full rank.
  ComplexMatrix gram(n, n);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t a = 0; a < n; ++a)
      gram(b, a) = phi.value(m.basis()[b].adjoint() * m.basis()[a]);
  gram = (gram + gram.adjoint()) * 0.5;
  const HermEigResult geig = herm_eig(gram, tol);
  const double glam = std::max(geig.eigenvalues.back(), 1e-300);
  out.cond_ii = geig.eigenvalues.front() >= tol.rank_tol * glam;
  out.certificates.add_flag("weights.cond_ii_rank", out.cond_ii,
                            out.cond_ii ? "" : "Gram kernel witness available");

  const PTDerivative ptd = pt_derivative(m, phi);
  out.derivative = ptd.a;
  out.lambda_min = ptd.lambda_min;
  out.cond_iii = ptd.lambda_min > 0.0;
  if (out.cond_iii) {
    out.sup_ratio_value = 1.0 / ptd.lambda_min;
    out.closed_graph_c = std::sqrt(out.sup_ratio_value);
  } else {
    out.sup_ratio_value = std::numeric_limits<double>::infinity();
    out.closed_graph_c = std::numeric_limits<double>::infinity();
  }
  out.certificates.add_flag("weights.cond_iii_finite", out.cond_iii);

  // (iv): corners eMe are finite-dimensional; report dims over a sample of
  // projections (block units and spectral projections of random elements).
  Rng rng(seed ^ 0x1dall);
  std::vector<ComplexMatrix> sample_projs;
  for (std::size_t bi = 0; bi < m.structure().blocks.size(); ++bi) {
    sample_projs.push_back(m.block_unit(bi, 0, 0));
  }
  for (int rep = 0; rep < 2; ++rep) {
    ComplexMatrix h = random_element(m, rng);
    h = (h + h.adjoint()) * 0.5;
    sample_projs.push_back(
        spectral_projection(h, SpectralInterval::closed(0.0, 1e300), tol).projection);
  }
  for (const ComplexMatrix& e : sample_projs) {
    std::vector<ComplexMatrix> corner;
    corner.reserve(n);
    for (const ComplexMatrix& b : m.basis()) corner.push_back(e * b * e);
    out.corner_dims.push_back(hs_orthonormalize(corner, tol).size());
  }
  out.cond_iv = true;
  out.certificates.add_flag("weights.cond_iv_finite_corners", out.cond_iv);

  // (v): type-I block decomposition exists by construction; the quantitative
  // content is phi >= lambda (+ of the canonical traces), sampled on
  // positive elements against the analytic lambda.
  const TraceData tau = canonical_trace(m);
  double worst_gap = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const ComplexMatrix x = random_element(m, rng);
    const ComplexMatrix b = x.adjoint() * x;
    worst_gap = std::min(worst_gap,
                         phi.value(b).real() - out.lambda_min * tau.value(b).real());
  }
  out.cond_v = out.cond_iii;
  out.certificates.add("weights.cond_v_domination", -worst_gap,
                       tol.assert_tol * std::max(phi.rho.frobenius_norm(), 1.0));

  if (out.cond_iii) {
    out.certificates.add("weights.closed_graph_consistency",
                         std::abs(out.closed_graph_c * out.closed_graph_c - out.sup_ratio_value),
                         tol.assert_tol * std::max(out.sup_ratio_value, 1.0));
    out.certificates.add("weights.lambda_supratio",
                         std::abs(out.lambda_min * out.sup_ratio_value - 1.0), tol.assert_tol);
    // ||x|| <= c phi(x*x)^{1/2} on a sample, with near-equality at the
    // lambda_min witness.
    double excess = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
      const ComplexMatrix x = random_element(m, rng);
      excess = std::max(excess, op_norm(x) - out.closed_graph_c *
                                                 std::sqrt(phi.value(x.adjoint() * x).real()));
    }
    out.certificates.add("weights.closed_graph_bound", excess, tol.assert_tol);
    const SupRatioResult sup = sup_ratio(m, phi, 0, seed);
    const double w_norm = op_norm(sup.witness);
    const double w_bound =
        out.closed_graph_c * std::sqrt(phi.value(sup.witness.adjoint() * sup.witness).real());
    out.certificates.add("weights.closed_graph_tight", std::abs(w_norm - w_bound),
                         tol.assert_tol * std::max(w_norm, 1.0));
  }
  return out;
}

TwoNormResult two_norm_equivalence(const VNAlgebra& m, const ComplexMatrix& t,
                                   std::size_t samples, std::uint64_t seed) {
  const Tolerances& tol = m.tol();
  if (t.rows() != m.ambient_dim() || !t.square()) {
    throw std::invalid_argument("two_norm_equivalence: T shape mismatch");
  }
  const SvdResult ts = svd(t, tol);
  const double smax = ts.singular_values.front();
  const double smin = ts.singular_values.back();
  if (smin < tol.rank_tol * std::max(smax, 1e-300)) {
    throw std::invalid_argument("two_norm_equivalence: T is singular");
  }
  TwoNormResult out;
  out.kappa = smax / smin;
  const ComplexMatrix tinv = inverse(t, tol);

  std::vector<ComplexMatrix> sample;
  for (const ComplexMatrix& b : m.basis()) sample.push_back(b);
  // matrix units are the extremal candidates under diagonal-like T
  for (std::size_t bi = 0; bi < m.structure().blocks.size(); ++bi) {
    const Block& blk = m.structure().blocks[bi];
    for (std::size_t i = 0; i < blk.n; ++i)
      for (std::size_t j = 0; j < blk.n; ++j) sample.push_back(m.block_unit(bi, i, j));
  }
  Rng rng(seed ^ 0x2401ull);
  for (std::size_t s = 0; s < samples; ++s) sample.push_back(random_element(m, rng));

  out.c1 = 1e300;
  out.c2 = 0.0;
  for (const ComplexMatrix& x : sample) {
    const double nx = op_norm(x);
    if (nx <= tol.rank_tol) continue;
    const double ratio = op_norm(t * x * tinv) / nx;
    out.c1 = std::min(out.c1, ratio);
    out.c2 = std::max(out.c2, ratio);
  }
  out.certificates.add("twonorm.upper_envelope", out.c2, out.kappa * (1.0 + tol.assert_tol));
  out.certificates.add("twonorm.lower_envelope", 1.0 / out.kappa - out.c1, tol.assert_tol);
  return out;
}

}  // namespace vnkit

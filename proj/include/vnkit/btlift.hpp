#pragma once

// The quantitative lift: vectors xi_k in the closure of M xi_0 become
// operators b_k with a xi_0-compatible positive contraction a and the norm
// control ||b_k|| <= sqrt(gamma_k). Every inequality of the construction is
// emitted as a named certificate; a violated certificate is a hard failure
// for callers, not a silent downgrade.

#include <cstddef>
#include <vector>

#include "vnkit/algebra.hpp"
#include "vnkit/linalg.hpp"
#include "vnkit/report.hpp"

namespace vnkit {

enum class ApproximantMode { Exact, Scheduled };

struct BTInstance {
  VNAlgebra algebra;
  ComplexMatrix xi0;
  std::vector<ComplexMatrix> xis;
  std::vector<double> gammas;
  std::size_t depth = 6;  // truncation J_max of the correction series
  ApproximantMode mode = ApproximantMode::Scheduled;
  double beta = 0.5;  // scheduled-mode residual fraction, in (0,1)

  // Validates shapes, positive gammas, beta, and membership of each xi_k in
  // span(M xi0) at rank tolerance.
  static BTInstance make(VNAlgebra algebra, ComplexMatrix xi0, std::vector<ComplexMatrix> xis,
                         std::vector<double> gammas, std::size_t depth = 6,
                         ApproximantMode mode = ApproximantMode::Scheduled, double beta = 0.5);
};

// gamma_k = sqrt(T_k) + sqrt(T_{k+1}) for positive alpha_k (T the tail sums,
// computed backward), 2^{-k} on the zero branch; 1-based k as usual.
std::vector<double> gamma_schedule(const std::vector<double>& alphas);

struct ApproximantResult {
  std::vector<std::vector<ComplexMatrix>> x;    // x[k][j], j = 0..depth
  std::vector<std::vector<double>> residuals;   // ||xi_k - sum_{j<=n} x_{k,j} xi0||
  CertificateSet certificates;
};

// Correction sequences with the residual cap ||xi_k - sum_{j<=n} x_{k,j}xi0||
// <= ||xi_k|| / 4^{n+2}. Exact mode solves once and pads with zeros;
// scheduled mode damps each exact correction so the residual sits at
// beta * ||xi_k|| / 4^{n+2}, exercising the whole series.
ApproximantResult approximants(const BTInstance& instance);

struct BTResult {
  ComplexMatrix a;     // 0 <= a <= 1, invertible here (support = 1, asserted)
  ComplexMatrix eta0;
  std::vector<ComplexMatrix> bs;
  ApproximantResult approx;
  std::vector<double> yp_norms;  // ||y_p xi0|| for p = 0..P
  double c_bound = 0.0;          // (||xi0||^2 + 5 sum ||xi_k||^2/gamma_k)^{1/2}
  CertificateSet certificates;
};

BTResult bt_lift(const BTInstance& instance);

struct BTConvergenceResult {
  std::vector<double> gammas;
  BTResult lift;
  CertificateSet certificates;  // schedule positivity and decay envelope
};

// Composition with gamma_schedule(alpha_k = ||xi_k||^2): gammas tend to zero
// along the range, so the lifted operator norms decay with k.
BTConvergenceResult bt_convergence_run(const VNAlgebra& m, const ComplexMatrix& xi0,
                                       const std::vector<ComplexMatrix>& xis,
                                       std::size_t depth = 6,
                                       ApproximantMode mode = ApproximantMode::Scheduled,
                                       double beta = 0.5);

}  // namespace vnkit

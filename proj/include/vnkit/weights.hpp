#pragma once

// Weight-side structure: the canonical trace of the block decomposition,
// Radon-Nikodym-style derivatives phi = tau(A .), spectral-cutoff weight
// values, the sup ||b||/phi(b) constant with its witness, the algebraic
// complement condition checkers, and the two-norm equivalence diagnostic
// for conjugated operator norms.

#include <cstdint>

#include "vnkit/algebra.hpp"
#include "vnkit/modular.hpp"
#include "vnkit/report.hpp"

namespace vnkit {

struct TraceData {
  VNAlgebra algebra;
  std::vector<double> block_weights;  // 1/m per block, canonical normalization
  CertificateSet certificates;

  // tau(x) = sum over blocks of the factor-side trace of x.
  Complex value(const ComplexMatrix& x) const;
};

TraceData canonical_trace(const VNAlgebra& m);

struct PTDerivative {
  ComplexMatrix a;  // element of M with phi = tau(A .)
  double lambda_min = 0.0;
  ComplexMatrix kernel_witness;  // kernel projection when phi is not faithful
  CertificateSet certificates;
};

// Solves tau(A b) = phi(b) on the basis; A is self-adjoint, positive for a
// positive phi, and invertible exactly when phi is faithful on M (the
// lambda certificate fails otherwise and carries a kernel witness).
PTDerivative pt_derivative(const VNAlgebra& m, const StateDensity& phi);

// tau(b^{1/2} (A chi_[0,k](A)) b^{1/2}); monotone non-decreasing in k and
// equal to tau(A^{1/2} b A^{1/2}) once k >= ||A||.
double pt_weight_cutoff(const TraceData& tau, const ComplexMatrix& a, const ComplexMatrix& b,
                        double k);

struct SupRatioResult {
  double value = 0.0;        // 1 / lambda_min of the derivative
  ComplexMatrix witness;     // minimal projection under the lambda_min eigenspace
  double witness_ratio = 0.0;
  double search_max = 0.0;   // best ratio over the randomized positive search
  CertificateSet certificates;
};

// sup over nonzero positive b in M of ||b|| / phi(b). The analytic value
// 1/lambda_min is authoritative; the randomized search is a falsification
// harness only and can never define the value.
SupRatioResult sup_ratio(const VNAlgebra& m, const StateDensity& phi, std::size_t samples = 2000,
                         std::uint64_t seed = 0);

struct WeightReport {
  ComplexMatrix derivative;
  double lambda_min = 0.0;
  double sup_ratio_value = 0.0;
  double closed_graph_c = 0.0;  // ||x|| <= c phi(x*x)^{1/2}
  bool cond_ii = false;   // {x_phi} = H_phi (rank of the Gram form)
  bool cond_iii = false;  // sup ||b||/phi(b) finite
  bool cond_iv = false;   // eMe finite-dimensional (always, reported with samples)
  bool cond_v = false;    // type-I blocks with phi >= lambda (direct sum of traces)
  std::vector<std::size_t> corner_dims;  // dim eMe over sampled projections
  CertificateSet certificates;
};

WeightReport check_complement_conditions(const VNAlgebra& m, const StateDensity& phi,
                                         std::uint64_t seed = 0);

struct TwoNormResult {
  double c1 = 0.0;  // min sampled ||T x T^{-1}|| / ||x||
  double c2 = 0.0;  // max sampled ratio
  double kappa = 0.0;  // condition number envelope ||T|| ||T^{-1}||
  CertificateSet certificates;
};

// Sampled equivalence constants of x -> ||T x T^{-1}|| on M against the
// guaranteed kappa(T) envelope; the exact induced constants are not
// attempted.
TwoNormResult two_norm_equivalence(const VNAlgebra& m, const ComplexMatrix& t,
                                   std::size_t samples = 64, std::uint64_t seed = 0);

}  // namespace vnkit

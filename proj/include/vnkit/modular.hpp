#pragma once

// Modular theory at desk scale: GNS construction with the modular objects
// (S, Delta, J), the antilinear standardness criterion, the Okayasu positive
// correction, spatial implementation of *-isomorphisms between standard
// algebras, the cyclic/separating central split, intertwining residuals and
// the vector-functional decomposition on the commutant.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vnkit/algebra.hpp"
#include "vnkit/linalg.hpp"
#include "vnkit/report.hpp"

namespace vnkit {

// A normal weight on a subalgebra of the d x d matrices, carried by its
// ambient density: phi(x) = trace(rho x). At finite dimension every n.s.f.
// weight has this form, faithful iff rho is invertible.
struct StateDensity {
  ComplexMatrix rho;
  bool faithful = false;
  bool normalized = false;

  static StateDensity from_density(ComplexMatrix rho, const Tolerances& tol = {});
  Complex value(const ComplexMatrix& x) const;  // trace(rho x)
};

struct GNSData {
  VNAlgebra algebra;
  StateDensity state;
  std::size_t gns_dim = 0;

  ComplexMatrix lambda_map;      // M-coordinates -> H_phi coordinates (Gram^{1/2})
  ComplexMatrix lambda_inverse;  // Gram^{-1/2}
  ComplexMatrix omega;           // cyclic vector 1_phi in H_phi coordinates

  AntilinearOp s_op{ComplexMatrix::identity(1)};  // closure of x Omega -> x* Omega
  ComplexMatrix delta;                            // modular operator, = S* S
  AntilinearOp j_op{ComplexMatrix::identity(1)};  // modular conjugation
  double j_symmetrization_residual = 0.0;

  VNAlgebra represented;  // pi_phi(M) acting on H_phi
  CertificateSet certificates;

  ComplexMatrix lambda_vec(const ComplexMatrix& x) const;  // x_phi
  ComplexMatrix represent(const ComplexMatrix& x) const;   // pi_phi(x)
};

// GNS representation for a faithful state; rejects non-faithful input
// (the quotient construction is out of scope at this scale).
GNSData gns(const VNAlgebra& m, const StateDensity& phi);

struct StandardnessReport {
  bool standard = false;
  std::optional<AntilinearOp> j;  // flip-conjugation witness when standard
  std::string obstruction;        // unbalanced block + dimension count otherwise
  std::size_t dim_m = 0;
  std::size_t dim_commutant = 0;  // from the multiplicity formula
  CertificateSet certificates;
};

StandardnessReport is_standard(const VNAlgebra& m);

struct TCriterionReport {
  bool passes = false;
  bool dimension_ok = false;
  double conjugated_span_residual = 0.0;  // span{T B T^{-1}} vs commutant span, both directions
  double central_residual = 0.0;          // max || T z T^{-1} - z* ||
  CertificateSet certificates;
};

// The antilinear-operator standardness criterion: T M T^{-1} = M' and
// T z T^{-1} = z* on the centre. Rejects singular T. The second form takes
// a precomputed commutant so batch callers do not recompute it per T.
TCriterionReport check_T_criterion(const VNAlgebra& m, const AntilinearOp& t);
TCriterionReport check_T_criterion(const VNAlgebra& m, const AntilinearOp& t,
                                   const VNAlgebra& m_commutant);

// Max over the basis of || S x* S^{-1} - (S x S^{-1})* ||.
double star_defect(const VNAlgebra& m, const ComplexMatrix& s, const Tolerances& tol = {});

struct OkayasuResult {
  ComplexMatrix a;               // positive invertible in M, Ad_{Ta} is a *-automorphism
  ComplexMatrix m_factor;        // positive part of T*T in M (trace gauge: tr = n per block)
  ComplexMatrix m_prime_factor;  // positive part in M'
  double star_defect_before = 0.0;
  double star_defect_after = 0.0;
  double normalization_defect = 0.0;  // worst subdominant/dominant reshaping ratio
  CertificateSet certificates;
};

// Okayasu's positive correction: for invertible T with T M T^{-1} = M,
// factor Q = T*T = m m' across M and M' and return a = m^{-1/2}.
OkayasuResult okayasu_correct(const VNAlgebra& m, const ComplexMatrix& t);

// A linear map between algebras carried by its coefficient matrix on the
// HS-orthonormal bases; used to hand *-isomorphisms around.
class StarMap {
 public:
  StarMap(VNAlgebra domain, VNAlgebra codomain,
          const std::function<ComplexMatrix(const ComplexMatrix&)>& f);

  const VNAlgebra& domain() const { return domain_; }
  const VNAlgebra& codomain() const { return codomain_; }
  ComplexMatrix apply(const ComplexMatrix& x) const;

  double star_defect() const;            // max || pi(b*) - pi(b)* ||
  double multiplicativity_defect() const;
  double unit_defect() const;
  bool bijective() const;

 private:
  VNAlgebra domain_;
  VNAlgebra codomain_;
  ComplexMatrix coeff_;  // codomain coords = coeff * domain coords
};

struct SpatialResult {
  ComplexMatrix u;  // unitary with pi(x) = U x U*
  CertificateSet certificates;
};

// Spatial implementation of a *-isomorphism between standard algebras on
// the same space, aligned blockwise through the canonical W isometries.
SpatialResult spatial_implement(const StarMap& pi);

struct CyclicSeparatingSplit {
  ComplexMatrix p;  // central projection; M_p cyclic, M_{1-p} separating
  ComplexMatrix cyclic_witness;      // ambient vector supported on range(p)
  ComplexMatrix separating_witness;  // ambient vector supported on range(1-p)
  CertificateSet certificates;
};

CyclicSeparatingSplit cyclic_separating_split(const VNAlgebra& m, std::uint64_t seed = 0);

// Real-linear map on M given by its action on the basis and on i * basis.
struct RealLinearMap {
  std::vector<ComplexMatrix> on_basis;
  std::vector<ComplexMatrix> on_i_basis;

  static RealLinearMap sample(const VNAlgebra& m,
                              const std::function<ComplexMatrix(const ComplexMatrix&)>& f);
  ComplexMatrix apply(const VNAlgebra& m, const ComplexMatrix& x) const;
};

struct IntertwiningReport {
  double max_residual = 0.0;        // max over the real basis of ||T1 x - Phi(x) T2||
  double quotient_norm = 0.0;       // || P_{K^perp} T2 ||, K the joint kernel of Phi
  std::size_t joint_kernel_dim = 0;
};

IntertwiningReport verify_intertwining(const VNAlgebra& m, const RealLinearMap& phi,
                                       const ComplexMatrix& t1, const ComplexMatrix& t2);

struct VectorFunctionalDecomposition {
  std::vector<ComplexMatrix> vectors;   // zeta_j with omega' = sum_j omega'_{zeta_j}
  std::vector<std::size_t> block_ranks; // rank of the multiplicity-side density per block
  double reproduction_residual = 0.0;   // checked against the commutant basis
  CertificateSet certificates;
};

// Writes a positive functional on M' as a finite sum of vector functionals;
// per block, at most ceil(rank/n) vectors are needed.
VectorFunctionalDecomposition vector_functional_decomposition(const VNAlgebra& m,
                                                              const StateDensity& omega_prime);

}  // namespace vnkit

#include "vnkit/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "vnkit/rng.hpp"

namespace vnkit {

namespace {

constexpr std::uint64_t kCentreSeed = 0x5eed0001ull;
constexpr std::uint64_t kSplitSeed = 0x5eed0002ull;
constexpr std::uint64_t kIsometrySeed = 0x5eed0003ull;
constexpr std::uint64_t kWitnessSeed = 0x5eed0004ull;

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a + 0x9e3779b97f4a7c15ull + (b << 6) + (b >> 2);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  return x;
}

// Accumulate scale * kron(a, b) into k.
void add_kron(ComplexMatrix& k, const ComplexMatrix& a, const ComplexMatrix& b, Complex scale) {
  const std::size_t da = a.rows(), db = b.rows();
  for (std::size_t i = 0; i < da; ++i)
    for (std::size_t j = 0; j < da; ++j) {
      const Complex aij = scale * a(i, j);
      if (aij == Complex(0.0)) continue;
      for (std::size_t p = 0; p < db; ++p)
        for (std::size_t q = 0; q < db; ++q) k(i * db + p, j * db + q) += aij * b(p, q);
    }
}

std::size_t round_size(double x, const char* what) {
  const double r = std::round(x);
  if (r < 0.0 || std::abs(x - r) > 1e-6) {
    std::ostringstream msg;
    msg << what << ": value " << x << " is not a small integer";
    throw std::runtime_error(msg.str());
  }
  return static_cast<std::size_t>(r);
}

// Eigenvalue clusters of an ascending list, split where the gap exceeds thr.
std::vector<std::pair<std::size_t, std::size_t>> cluster_ranges(const std::vector<double>& vals,
                                                                double thr) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= vals.size(); ++i) {
    if (i == vals.size() || vals[i] - vals[i - 1] > thr) {
      out.emplace_back(start, i);
      start = i;
    }
  }
  return out;
}

}  // namespace

std::vector<ComplexMatrix> hs_orthonormalize(const std::vector<ComplexMatrix>& list,
                                             const Tolerances& tol) {
  std::vector<ComplexMatrix> basis;
  for (const ComplexMatrix& raw : list) {
    const double scale = raw.frobenius_norm();
    if (scale <= tol.rank_tol) continue;
    ComplexMatrix v = raw;
    for (int pass = 0; pass < 2; ++pass) {
      for (const ComplexMatrix& b : basis) add_scaled(v, -hs_inner(v, b), b);
    }
    const double nrm = v.frobenius_norm();
    if (nrm <= tol.rank_tol * scale) continue;  // dependent
    basis.push_back(v * (1.0 / nrm));
  }
  return basis;
}

VNAlgebra VNAlgebra::from_span(std::size_t ambient_dim, std::vector<ComplexMatrix> spanning,
                               const Tolerances& tol) {
  tol.validate();
  if (ambient_dim == 0) throw std::invalid_argument("VNAlgebra: ambient dimension zero");
  VNAlgebra out;
  out.ambient_dim_ = ambient_dim;
  out.tol_ = tol;
  for (const ComplexMatrix& g : spanning) {
    if (g.rows() != ambient_dim || g.cols() != ambient_dim) {
      throw std::invalid_argument("VNAlgebra: spanning element has wrong shape");
    }
  }
  // Canonical order: normalized unit first, then construction order.
  std::vector<ComplexMatrix> seed;
  seed.reserve(spanning.size() + 1);
  seed.push_back(ComplexMatrix::identity(ambient_dim) *
                 (1.0 / std::sqrt(static_cast<double>(ambient_dim))));
  for (ComplexMatrix& g : spanning) seed.push_back(std::move(g));
  out.basis_ = hs_orthonormalize(seed, tol);
  out.validate_closure();
  out.compute_centre();
  out.compute_structure();
  return out;
}

std::vector<Complex> VNAlgebra::coords(const ComplexMatrix& x) const {
  std::vector<Complex> c(basis_.size());
  for (std::size_t i = 0; i < basis_.size(); ++i) c[i] = hs_inner(x, basis_[i]);
  return c;
}

ComplexMatrix VNAlgebra::from_coords(const std::vector<Complex>& c) const {
  if (c.size() != basis_.size()) throw std::invalid_argument("from_coords: wrong length");
  ComplexMatrix x(ambient_dim_, ambient_dim_);
  for (std::size_t i = 0; i < basis_.size(); ++i) add_scaled(x, c[i], basis_[i]);
  return x;
}

ComplexMatrix VNAlgebra::project(const ComplexMatrix& x) const { return from_coords(coords(x)); }

double VNAlgebra::span_residual(const ComplexMatrix& x) const {
  return (x - project(x)).frobenius_norm();
}

bool VNAlgebra::contains(const ComplexMatrix& x) const {
  return span_residual(x) <= tol_.assert_tol * std::max(x.frobenius_norm(), 1.0);
}

void VNAlgebra::validate_closure() const {
  const std::size_t n = basis_.size();
  // Orthonormality.
  double ortho = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const Complex ip = hs_inner(basis_[i], basis_[j]);
      ortho = std::max(ortho, std::abs(ip - (i == j ? Complex(1.0) : Complex(0.0))));
    }
  if (ortho > tol_.assert_tol) {
    throw std::runtime_error("VNAlgebra: basis failed orthonormality, defect " +
                             std::to_string(ortho));
  }
  // Unit in span.
  const ComplexMatrix unit = ComplexMatrix::identity(ambient_dim_);
  if (span_residual(unit) > tol_.assert_tol * std::sqrt(static_cast<double>(ambient_dim_))) {
    throw std::runtime_error("VNAlgebra: identity not in span");
  }
  // Closure under adjoints, always in full.
  for (std::size_t i = 0; i < n; ++i) {
    const double r = span_residual(basis_[i].adjoint());
    if (r > tol_.assert_tol) {
      throw std::runtime_error("VNAlgebra: not closed under adjoint, defect " + std::to_string(r));
    }
  }
  // Closure under products; exhaustive when affordable, a seeded sample
  // of pairs otherwise (construction-by-conjugation cases are exact anyway).
  const double d3 = std::pow(static_cast<double>(ambient_dim_), 3.0);
  const double cost = static_cast<double>(n) * n *
                      (d3 + 2.0 * static_cast<double>(n) * ambient_dim_ * ambient_dim_);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (cost <= 2.0e7) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) pairs.emplace_back(i, j);
  } else {
    Rng rng(0x70d0c7ull);
    for (int k = 0; k < 64; ++k)
      pairs.emplace_back(static_cast<std::size_t>(rng.integer(n)),
                         static_cast<std::size_t>(rng.integer(n)));
  }
  for (const auto& [i, j] : pairs) {
    const ComplexMatrix prod = basis_[i] * basis_[j];
    const double r = span_residual(prod);
    if (r > tol_.assert_tol * std::max(prod.frobenius_norm(), 1.0)) {
      throw std::runtime_error("VNAlgebra: not closed under product, defect " + std::to_string(r));
    }
  }
}

void VNAlgebra::compute_centre() {
  const std::size_t n = basis_.size();
  if (n == 1) {
    centre_ = basis_;
    return;
  }
  // Kernel of x -> [x, g] over a small generic generating family; always a
  // superset of the centre, so each candidate is verified against the whole
  // basis and a bad draw triggers a retry.
  for (int attempt = 0; attempt < tol_.retry_seeds; ++attempt) {
    Rng rng(mix_seed(kCentreSeed, static_cast<std::uint64_t>(attempt)));
    // One generic element and its adjoint generate M almost surely; a bad
    // draw fails the full-basis verification below and triggers a retry.
    std::vector<ComplexMatrix> gens;
    {
      ComplexMatrix x(ambient_dim_, ambient_dim_);
      for (const ComplexMatrix& b : basis_) add_scaled(x, rng.complex_gaussian(), b);
      gens.push_back(x);
      gens.push_back(x.adjoint());
    }
    ComplexMatrix gram(n, n);
    for (const ComplexMatrix& g : gens) {
      std::vector<ComplexMatrix> comms(n);
      for (std::size_t i = 0; i < n; ++i) comms[i] = basis_[i] * g - g * basis_[i];
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b <= a; ++b) {
          const Complex ip = hs_inner(comms[b], comms[a]);
          gram(a, b) += ip;
          if (a != b) gram(b, a) += std::conj(ip);
        }
    }
    const HermEigResult eig = herm_eig(gram, tol_);
    const double lam_max = std::max(eig.eigenvalues.back(), 0.0);
    const double cut = std::max(lam_max * 1e-12, 1e-24);
    std::size_t kdim = 0;
    while (kdim < n && eig.eigenvalues[kdim] <= cut) ++kdim;
    if (kdim < n && eig.eigenvalues[kdim] < lam_max * 1e-8) continue;  // murky separation
    bool verified = true;
    std::vector<ComplexMatrix> cand;
    for (std::size_t k = 0; k < kdim && verified; ++k) {
      std::vector<Complex> c(n);
      for (std::size_t i = 0; i < n; ++i) c[i] = eig.vectors(i, k);
      const ComplexMatrix z = from_coords(c);
      for (const ComplexMatrix& b : basis_) {
        if ((z * b - b * z).frobenius_norm() > tol_.assert_tol) {
          verified = false;
          break;
        }
      }
      cand.push_back(z);
    }
    if (!verified) continue;
    // Unit first, then the kernel vectors.
    std::vector<ComplexMatrix> seed;
    seed.push_back(ComplexMatrix::identity(ambient_dim_) *
                   (1.0 / std::sqrt(static_cast<double>(ambient_dim_))));
    for (ComplexMatrix& z : cand) seed.push_back(std::move(z));
    centre_ = hs_orthonormalize(seed, tol_);
    return;
  }
  throw std::runtime_error("VNAlgebra: centre computation stayed degenerate after retries");
}

namespace {

// Minimal projection of the factor algebra spanned by `fbasis` (on C^r)
// under the projection e: repeatedly split off the lowest spectral cluster
// of a non-scalar self-adjoint corner element.
ComplexMatrix minimal_projection_under(const std::vector<ComplexMatrix>& fbasis, ComplexMatrix e,
                                       const Tolerances& tol) {
  const double gap_thr_rel = 1e3 * tol.rank_tol;
  while (true) {
    const std::size_t t = round_size(e.trace().real(), "minimal projection trace");
    if (t <= 1) return e;
    const ComplexMatrix re = range_isometry(e, tol);
    bool split_done = false;
    for (const ComplexMatrix& x : fbasis) {
      const ComplexMatrix corner = re.adjoint() * x * re;
      const ComplexMatrix h1 = (corner + corner.adjoint()) * 0.5;
      const ComplexMatrix h2 = (corner - corner.adjoint()) * Complex(0.0, -0.5);
      for (const ComplexMatrix& h : {h1, h2}) {
        const double scale = std::max(h.frobenius_norm(), 1.0);
        ComplexMatrix dev = h;
        dev -= (h.trace() / static_cast<double>(t)) * ComplexMatrix::identity(t);
        if (dev.frobenius_norm() <= 1e4 * tol.rank_tol * scale) continue;  // scalar corner
        const HermEigResult eig = herm_eig(h, tol);
        double emax = std::max(std::abs(eig.eigenvalues.front()), std::abs(eig.eigenvalues.back()));
        const auto clusters = cluster_ranges(eig.eigenvalues, gap_thr_rel * std::max(emax, 1.0));
        if (clusters.size() < 2) continue;  // unresolved spread, try another corner
        const auto [lo, hi] = clusters.front();
        ComplexMatrix plow(t, t);
        for (std::size_t k = lo; k < hi; ++k)
          for (std::size_t i = 0; i < t; ++i)
            for (std::size_t j = 0; j < t; ++j)
              plow(i, j) += eig.vectors(i, k) * std::conj(eig.vectors(j, k));
        e = re * plow * re.adjoint();
        split_done = true;
        break;
      }
      if (split_done) break;
    }
    if (!split_done) return e;  // every corner scalar: e is minimal
  }
}

// Partial isometry v in the factor with v*v = f and v v* = g, for minimal
// projections f, g: scale y = g x f, using that y* y is a scalar times f.
ComplexMatrix minimal_link(const std::vector<ComplexMatrix>& fbasis, const ComplexMatrix& f,
                           const ComplexMatrix& g, const Tolerances& tol) {
  const double tf = f.trace().real();
  ComplexMatrix best;
  double best_c = 0.0;
  auto consider = [&](const ComplexMatrix& x) {
    const ComplexMatrix y = g * x * f;
    const double c = (y.adjoint() * y).trace().real() / tf;
    if (c > best_c) {
      best_c = c;
      best = y;
    }
  };
  for (const ComplexMatrix& x : fbasis) consider(x);
  if (best_c <= 1e-12) {
    Rng rng(kIsometrySeed);
    for (int attempt = 0; attempt < tol.retry_seeds && best_c <= 1e-12; ++attempt) {
      ComplexMatrix x(f.rows(), f.cols());
      for (const ComplexMatrix& b : fbasis) add_scaled(x, rng.complex_gaussian(), b);
      consider(x);
    }
  }
  if (best_c <= 1e-12) {
    throw std::runtime_error("minimal_link: could not link minimal projections (g A f = 0?)");
  }
  ComplexMatrix v = best * (1.0 / std::sqrt(best_c));
  const double d1 = (v.adjoint() * v - f).frobenius_norm();
  const double d2 = (v * v.adjoint() - g).frobenius_norm();
  if (d1 > 1e-6 || d2 > 1e-6) {
    throw std::runtime_error("minimal_link: candidate is not a clean partial isometry");
  }
  return v;
}

}  // namespace

void VNAlgebra::compute_structure() {
  const std::size_t d = ambient_dim_;
  const std::size_t target = centre_.size();

  // Minimal central projections from the spectral clusters of one generic
  // self-adjoint central element; a commutative *-algebra diagonalizes
  // simultaneously, so one generic element resolves all the atoms.
  std::vector<ComplexMatrix> central_projs;
  if (target == 1) {
    central_projs.push_back(ComplexMatrix::identity(d));
  } else {
    bool found = false;
    for (int attempt = 0; attempt < tol_.retry_seeds && !found; ++attempt) {
      Rng rng(mix_seed(kSplitSeed, static_cast<std::uint64_t>(attempt)));
      ComplexMatrix z(d, d);
      for (const ComplexMatrix& zb : centre_) add_scaled(z, rng.complex_gaussian(), zb);
      z = (z + z.adjoint()) * 0.5;
      const HermEigResult eig = herm_eig(z, tol_);
      const double scale =
          std::max({std::abs(eig.eigenvalues.front()), std::abs(eig.eigenvalues.back()), 1.0});
      const auto clusters = cluster_ranges(eig.eigenvalues, 1e3 * tol_.rank_tol * scale);
      if (clusters.size() != target) continue;
      std::vector<ComplexMatrix> projs;
      bool ok = true;
      for (const auto& [lo, hi] : clusters) {
        ComplexMatrix p(d, d);
        for (std::size_t k = lo; k < hi; ++k)
          for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
              p(i, j) += eig.vectors(i, k) * std::conj(eig.vectors(j, k));
        if (span_residual(p) > tol_.assert_tol * std::max(p.frobenius_norm(), 1.0) ||
            (p * p - p).frobenius_norm() > tol_.assert_tol) {
          ok = false;
          break;
        }
        projs.push_back(std::move(p));
      }
      if (!ok) continue;
      central_projs = std::move(projs);
      found = true;
    }
    if (!found) {
      throw std::runtime_error(
          "VNAlgebra: central element stayed degenerate after retries (centre dim " +
          std::to_string(target) + ")");
    }
  }

  structure_.blocks.clear();
  structure_.block_residual = 0.0;
  for (const ComplexMatrix& p : central_projs) {
    Block blk;
    blk.p = p;
    const std::size_t r = round_size(p.trace().real(), "central projection rank");
    const ComplexMatrix range = range_isometry(p, tol_);
    std::vector<ComplexMatrix> reduced;
    reduced.reserve(basis_.size());
    for (const ComplexMatrix& b : basis_) reduced.push_back(range.adjoint() * b * range);
    const std::vector<ComplexMatrix> fbasis = hs_orthonormalize(reduced, tol_);
    const std::size_t n = round_size(std::sqrt(static_cast<double>(fbasis.size())),
                                     "factor dimension sqrt");
    if (n * n != fbasis.size()) {
      throw std::runtime_error("VNAlgebra: reduced block dimension is not a perfect square");
    }
    if (r % n != 0) {
      throw std::runtime_error("VNAlgebra: block rank not divisible by factor size");
    }
    const std::size_t m = r / n;
    blk.n = n;
    blk.m = m;

    // Orthogonal family of n equivalent minimal projections summing to 1_r.
    std::vector<ComplexMatrix> family;
    ComplexMatrix rest = ComplexMatrix::identity(r);
    while (rest.trace().real() > 0.5) {
      const ComplexMatrix f = minimal_projection_under(fbasis, rest, tol_);
      const std::size_t tf = round_size(f.trace().real(), "minimal projection rank");
      if (tf != m) {
        throw std::runtime_error("VNAlgebra: minimal projection rank " + std::to_string(tf) +
                                 " does not match multiplicity " + std::to_string(m));
      }
      family.push_back(f);
      rest -= f;
    }
    if (family.size() != n) {
      throw std::runtime_error("VNAlgebra: minimal family size does not match factor size");
    }

    // Matrix units e_{i1} and a multiplicity basis of range(e_11) give the
    // canonical isometry W.
    std::vector<ComplexMatrix> links(n);
    links[0] = family[0];
    for (std::size_t i = 1; i < n; ++i) links[i] = minimal_link(fbasis, family[0], family[i], tol_);
    const ComplexMatrix mult_basis = range_isometry(family[0], tol_);  // r x m
    ComplexMatrix w_red(r, r);  // rows (i,j) hold (links[i] mult_basis[:,j])^*
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        ComplexMatrix col(r, 1);
        for (std::size_t a = 0; a < r; ++a) {
          Complex s = 0.0;
          for (std::size_t b = 0; b < r; ++b) s += links[i](a, b) * mult_basis(b, j);
          col(a, 0) = s;
        }
        for (std::size_t a = 0; a < r; ++a) w_red(i * m + j, a) = std::conj(col(a, 0));
      }
    }
    if (unitary_defect(w_red) > tol_.assert_tol) {
      throw std::runtime_error("VNAlgebra: block transport matrix is not unitary");
    }
    blk.w = w_red * range.adjoint();
    structure_.blocks.push_back(std::move(blk));
  }

  // Canonical block order: by (n, m), then by the rounded diagonal of p.
  std::sort(structure_.blocks.begin(), structure_.blocks.end(),
            [](const Block& a, const Block& b) {
              if (a.n != b.n) return a.n < b.n;
              if (a.m != b.m) return a.m < b.m;
              for (std::size_t i = 0; i < a.p.rows(); ++i) {
                const double da = std::round(a.p(i, i).real() * 1e6);
                const double db = std::round(b.p(i, i).real() * 1e6);
                if (da != db) return da > db;
              }
              return false;
            });

  // Verify the canonical form on the whole basis, and the bookkeeping.
  std::size_t sum_nm = 0, sum_n2 = 0;
  ComplexMatrix psum(d, d);
  for (const Block& blk : structure_.blocks) {
    sum_nm += blk.n * blk.m;
    sum_n2 += blk.n * blk.n;
    psum += blk.p;
    for (const ComplexMatrix& b : basis_) {
      const ComplexMatrix canon = blk.w * b * blk.w.adjoint();
      const ComplexMatrix xn = factor_component(canon, blk.n, blk.m);
      const double resid = (canon - kron(xn, ComplexMatrix::identity(blk.m))).frobenius_norm();
      structure_.block_residual = std::max(structure_.block_residual, resid);
    }
  }
  if (sum_nm != d || sum_n2 != basis_.size() ||
      (psum - ComplexMatrix::identity(d)).frobenius_norm() > tol_.assert_tol ||
      structure_.block_residual > tol_.assert_tol) {
    throw std::runtime_error("VNAlgebra: central decomposition failed verification");
  }
}

ComplexMatrix VNAlgebra::block_unit(std::size_t block, std::size_t i, std::size_t j) const {
  const Block& blk = structure_.blocks.at(block);
  ComplexMatrix unit(blk.n, blk.n);
  unit(i, j) = 1.0;
  return blk.w.adjoint() * kron(unit, ComplexMatrix::identity(blk.m)) * blk.w;
}

std::vector<std::pair<std::size_t, std::size_t>> VNAlgebra::block_dims() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const Block& b : structure_.blocks) out.emplace_back(b.n, b.m);
  return out;
}

std::size_t VNAlgebra::commutant_dim_formula() const {
  std::size_t s = 0;
  for (const Block& b : structure_.blocks) s += b.m * b.m;
  return s;
}

VNAlgebra generate_algebra(const std::vector<ComplexMatrix>& generators, std::size_t ambient_dim,
                           const Tolerances& tol) {
  std::vector<ComplexMatrix> seed;
  seed.push_back(ComplexMatrix::identity(ambient_dim) *
                 (1.0 / std::sqrt(static_cast<double>(ambient_dim))));
  for (const ComplexMatrix& g : generators) {
    if (g.rows() != ambient_dim || g.cols() != ambient_dim) {
      throw std::invalid_argument("generate_algebra: generator has wrong shape");
    }
    seed.push_back(g);
    seed.push_back(g.adjoint());
  }
  std::vector<ComplexMatrix> basis = hs_orthonormalize(seed, tol);
  // Fixed point of the product-closure iteration; the dimension is bounded
  // by d^2, so this terminates.
  while (true) {
    std::vector<ComplexMatrix> grown = basis;
    const std::size_t before = basis.size();
    for (std::size_t i = 0; i < before; ++i) {
      for (std::size_t j = 0; j < before; ++j) {
        const ComplexMatrix prod = basis[i] * basis[j];
        const double scale = prod.frobenius_norm();
        if (scale <= tol.rank_tol) continue;
        ComplexMatrix v = prod;
        for (int pass = 0; pass < 2; ++pass) {
          for (const ComplexMatrix& b : grown) add_scaled(v, -hs_inner(v, b), b);
        }
        const double nrm = v.frobenius_norm();
        if (nrm > tol.rank_tol * scale) grown.push_back(v * (1.0 / nrm));
      }
    }
    if (grown.size() == basis.size()) break;
    basis = std::move(grown);
  }
  return VNAlgebra::from_span(ambient_dim, std::move(basis), tol);
}

VNAlgebra commutant(const VNAlgebra& m) {
  const std::size_t d = m.ambient_dim();
  const std::size_t dd = d * d;
  const Tolerances& tol = m.tol();
  // Gram matrix of the stacked Sylvester superoperators S_B = 1⊗B - B^T⊗1
  // (column-major vec), accumulated per basis element through the kron
  // expansion of S* S.
  ComplexMatrix gram(dd, dd);
  for (const ComplexMatrix& b : m.basis()) {
    const ComplexMatrix bt = b.transpose();
    const ComplexMatrix bc = b.conjugate();
    add_kron(gram, ComplexMatrix::identity(d), b.adjoint() * b, Complex(1.0));
    add_kron(gram, bc * bt, ComplexMatrix::identity(d), Complex(1.0));
    add_kron(gram, bt, b.adjoint(), Complex(-1.0));
    add_kron(gram, bc, b, Complex(-1.0));
  }
  const HermEigResult eig = herm_eig(gram, tol);
  const double lam_max = std::max(eig.eigenvalues.back(), 0.0);
  std::size_t kdim = 0;
  if (lam_max <= 1e-20) {
    kdim = dd;  // scalars: everything commutes
  } else {
    const double cut = lam_max * 1e-12;
    while (kdim < dd && eig.eigenvalues[kdim] <= cut) ++kdim;
    if (kdim < dd && eig.eigenvalues[kdim] < lam_max * 1e-8) {
      throw std::runtime_error("commutant: kernel of the Sylvester stack is not well separated");
    }
  }
  std::vector<ComplexMatrix> mats;
  mats.reserve(kdim);
  for (std::size_t k = 0; k < kdim; ++k) {
    ComplexMatrix v(dd, 1);
    for (std::size_t i = 0; i < dd; ++i) v(i, 0) = eig.vectors(i, k);
    ComplexMatrix x = unvec(v, d, d);
    for (const ComplexMatrix& b : m.basis()) {
      if ((x * b - b * x).frobenius_norm() > tol.assert_tol) {
        throw std::runtime_error("commutant: kernel candidate fails direct commutation check");
      }
    }
    mats.push_back(std::move(x));
  }
  return VNAlgebra::from_span(d, std::move(mats), tol);
}

SupportProjections supports(const ComplexMatrix& x, const VNAlgebra& m) {
  const Tolerances& tol = m.tol();
  const double scale = x.frobenius_norm();
  if (m.span_residual(x) > tol.assert_tol * std::max(scale, 1.0)) {
    throw std::invalid_argument("supports: operator not in the algebra");
  }
  SupportProjections out;
  const std::size_t d = m.ambient_dim();
  out.left = ComplexMatrix(d, d);
  out.right = ComplexMatrix(d, d);
  out.central = ComplexMatrix(d, d);
  if (scale > tol.rank_tol) {
    const SvdResult s = svd(x, tol);
    const double smax = s.singular_values.empty() ? 0.0 : s.singular_values[0];
    for (std::size_t k = 0; k < s.singular_values.size(); ++k) {
      if (s.singular_values[k] <= tol.rank_tol * smax) continue;
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
          out.left(i, j) += s.u(i, k) * std::conj(s.u(j, k));
          out.right(i, j) += s.v(i, k) * std::conj(s.v(j, k));
        }
    }
    for (const Block& blk : m.structure().blocks) {
      if ((x * blk.p).frobenius_norm() > tol.rank_tol * scale) out.central += blk.p;
    }
  }
  return out;
}

namespace {

void check_projection_in(const ComplexMatrix& p, const VNAlgebra& m, const char* name) {
  const Tolerances& tol = m.tol();
  if (hermitian_defect(p) > tol.assert_tol || (p * p - p).frobenius_norm() > tol.assert_tol) {
    throw std::invalid_argument(std::string("mv_equivalent: ") + name + " is not a projection");
  }
  if (m.span_residual(p) > tol.assert_tol * std::max(p.frobenius_norm(), 1.0)) {
    throw std::invalid_argument(std::string("mv_equivalent: ") + name + " is not in the algebra");
  }
}

// Rank-1 n-side eigenprojections of the factor component of a projection.
std::vector<ComplexMatrix> nside_columns(const ComplexMatrix& pn, const Tolerances& tol) {
  std::vector<ComplexMatrix> cols;
  const HermEigResult eig = herm_eig(pn, tol);
  const std::size_t n = pn.rows();
  for (std::size_t k = 0; k < n; ++k) {
    if (eig.eigenvalues[k] > 0.5) {
      ComplexMatrix u(n, 1);
      for (std::size_t i = 0; i < n; ++i) u(i, 0) = eig.vectors(i, k);
      cols.push_back(std::move(u));
    }
  }
  return cols;
}

}  // namespace

ProjectionComparison mv_equivalent(const ComplexMatrix& p, const ComplexMatrix& q,
                                   const VNAlgebra& m) {
  check_projection_in(p, m, "p");
  check_projection_in(q, m, "q");
  const std::size_t d = m.ambient_dim();
  ProjectionComparison out;
  out.central_le = ComplexMatrix(d, d);
  out.embed_le = ComplexMatrix(d, d);
  out.embed_ge = ComplexMatrix(d, d);
  bool all_le = true, all_ge = true;
  for (std::size_t bi = 0; bi < m.structure().blocks.size(); ++bi) {
    const Block& blk = m.structure().blocks[bi];
    const ComplexMatrix pn = factor_component(blk.w * p * blk.w.adjoint(), blk.n, blk.m);
    const ComplexMatrix qn = factor_component(blk.w * q * blk.w.adjoint(), blk.n, blk.m);
    const std::vector<ComplexMatrix> pu = nside_columns(pn, m.tol());
    const std::vector<ComplexMatrix> qu = nside_columns(qn, m.tol());
    BlockRanks ranks{bi, pu.size(), qu.size()};
    out.per_block.push_back(ranks);
    if (ranks.rank_p > ranks.rank_q) all_le = false;
    if (ranks.rank_p < ranks.rank_q) all_ge = false;
    const std::size_t common = std::min(ranks.rank_p, ranks.rank_q);
    ComplexMatrix link(blk.n, blk.n);
    for (std::size_t s = 0; s < common; ++s) link += qu[s] * pu[s].adjoint();
    const ComplexMatrix v =
        blk.w.adjoint() * kron(link, ComplexMatrix::identity(blk.m)) * blk.w;
    if (ranks.rank_p <= ranks.rank_q) {
      out.central_le += blk.p;
      out.embed_le += v;
    } else {
      // direction q -> p on this block
      out.embed_ge += v.adjoint();
    }
  }
  if (all_le && all_ge) {
    out.kind = ComparisonKind::Equivalent;
    out.equivalence = out.embed_le;
  } else if (all_le) {
    out.kind = ComparisonKind::FirstBelowSecond;
  } else if (all_ge) {
    out.kind = ComparisonKind::SecondBelowFirst;
  } else {
    out.kind = ComparisonKind::Mixed;
  }
  return out;
}

CyclicReport cyclic_analysis(const VNAlgebra& m, std::uint64_t seed) {
  const Tolerances& tol = m.tol();
  CyclicReport out;
  out.has_cyclic = true;
  out.has_separating = true;
  for (const Block& blk : m.structure().blocks) {
    if (blk.m > blk.n) out.has_cyclic = false;
    if (blk.n > blk.m) out.has_separating = false;
  }
  const std::size_t d = m.ambient_dim();
  const std::size_t n = m.dim();
  auto orbit_matrix = [&](const ComplexMatrix& xi) {
    ComplexMatrix e(d, n);
    for (std::size_t j = 0; j < n; ++j) {
      const ComplexMatrix col = m.basis()[j] * xi;
      for (std::size_t i = 0; i < d; ++i) e(i, j) = col(i, 0);
    }
    return e;
  };
  if (out.has_cyclic) {
    for (int attempt = 0; attempt < tol.retry_seeds; ++attempt) {
      Rng rng(mix_seed(mix_seed(kWitnessSeed, seed), static_cast<std::uint64_t>(attempt)));
      const ComplexMatrix xi = gaussian_vector(d, rng);
      ++out.cyclic_attempts;
      if (numerical_rank(orbit_matrix(xi), tol) == d) {
        out.cyclic_witness = xi;
        break;
      }
    }
    if (out.cyclic_witness.empty()) {
      throw std::runtime_error(
          "cyclic_analysis: structural verdict is cyclic but witness search failed");
    }
  }
  if (out.has_separating) {
    for (int attempt = 0; attempt < tol.retry_seeds; ++attempt) {
      Rng rng(mix_seed(mix_seed(kWitnessSeed + 1, seed), static_cast<std::uint64_t>(attempt)));
      const ComplexMatrix xi = gaussian_vector(d, rng);
      ++out.separating_attempts;
      if (nullspace(orbit_matrix(xi), tol).cols() == 0) {
        out.separating_witness = xi;
        break;
      }
    }
    if (out.separating_witness.empty()) {
      throw std::runtime_error(
          "cyclic_analysis: structural verdict is separating but witness search failed");
    }
  }
  return out;
}

ModuleGeneratorsResult module_generators(const VNAlgebra& m, const std::vector<ComplexMatrix>& xs) {
  const Tolerances& tol = m.tol();
  const std::size_t d = m.ambient_dim();
  for (const ComplexMatrix& x : xs) {
    if (x.rows() != d || x.cols() != 1) {
      throw std::invalid_argument("module_generators: vectors must be d x 1");
    }
  }
  ModuleGeneratorsResult out;
  const auto& blocks = m.structure().blocks;
  // Per block, the M-submodule generated by the inputs is C^n ⊗ V with V the
  // span of the multiplicity rows of the block components.
  std::vector<std::vector<ComplexMatrix>> row_bases(blocks.size());
  std::size_t count = 0;
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const Block& blk = blocks[bi];
    if (xs.empty()) {
      out.block_module_dims.push_back(0);
      continue;
    }
    ComplexMatrix rows(blk.m, blk.n * xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const ComplexMatrix comp = blk.w * xs[k];  // C^n ⊗ C^m coordinates
      for (std::size_t i = 0; i < blk.n; ++i)
        for (std::size_t j = 0; j < blk.m; ++j) rows(j, k * blk.n + i) = comp(i * blk.m + j, 0);
    }
    const SvdResult s = svd(rows, tol);
    const double smax = s.singular_values.empty() ? 0.0 : s.singular_values[0];
    std::vector<ComplexMatrix> ubasis;
    for (std::size_t k = 0; k < s.singular_values.size(); ++k) {
      if (smax <= tol.rank_tol || s.singular_values[k] <= tol.rank_tol * smax) continue;
      ComplexMatrix u(blk.m, 1);
      for (std::size_t i = 0; i < blk.m; ++i) u(i, 0) = s.u(i, k);
      ubasis.push_back(std::move(u));
    }
    out.block_module_dims.push_back(ubasis.size());
    count = std::max(count, (ubasis.size() + blk.n - 1) / blk.n);
    row_bases[bi] = std::move(ubasis);
  }
  for (std::size_t g = 0; g < count; ++g) {
    ComplexMatrix zeta(d, 1);
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
      const Block& blk = blocks[bi];
      ComplexMatrix comp(blk.n * blk.m, 1);
      for (std::size_t t = 0; t < blk.n; ++t) {
        const std::size_t r = g * blk.n + t;
        if (r >= row_bases[bi].size()) break;
        for (std::size_t j = 0; j < blk.m; ++j) comp(t * blk.m + j, 0) = row_bases[bi][r](j, 0);
      }
      zeta += blk.w.adjoint() * comp;
    }
    out.generators.push_back(std::move(zeta));
  }
  // Membership certificates: every input lies in sum_j M zeta_j.
  std::vector<ComplexMatrix> span_vectors;
  for (const ComplexMatrix& zeta : out.generators)
    for (const ComplexMatrix& b : m.basis()) span_vectors.push_back(b * zeta);
  for (const ComplexMatrix& x : xs) {
    if (span_vectors.empty()) {
      out.membership_residuals.push_back(x.frobenius_norm());
      continue;
    }
    const auto ls = least_squares_in_subspace(
        span_vectors, [](const ComplexMatrix& v) { return v; }, x, tol);
    out.membership_residuals.push_back(ls.residual);
  }
  return out;
}

RandomAlgebraResult random_algebra(const std::vector<std::pair<std::size_t, std::size_t>>& spec,
                                   std::uint64_t seed, const Tolerances& tol) {
  std::size_t d = 0;
  for (const auto& [n, m] : spec) {
    if (n == 0 || m == 0) throw std::invalid_argument("random_algebra: zero block size");
    d += n * m;
  }
  if (d == 0 || d > 64) {
    throw std::invalid_argument("random_algebra: total dimension must be in [1, 64]");
  }
  Rng rng(mix_seed(0xa19eb7a ^ seed, seed));
  const ComplexMatrix u = haar_unitary(d, rng);
  std::vector<ComplexMatrix> span;
  std::size_t offset = 0;
  for (const auto& [n, m] : spec) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        // u (E_ij ⊗ 1_m) u* as a sum of m column outer products
        ComplexMatrix e(d, d);
        for (std::size_t k = 0; k < m; ++k) {
          const std::size_t ci = offset + i * m + k;
          const std::size_t cj = offset + j * m + k;
          for (std::size_t r = 0; r < d; ++r) {
            const Complex ur = u(r, ci);
            if (ur == Complex(0.0)) continue;
            for (std::size_t c = 0; c < d; ++c) e(r, c) += ur * std::conj(u(c, cj));
          }
        }
        span.push_back(std::move(e));
      }
    offset += n * m;
  }
  RandomAlgebraResult out{VNAlgebra::from_span(d, std::move(span), tol), u};
  return out;
}

ComplexMatrix range_isometry(const ComplexMatrix& p, const Tolerances& tol) {
  if (!p.square()) throw std::invalid_argument("range_isometry: not square");
  if (hermitian_defect(p) > tol.assert_tol * std::max(p.frobenius_norm(), 1.0) ||
      (p * p - p).frobenius_norm() > 1e-6 * std::max(p.frobenius_norm(), 1.0)) {
    throw std::invalid_argument("range_isometry: input is not a projection");
  }
  const std::size_t d = p.rows();
  const HermEigResult eig = herm_eig(p, tol);
  std::size_t rank = 0;
  for (double l : eig.eigenvalues)
    if (l > 0.5) ++rank;
  ComplexMatrix r(d, rank);
  std::size_t col = 0;
  for (std::size_t k = 0; k < d; ++k) {
    if (eig.eigenvalues[k] <= 0.5) continue;
    for (std::size_t i = 0; i < d; ++i) r(i, col) = eig.vectors(i, k);
    ++col;
  }
  return r;
}

ComplexMatrix factor_component(const ComplexMatrix& x, std::size_t n, std::size_t m) {
  ComplexMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      Complex s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += x(i * m + j, k * m + j);
      out(i, k) = s / static_cast<double>(m);
    }
  return out;
}

std::vector<ComplexMatrix> block_components(const VNAlgebra& m, const ComplexMatrix& x) {
  std::vector<ComplexMatrix> out;
  out.reserve(m.structure().blocks.size());
  for (const Block& blk : m.structure().blocks) {
    out.push_back(factor_component(blk.w * x * blk.w.adjoint(), blk.n, blk.m));
  }
  return out;
}

ComplexMatrix lift_components(const VNAlgebra& m, const std::vector<ComplexMatrix>& components) {
  const auto& blocks = m.structure().blocks;
  if (components.size() != blocks.size()) {
    throw std::invalid_argument("lift_components: block count mismatch");
  }
  ComplexMatrix out(m.ambient_dim(), m.ambient_dim());
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    out += blocks[bi].w.adjoint() *
           kron(components[bi], ComplexMatrix::identity(blocks[bi].m)) * blocks[bi].w;
  }
  return out;
}

double op_norm_in(const VNAlgebra& m, const ComplexMatrix& x) {
  double worst = 0.0;
  for (const ComplexMatrix& comp : block_components(m, x)) {
    worst = std::max(worst, op_norm(comp));
  }
  return worst;
}

double min_eigenvalue_in(const VNAlgebra& m, const ComplexMatrix& hermitian_x) {
  double lo = std::numeric_limits<double>::infinity();
  for (const ComplexMatrix& comp : block_components(m, hermitian_x)) {
    lo = std::min(lo, min_eigenvalue((comp + comp.adjoint()) * 0.5, m.tol()));
  }
  return lo;
}

ComplexMatrix spectral_function_in(const VNAlgebra& m, const ComplexMatrix& hermitian_x,
                                   const std::function<double(double)>& f) {
  std::vector<ComplexMatrix> comps = block_components(m, hermitian_x);
  for (ComplexMatrix& comp : comps) {
    comp = matrix_apply((comp + comp.adjoint()) * 0.5, f, m.tol());
  }
  return lift_components(m, comps);
}

VNAlgebra reduce_to_range(const VNAlgebra& m, const ComplexMatrix& p) {
  const ComplexMatrix r = range_isometry(p, m.tol());
  std::vector<ComplexMatrix> reduced;
  reduced.reserve(m.dim());
  for (const ComplexMatrix& b : m.basis()) reduced.push_back(r.adjoint() * b * r);
  return VNAlgebra::from_span(r.cols(), std::move(reduced), m.tol());
}

}  // namespace vnkit

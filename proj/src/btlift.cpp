#include "vnkit/btlift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace vnkit {

namespace {

double pow4(std::size_t e) { return std::ldexp(1.0, 2 * static_cast<int>(e)); }

std::string kn_tag(std::size_t k, std::size_t n) {
  return "k=" + std::to_string(k + 1) + ",n=" + std::to_string(n);
}

// The design matrix [B_1 xi0 | ... | B_N xi0] is shared by every correction
// solve of an instance, so its SVD is factored once.
class OrbitSolver {
 public:
  OrbitSolver(const VNAlgebra& algebra, const ComplexMatrix& xi0, const Tolerances& tol)
      : dim_(xi0.rows()), n_(algebra.dim()), design_(dim_, n_) {
    for (std::size_t j = 0; j < n_; ++j) {
      const ComplexMatrix col = algebra.basis()[j] * xi0;
      for (std::size_t i = 0; i < dim_; ++i) design_(i, j) = col(i, 0);
    }
    svd_ = svd(design_, tol);
    const double smax = svd_.singular_values.empty() ? 0.0 : svd_.singular_values[0];
    cutoff_ = smax * tol.rank_tol;
  }

  LeastSquaresResult solve(const ComplexMatrix& target) const {
    LeastSquaresResult out;
    out.coefficients.assign(n_, Complex(0.0));
    for (std::size_t k = 0; k < svd_.singular_values.size(); ++k) {
      const double sv = svd_.singular_values[k];
      if (sv <= cutoff_ || sv == 0.0) continue;
      Complex ut = 0.0;
      for (std::size_t i = 0; i < dim_; ++i) ut += std::conj(svd_.u(i, k)) * target(i, 0);
      const Complex w = ut / sv;
      for (std::size_t j = 0; j < n_; ++j) out.coefficients[j] += w * svd_.v(j, k);
    }
    ComplexMatrix fit(dim_, 1);
    for (std::size_t j = 0; j < n_; ++j) {
      if (out.coefficients[j] == Complex(0.0)) continue;
      for (std::size_t i = 0; i < dim_; ++i) fit(i, 0) += out.coefficients[j] * design_(i, j);
    }
    out.residual = (fit - target).frobenius_norm();
    return out;
  }

 private:
  std::size_t dim_;
  std::size_t n_;
  ComplexMatrix design_;
  SvdResult svd_;
  double cutoff_ = 0.0;
};

}  // namespace

BTInstance BTInstance::make(VNAlgebra algebra, ComplexMatrix xi0, std::vector<ComplexMatrix> xis,
                            std::vector<double> gammas, std::size_t depth, ApproximantMode mode,
                            double beta) {
  const Tolerances tol = algebra.tol();
  const std::size_t d = algebra.ambient_dim();
  if (xi0.rows() != d || xi0.cols() != 1) throw std::invalid_argument("BTInstance: xi0 shape");
  if (xis.size() != gammas.size()) {
    throw std::invalid_argument("BTInstance: gamma count does not match vector count");
  }
  for (double g : gammas) {
    if (!(g > 0.0)) throw std::invalid_argument("BTInstance: gammas must be strictly positive");
  }
  if (mode == ApproximantMode::Scheduled && !(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("BTInstance: scheduled beta must be in (0,1)");
  }
  BTInstance out;
  out.algebra = std::move(algebra);
  out.xi0 = std::move(xi0);
  out.depth = depth;
  out.mode = mode;
  out.beta = beta;
  for (const ComplexMatrix& xi : xis) {
    if (xi.rows() != d || xi.cols() != 1) throw std::invalid_argument("BTInstance: xi_k shape");
    const auto ls = least_squares_in_subspace(
        out.algebra.basis(), [&](const ComplexMatrix& b) { return b * out.xi0; }, xi, tol);
    const double scale = std::max(xi.frobenius_norm(), 1.0);
    if (ls.residual > 1e3 * tol.rank_tol * scale) {
      std::ostringstream msg;
      msg << "BTInstance: xi_k outside span(M xi0), membership residual " << ls.residual;
      throw std::invalid_argument(msg.str());
    }
  }
  out.xis = std::move(xis);
  out.gammas = std::move(gammas);
  return out;
}

std::vector<double> gamma_schedule(const std::vector<double>& alphas) {
  for (double a : alphas) {
    if (a < 0.0 || !std::isfinite(a)) {
      throw std::invalid_argument("gamma_schedule: alphas must be nonnegative");
    }
  }
  const std::size_t n = alphas.size();
  std::vector<double> tails(n + 1, 0.0);
  for (std::size_t k = n; k-- > 0;) tails[k] = alphas[k] + tails[k + 1];
  std::vector<double> gammas(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (alphas[k] > 0.0) {
      gammas[k] = std::sqrt(tails[k]) + std::sqrt(tails[k + 1]);
    } else {
      gammas[k] = std::ldexp(1.0, -static_cast<int>(k) - 1);  // 2^{-k}, k 1-based
    }
  }
  return gammas;
}

ApproximantResult approximants(const BTInstance& instance) {
  const Tolerances tol = instance.algebra.tol();
  const std::size_t kcount = instance.xis.size();
  const std::size_t depth = instance.depth;
  ApproximantResult out;
  out.x.assign(kcount, {});
  out.residuals.assign(kcount, {});

  const OrbitSolver solver(instance.algebra, instance.xi0, tol);
  const std::size_t d = instance.algebra.ambient_dim();
  const ComplexMatrix zero_op(d, d);

  for (std::size_t k = 0; k < kcount; ++k) {
    const ComplexMatrix& xi = instance.xis[k];
    const double norm_k = xi.frobenius_norm();
    auto& xk = out.x[k];
    auto& rk = out.residuals[k];
    xk.assign(depth + 1, zero_op);
    rk.assign(depth + 1, 0.0);

    if (norm_k > 0.0) {
      if (instance.mode == ApproximantMode::Exact) {
        const auto ls = solver.solve(xi);
        if (ls.residual > norm_k / 16.0) {
          throw std::runtime_error("approximants: xi_k misses span(M xi0) beyond the step-0 cap");
        }
        xk[0] = instance.algebra.from_coords(ls.coefficients);
        ComplexMatrix rem = xi - xk[0] * instance.xi0;
        const double r = rem.frobenius_norm();
        for (std::size_t n = 0; n <= depth; ++n) rk[n] = r;
      } else {
        ComplexMatrix rem = xi;
        for (std::size_t n = 0; n <= depth; ++n) {
          const double target = instance.beta * norm_k / pow4(n + 2);
          const auto ls = solver.solve(rem);
          const ComplexMatrix full = instance.algebra.from_coords(ls.coefficients);
          const ComplexMatrix fit = full * instance.xi0;
          const double fit_norm = fit.frobenius_norm();
          if (target < ls.residual || fit_norm <= 0.0) {
            throw std::runtime_error(
                "approximants: scheduled residual target is unreachable at depth " +
                std::to_string(n));
          }
          const double slack = std::sqrt(std::max(0.0, target * target - ls.residual * ls.residual));
          const double t = 1.0 - slack / fit_norm;
          xk[n] = full * t;
          rem -= fit * t;
          rk[n] = rem.frobenius_norm();
        }
      }
    }

    // Residual schedule and the per-term growth bounds from the proof chain.
    for (std::size_t n = 0; n <= depth; ++n) {
      out.certificates.add("bt.residual_schedule", rk[n],
                           norm_k / pow4(n + 2) + tol.assert_tol * std::max(norm_k, 1.0),
                           kn_tag(k, n));
    }
    const double x0_norm = (xk[0] * instance.xi0).frobenius_norm();
    out.certificates.add("bt.x0_bound", x0_norm,
                         (17.0 / 16.0) * norm_k + tol.assert_tol * std::max(norm_k, 1.0),
                         kn_tag(k, 0));
    for (std::size_t n = 1; n <= depth; ++n) {
      const double xn_norm = (xk[n] * instance.xi0).frobenius_norm();
      out.certificates.add("bt.xn_bound", xn_norm,
                           5.0 / pow4(n + 2) * norm_k + tol.assert_tol * std::max(norm_k, 1.0),
                           kn_tag(k, n));
    }
  }
  return out;
}

BTResult bt_lift(const BTInstance& instance) {
  const VNAlgebra& m = instance.algebra;
  const Tolerances tol = m.tol();
  const std::size_t d = m.ambient_dim();
  const std::size_t kcount = instance.xis.size();
  const std::size_t depth = instance.depth;
  const auto& blocks = m.structure().blocks;
  const std::size_t nblocks = blocks.size();

  BTResult out;
  out.approx = approximants(instance);
  out.certificates.merge(out.approx.certificates);
  CertificateSet& cert = out.certificates;

  // Everything in the construction stays inside M, so spectral work runs on
  // the n x n block components instead of the ambient matrices.
  std::vector<std::vector<std::vector<ComplexMatrix>>> xc(kcount);
  for (std::size_t k = 0; k < kcount; ++k) {
    xc[k].reserve(depth + 1);
    for (std::size_t j = 0; j <= depth; ++j) {
      xc[k].push_back(block_components(m, out.approx.x[k][j]));
    }
  }
  const auto sqrt_fn = [](double l) { return std::sqrt(std::max(l, 0.0)); };
  const auto inv_sqrt_fn = [](double l) { return 1.0 / std::sqrt(std::max(l, 1e-300)); };
  const auto comps_apply = [&](const std::vector<ComplexMatrix>& comps, const auto& f) {
    std::vector<ComplexMatrix> r(nblocks);
    for (std::size_t b = 0; b < nblocks; ++b) {
      r[b] = matrix_apply((comps[b] + comps[b].adjoint()) * 0.5, f, tol);
    }
    return r;
  };
  const auto comps_op_norm = [&](const std::vector<ComplexMatrix>& comps) {
    double worst = 0.0;
    for (const ComplexMatrix& c : comps) worst = std::max(worst, op_norm(c));
    return worst;
  };
  const auto comps_min_eig = [&](const std::vector<ComplexMatrix>& comps) {
    double lo = std::numeric_limits<double>::infinity();
    for (const ComplexMatrix& c : comps) {
      lo = std::min(lo, min_eigenvalue((c + c.adjoint()) * 0.5, tol));
    }
    return lo;
  };

  // y^2 = 1 + sum_{k,j} (4^{j+1}/gamma_k) x*x at full truncation, blockwise.
  std::vector<ComplexMatrix> g_comps(nblocks);
  for (std::size_t b = 0; b < nblocks; ++b) g_comps[b] = ComplexMatrix::identity(blocks[b].n);
  const auto add_term = [&](std::vector<ComplexMatrix>& target, std::size_t k, std::size_t j) {
    const double w = pow4(j + 1) / instance.gammas[k];
    for (std::size_t b = 0; b < nblocks; ++b) {
      target[b] += w * (xc[k][j][b].adjoint() * xc[k][j][b]);
    }
  };
  for (std::size_t k = 0; k < kcount; ++k) {
    for (std::size_t j = 0; j <= depth; ++j) add_term(g_comps, k, j);
  }

  const std::vector<ComplexMatrix> a_comps = comps_apply(g_comps, inv_sqrt_fn);
  out.a = lift_components(m, a_comps);
  const ComplexMatrix y = lift_components(m, comps_apply(g_comps, sqrt_fn));

  // Finite-dimensional realization of the weak limit: eta = y xi0, and the
  // support of a is full since y is invertible (asserted, not assumed).
  out.eta0 = y * instance.xi0;
  double a_lo = std::numeric_limits<double>::infinity();
  double a_hi = 0.0;
  for (const ComplexMatrix& c : a_comps) {
    const HermEigResult eig = herm_eig(c, tol);
    a_lo = std::min(a_lo, eig.eigenvalues.front());
    a_hi = std::max(a_hi, eig.eigenvalues.back());
  }
  const bool full_support = a_lo > tol.rank_tol * std::max(a_hi, 1e-300);
  cert.add_flag("bt.support_full", full_support);
  cert.add("bt.a_positive", -a_lo, tol.assert_tol);
  cert.add("bt.a_contraction", a_hi - 1.0, tol.assert_tol);
  cert.add("bt.a_in_algebra", m.span_residual(out.a),
           tol.assert_tol * std::max(out.a.frobenius_norm(), 1.0));
  cert.add("bt.a_eta", (out.a * out.eta0 - instance.xi0).frobenius_norm(),
           tol.assert_tol * std::max(instance.xi0.frobenius_norm(), 1.0));

  // One minus the support projection of a; zero here, and kept as a guard
  // for degenerate future modes.
  const double support_cut = tol.rank_tol * std::max(a_hi, 1e-300);
  const ComplexMatrix coker =
      spectral_function_in(m, out.a, [&](double l) { return l > support_cut ? 0.0 : 1.0; });

  double c_sq = std::pow(instance.xi0.frobenius_norm(), 2.0);
  for (std::size_t k = 0; k < kcount; ++k) {
    c_sq += 5.0 * std::pow(instance.xis[k].frobenius_norm(), 2.0) / instance.gammas[k];
  }
  out.c_bound = std::sqrt(c_sq);

  for (std::size_t k = 0; k < kcount; ++k) {
    std::vector<ComplexMatrix> bk_comps(nblocks);
    for (std::size_t b = 0; b < nblocks; ++b) {
      ComplexMatrix sum(blocks[b].n, blocks[b].n);
      for (std::size_t j = 0; j <= depth; ++j) sum += xc[k][j][b];
      bk_comps[b] = sum * a_comps[b];
    }
    const ComplexMatrix bk = lift_components(m, bk_comps);
    const double norm_k = instance.xis[k].frobenius_norm();
    const double sqrt_gamma = std::sqrt(instance.gammas[k]);
    for (std::size_t j = 0; j <= depth; ++j) {
      double xa_norm = 0.0;
      for (std::size_t b = 0; b < nblocks; ++b) {
        xa_norm = std::max(xa_norm, op_norm(xc[k][j][b] * a_comps[b]));
      }
      cert.add("bt.xa_bound", xa_norm,
               sqrt_gamma / std::ldexp(1.0, static_cast<int>(j) + 1) + tol.assert_tol,
               kn_tag(k, j));
    }
    cert.add("bt.bk_norm", comps_op_norm(bk_comps), sqrt_gamma + tol.assert_tol, kn_tag(k, 0));
    cert.add("bt.bk_eta", (bk * out.eta0 - instance.xis[k]).frobenius_norm(),
             norm_k / pow4(depth + 2) + tol.assert_tol, kn_tag(k, 0));
    cert.add("bt.bk_in_algebra", m.span_residual(bk),
             tol.assert_tol * std::max(bk.frobenius_norm(), 1.0), kn_tag(k, 0));
    cert.add("bt.bk_support", (bk * coker).frobenius_norm(), tol.assert_tol, kn_tag(k, 0));
    out.bs.push_back(bk);
  }

  // Prefix family y_p: increasing, with decreasing inverses, and the norm
  // trace ||y_p xi0|| below the constant c for every prefix. Terms enter the
  // running sum at p = max(k, j), so each is added exactly once.
  const std::size_t pmax = std::max(kcount, depth);
  std::vector<ComplexMatrix> gp_comps(nblocks);
  for (std::size_t b = 0; b < nblocks; ++b) gp_comps[b] = ComplexMatrix::identity(blocks[b].n);
  std::vector<ComplexMatrix> prev_y_comps = gp_comps;
  std::vector<ComplexMatrix> prev_inv_comps = gp_comps;
  out.yp_norms.push_back(instance.xi0.frobenius_norm());
  for (std::size_t p = 1; p <= pmax; ++p) {
    for (std::size_t k = 0; k < std::min(p, kcount); ++k) {
      for (std::size_t j = 0; j <= std::min(p, depth); ++j) {
        if (std::max(k + 1, j) != p) continue;  // newly admitted terms only
        add_term(gp_comps, k, j);
      }
    }
    const std::vector<ComplexMatrix> yp_comps = comps_apply(gp_comps, sqrt_fn);
    const std::vector<ComplexMatrix> ypinv_comps = comps_apply(gp_comps, inv_sqrt_fn);
    std::vector<ComplexMatrix> diff_y(nblocks), diff_inv(nblocks);
    for (std::size_t b = 0; b < nblocks; ++b) {
      diff_y[b] = yp_comps[b] - prev_y_comps[b];
      diff_inv[b] = prev_inv_comps[b] - ypinv_comps[b];
    }
    cert.add("bt.yp_monotone", -comps_min_eig(diff_y), tol.assert_tol, "p=" + std::to_string(p));
    cert.add("bt.yinv_antitone", -comps_min_eig(diff_inv), tol.assert_tol,
             "p=" + std::to_string(p));
    const double trace_norm = (lift_components(m, yp_comps) * instance.xi0).frobenius_norm();
    out.yp_norms.push_back(trace_norm);
    cert.add("bt.yp_trace_bound", trace_norm * trace_norm,
             c_sq + tol.assert_tol * std::max(c_sq, 1.0), "p=" + std::to_string(p));
    prev_y_comps = yp_comps;
    prev_inv_comps = ypinv_comps;
  }
  return out;
}

BTConvergenceResult bt_convergence_run(const VNAlgebra& m, const ComplexMatrix& xi0,
                                       const std::vector<ComplexMatrix>& xis, std::size_t depth,
                                       ApproximantMode mode, double beta) {
  const Tolerances tol = m.tol();
  std::vector<double> alphas;
  alphas.reserve(xis.size());
  for (const ComplexMatrix& xi : xis) alphas.push_back(std::pow(xi.frobenius_norm(), 2.0));
  BTConvergenceResult out;
  out.gammas = gamma_schedule(alphas);
  BTInstance instance = BTInstance::make(m, xi0, xis, out.gammas, depth, mode, beta);
  out.lift = bt_lift(instance);

  double min_gamma = out.gammas.empty() ? 1.0 : out.gammas.front();
  for (double g : out.gammas) min_gamma = std::min(min_gamma, g);
  out.certificates.add_flag("bt.gamma_positive", min_gamma > 0.0);
  // Decay envelope gamma_k <= 2 sqrt(T_k) + 2^{-k}: both terms vanish with k
  // whenever the alpha tail is summable, so the lifted norms decay.
  std::vector<double> tails(alphas.size() + 1, 0.0);
  for (std::size_t k = alphas.size(); k-- > 0;) tails[k] = alphas[k] + tails[k + 1];
  double envelope_excess = 0.0;
  for (std::size_t k = 0; k < out.gammas.size(); ++k) {
    const double env =
        2.0 * std::sqrt(tails[k]) + std::ldexp(1.0, -static_cast<int>(k) - 1);
    envelope_excess = std::max(envelope_excess, out.gammas[k] - env);
  }
  out.certificates.add("bt.gamma_decay_envelope", envelope_excess, tol.assert_tol);
  return out;
}

}  // namespace vnkit

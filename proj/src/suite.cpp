#include "vnkit/suite.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "vnkit/algebra.hpp"
#include "vnkit/btlift.hpp"
#include "vnkit/modular.hpp"
#include "vnkit/rng.hpp"
#include "vnkit/serialize.hpp"
#include "vnkit/weights.hpp"

namespace vnkit {

namespace {

using Clock = std::chrono::steady_clock;
using BlockSpec = std::vector<std::pair<std::size_t, std::size_t>>;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a + 0x9e3779b97f4a7c15ull + (b << 6) + (b >> 2);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  return x;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("VNKIT_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return std::min(v, 64);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return static_cast<int>(std::clamp(hc, 1u, 8u));
}

template <typename Body>
void parallel_for(std::size_t count, int threads, const Body& body) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const int workers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) break;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string spec_to_string(const BlockSpec& spec) {
  std::ostringstream os;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    if (i) os << "+";
    os << "(" << spec[i].first << "," << spec[i].second << ")";
  }
  return os.str();
}

// Fold a per-instance certificate set into one aggregate entry, carrying the
// failing members verbatim so a red report stays diagnosable.
void fold_instance(CertificateSet& into, const std::string& name, const CertificateSet& inner,
                   const std::string& detail) {
  into.add(name, inner.worst_ratio(), 1.0, detail);
  if (!inner.all_pass()) {
    for (const Certificate& c : inner.items()) {
      if (!c.pass) {
        Certificate copy = c;
        into.add(name + ".failure:" + copy.name, copy.measured, copy.bound,
                 detail + (copy.detail.empty() ? "" : " " + copy.detail));
      }
    }
  }
}

ComplexMatrix random_algebra_element(const VNAlgebra& m, Rng& rng) {
  ComplexMatrix x(m.ambient_dim(), m.ambient_dim());
  for (const ComplexMatrix& b : m.basis()) add_scaled(x, rng.complex_gaussian(), b);
  return x;
}

StateDensity seeded_faithful_state(std::size_t d, Rng& rng, const Tolerances& tol) {
  ComplexMatrix rho = random_positive(d, 0.2, 2.0, rng);
  rho *= 1.0 / rho.trace().real();
  return StateDensity::from_density(rho, tol);
}

ComplexMatrix lift_block(const Block& blk, const ComplexMatrix& n_side,
                         const ComplexMatrix& m_side) {
  return blk.w.adjoint() * kron(n_side, m_side) * blk.w;
}

// ---------------------------------------------------------------------------
// criterion 1: quantitative lift constants
// ---------------------------------------------------------------------------

CriterionReport criterion_bt_constants(const SuiteOptions& opt, int threads) {
  CriterionReport rep;
  rep.id = 1;
  rep.name = "bt-constants";
  const auto start = Clock::now();
  std::vector<CertificateSet> results(opt.bt_instances);
  std::vector<std::string> details(opt.bt_instances);
  parallel_for(opt.bt_instances, threads, [&](std::size_t i) {
    Rng rng(mix(opt.seed, 0x1000 + i));
    BlockSpec spec;
    std::size_t total = 0;
    const std::size_t nblocks = 1 + rng.integer(3);
    for (std::size_t b = 0; b < nblocks; ++b) {
      const std::size_t n = 1 + rng.integer(4);
      const std::size_t m = 1 + rng.integer(4);
      if (total + n * m > 32) break;
      spec.emplace_back(n, m);
      total += n * m;
    }
    if (spec.empty()) spec.emplace_back(2, 2);
    const VNAlgebra algebra = random_algebra(spec, rng.fork_seed(), opt.tol).algebra;
    const std::size_t d = algebra.ambient_dim();
    ComplexMatrix xi0 = gaussian_vector(d, rng);
    xi0 *= 1.0 / xi0.frobenius_norm();
    std::vector<ComplexMatrix> xis;
    for (std::size_t k = 0; k < 6; ++k) {
      ComplexMatrix xi = random_algebra_element(algebra, rng) * xi0;
      const double n = xi.frobenius_norm();
      if (n > 0.0) xi *= std::ldexp(1.0, -static_cast<int>(k)) / n;
      xis.push_back(xi);
    }
    std::vector<double> alphas;
    for (const ComplexMatrix& xi : xis) alphas.push_back(std::norm(xi.frobenius_norm()));
    const BTInstance inst = BTInstance::make(algebra, xi0, xis, gamma_schedule(alphas), 6,
                                             ApproximantMode::Scheduled, 0.5);
    const BTResult res = bt_lift(inst);
    results[i] = res.certificates;
    details[i] = "i=" + std::to_string(i) + " " + spec_to_string(spec);
  });
  for (std::size_t i = 0; i < opt.bt_instances; ++i) {
    fold_instance(rep.certificates, "suite.bt_instance", results[i], details[i]);
  }
  rep.pass = rep.certificates.all_pass();
  rep.wall_ms = ms_since(start);
  return rep;
}

// ---------------------------------------------------------------------------
// criterion 2: gamma schedule telescoping and worked values
// ---------------------------------------------------------------------------

CriterionReport criterion_gamma(const SuiteOptions& opt, int /*threads*/) {
  CriterionReport rep;
  rep.id = 2;
  rep.name = "gamma-telescoping";
  const auto start = Clock::now();
  CertificateSet& cert = rep.certificates;

  for (int rep_i = 0; rep_i < 8; ++rep_i) {
    Rng rng(mix(opt.seed, 0x2000 + rep_i));
    const std::size_t kmax = 6 + rng.integer(10);
    std::vector<double> alphas(kmax);
    for (double& a : alphas) a = 0.01 + rng.uniform01();
    const auto gammas = gamma_schedule(alphas);
    std::vector<double> tails(kmax + 1, 0.0);
    for (std::size_t k = kmax; k-- > 0;) tails[k] = alphas[k] + tails[k + 1];
    double sum = 0.0;
    for (std::size_t k = 0; k < kmax; ++k) sum += alphas[k] / gammas[k];
    const double expect = std::sqrt(tails[0]) - std::sqrt(tails[kmax]);
    cert.add("gamma.telescoping", std::abs(sum - expect), 1e-12 * std::max(expect, 1.0),
             "rep=" + std::to_string(rep_i));
  }

  // worked geometric run alpha_k = 4^{-k}
  const std::size_t kmax = 20;
  std::vector<double> alphas(kmax);
  for (std::size_t k = 0; k < kmax; ++k) alphas[k] = std::ldexp(1.0, -2 * (static_cast<int>(k) + 1));
  const auto gammas = gamma_schedule(alphas);
  cert.add("gamma.worked_gamma1", std::abs(gammas[0] - 0.8660254037844386), 1e-6);
  double partial = 0.0;
  for (std::size_t k = 0; k < kmax; ++k) partial += alphas[k] / gammas[k];
  cert.add("gamma.worked_partial_sum", std::abs(partial - 0.5773502691896258), 1e-6);

  const auto dyadic = gamma_schedule({0.0, 0.0, 0.0, 0.0});
  double dy = 0.0;
  for (std::size_t k = 0; k < dyadic.size(); ++k) {
    dy = std::max(dy, std::abs(dyadic[k] - std::ldexp(1.0, -static_cast<int>(k) - 1)));
  }
  cert.add("gamma.zero_branch", dy, 1e-15);

  rep.pass = cert.all_pass();
  rep.wall_ms = ms_since(start);
  return rep;
}

// ---------------------------------------------------------------------------
// criterion 3: standardness criterion against the balance oracle
// ---------------------------------------------------------------------------

CriterionReport criterion_standardness(const SuiteOptions& opt, int threads,
                                       const std::vector<BlockSpec>& corpus) {
  CriterionReport rep;
  rep.id = 3;
  rep.name = "standardness-criterion";
  const auto start = Clock::now();
  std::vector<CertificateSet> results(corpus.size());
  parallel_for(corpus.size(), threads, [&](std::size_t i) {
    const BlockSpec& spec = corpus[i];
    const std::uint64_t seed = mix(opt.seed, 0x3000 + i);
    const VNAlgebra m = random_algebra(spec, seed, opt.tol).algebra;
    CertificateSet& cert = results[i];
    bool balanced = true;
    for (const auto& [n, mm] : spec) balanced = balanced && n == mm;
    const StandardnessReport sr = is_standard(m);
    cert.add_flag("suite.standard_verdict_matches_oracle", sr.standard == balanced,
                  spec_to_string(spec));
    if (sr.standard) {
      const VNAlgebra mp = commutant(m);
      const TCriterionReport base = check_T_criterion(m, *sr.j, mp);
      cert.add("suite.standard_j_span", base.conjugated_span_residual, opt.tol.assert_tol);
      cert.add("suite.standard_j_central", base.central_residual, opt.tol.assert_tol);
      Rng rng(mix(seed, 0xabc));
      int accepted = 0, attempts = 0;
      while (accepted < 10 && attempts < 200) {
        ++attempts;
        ComplexMatrix mprime = random_algebra_element(mp, rng);
        const SvdResult s = svd(mprime, opt.tol);
        if (s.singular_values.back() < 1e-3 * s.singular_values.front()) continue;
        ++accepted;
        const TCriterionReport res = check_T_criterion(m, sr.j->before_linear(mprime), mp);
        if (!res.passes) {
          cert.add_flag("suite.standard_mprime_j", false,
                        spec_to_string(spec) + " variant " + std::to_string(accepted));
        }
      }
      cert.add_flag("suite.standard_mprime_j_batch", accepted == 10, spec_to_string(spec));
    } else {
      cert.merge(sr.certificates);  // the obstruction certificate
      cert.add_flag("suite.obstruction_dims",
                    sr.obstruction.find("unbalanced") != std::string::npos, sr.obstruction);
    }
  });
  for (std::size_t i = 0; i < corpus.size(); ++i) rep.certificates.merge(results[i]);
  rep.pass = rep.certificates.all_pass();
  rep.wall_ms = ms_since(start);
  return rep;
}

// ---------------------------------------------------------------------------
// criterion 4: GNS standard form on the corpus plus the worked spectrum
// ---------------------------------------------------------------------------

CriterionReport criterion_gns(const SuiteOptions& opt, int threads,
                              const std::vector<BlockSpec>& corpus) {
  CriterionReport rep;
  rep.id = 4;
  rep.name = "gns-standard-form";
  const auto start = Clock::now();
  std::vector<CertificateSet> results(corpus.size());
  parallel_for(corpus.size(), threads, [&](std::size_t i) {
    Rng rng(mix(opt.seed, 0x4000 + i));
    const VNAlgebra m = random_algebra(corpus[i], rng.fork_seed(), opt.tol).algebra;
    const StateDensity phi = seeded_faithful_state(m.ambient_dim(), rng, opt.tol);
    const GNSData g = gns(m, phi);
    fold_instance(results[i], "suite.gns_instance", g.certificates, spec_to_string(corpus[i]));
  });
  for (std::size_t i = 0; i < corpus.size(); ++i) rep.certificates.merge(results[i]);

  // worked example: M2 with rho = diag(0.2, 0.8)
  const VNAlgebra m2 = random_algebra({{2, 1}}, mix(opt.seed, 0x4fff), opt.tol).algebra;
  const GNSData g = gns(m2, StateDensity::from_density(
                                ComplexMatrix::diagonal(std::vector<double>{0.2, 0.8}), opt.tol));
  const HermEigResult eig = herm_eig(g.delta, opt.tol);
  const double expected[4] = {0.25, 1.0, 1.0, 4.0};
  double worst = 0.0;
  for (int k = 0; k < 4; ++k) worst = std::max(worst, std::abs(eig.eigenvalues[k] - expected[k]));
  rep.certificates.add("suite.gns_worked_delta_spectrum", worst, 1e-8);

  rep.pass = rep.certificates.all_pass();
  rep.wall_ms = ms_since(start);
  return rep;
}

// ---------------------------------------------------------------------------
// criterion 5: Okayasu correction batch with the non-vacuity guard
// ---------------------------------------------------------------------------

CriterionReport criterion_okayasu(const SuiteOptions& opt, int threads) {
  CriterionReport rep;
  rep.id = 5;
  rep.name = "okayasu-correction";
  const auto start = Clock::now();
  std::vector<CertificateSet> results(opt.okayasu_instances);
  std::vector<double> before(opt.okayasu_instances, 0.0);
  parallel_for(opt.okayasu_instances, threads, [&](std::size_t i) {
    Rng rng(mix(opt.seed, 0x5000 + i));
    BlockSpec spec;
    spec.emplace_back(2 + rng.integer(2), 1 + rng.integer(3));  // one non-scalar factor side
    if (rng.integer(2) == 0) spec.emplace_back(1 + rng.integer(2), 1 + rng.integer(2));
    const VNAlgebra m = random_algebra(spec, rng.fork_seed(), opt.tol).algebra;
    ComplexMatrix t(m.ambient_dim(), m.ambient_dim());
    for (const Block& blk : m.structure().blocks) {
      const ComplexMatrix un = haar_unitary(blk.n, rng);
      const ComplexMatrix um = haar_unitary(blk.m, rng);
      const ComplexMatrix qn = random_positive(blk.n, 0.4, 2.5, rng);
      const ComplexMatrix qm = random_positive(blk.m, 0.4, 2.5, rng);
      t += lift_block(blk, un * matrix_sqrt(qn, opt.tol), um * matrix_sqrt(qm, opt.tol));
    }
    const OkayasuResult res = okayasu_correct(m, t);
    before[i] = res.star_defect_before;
    fold_instance(results[i], "suite.okayasu_instance", res.certificates,
                  "i=" + std::to_string(i) + " " + spec_to_string(spec));
  });
  std::size_t tame = 0;
  for (double b : before) {
    if (b <= 1e-2) ++tame;
  }
  for (std::size_t i = 0; i < opt.okayasu_instances; ++i) rep.certificates.merge(results[i]);
  rep.certificates.add("suite.okayasu_nonvacuity", static_cast<double>(tame),
                       static_cast<double>(opt.okayasu_instances / 10),
                       "instances whose raw conjugation already looked *-preserving");
  rep.pass = rep.certificates.all_pass();
  rep.wall_ms = ms_since(start);
  return rep;
}

// ---------------------------------------------------------------------------
// criterion 6: commutant suite
// ---------------------------------------------------------------------------

CriterionReport criterion_commutant(const SuiteOptions& opt, int threads,
                                    const std::vector<BlockSpec>& corpus) {
  CriterionReport rep;
  rep.id = 6;
  rep.name = "commutant-suite";
  const auto start = Clock::now();
  std::vector<CertificateSet> results(corpus.size());
  parallel_for(corpus.size(), threads, [&](std::size_t i) {
    const BlockSpec& spec = corpus[i];
    const VNAlgebra m = random_algebra(spec, mix(opt.seed, 0x6000 + i), opt.tol).algebra;
    CertificateSet& cert = results[i];
    const std::string tag = spec_to_string(spec);
    const VNAlgebra mp = commutant(m);
    std::size_t expect_mp = 0;
    for (const auto& [n, mm] : spec) expect_mp += mm * mm;
    cert.add_flag("suite.commutant_dim_formula", mp.dim() == expect_mp, tag);
    const VNAlgebra mpp = commutant(mp);
    cert.add_flag("suite.double_commutant_dim", mpp.dim() == m.dim(), tag);
    double dist = 0.0;
    for (const ComplexMatrix& b : m.basis()) dist = std::max(dist, mpp.span_residual(b));
    for (const ComplexMatrix& b : mpp.basis()) dist = std::max(dist, m.span_residual(b));
    cert.add("suite.double_commutant_span", dist, opt.tol.assert_tol, tag);
    const CyclicReport cm = cyclic_analysis(m, mix(opt.seed, i));
    const CyclicReport cp = cyclic_analysis(mp, mix(opt.seed, i + 1));
    cert.add_flag("suite.cyclic_separating_duality",
                  cm.has_cyclic == cp.has_separating && cm.has_separating == cp.has_cyclic, tag);
  });
  for (std::size_t i = 0; i < corpus.size(); ++i) rep.certificates.merge(results[i]);
  rep.pass = rep.certificates.all_pass();
  rep.wall_ms = ms_since(start);
  return rep;
}

// ---------------------------------------------------------------------------
// criterion 7: weight constants
// ---------------------------------------------------------------------------

CriterionReport criterion_weights(const SuiteOptions& opt, int threads,
                                  const std::vector<BlockSpec>& corpus) {
  CriterionReport rep;
  rep.id = 7;
  rep.name = "weights";
  const auto start = Clock::now();

  // worked instance: M2, rho = diag(0.2, 0.8), analytic sup ratio 5 and the
  // large randomized falsification search
  const VNAlgebra m2 = random_algebra({{2, 1}}, mix(opt.seed, 0x7aaa), opt.tol).algebra;
  const StateDensity worked = StateDensity::from_density(
      ComplexMatrix::diagonal(std::vector<double>{0.2, 0.8}), opt.tol);
  const SupRatioResult sup =
      sup_ratio(m2, worked, opt.supratio_samples, mix(opt.seed, 0x7bbb));
  rep.certificates.add("suite.supratio_worked", std::abs(sup.value - 5.0), 1e-8);
  rep.certificates.merge(sup.certificates);

  // cutoff arithmetic: monotone in k, exactly stable past ||A||
  const TraceData tau = canonical_trace(m2);
  const ComplexMatrix a = ComplexMatrix::diagonal(std::vector<double>{1.0, 3.0});
  Rng cut_rng(mix(opt.seed, 0x7ccc));
  const ComplexMatrix b = random_positive(2, 0.2, 1.5, cut_rng);
  double prev = -1.0, mono = 0.0;
  for (double k : {-1.0, 0.0, 0.5, 1.0, 2.0, 2.99, 3.0, 4.0, 10.0}) {
    const double v = pt_weight_cutoff(tau, a, b, k);
    mono = std::max(mono, prev - v);
    prev = v;
  }
  rep.certificates.add("suite.cutoff_monotone", mono, 1e-12);
  const ComplexMatrix ra = matrix_sqrt(a, opt.tol);
  const double stable = tau.value(ra * b * ra).real();
  rep.certificates.add("suite.cutoff_stable",
                       std::abs(pt_weight_cutoff(tau, a, b, 3.0) - stable), 1e-12);
  rep.certificates.add("suite.cutoff_stable_past_norm",
                       std::abs(pt_weight_cutoff(tau, a, b, 128.0) - stable), 1e-12);

  // corpus sweep: sup * lambda = 1 with matching witness, smaller searches
  std::vector<CertificateSet> results(corpus.size());
  parallel_for(corpus.size(), threads, [&](std::size_t i) {
    Rng rng(mix(opt.seed, 0x7000 + i));
    const VNAlgebra m = random_algebra(corpus[i], rng.fork_seed(), opt.tol).algebra;
    const StateDensity phi = seeded_faithful_state(m.ambient_dim(), rng, opt.tol);
    const SupRatioResult res = sup_ratio(m, phi, 500, rng.fork_seed());
    fold_instance(results[i], "suite.supratio_instance", res.certificates,
                  spec_to_string(corpus[i]));
    const WeightReport wr = check_complement_conditions(m, phi, rng.fork_seed());
    fold_instance(results[i], "suite.weight_conditions", wr.certificates,
                  spec_to_string(corpus[i]));
    results[i].add_flag("suite.weight_verdicts", wr.cond_ii && wr.cond_iii && wr.cond_iv && wr.cond_v,
                        spec_to_string(corpus[i]));
  });
  for (std::size_t i = 0; i < corpus.size(); ++i) rep.certificates.merge(results[i]);
  rep.pass = rep.certificates.all_pass();
  rep.wall_ms = ms_since(start);
  return rep;
}

// ---------------------------------------------------------------------------
// criterion 8: vector functional decomposition
// ---------------------------------------------------------------------------

CriterionReport criterion_vecfun(const SuiteOptions& opt, int threads,
                                 const std::vector<BlockSpec>& corpus) {
  CriterionReport rep;
  rep.id = 8;
  rep.name = "vector-functional-decomposition";
  const auto start = Clock::now();

  std::vector<BlockSpec> standard_specs;
  for (const BlockSpec& spec : corpus) {
    bool balanced = true;
    for (const auto& [n, mm] : spec) balanced = balanced && n == mm;
    if (balanced) standard_specs.push_back(spec);
  }
  std::vector<CertificateSet> results(standard_specs.size());
  parallel_for(standard_specs.size(), threads, [&](std::size_t i) {
    Rng rng(mix(opt.seed, 0x8000 + i));
    const VNAlgebra m = random_algebra(standard_specs[i], rng.fork_seed(), opt.tol).algebra;
    ComplexMatrix rho = random_positive(m.ambient_dim(), 0.2, 1.5, rng);
    rho *= 1.0 / rho.trace().real();
    const auto dec = vector_functional_decomposition(m, StateDensity::from_density(rho, opt.tol));
    results[i].add_flag("suite.vecfun_standard_single", dec.vectors.size() == 1,
                        spec_to_string(standard_specs[i]));
    fold_instance(results[i], "suite.vecfun_instance", dec.certificates,
                  spec_to_string(standard_specs[i]));
  });
  for (std::size_t i = 0; i < standard_specs.size(); ++i) rep.certificates.merge(results[i]);

  // scalars on C^5 with a full-rank commutant density need exactly 5 vectors
  const VNAlgebra scalars = generate_algebra({}, 5, opt.tol);
  Rng rng(mix(opt.seed, 0x8fff));
  const auto dec = vector_functional_decomposition(
      scalars, StateDensity::from_density(random_positive(5, 0.3, 1.2, rng), opt.tol));
  rep.certificates.add_flag("suite.vecfun_scalars_full_rank", dec.vectors.size() == 5);
  rep.certificates.merge(dec.certificates);

  rep.pass = rep.certificates.all_pass();
  rep.wall_ms = ms_since(start);
  return rep;
}

}  // namespace

std::vector<BlockSpec> make_corpus(std::uint64_t seed, std::size_t max_dim, std::size_t count) {
  std::vector<BlockSpec> corpus;
  const std::vector<BlockSpec> baseline = {
      {{1, 1}}, {{2, 2}}, {{3, 3}}, {{2, 1}}, {{1, 2}}, {{2, 3}}, {{3, 2}}, {{3, 1}}, {{1, 3}},
      {{2, 2}, {1, 1}}, {{2, 1}, {1, 2}}, {{2, 2}, {2, 2}}, {{3, 3}, {1, 1}}, {{2, 3}, {3, 1}}};
  for (const BlockSpec& spec : baseline) {
    std::size_t total = 0;
    for (const auto& [n, m] : spec) total += n * m;
    if (total <= max_dim && corpus.size() < count) corpus.push_back(spec);
  }
  Rng rng(mix(seed, 0xc0125ull));
  while (corpus.size() < count) {
    BlockSpec spec;
    std::size_t total = 0;
    const bool balanced = rng.integer(2) == 0;
    const std::size_t nblocks = 1 + rng.integer(3);
    for (std::size_t b = 0; b < nblocks; ++b) {
      const std::size_t n = 1 + rng.integer(3);
      const std::size_t m = balanced ? n : 1 + rng.integer(3);
      if (total + n * m > max_dim) break;
      spec.emplace_back(n, m);
      total += n * m;
    }
    if (spec.empty()) continue;
    corpus.push_back(spec);
  }
  return corpus;
}

SuiteReport run_suite(const SuiteOptions& options) {
  options.tol.validate();
  const int threads = resolve_threads(options.threads);
  const auto start = Clock::now();
  SuiteReport report;
  report.options = options;
  const std::vector<BlockSpec> corpus =
      make_corpus(options.seed, options.max_dim, options.corpus_size);

  const bool verbose = std::getenv("VNKIT_VERBOSE") != nullptr;
  const auto push = [&](CriterionReport rep) {
    if (verbose) {
      std::fprintf(stderr, "[suite] criterion %d %-32s %s (%.0f ms)\n", rep.id, rep.name.c_str(),
                   rep.pass ? "pass" : "FAIL", rep.wall_ms);
    }
    report.criteria.push_back(std::move(rep));
  };
  push(criterion_bt_constants(options, threads));
  push(criterion_gamma(options, threads));
  push(criterion_standardness(options, threads, corpus));
  push(criterion_gns(options, threads, corpus));
  push(criterion_okayasu(options, threads));
  push(criterion_commutant(options, threads, corpus));
  push(criterion_weights(options, threads, corpus));
  push(criterion_vecfun(options, threads, corpus));

  report.pass = true;
  for (const CriterionReport& c : report.criteria) report.pass = report.pass && c.pass;
  report.wall_ms = ms_since(start);
  report.digest = suite_digest(report);
  return report;
}

std::string suite_digest(const SuiteReport& report) {
  // Canonical payload: everything except wall clocks, doubles as raw bits.
  std::ostringstream os;
  const auto bits = [](double x) {
    std::uint64_t u = 0;
    std::memcpy(&u, &x, sizeof(u));
    std::ostringstream h;
    h << std::hex << u;
    return h.str();
  };
  os << "seed=" << report.options.seed << ";max_dim=" << report.options.max_dim
     << ";bt=" << report.options.bt_instances << ";ok=" << report.options.okayasu_instances
     << ";corpus=" << report.options.corpus_size << ";samples=" << report.options.supratio_samples
     << ";rank_tol=" << bits(report.options.tol.rank_tol)
     << ";assert_tol=" << bits(report.options.tol.assert_tol) << "\n";
  for (const CriterionReport& c : report.criteria) {
    os << c.id << "|" << c.name << "|" << (c.pass ? 1 : 0) << "\n";
    for (const Certificate& item : c.certificates.items()) {
      os << item.name << "|" << item.detail << "|" << bits(item.measured) << "|"
         << bits(item.bound) << "|" << (item.pass ? 1 : 0) << "\n";
    }
  }
  return fnv1a_hex(os.str());
}

}  // namespace vnkit

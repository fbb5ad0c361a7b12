#pragma once

// The certificate suite: seeded corpus generation and one runner per
// criterion, aggregated into a deterministic report. Instances inside a
// criterion run on a small worker pool; results are collected by index so
// the report is identical no matter the thread count.

#include <cstdint>
#include <string>
#include <vector>

#include "vnkit/linalg.hpp"
#include "vnkit/report.hpp"

namespace vnkit {

struct SuiteOptions {
  std::uint64_t seed = 7;
  std::size_t max_dim = 12;  // ambient cap for the commutant-heavy corpus
  Tolerances tol;
  int threads = 0;  // 0: VNKIT_THREADS, else min(hardware, 8)

  std::size_t bt_instances = 100;
  std::size_t okayasu_instances = 100;
  std::size_t corpus_size = 50;
  std::size_t supratio_samples = 10000;
};

struct CriterionReport {
  int id = 0;
  std::string name;
  CertificateSet certificates;
  bool pass = false;
  double wall_ms = 0.0;
};

struct SuiteReport {
  SuiteOptions options;
  std::vector<CriterionReport> criteria;
  bool pass = false;
  double wall_ms = 0.0;
  std::string digest;  // over everything except wall clocks
};

// Deterministic corpus of block specs with total dimension <= max_dim;
// roughly half balanced so the standardness split is well populated.
std::vector<std::vector<std::pair<std::size_t, std::size_t>>> make_corpus(std::uint64_t seed,
                                                                          std::size_t max_dim,
                                                                          std::size_t count);

SuiteReport run_suite(const SuiteOptions& options);

std::string suite_digest(const SuiteReport& report);

}  // namespace vnkit

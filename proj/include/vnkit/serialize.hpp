#pragma once

// JSON file formats: matrices as {rows, cols, entries: flat row-major
// [re, im] pairs}, algebras as {ambient_dim, basis: [matrix...]}, vectors as
// cols = 1 matrices. Doubles round-trip losslessly through the shortest
// decimal representation of the JSON writer.

#include <string>

#include <json.hpp>

#include "vnkit/algebra.hpp"
#include "vnkit/linalg.hpp"
#include "vnkit/report.hpp"

namespace vnkit {

nlohmann::json matrix_to_json(const ComplexMatrix& a);
ComplexMatrix matrix_from_json(const nlohmann::json& j);

nlohmann::json algebra_to_json(const VNAlgebra& m);
VNAlgebra algebra_from_json(const nlohmann::json& j, const Tolerances& tol = {});

nlohmann::json certificates_to_json(const CertificateSet& set);

// FNV-1a 64 over the canonical dump; used for report digests.
std::string fnv1a_hex(const std::string& payload);

}  // namespace vnkit

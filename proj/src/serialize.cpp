#include "vnkit/serialize.hpp"

#include <cstdint>
#include <stdexcept>

namespace vnkit {

using nlohmann::json;

json matrix_to_json(const ComplexMatrix& a) {
  json entries = json::array();
  for (const Complex& z : a.entries()) entries.push_back({z.real(), z.imag()});
  return json{{"rows", a.rows()}, {"cols", a.cols()}, {"entries", std::move(entries)}};
}

ComplexMatrix matrix_from_json(const json& j) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("entries")) {
    throw std::invalid_argument("matrix_from_json: expected {rows, cols, entries}");
  }
  const std::size_t rows = j.at("rows").get<std::size_t>();
  const std::size_t cols = j.at("cols").get<std::size_t>();
  const json& entries = j.at("entries");
  if (!entries.is_array() || entries.size() != rows * cols) {
    throw std::invalid_argument("matrix_from_json: entry count does not match shape");
  }
  std::vector<Complex> data;
  data.reserve(rows * cols);
  for (const json& e : entries) {
    if (!e.is_array() || e.size() != 2) {
      throw std::invalid_argument("matrix_from_json: entries must be [re, im] pairs");
    }
    data.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  return ComplexMatrix(rows, cols, std::move(data));
}

json algebra_to_json(const VNAlgebra& m) {
  json basis = json::array();
  for (const ComplexMatrix& b : m.basis()) basis.push_back(matrix_to_json(b));
  return json{{"ambient_dim", m.ambient_dim()}, {"basis", std::move(basis)}};
}

VNAlgebra algebra_from_json(const json& j, const Tolerances& tol) {
  if (!j.is_object() || !j.contains("ambient_dim") || !j.contains("basis")) {
    throw std::invalid_argument("algebra_from_json: expected {ambient_dim, basis}");
  }
  const std::size_t d = j.at("ambient_dim").get<std::size_t>();
  std::vector<ComplexMatrix> basis;
  for (const json& b : j.at("basis")) basis.push_back(matrix_from_json(b));
  return VNAlgebra::from_span(d, std::move(basis), tol);
}

json certificates_to_json(const CertificateSet& set) {
  json out = json::array();
  for (const Certificate& c : set.items()) {
    json item{{"name", c.name}, {"measured", c.measured}, {"bound", c.bound}, {"pass", c.pass}};
    if (!c.detail.empty()) item["detail"] = c.detail;
    out.push_back(std::move(item));
  }
  return out;
}

std::string fnv1a_hex(const std::string& payload) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : payload) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace vnkit

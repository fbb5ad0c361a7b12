#include "vnkit/report.hpp"

#include <algorithm>
#include <cmath>

namespace vnkit {

void CertificateSet::add(std::string name, double measured, double bound, std::string detail) {
  Certificate c;
  c.name = std::move(name);
  c.measured = measured;
  c.bound = bound;
  c.pass = std::isfinite(measured) && std::isfinite(bound) && measured <= bound;
  c.detail = std::move(detail);
  items_.push_back(std::move(c));
}

void CertificateSet::add_flag(std::string name, bool ok, std::string detail) {
  add(std::move(name), ok ? 0.0 : 1.0, 0.5, std::move(detail));
}

void CertificateSet::merge(const CertificateSet& other) {
  items_.insert(items_.end(), other.items_.begin(), other.items_.end());
}

bool CertificateSet::all_pass() const {
  return std::all_of(items_.begin(), items_.end(), [](const Certificate& c) { return c.pass; });
}

const Certificate* CertificateSet::find(const std::string& name) const {
  for (const Certificate& c : items_) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

double CertificateSet::worst_ratio() const {
  double worst = 0.0;
  for (const Certificate& c : items_) {
    if (c.bound > 0.0) worst = std::max(worst, c.measured / c.bound);
  }
  return worst;
}

}  // namespace vnkit

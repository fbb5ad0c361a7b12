#pragma once

// Named numeric certificates: every inequality a construction promises is
// emitted as (name, measured, bound, pass) so reports and the acceptance
// suite can print them uniformly. Names are fixed identifiers, listed in
// the README schema section.

#include <string>
#include <vector>

namespace vnkit {

struct Certificate {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
  std::string detail;
};

class CertificateSet {
 public:
  // pass when measured <= bound and both are finite
  void add(std::string name, double measured, double bound, std::string detail = {});
  void add_flag(std::string name, bool ok, std::string detail = {});
  void merge(const CertificateSet& other);

  bool all_pass() const;
  const std::vector<Certificate>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  const Certificate* find(const std::string& name) const;

  // Worst ratio measured/bound among positive bounds; handy in logs.
  double worst_ratio() const;

 private:
  std::vector<Certificate> items_;
};

}  // namespace vnkit

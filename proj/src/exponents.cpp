#include "fraclab/exponents.hpp"

#include <algorithm>
#include <cmath>

#include "fraclab/errors.hpp"

namespace fraclab {

int ExponentTerm::floor() const { return static_cast<int>(std::floor(s)); }

double ExponentTerm::alpha() const { return s - std::floor(s); }

ExponentConfig::ExponentConfig(std::vector<ExponentTerm> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw PreconditionError("exponent list is empty");
  for (const auto& t : terms_) {
    if (!(t.s > 0.0) || !std::isfinite(t.s)) throw DomainError("exponents must be positive");
    if (std::abs(t.s - std::round(t.s)) < 1e-12)
      throw DomainError("integer exponent s = " + std::to_string(t.s) + " has zero fractional part");
    if (t.b == 0.0) throw DomainError("weights must be nonzero");
  }
  std::stable_sort(terms_.begin(), terms_.end(), [](const auto& a, const auto& b) { return a.s < b.s; });
}

std::vector<double> ExponentConfig::alphas() const {
  std::vector<double> a;
  for (const auto& t : terms_) a.push_back(t.alpha());
  return a;
}

HypothesisReport validate_exponents(const ExponentConfig& cfg, int n) {
  HypothesisReport r;
  r.dim = n;
  const auto& t = cfg.terms();
  const double lattice = (n % 2 == 0) ? 1.0 : 0.5;
  for (std::size_t j = 0; j < t.size(); ++j)
    for (std::size_t k = j + 1; k < t.size(); ++k) {
      double d = t[k].s - t[j].s;
      double q = d / lattice;
      if (std::abs(q - std::round(q)) < 1e-9) {
        r.ok = false;
        r.violations.push_back({static_cast<int>(j), static_cast<int>(k), d});
      }
    }
  return r;
}

}  // namespace fraclab

#pragma once

#include <vector>

#include "fraclab/grid.hpp"

namespace fraclab {

struct ExponentTerm {
  double s = 0.5;
  cplx b{1.0, 0.0};
  int floor() const;
  double alpha() const;
};

/// Terms sorted by s. Construction rejects integer s and zero weights.
class ExponentConfig {
 public:
  ExponentConfig() = default;
  explicit ExponentConfig(std::vector<ExponentTerm> terms);

  const std::vector<ExponentTerm>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  std::vector<double> alphas() const;

 private:
  std::vector<ExponentTerm> terms_;
};

struct HypothesisViolation {
  int j = 0;
  int k = 0;
  double difference = 0.0;  // s_k - s_j
};

struct HypothesisReport {
  int dim = 2;
  bool ok = true;
  std::vector<HypothesisViolation> violations;
};

/// Separation check: s_k - s_j not in Z (even n) or not in Z/2 (odd n).
HypothesisReport validate_exponents(const ExponentConfig& cfg, int n);

}  // namespace fraclab

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "dmta/fingerprint.hpp"

namespace dmta {

struct ScoringHyper {
  double l2 = 1.0;          // penalty 0.5 * l2 * |w|^2 on the summed log-loss; bias is free
  int max_epochs = 500;     // L-BFGS iterations
  double grad_tol = 1e-6;   // stop when the full gradient 2-norm drops below this
  double rel_tol = 1e-12;   // or when an iteration lowers the objective by less than rel_tol * max(1, |f|)
  bool balance_classes = false;
  std::uint32_t dim = kFingerprintDim;
};

struct TrainingExample {
  Fingerprint fp;
  int label = 0;  // observed assay outcome, 0 or 1
};

using TrainingSet = std::vector<TrainingExample>;

struct FitInfo {
  int epochs = 0;
  double grad_norm = 0.0;
  double objective = 0.0;
  bool converged = false;
};

// Probabilistic activity classifier: logistic regression on raw fingerprint
// counts, or a constant-probability model when training data has a single
// class.
class ScoringModel {
 public:
  enum class Kind : std::uint8_t { kConstant = 0, kLogistic = 1 };

  ScoringModel() = default;
  static ScoringModel constant(double p);

  Kind kind() const noexcept { return kind_; }
  double base_rate() const noexcept { return base_rate_; }
  double bias() const noexcept { return bias_; }
  std::span<const double> weights() const noexcept { return weights_; }
  const FitInfo& fit_info() const noexcept { return info_; }

  double predict(const Fingerprint& fp) const noexcept;
  std::vector<double> predict_proba(std::span<const Fingerprint> fps) const;

  // Binary blob, little endian:
  //   char[8] "DMTAQSAR" | u32 version=1 | u8 kind | u32 dim |
  //   f64 base_rate | f64 bias | f64 weight[dim] (kind == logistic only)
  void save(std::ostream& out) const;
  static ScoringModel load(std::istream& in);

  friend ScoringModel fit(const TrainingSet& train, const ScoringHyper& hyper);

 private:
  Kind kind_ = Kind::kConstant;
  double base_rate_ = 0.5;
  double bias_ = 0.0;
  std::vector<double> weights_;
  FitInfo info_;
};

// Deterministic: identical (train, hyper) give identical models.
// Single-class or empty training data yields a constant model at the base rate.
ScoringModel fit(const TrainingSet& train, const ScoringHyper& hyper = {});

// Area under the ROC curve with ties counted as 1/2. Returns 0.5 when one
// class is absent.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

}  // namespace dmta

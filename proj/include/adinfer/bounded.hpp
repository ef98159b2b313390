#pragma once

#include <vector>

#include "adinfer/conditioning.hpp"

namespace adinfer {

// Which cutset instances keep being propagated.
struct RetentionPolicy {
  enum class Mode { kTopK, kThreshold };
  Mode mode = Mode::kThreshold;
  // k for kTopK, tau for kThreshold.
  double value = 1e-4;

  static RetentionPolicy top_k(std::size_t k) {
    return {Mode::kTopK, static_cast<double>(k)};
  }
  static RetentionPolicy threshold(double tau) { return {Mode::kThreshold, tau}; }

  // Throws InvalidArgumentError unless k >= 1 or tau in [0, 1).
  void validate() const;
  // Instances selected from `weights`: the k largest (ties: lower index) or
  // every instance with weight >= tau. Ascending indices.
  std::vector<std::size_t> select(const std::vector<double>& weights) const;
};

struct IntervalBound {
  double lower = 0.0;
  double upper = 0.0;
  bool retained = false;
};

struct IntervalPosterior {
  std::vector<IntervalBound> bounds;  // one per cutset instance
  // Some eliminated instance could still outrank every retained one.
  bool rank_uncertain = false;
};

// Bounded conditioning over a cutset ensemble. Eliminated instances are not
// propagated; since their evidence likelihood lies in [0, 1], every posterior
// is bracketed exactly:
//   retained i:   [m_i / (S + W_e), m_i / S]
//   eliminated j: [0, w_j / (S + w_j)]
// with m_i = L_i * w_i, S the retained mass and W_e the eliminated prior
// weight. Weights w are the ensemble weights when bounded mode started; L is
// the likelihood of all evidence absorbed since.
class BoundedConditioner {
 public:
  explicit BoundedConditioner(CutsetEnsemble ensemble);

  // Retained set grows to include policy.select(base weights); newly
  // retained instances are caught up on all earlier evidence. All or
  // nothing on errors (ImpossibleEvidenceError when S = 0 and W_e = 0).
  IntervalPosterior bounded_absorb(const Evidence& new_evidence,
                                   const RetentionPolicy& policy);

  // Propagates previously eliminated instances and moves them into S.
  // Never widens an interval. Throws InvalidArgumentError for instances that
  // are already retained or out of range.
  IntervalPosterior refine(const std::vector<std::size_t>& additional);

  IntervalPosterior current() const;

  const CutsetEnsemble& ensemble() const { return ensemble_; }
  const std::vector<double>& base_weights() const { return base_weights_; }
  const std::vector<bool>& retained() const { return retained_; }
  std::size_t retained_count() const;
  const Evidence& evidence() const { return evidence_; }
  // Aggregate report of the last bounded_absorb/refine.
  const PropagationReport& propagation_summary() const { return summary_; }

 private:
  Evidence fresh_observations(const Evidence& new_evidence) const;

  CutsetEnsemble ensemble_;
  std::vector<double> base_weights_;
  std::vector<bool> retained_;
  std::vector<double> log_likelihood_;  // since bounded mode started
  Evidence evidence_;                   // everything the ensemble has seen
  Evidence since_start_;
  PropagationReport summary_;
};

}  // namespace adinfer

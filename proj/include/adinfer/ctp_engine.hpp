#pragma once

#include <memory>
#include <vector>

#include "adinfer/propagation.hpp"

namespace adinfer {

// Clique-tree propagation over a whole belief network.
class CtpEngine {
 public:
  // Builds and calibrates the forest for `net`.
  explicit CtpEngine(std::shared_ptr<const BeliefNetwork> net);

  // Enters the observations not yet absorbed and propagates the affected
  // components. All or nothing: on ImpossibleEvidenceError or ConflictError
  // the engine is unchanged.
  PropagationReport absorb(const Evidence& new_evidence);

  // Posterior of a network node given all absorbed evidence.
  std::vector<double> posterior(NodeIndex node) const;

  // Back to the calibrated prior.
  void reset();

  const BeliefNetwork& network() const { return *net_; }
  const CliqueForest& forest() const { return potentials_.forest(); }
  const ForestPotentials& potentials() const { return potentials_; }
  const Evidence& evidence() const { return evidence_; }
  // Joint probability of all evidence absorbed so far.
  double evidence_probability() const { return evidence_probability_; }

 private:
  std::shared_ptr<const BeliefNetwork> net_;
  ForestPotentials prior_;
  ForestPotentials potentials_;
  Evidence evidence_;
  double evidence_probability_ = 1.0;
};

}  // namespace adinfer

#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "adinfer/factor.hpp"
#include "adinfer/network.hpp"
#include "adinfer/propagation.hpp"

namespace adinfer {

struct LoopCutset {
  std::vector<NodeIndex> members;
  std::size_t instance_count = 0;
};

// Cutset from named nodes. Throws NotFoundError for unknown ids and
// InvalidArgumentError for an empty or repeated list.
LoopCutset select_cutset(const BeliefNetwork& net,
                         const std::vector<std::string>& ids);
LoopCutset make_cutset(const BeliefNetwork& net,
                       std::vector<NodeIndex> members);

// The single node whose removal leaves the most connected components in the
// moral graph; ties go to the smaller cardinality, then declaration order.
// Throws InvalidArgumentError for networks with fewer than two nodes.
LoopCutset select_cutset_auto(const BeliefNetwork& net);

// Number of connected components of the moral graph with `removed` deleted.
std::size_t moral_components_without(const BeliefNetwork& net,
                                     std::span<const NodeIndex> removed);

// Mixed-radix decoding of an instance index into one value per cutset
// member (first member most significant).
std::vector<ValueIndex> cutset_assignment(const BeliefNetwork& net,
                                          const LoopCutset& cutset,
                                          std::size_t instance);

// The network with cutset nodes instantiated and removed.
struct ConditionedNetwork {
  // Non-cutset nodes in declaration order; tables of children of cutset
  // members are sliced at the instance values, so rows still sum to 1.
  BeliefNetwork network;
  // Conditioned node -> original node.
  std::vector<NodeIndex> origin;
  // Tables of cutset members with non-cutset parents, sliced at the member's
  // value: a likelihood over those parents. Empty when every member is a
  // root.
  std::vector<PotentialTable> cutset_factors;
  // Product of cutset-member entries whose whole family is instantiated.
  double constant = 1.0;

  // Factors over the conditioned nodes; origin() maps back to the original
  // network.
  FactorModel model() const;
};

ConditionedNetwork decompose(const BeliefNetwork& net, const LoopCutset& cutset,
                             std::span<const ValueIndex> assignment);

struct CutsetInstance {
  std::vector<ValueIndex> assignment;
  double weight = 0.0;
  // Accumulated log-likelihood of all absorbed evidence for this instance.
  double log_scale = 0.0;
};

struct LikelihoodRecord {
  // P(E_new | instance, E_old) per instance, and its logarithm.
  std::vector<double> likelihoods;
  std::vector<double> log_likelihoods;
  double alpha = 1.0;
  double log_alpha = 0.0;
};

// Fresh evidence propagated through a set of instances, with what is needed
// to undo it.
struct InstanceBatch {
  std::vector<std::size_t> instances;
  std::vector<double> log_likelihoods;  // aligned with instances
  std::vector<std::size_t> messages;    // aligned with instances
  std::vector<std::size_t> components;  // propagated, ascending
  std::vector<std::size_t> component_messages;  // aligned with components
  std::size_t stride = 0;               // saved values per instance
  std::vector<double> saved;
};

struct EnsembleOptions {
  // Process instances on worker threads. Results do not depend on this.
  bool parallel = false;
  std::size_t threads = 0;  // 0: hardware concurrency
  // Propagate every component on each absorb, not only those with new
  // evidence. Reference mode for checking selective propagation.
  bool force_all = false;
};

// Aggregation after decomposition: one calibrated forest per cutset
// instance, all sharing one clique structure, combined through the instance
// weights.
class CutsetEnsemble {
 public:
  CutsetEnsemble(std::shared_ptr<const BeliefNetwork> net, LoopCutset cutset,
                 EnsembleOptions options = {});

  // w_i' = alpha * P(E_new | d_i, E_old) * w_i. All or nothing: throws
  // ImpossibleEvidenceError when every instance's mass vanishes and
  // ConflictError on cutset evidence or contradicting re-observation; the
  // ensemble is unchanged in both cases.
  LikelihoodRecord absorb_evidence(const Evidence& new_evidence);

  // Current normalized weights, one per instance.
  std::vector<double> cutset_posterior() const;
  // Marginal of one cutset member, summing weights over the other members.
  std::vector<double> member_posterior(NodeIndex member) const;
  // Weighted mixture of per-instance posteriors for a non-cutset node.
  std::vector<double> feature_posterior(NodeIndex node) const;

  // Aggregate of the last absorb: union of touched components and message
  // totals summed over instances. Empty before any absorb.
  const PropagationReport& propagation_summary() const { return summary_; }

  const BeliefNetwork& network() const { return *net_; }
  const std::shared_ptr<const BeliefNetwork>& network_ptr() const { return net_; }
  const LoopCutset& cutset() const { return cutset_; }
  const CliqueForest& forest() const { return *forest_; }
  const std::vector<CutsetInstance>& instances() const { return instances_; }
  const ForestPotentials& potentials(std::size_t i) const { return states_.at(i); }
  const Evidence& evidence() const { return evidence_; }
  const EnsembleOptions& options() const { return options_; }
  void set_parallel(bool parallel) { options_.parallel = parallel; }
  bool is_cutset_member(NodeIndex node) const;

  // Observations in `new_evidence` not yet absorbed. Throws ConflictError for
  // cutset members or contradicting values, NotFoundError for invalid ones.
  Evidence fresh_observations(const Evidence& new_evidence) const;

  // Enters `fresh` into the listed instances and propagates their dirty
  // components, saving a rollback snapshot per instance. Weights are not
  // touched. Runs in parallel when enabled.
  InstanceBatch propagate_instances(std::span<const std::size_t> which,
                                    const Evidence& fresh);
  void rollback(const InstanceBatch& batch);

  // Forces every component of every instance to be re-propagated (no
  // evidence change); used to check selective propagation.
  void recalibrate_all();

 private:
  std::shared_ptr<const BeliefNetwork> net_;
  LoopCutset cutset_;
  EnsembleOptions options_;
  std::shared_ptr<const CliqueForest> forest_;
  std::vector<CutsetInstance> instances_;
  std::vector<ForestPotentials> states_;
  Evidence evidence_;
  PropagationReport summary_;
};

// Aggregates batches: union of touched components, message counts summed
// over instances. Constants are per instance and left as NaN.
PropagationReport summarize(std::span<const InstanceBatch> batches);

// Normalizes log-domain masses: out_i = exp(m_i) / sum_j exp(m_j). Returns the
// log of the normalizer, or -inf (leaving `out` unspecified) when all masses
// are zero.
double normalize_log_masses(std::span<const double> log_masses,
                            std::vector<double>& out);

}  // namespace adinfer

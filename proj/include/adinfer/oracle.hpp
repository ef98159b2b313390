#pragma once

#include <span>
#include <vector>

#include "adinfer/network.hpp"

// Brute-force joint enumeration. Deliberately unfactored: these functions are
// the correctness reference every propagation engine is checked against.
namespace adinfer::oracle {

// Chain-rule product of the table entries selected by a full assignment
// (one value per node, indexed by NodeIndex). Throws InvalidArgumentError on
// an incomplete or out-of-range assignment.
double joint_probability(const BeliefNetwork& net,
                         std::span<const ValueIndex> assignment);

// P(query | evidence). Throws ImpossibleEvidenceError when P(evidence) = 0.
std::vector<double> enumerate_posterior(const BeliefNetwork& net,
                                        NodeIndex query,
                                        const Evidence& evidence);

// P(evidence); 0 is a legal result.
double evidence_likelihood(const BeliefNetwork& net, const Evidence& evidence);

// Every node's posterior from a single enumeration pass. Same semantics as
// calling enumerate_posterior per node.
std::vector<std::vector<double>> enumerate_all_posteriors(
    const BeliefNetwork& net, const Evidence& evidence);

}  // namespace adinfer::oracle

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adinfer/network.hpp"

namespace adinfer {

// A nonnegative table over an ordered scope, row-major (last scope variable
// varies fastest).
struct PotentialTable {
  std::vector<NodeIndex> scope;
  std::vector<std::size_t> cards;
  std::vector<double> entries;

  std::size_t size() const { return entries.size(); }
};

// Number of joint assignments of the given cardinalities.
std::size_t state_space_size(const std::vector<std::size_t>& cards);

// For each entry of a table over (scope, cards), the index of the matching
// entry in a table over `target`, whose variables must all appear in `scope`.
// Target cardinalities are taken from the source.
std::vector<std::uint32_t> projection_map(const std::vector<NodeIndex>& scope,
                                          const std::vector<std::size_t>& cards,
                                          const std::vector<NodeIndex>& target);

// Sums `table` onto `target` (a subset of its scope, in the given order).
PotentialTable marginalize(const PotentialTable& table,
                           const std::vector<NodeIndex>& target);

// A factorized distribution over variables 0..n-1: the product of `factors`
// times `constant`. This is what clique forests are built from; a belief
// network yields one factor per conditional table, a conditioned network
// yields sliced tables.
struct FactorModel {
  std::vector<std::string> ids;
  std::vector<std::size_t> cards;
  // Variable -> node index in the network the model was derived from.
  std::vector<NodeIndex> origin;
  std::vector<PotentialTable> factors;
  double constant = 1.0;

  std::size_t size() const { return cards.size(); }
  // Variable index for a network node, or -1 when the node is not modelled.
  std::ptrdiff_t variable_of(NodeIndex node) const;
};

// One factor per node over (parents..., node); the conditional-table layout is
// already row-major in that order.
FactorModel factor_model(const BeliefNetwork& net);

}  // namespace adinfer

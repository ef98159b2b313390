#include "adinfer/oracle.hpp"

#include "adinfer/errors.hpp"

namespace adinfer::oracle {

namespace {

// Visits every completion of `evidence` as a full assignment, odometer style.
template <typename Visit>
void for_each_completion(const BeliefNetwork& net, const Evidence& evidence,
                         Visit&& visit) {
  evidence.validate(net);
  const std::size_t n = net.size();
  std::vector<ValueIndex> assignment(n, 0);
  std::vector<NodeIndex> free;
  for (std::size_t i = 0; i < n; ++i) {
    if (auto v = evidence.value_of(i)) {
      assignment[i] = *v;
    } else {
      free.push_back(i);
    }
  }
  while (true) {
    visit(std::span<const ValueIndex>(assignment));
    std::size_t k = free.size();
    while (k > 0) {
      const NodeIndex node = free[k - 1];
      if (++assignment[node] < net.cardinality(node)) break;
      assignment[node] = 0;
      --k;
    }
    if (k == 0) return;
  }
}

}  // namespace

double joint_probability(const BeliefNetwork& net,
                         std::span<const ValueIndex> assignment) {
  if (assignment.size() != net.size()) {
    throw InvalidArgumentError("assignment covers " +
                               std::to_string(assignment.size()) + " of " +
                               std::to_string(net.size()) + " nodes");
  }
  double p = 1.0;
  std::vector<ValueIndex> parent_values;
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (assignment[i] >= net.cardinality(i)) {
      throw InvalidArgumentError("assignment value out of range for node '" +
                                 net.node(i).id + "'");
    }
    parent_values.clear();
    for (NodeIndex parent : net.parents(i)) {
      parent_values.push_back(assignment[parent]);
    }
    p *= net.probability(i, parent_values, assignment[i]);
  }
  return p;
}

double evidence_likelihood(const BeliefNetwork& net, const Evidence& evidence) {
  double total = 0.0;
  for_each_completion(net, evidence, [&](std::span<const ValueIndex> a) {
    total += joint_probability(net, a);
  });
  return total;
}

std::vector<std::vector<double>> enumerate_all_posteriors(
    const BeliefNetwork& net, const Evidence& evidence) {
  std::vector<std::vector<double>> out(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) {
    out[i].assign(net.cardinality(i), 0.0);
  }
  double total = 0.0;
  for_each_completion(net, evidence, [&](std::span<const ValueIndex> a) {
    const double p = joint_probability(net, a);
    total += p;
    for (std::size_t i = 0; i < a.size(); ++i) out[i][a[i]] += p;
  });
  if (total <= 0.0) {
    throw ImpossibleEvidenceError("evidence has probability zero");
  }
  for (auto& dist : out)
    for (double& p : dist) p /= total;
  return out;
}

std::vector<double> enumerate_posterior(const BeliefNetwork& net,
                                        NodeIndex query,
                                        const Evidence& evidence) {
  if (query >= net.size()) {
    throw NotFoundError("unknown query node index " + std::to_string(query));
  }
  std::vector<double> dist(net.cardinality(query), 0.0);
  double total = 0.0;
  for_each_completion(net, evidence, [&](std::span<const ValueIndex> a) {
    const double p = joint_probability(net, a);
    total += p;
    dist[a[query]] += p;
  });
  if (total <= 0.0) {
    throw ImpossibleEvidenceError("evidence has probability zero");
  }
  for (double& p : dist) p /= total;
  return dist;
}

}  // namespace adinfer::oracle

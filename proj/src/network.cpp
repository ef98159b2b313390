#include "adinfer/network.hpp"

#include <cmath>
#include <numeric>
#include <set>

#include "adinfer/errors.hpp"

namespace adinfer {

BeliefNetwork BeliefNetwork::from_specs(const std::vector<NodeSpec>& specs) {
  BeliefNetwork net;
  const std::size_t n = specs.size();
  net.nodes_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const NodeSpec& s = specs[i];
    if (s.id.empty()) {
      throw ValidationError("node " + std::to_string(i) + " has an empty id");
    }
    if (!net.index_.emplace(s.id, i).second) {
      throw ValidationError("duplicate node id '" + s.id + "'");
    }
    if (s.values.size() < 2) {
      throw ValidationError("node '" + s.id + "' must have at least 2 values");
    }
    std::set<std::string> seen(s.values.begin(), s.values.end());
    if (seen.size() != s.values.size()) {
      throw ValidationError("node '" + s.id + "' has duplicate value labels");
    }
    net.nodes_.push_back({s.id, s.label.empty() ? s.id : s.label, s.values});
  }

  net.tables_.resize(n);
  net.children_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const NodeSpec& s = specs[i];
    ConditionalTable& t = net.tables_[i];
    t.node = i;
    std::set<NodeIndex> distinct;
    for (const std::string& p : s.parents) {
      auto it = net.index_.find(p);
      if (it == net.index_.end()) {
        throw ValidationError("node '" + s.id + "' names unknown parent '" + p +
                              "'");
      }
      if (it->second == i) {
        throw ValidationError("cycle: node '" + s.id + "' is its own parent");
      }
      if (!distinct.insert(it->second).second) {
        throw ValidationError("node '" + s.id + "' lists parent '" + p +
                              "' twice");
      }
      t.parent_order.push_back(it->second);
      net.children_[it->second].push_back(i);
    }

    std::size_t rows = 1;
    for (NodeIndex p : t.parent_order) rows *= net.cardinality(p);
    const std::size_t card = net.cardinality(i);
    if (s.cpt.size() != rows * card) {
      throw ValidationError("dimension mismatch: node '" + s.id + "' expects " +
                            std::to_string(rows) + " x " +
                            std::to_string(card) + " = " +
                            std::to_string(rows * card) +
                            " table entries, got " +
                            std::to_string(s.cpt.size()));
    }
    t.rows = s.cpt;
    for (std::size_t r = 0; r < rows; ++r) {
      double sum = 0.0;
      for (std::size_t v = 0; v < card; ++v) {
        const double p = t.rows[r * card + v];
        if (!(p >= 0.0 && p <= 1.0)) {
          throw ValidationError("node '" + s.id + "' has table entry " +
                                std::to_string(p) + " outside [0,1]");
        }
        sum += p;
      }
      if (std::abs(sum - 1.0) > kRowSumTolerance) {
        throw ValidationError("row-sum violation: node '" + s.id + "' row " +
                              std::to_string(r) + " sums to " +
                              std::to_string(sum));
      }
      for (std::size_t v = 0; v < card; ++v) t.rows[r * card + v] /= sum;
    }
  }

  // Kahn's algorithm; ties resolved by declaration order.
  std::vector<std::size_t> indegree(n);
  for (std::size_t i = 0; i < n; ++i) indegree[i] = net.tables_[i].parent_order.size();
  std::set<NodeIndex> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indegree[i] == 0) ready.insert(i);
  while (!ready.empty()) {
    NodeIndex v = *ready.begin();
    ready.erase(ready.begin());
    net.topo_.push_back(v);
    for (NodeIndex c : net.children_[v])
      if (--indegree[c] == 0) ready.insert(c);
  }
  if (net.topo_.size() != n) {
    for (std::size_t i = 0; i < n; ++i) {
      if (indegree[i] > 0) {
        throw ValidationError("cycle: node '" + net.nodes_[i].id +
                              "' lies on a directed cycle");
      }
    }
  }
  return net;
}

std::vector<std::pair<NodeIndex, NodeIndex>> BeliefNetwork::edges() const {
  std::vector<std::pair<NodeIndex, NodeIndex>> out;
  for (std::size_t i = 0; i < size(); ++i)
    for (NodeIndex p : parents(i)) out.emplace_back(p, i);
  return out;
}

std::optional<NodeIndex> BeliefNetwork::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeIndex BeliefNetwork::index_of(const std::string& id) const {
  auto found = find(id);
  if (!found) throw NotFoundError("unknown node '" + id + "'");
  return *found;
}

ValueIndex BeliefNetwork::value_index(NodeIndex node,
                                      const std::string& label) const {
  const auto& values = nodes_.at(node).values;
  for (std::size_t v = 0; v < values.size(); ++v)
    if (values[v] == label) return v;
  throw NotFoundError("node '" + nodes_[node].id + "' has no value '" + label +
                      "'");
}

double BeliefNetwork::probability(NodeIndex node,
                                  std::span<const ValueIndex> parent_values,
                                  ValueIndex value) const {
  const ConditionalTable& t = tables_.at(node);
  std::size_t row = 0;
  for (std::size_t k = 0; k < t.parent_order.size(); ++k)
    row = row * cardinality(t.parent_order[k]) + parent_values[k];
  return t.rows[row * cardinality(node) + value];
}

std::optional<ValueIndex> Evidence::value_of(NodeIndex node) const {
  auto it = observations_.find(node);
  if (it == observations_.end()) return std::nullopt;
  return it->second;
}

void Evidence::observe(NodeIndex node, ValueIndex value) {
  auto [it, inserted] = observations_.emplace(node, value);
  if (!inserted && it->second != value) {
    throw ConflictError("node " + std::to_string(node) +
                        " already observed with a different value");
  }
}

void Evidence::validate(const BeliefNetwork& net) const {
  for (auto [node, value] : observations_) {
    if (node >= net.size()) {
      throw NotFoundError("evidence names unknown node index " +
                          std::to_string(node));
    }
    if (value >= net.cardinality(node)) {
      throw NotFoundError("evidence value " + std::to_string(value) +
                          " out of range for node '" + net.node(node).id + "'");
    }
  }
}

Evidence Evidence::merged(const Evidence& other) const {
  Evidence out = *this;
  for (auto [node, value] : other) out.observe(node, value);
  return out;
}

}  // namespace adinfer

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace adinfer {

using NodeIndex = std::size_t;
using ValueIndex = std::size_t;

// Tolerance applied to CPT row sums when a network is validated.
inline constexpr double kRowSumTolerance = 1e-9;

struct NodeDef {
  std::string id;
  std::string label;
  std::vector<std::string> values;
};

// One node's conditional table. Rows enumerate parent assignments in
// row-major order over parent_order (first parent most significant); each row
// holds one entry per node value.
struct ConditionalTable {
  NodeIndex node = 0;
  std::vector<NodeIndex> parent_order;
  std::vector<double> rows;
};

// Input form of a node: ids instead of indices, as found in a document.
struct NodeSpec {
  std::string id;
  std::string label;
  std::vector<std::string> values;
  std::vector<std::string> parents;
  std::vector<double> cpt;
};

// A discrete belief network. Immutable once constructed; construction
// validates every structural and numeric invariant and renormalizes rows.
class BeliefNetwork {
 public:
  BeliefNetwork() = default;

  // Throws ValidationError naming the violated invariant.
  static BeliefNetwork from_specs(const std::vector<NodeSpec>& specs);

  std::size_t size() const { return nodes_.size(); }
  const NodeDef& node(NodeIndex i) const { return nodes_.at(i); }
  const std::vector<NodeDef>& nodes() const { return nodes_; }
  std::size_t cardinality(NodeIndex i) const { return nodes_[i].values.size(); }

  const std::vector<NodeIndex>& parents(NodeIndex i) const {
    return tables_[i].parent_order;
  }
  const std::vector<NodeIndex>& children(NodeIndex i) const {
    return children_[i];
  }
  const ConditionalTable& table(NodeIndex i) const { return tables_.at(i); }
  const std::vector<NodeIndex>& topological_order() const { return topo_; }

  // All parent->child pairs in declaration order of the child.
  std::vector<std::pair<NodeIndex, NodeIndex>> edges() const;

  std::optional<NodeIndex> find(const std::string& id) const;
  // Throws NotFoundError.
  NodeIndex index_of(const std::string& id) const;
  // Throws NotFoundError.
  ValueIndex value_index(NodeIndex node, const std::string& label) const;

  // Entry P(node = value | parents = parent_values), parent values ordered as
  // parents(node).
  double probability(NodeIndex node, std::span<const ValueIndex> parent_values,
                     ValueIndex value) const;

 private:
  std::vector<NodeDef> nodes_;
  std::vector<ConditionalTable> tables_;
  std::vector<std::vector<NodeIndex>> children_;
  std::vector<NodeIndex> topo_;
  std::unordered_map<std::string, NodeIndex> index_;
};

// A set of node instantiations, at most one value per node.
class Evidence {
 public:
  Evidence() = default;

  // Throws ConflictError when `node` already holds a different value.
  void observe(NodeIndex node, ValueIndex value);
  void retract(NodeIndex node) { observations_.erase(node); }

  bool empty() const { return observations_.empty(); }
  std::size_t size() const { return observations_.size(); }
  bool contains(NodeIndex node) const { return observations_.count(node) > 0; }
  std::optional<ValueIndex> value_of(NodeIndex node) const;
  const std::map<NodeIndex, ValueIndex>& observations() const {
    return observations_;
  }

  auto begin() const { return observations_.begin(); }
  auto end() const { return observations_.end(); }

  // Throws NotFoundError for out-of-range nodes or values.
  void validate(const BeliefNetwork& net) const;

  // Union; throws ConflictError on disagreement.
  Evidence merged(const Evidence& other) const;

  bool operator==(const Evidence&) const = default;

 private:
  std::map<NodeIndex, ValueIndex> observations_;
};

}  // namespace adinfer

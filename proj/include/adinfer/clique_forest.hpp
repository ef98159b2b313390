#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "adinfer/factor.hpp"
#include "adinfer/network.hpp"

namespace adinfer {

// Undirected graph over variables 0..n-1.
struct MoralGraph {
  std::vector<std::set<NodeIndex>> adjacency;

  std::size_t size() const { return adjacency.size(); }
  bool has_edge(NodeIndex a, NodeIndex b) const {
    return adjacency[a].count(b) > 0;
  }
  void add_edge(NodeIndex a, NodeIndex b);
  // Sorted (a < b) edge list.
  std::vector<std::pair<NodeIndex, NodeIndex>> edges() const;
};

// Undirected original edges plus a marriage between every pair of co-parents.
MoralGraph moralize(const BeliefNetwork& net);
// Every factor scope made complete; equals moralize(net) for
// factor_model(net).
MoralGraph moralize(const FactorModel& model);

struct Triangulation {
  MoralGraph chordal;
  std::vector<NodeIndex> elimination_order;
  std::size_t fill_in = 0;
};

// Greedy minimum-fill elimination. Ties go to the vertex whose elimination
// clique has the smaller state space, then to the lower variable index.
Triangulation triangulate(const MoralGraph& graph,
                          const std::vector<std::size_t>& cards);

// True when each vertex's later neighbours in `order` are pairwise adjacent.
bool is_perfect_elimination_order(const MoralGraph& graph,
                                  const std::vector<NodeIndex>& order);

struct Clique {
  std::vector<NodeIndex> members;  // sorted
  std::vector<std::size_t> cards;
  std::size_t state_space_size = 0;
  std::size_t component = 0;
};

struct ForestEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  std::vector<NodeIndex> separator;  // sorted
  std::size_t separator_state_space = 0;
  // Clique entry -> separator entry, for each endpoint.
  std::vector<std::uint32_t> map_a;
  std::vector<std::uint32_t> map_b;
};

// One directed message along a tree edge.
struct MessageStep {
  std::size_t edge = 0;
  std::size_t from = 0;
  std::size_t to = 0;
};

struct ForestComponent {
  std::vector<std::size_t> cliques;  // creation order
  std::vector<NodeIndex> variables;  // sorted
  std::size_t top_clique = 0;
  std::size_t total_state_space = 0;
  // Leaves-to-top message order; distribution replays it reversed.
  std::vector<MessageStep> collect;
};

// Where a factor's entries land inside its clique.
struct FactorPlacement {
  std::size_t clique = 0;
  std::vector<std::uint32_t> map;  // clique entry -> factor entry
};

// Per-variable lookup used for evidence entry and readout.
struct VariableHome {
  std::size_t clique = 0;  // first containing clique in creation order
  std::size_t stride = 1;  // stride of the variable inside that clique
  std::size_t card = 0;
  std::size_t component = 0;
};

// The propagation structure: cliques, separators, and one tree per connected
// portion. Immutable after construction and shared by every potential set
// built for it.
class CliqueForest {
 public:
  // Cliques are the maximal cliques of the triangulated graph in order of
  // appearance during elimination. Each component's tree is a maximum-weight
  // spanning tree over separator cardinality (ties: larger separator state
  // space, then earlier clique pair). The top clique of a component is its
  // largest clique by state space (ties: creation order).
  static CliqueForest build(const Triangulation& tri, const FactorModel& model);

  // moralize -> triangulate -> build.
  static CliqueForest from_model(const FactorModel& model);

  const std::vector<Clique>& cliques() const { return cliques_; }
  const std::vector<ForestEdge>& edges() const { return edges_; }
  const std::vector<ForestComponent>& components() const { return components_; }
  const std::vector<FactorPlacement>& placements() const { return placements_; }
  const std::vector<VariableHome>& homes() const { return homes_; }

  std::size_t variable_count() const { return cards_.size(); }
  const std::vector<std::size_t>& cards() const { return cards_; }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<NodeIndex>& origin() const { return origin_; }
  // Network node -> variable, or -1 when the node is not part of this forest.
  std::ptrdiff_t variable_of(NodeIndex node) const {
    return node < node_to_var_.size() ? node_to_var_[node] : -1;
  }

  // Offsets into the flat potential storage of a ForestPotentials.
  std::size_t clique_offset(std::size_t c) const { return clique_offset_[c]; }
  std::size_t separator_offset(std::size_t e) const { return sep_offset_[e]; }
  std::size_t clique_storage() const { return clique_storage_; }
  std::size_t separator_storage() const { return sep_storage_; }

  // Component with the most variables (ties: larger total state space, then
  // lower index). Throws InvalidArgumentError on an empty forest.
  std::size_t largest_component() const;

  // Checks every structural invariant; returns a description of the first
  // violation or an empty string.
  std::string check_invariants(const FactorModel& model) const;

 private:
  std::vector<Clique> cliques_;
  std::vector<ForestEdge> edges_;
  std::vector<ForestComponent> components_;
  std::vector<FactorPlacement> placements_;
  std::vector<VariableHome> homes_;
  std::vector<std::size_t> cards_;
  std::vector<std::string> ids_;
  std::vector<NodeIndex> origin_;
  std::vector<std::ptrdiff_t> node_to_var_;
  std::vector<std::size_t> clique_offset_;
  std::vector<std::size_t> sep_offset_;
  std::size_t clique_storage_ = 0;
  std::size_t sep_storage_ = 0;
};

// Text report: one line per clique, one per edge, components delimited.
std::string describe(const CliqueForest& forest);

}  // namespace adinfer

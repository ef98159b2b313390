#include "adinfer/clique_forest.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <sstream>
#include <tuple>

#include "adinfer/errors.hpp"

namespace adinfer {

namespace {

bool is_subset(const std::vector<NodeIndex>& small,
               const std::vector<NodeIndex>& big) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

std::vector<NodeIndex> intersection(const std::vector<NodeIndex>& a,
                                    const std::vector<NodeIndex>& b) {
  std::vector<NodeIndex> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

}  // namespace

void MoralGraph::add_edge(NodeIndex a, NodeIndex b) {
  if (a == b) return;
  adjacency[a].insert(b);
  adjacency[b].insert(a);
}

std::vector<std::pair<NodeIndex, NodeIndex>> MoralGraph::edges() const {
  std::vector<std::pair<NodeIndex, NodeIndex>> out;
  for (std::size_t a = 0; a < adjacency.size(); ++a)
    for (NodeIndex b : adjacency[a])
      if (a < b) out.emplace_back(a, b);
  return out;
}

MoralGraph moralize(const BeliefNetwork& net) {
  MoralGraph g;
  g.adjacency.resize(net.size());
  for (std::size_t child = 0; child < net.size(); ++child) {
    const auto& parents = net.parents(child);
    for (std::size_t i = 0; i < parents.size(); ++i) {
      g.add_edge(parents[i], child);
      for (std::size_t j = i + 1; j < parents.size(); ++j) {
        g.add_edge(parents[i], parents[j]);
      }
    }
  }
  return g;
}

MoralGraph moralize(const FactorModel& model) {
  MoralGraph g;
  g.adjacency.resize(model.size());
  for (const PotentialTable& f : model.factors)
    for (std::size_t i = 0; i < f.scope.size(); ++i)
      for (std::size_t j = i + 1; j < f.scope.size(); ++j)
        g.add_edge(f.scope[i], f.scope[j]);
  return g;
}

Triangulation triangulate(const MoralGraph& graph,
                          const std::vector<std::size_t>& cards) {
  const std::size_t n = graph.size();
  Triangulation tri;
  tri.chordal = graph;
  std::vector<std::set<NodeIndex>> work = graph.adjacency;
  std::vector<bool> eliminated(n, false);

  for (std::size_t step = 0; step < n; ++step) {
    std::size_t best = n;
    std::size_t best_fill = 0;
    double best_space = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      if (eliminated[v]) continue;
      std::size_t fill = 0;
      for (auto a = work[v].begin(); a != work[v].end(); ++a)
        for (auto b = std::next(a); b != work[v].end(); ++b)
          if (!work[*a].count(*b)) ++fill;
      double space = static_cast<double>(cards[v]);
      for (NodeIndex u : work[v]) space *= static_cast<double>(cards[u]);
      if (best == n || fill < best_fill ||
          (fill == best_fill && space < best_space)) {
        best = v;
        best_fill = fill;
        best_space = space;
      }
    }
    for (auto a = work[best].begin(); a != work[best].end(); ++a) {
      for (auto b = std::next(a); b != work[best].end(); ++b) {
        if (!work[*a].count(*b)) {
          work[*a].insert(*b);
          work[*b].insert(*a);
          tri.chordal.add_edge(*a, *b);
          ++tri.fill_in;
        }
      }
    }
    for (NodeIndex u : work[best]) work[u].erase(best);
    work[best].clear();
    eliminated[best] = true;
    tri.elimination_order.push_back(best);
  }
  return tri;
}

bool is_perfect_elimination_order(const MoralGraph& graph,
                                  const std::vector<NodeIndex>& order) {
  std::vector<std::size_t> pos(graph.size());
  for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
  for (NodeIndex v : order) {
    std::vector<NodeIndex> later;
    for (NodeIndex u : graph.adjacency[v])
      if (pos[u] > pos[v]) later.push_back(u);
    for (std::size_t i = 0; i < later.size(); ++i)
      for (std::size_t j = i + 1; j < later.size(); ++j)
        if (!graph.has_edge(later[i], later[j])) return false;
  }
  return true;
}

CliqueForest CliqueForest::build(const Triangulation& tri,
                                 const FactorModel& model) {
  CliqueForest f;
  const std::size_t n = model.size();
  f.cards_ = model.cards;
  f.ids_ = model.ids;
  f.origin_ = model.origin;
  std::size_t max_node = 0;
  for (NodeIndex o : f.origin_) max_node = std::max(max_node, o + 1);
  f.node_to_var_.assign(max_node, -1);
  for (std::size_t v = 0; v < n; ++v) {
    f.node_to_var_[f.origin_[v]] = static_cast<std::ptrdiff_t>(v);
  }

  // Maximal cliques, read off the elimination.
  std::vector<std::size_t> pos(n);
  for (std::size_t i = 0; i < tri.elimination_order.size(); ++i) {
    pos[tri.elimination_order[i]] = i;
  }
  for (NodeIndex v : tri.elimination_order) {
    std::vector<NodeIndex> members{v};
    for (NodeIndex u : tri.chordal.adjacency[v])
      if (pos[u] > pos[v]) members.push_back(u);
    std::sort(members.begin(), members.end());
    const bool dominated =
        std::any_of(f.cliques_.begin(), f.cliques_.end(),
                    [&](const Clique& c) { return is_subset(members, c.members); });
    if (dominated) continue;
    Clique c;
    c.members = std::move(members);
    for (NodeIndex m : c.members) c.cards.push_back(f.cards_[m]);
    c.state_space_size = state_space_size(c.cards);
    f.cliques_.push_back(std::move(c));
  }
  const std::size_t k = f.cliques_.size();

  // Kruskal over all intersecting clique pairs.
  struct Candidate {
    std::size_t a, b, weight, space;
  };
  std::vector<Candidate> candidates;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      auto sep = intersection(f.cliques_[a].members, f.cliques_[b].members);
      if (sep.empty()) continue;
      std::size_t space = 1;
      for (NodeIndex v : sep) space *= f.cards_[v];
      candidates.push_back({a, b, sep.size(), space});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& x, const Candidate& y) {
                     return std::tie(y.weight, y.space, x.a, x.b) <
                            std::tie(x.weight, x.space, y.a, y.b);
                   });
  DisjointSets sets(k);
  for (const Candidate& c : candidates) {
    if (!sets.unite(c.a, c.b)) continue;
    ForestEdge e;
    e.a = c.a;
    e.b = c.b;
    e.separator = intersection(f.cliques_[c.a].members, f.cliques_[c.b].members);
    e.separator_state_space = c.space;
    e.map_a = projection_map(f.cliques_[c.a].members, f.cliques_[c.a].cards,
                             e.separator);
    e.map_b = projection_map(f.cliques_[c.b].members, f.cliques_[c.b].cards,
                             e.separator);
    f.edges_.push_back(std::move(e));
  }

  // Components, numbered by their first clique.
  std::vector<std::ptrdiff_t> component_of_root(k, -1);
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t root = sets.find(c);
    if (component_of_root[root] < 0) {
      component_of_root[root] = static_cast<std::ptrdiff_t>(f.components_.size());
      f.components_.emplace_back();
    }
    const auto comp = static_cast<std::size_t>(component_of_root[root]);
    f.cliques_[c].component = comp;
    f.components_[comp].cliques.push_back(c);
  }

  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> incident(k);
  for (std::size_t e = 0; e < f.edges_.size(); ++e) {
    incident[f.edges_[e].a].emplace_back(e, f.edges_[e].b);
    incident[f.edges_[e].b].emplace_back(e, f.edges_[e].a);
  }
  for (ForestComponent& comp : f.components_) {
    std::set<NodeIndex> vars;
    comp.top_clique = comp.cliques.front();
    for (std::size_t c : comp.cliques) {
      vars.insert(f.cliques_[c].members.begin(), f.cliques_[c].members.end());
      comp.total_state_space += f.cliques_[c].state_space_size;
      if (f.cliques_[c].state_space_size >
          f.cliques_[comp.top_clique].state_space_size) {
        comp.top_clique = c;
      }
    }
    comp.variables.assign(vars.begin(), vars.end());

    // Breadth-first from the top clique; reversed, children precede parents.
    std::vector<MessageStep> downward;
    std::vector<bool> seen(k, false);
    std::queue<std::size_t> frontier;
    frontier.push(comp.top_clique);
    seen[comp.top_clique] = true;
    while (!frontier.empty()) {
      const std::size_t c = frontier.front();
      frontier.pop();
      for (auto [e, other] : incident[c]) {
        if (seen[other]) continue;
        seen[other] = true;
        downward.push_back({e, c, other});
        frontier.push(other);
      }
    }
    for (auto it = downward.rbegin(); it != downward.rend(); ++it) {
      comp.collect.push_back({it->edge, it->to, it->from});
    }
  }

  f.homes_.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t c = 0; c < k; ++c) {
      const auto& m = f.cliques_[c].members;
      auto it = std::find(m.begin(), m.end(), v);
      if (it == m.end()) continue;
      VariableHome& h = f.homes_[v];
      h.clique = c;
      h.card = f.cards_[v];
      h.component = f.cliques_[c].component;
      h.stride = 1;
      for (auto after = std::next(it); after != m.end(); ++after) {
        h.stride *= f.cards_[*after];
      }
      break;
    }
  }

  for (const PotentialTable& factor : model.factors) {
    std::vector<NodeIndex> sorted = factor.scope;
    std::sort(sorted.begin(), sorted.end());
    FactorPlacement p;
    bool placed = false;
    for (std::size_t c = 0; c < k && !placed; ++c) {
      if (!is_subset(sorted, f.cliques_[c].members)) continue;
      p.clique = c;
      p.map = projection_map(f.cliques_[c].members, f.cliques_[c].cards,
                             factor.scope);
      placed = true;
    }
    if (!placed) {
      if (!factor.scope.empty() || k == 0) {
        throw InternalError("factor family has no containing clique");
      }
      p.clique = 0;
      p.map.assign(f.cliques_[0].state_space_size, 0);
    }
    f.placements_.push_back(std::move(p));
  }

  f.clique_offset_.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    f.clique_offset_[c] = f.clique_storage_;
    f.clique_storage_ += f.cliques_[c].state_space_size;
  }
  f.sep_offset_.resize(f.edges_.size());
  for (std::size_t e = 0; e < f.edges_.size(); ++e) {
    f.sep_offset_[e] = f.sep_storage_;
    f.sep_storage_ += f.edges_[e].separator_state_space;
  }
  return f;
}

CliqueForest CliqueForest::from_model(const FactorModel& model) {
  return build(triangulate(moralize(model), model.cards), model);
}

std::size_t CliqueForest::largest_component() const {
  if (components_.empty()) {
    throw InvalidArgumentError("forest has no components");
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < components_.size(); ++c) {
    const auto& x = components_[c];
    const auto& y = components_[best];
    if (std::pair(x.variables.size(), x.total_state_space) >
        std::pair(y.variables.size(), y.total_state_space)) {
      best = c;
    }
  }
  return best;
}

std::string CliqueForest::check_invariants(const FactorModel& model) const {
  for (std::size_t c = 0; c < cliques_.size(); ++c) {
    if (cliques_[c].state_space_size != state_space_size(cliques_[c].cards)) {
      return "clique " + std::to_string(c) + " state space mismatch";
    }
  }
  for (std::size_t i = 0; i < components_.size(); ++i) {
    std::size_t edge_count = 0;
    for (const ForestEdge& e : edges_)
      if (cliques_[e.a].component == i) ++edge_count;
    if (edge_count + 1 != components_[i].cliques.size()) {
      return "component " + std::to_string(i) + " is not a tree";
    }
  }
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto& edge = edges_[e];
    if (cliques_[edge.a].component != cliques_[edge.b].component) {
      return "edge " + std::to_string(e) + " joins two components";
    }
    if (edge.separator !=
        intersection(cliques_[edge.a].members, cliques_[edge.b].members)) {
      return "separator " + std::to_string(e) + " is not the intersection";
    }
  }
  // Running intersection: cliques holding v induce a connected subtree.
  for (std::size_t v = 0; v < cards_.size(); ++v) {
    std::vector<std::size_t> holders;
    for (std::size_t c = 0; c < cliques_.size(); ++c)
      if (std::binary_search(cliques_[c].members.begin(),
                             cliques_[c].members.end(), v))
        holders.push_back(c);
    if (holders.empty()) return "variable " + ids_[v] + " is in no clique";
    DisjointSets sets(cliques_.size());
    for (const ForestEdge& e : edges_) {
      if (std::binary_search(e.separator.begin(), e.separator.end(), v)) {
        sets.unite(e.a, e.b);
      }
    }
    for (std::size_t c : holders) {
      if (sets.find(c) != sets.find(holders.front())) {
        return "running intersection fails for variable " + ids_[v];
      }
    }
  }
  for (const PotentialTable& factor : model.factors) {
    std::vector<NodeIndex> sorted = factor.scope;
    std::sort(sorted.begin(), sorted.end());
    const bool covered =
        std::any_of(cliques_.begin(), cliques_.end(),
                    [&](const Clique& c) { return is_subset(sorted, c.members); });
    if (!covered) return "a factor family has no containing clique";
  }
  return {};
}

std::string describe(const CliqueForest& forest) {
  std::ostringstream out;
  for (std::size_t i = 0; i < forest.components().size(); ++i) {
    const ForestComponent& comp = forest.components()[i];
    out << "component " << i << " top=" << comp.top_clique
        << " cliques=" << comp.cliques.size()
        << " variables=" << comp.variables.size() << "\n";
    for (std::size_t c : comp.cliques) {
      const Clique& clique = forest.cliques()[c];
      out << "  clique " << c << " {";
      for (std::size_t m = 0; m < clique.members.size(); ++m) {
        out << (m ? "," : "") << forest.ids()[clique.members[m]];
      }
      out << "} size=" << clique.state_space_size << "\n";
    }
    for (const MessageStep& step : comp.collect) {
      const ForestEdge& e = forest.edges()[step.edge];
      out << "  edge " << e.a << "-" << e.b << " sep {";
      for (std::size_t m = 0; m < e.separator.size(); ++m) {
        out << (m ? "," : "") << forest.ids()[e.separator[m]];
      }
      out << "} size=" << e.separator_state_space << "\n";
    }
  }
  return out.str();
}

}  // namespace adinfer

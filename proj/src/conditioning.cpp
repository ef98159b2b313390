#include "adinfer/conditioning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <thread>

#include "adinfer/clique_forest.hpp"
#include "adinfer/ctp_engine.hpp"
#include "adinfer/errors.hpp"

namespace adinfer {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct SlicedTable {
  std::vector<NodeIndex> free_parents;
  std::vector<double> entries;  // rows over free parents x (node card or 1)
};

// Slices `node`'s table at the fixed values. When the node itself is fixed
// each row keeps only the fixed value's entry.
SlicedTable slice_table(const BeliefNetwork& net, NodeIndex node,
                        const std::vector<std::optional<ValueIndex>>& fixed) {
  SlicedTable out;
  const auto& parents = net.parents(node);
  for (NodeIndex p : parents)
    if (!fixed[p]) out.free_parents.push_back(p);

  std::vector<ValueIndex> parent_values(parents.size(), 0);
  for (std::size_t k = 0; k < parents.size(); ++k)
    if (fixed[parents[k]]) parent_values[k] = *fixed[parents[k]];

  std::vector<std::size_t> free_pos;
  for (std::size_t k = 0; k < parents.size(); ++k)
    if (!fixed[parents[k]]) free_pos.push_back(k);

  while (true) {
    if (fixed[node]) {
      out.entries.push_back(net.probability(node, parent_values, *fixed[node]));
    } else {
      for (std::size_t v = 0; v < net.cardinality(node); ++v) {
        out.entries.push_back(net.probability(node, parent_values, v));
      }
    }
    std::size_t k = free_pos.size();
    while (k > 0) {
      const std::size_t pos = free_pos[k - 1];
      if (++parent_values[pos] < net.cardinality(parents[pos])) break;
      parent_values[pos] = 0;
      --k;
    }
    if (k == 0) break;
  }
  return out;
}

template <typename Fn>
void for_each_index(std::span<const std::size_t> which, bool parallel,
                    std::size_t threads, Fn&& fn) {
  if (!parallel || which.size() < 2) {
    for (std::size_t k = 0; k < which.size(); ++k) fn(k);
    return;
  }
  std::size_t workers = threads ? threads : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 2, which.size());
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t k = w; k < which.size(); k += workers) fn(k);
    });
  }
}

}  // namespace

LoopCutset make_cutset(const BeliefNetwork& net,
                       std::vector<NodeIndex> members) {
  if (members.empty()) throw InvalidArgumentError("cutset must not be empty");
  std::set<NodeIndex> distinct(members.begin(), members.end());
  if (distinct.size() != members.size()) {
    throw InvalidArgumentError("cutset lists a node twice");
  }
  LoopCutset cutset;
  cutset.instance_count = 1;
  for (NodeIndex m : members) {
    if (m >= net.size()) throw NotFoundError("cutset node index out of range");
    cutset.instance_count *= net.cardinality(m);
  }
  cutset.members = std::move(members);
  return cutset;
}

LoopCutset select_cutset(const BeliefNetwork& net,
                         const std::vector<std::string>& ids) {
  std::vector<NodeIndex> members;
  for (const std::string& id : ids) members.push_back(net.index_of(id));
  return make_cutset(net, std::move(members));
}

std::size_t moral_components_without(const BeliefNetwork& net,
                                     std::span<const NodeIndex> removed) {
  const MoralGraph g = moralize(net);
  std::vector<bool> gone(net.size(), false);
  for (NodeIndex r : removed) gone[r] = true;
  std::vector<bool> seen(net.size(), false);
  std::size_t count = 0;
  for (std::size_t start = 0; start < net.size(); ++start) {
    if (gone[start] || seen[start]) continue;
    ++count;
    std::vector<NodeIndex> stack{start};
    seen[start] = true;
    while (!stack.empty()) {
      const NodeIndex v = stack.back();
      stack.pop_back();
      for (NodeIndex u : g.adjacency[v]) {
        if (gone[u] || seen[u]) continue;
        seen[u] = true;
        stack.push_back(u);
      }
    }
  }
  return count;
}

LoopCutset select_cutset_auto(const BeliefNetwork& net) {
  if (net.size() < 2) {
    throw InvalidArgumentError("automatic cutset needs at least two nodes");
  }
  NodeIndex best = 0;
  std::size_t best_components = 0;
  for (NodeIndex v = 0; v < net.size(); ++v) {
    const NodeIndex removed[] = {v};
    const std::size_t components = moral_components_without(net, removed);
    if (v == 0 || components > best_components ||
        (components == best_components &&
         net.cardinality(v) < net.cardinality(best))) {
      best = v;
      best_components = components;
    }
  }
  return make_cutset(net, {best});
}

std::vector<ValueIndex> cutset_assignment(const BeliefNetwork& net,
                                          const LoopCutset& cutset,
                                          std::size_t instance) {
  std::vector<ValueIndex> values(cutset.members.size());
  for (std::size_t k = cutset.members.size(); k-- > 0;) {
    const std::size_t card = net.cardinality(cutset.members[k]);
    values[k] = instance % card;
    instance /= card;
  }
  return values;
}

ConditionedNetwork decompose(const BeliefNetwork& net, const LoopCutset& cutset,
                             std::span<const ValueIndex> assignment) {
  if (assignment.size() != cutset.members.size()) {
    throw InvalidArgumentError("assignment does not cover the cutset");
  }
  std::vector<std::optional<ValueIndex>> fixed(net.size());
  for (std::size_t k = 0; k < cutset.members.size(); ++k) {
    if (assignment[k] >= net.cardinality(cutset.members[k])) {
      throw InvalidArgumentError("cutset value out of range");
    }
    fixed[cutset.members[k]] = assignment[k];
  }

  ConditionedNetwork out;
  std::vector<std::ptrdiff_t> new_index(net.size(), -1);
  for (NodeIndex v = 0; v < net.size(); ++v) {
    if (fixed[v]) continue;
    new_index[v] = static_cast<std::ptrdiff_t>(out.origin.size());
    out.origin.push_back(v);
  }

  std::vector<NodeSpec> specs;
  for (NodeIndex v : out.origin) {
    SlicedTable t = slice_table(net, v, fixed);
    NodeSpec s;
    s.id = net.node(v).id;
    s.label = net.node(v).label;
    s.values = net.node(v).values;
    for (NodeIndex p : t.free_parents) s.parents.push_back(net.node(p).id);
    s.cpt = std::move(t.entries);
    specs.push_back(std::move(s));
  }
  out.network = BeliefNetwork::from_specs(specs);

  for (NodeIndex m : cutset.members) {
    SlicedTable t = slice_table(net, m, fixed);
    if (t.free_parents.empty()) {
      out.constant *= t.entries.front();
      continue;
    }
    PotentialTable f;
    for (NodeIndex p : t.free_parents) {
      f.scope.push_back(static_cast<NodeIndex>(new_index[p]));
      f.cards.push_back(net.cardinality(p));
    }
    f.entries = std::move(t.entries);
    out.cutset_factors.push_back(std::move(f));
  }
  return out;
}

FactorModel ConditionedNetwork::model() const {
  FactorModel m = factor_model(network);
  m.origin = origin;
  for (const PotentialTable& f : cutset_factors) m.factors.push_back(f);
  m.constant = constant;
  return m;
}

double normalize_log_masses(std::span<const double> log_masses,
                            std::vector<double>& out) {
  double peak = kNegInf;
  for (double m : log_masses) peak = std::max(peak, m);
  out.assign(log_masses.size(), 0.0);
  if (peak == kNegInf) return kNegInf;
  double total = 0.0;
  for (std::size_t i = 0; i < log_masses.size(); ++i) {
    out[i] = std::exp(log_masses[i] - peak);
    total += out[i];
  }
  for (double& w : out) w /= total;
  return peak + std::log(total);
}

PropagationReport summarize(std::span<const InstanceBatch> batches) {
  std::map<std::size_t, std::size_t> per_component;
  std::size_t total_messages = 0;
  for (const InstanceBatch& b : batches) {
    for (std::size_t m : b.messages) total_messages += m;
    for (std::size_t k = 0; k < b.components.size(); ++k) {
      per_component[b.components[k]] += b.component_messages[k];
    }
  }
  PropagationReport total;
  total.messages_passed = total_messages;
  for (auto [c, n] : per_component) {
    total.touched_components.push_back(c);
    total.messages.push_back(n);
    total.constants.push_back(std::numeric_limits<double>::quiet_NaN());
  }
  return total;
}

CutsetEnsemble::CutsetEnsemble(std::shared_ptr<const BeliefNetwork> net,
                               LoopCutset cutset, EnsembleOptions options)
    : net_(std::move(net)), cutset_(std::move(cutset)), options_(options) {
  const BeliefNetwork& bn = *net_;
  const std::size_t count = cutset_.instance_count;
  if (cutset_.members.empty() || count == 0) {
    throw InvalidArgumentError("cutset must not be empty");
  }

  const bool all_roots =
      std::all_of(cutset_.members.begin(), cutset_.members.end(),
                  [&](NodeIndex m) { return bn.parents(m).empty(); });
  std::optional<CtpEngine> full;
  if (!all_roots) full.emplace(net_);

  instances_.resize(count);
  states_.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    CutsetInstance& inst = instances_[i];
    inst.assignment = cutset_assignment(bn, cutset_, i);
    if (all_roots) {
      inst.weight = 1.0;
      for (std::size_t k = 0; k < cutset_.members.size(); ++k) {
        inst.weight *= bn.table(cutset_.members[k]).rows[inst.assignment[k]];
      }
    } else {
      // Prior of a non-root assignment: probability of the assignment as
      // evidence on the unconditioned forest.
      Evidence as_evidence;
      for (std::size_t k = 0; k < cutset_.members.size(); ++k) {
        as_evidence.observe(cutset_.members[k], inst.assignment[k]);
      }
      full->reset();
      try {
        full->absorb(as_evidence);
        inst.weight = full->evidence_probability();
      } catch (const ImpossibleEvidenceError&) {
        inst.weight = 0.0;
      }
    }

    const FactorModel model = decompose(bn, cutset_, inst.assignment).model();
    if (i == 0) {
      forest_ = std::make_shared<const CliqueForest>(CliqueForest::from_model(model));
    }
    states_[i] = ForestPotentials::initialize(forest_, model);
    // Calibration renormalizes each portion to P(rest | instance); the
    // constants multiply to the instance prior for non-root cutsets.
    states_[i].propagate(ForestPotentials::ZeroMass::kReport);
  }

  double total = 0.0;
  for (const CutsetInstance& inst : instances_) total += inst.weight;
  if (!(total > 0.0)) throw InternalError("cutset prior has zero mass");
  for (CutsetInstance& inst : instances_) inst.weight /= total;
}

bool CutsetEnsemble::is_cutset_member(NodeIndex node) const {
  return std::find(cutset_.members.begin(), cutset_.members.end(), node) !=
         cutset_.members.end();
}

Evidence CutsetEnsemble::fresh_observations(const Evidence& new_evidence) const {
  new_evidence.validate(*net_);
  Evidence fresh;
  for (auto [node, value] : new_evidence) {
    if (is_cutset_member(node)) {
      throw ConflictError("node '" + net_->node(node).id +
                          "' is a cutset member and cannot be observed");
    }
    if (auto old = evidence_.value_of(node)) {
      if (*old != value) {
        throw ConflictError("node '" + net_->node(node).id +
                            "' already observed with a different value");
      }
      continue;
    }
    fresh.observe(node, value);
  }
  return fresh;
}

InstanceBatch CutsetEnsemble::propagate_instances(
    std::span<const std::size_t> which, const Evidence& fresh) {
  std::set<std::size_t> touched;
  for (auto [node, value] : fresh) {
    const std::ptrdiff_t var = forest_->variable_of(node);
    if (var < 0) {
      throw NotFoundError("node '" + net_->node(node).id +
                          "' is not in the conditioned forest");
    }
    touched.insert(forest_->homes()[static_cast<std::size_t>(var)].component);
  }
  if (options_.force_all) {
    for (std::size_t c = 0; c < forest_->components().size(); ++c) touched.insert(c);
  }

  InstanceBatch batch;
  batch.instances.assign(which.begin(), which.end());
  batch.components.assign(touched.begin(), touched.end());
  for (std::size_t c : batch.components) {
    // collect and distribute: two messages per tree edge
    batch.component_messages.push_back(
        2 * forest_->components()[c].collect.size() * which.size());
  }
  batch.log_likelihoods.assign(which.size(), 0.0);
  batch.messages.assign(which.size(), 0);
  if (which.empty()) return batch;
  batch.stride = states_[which[0]].saved_size(batch.components);
  batch.saved.resize(batch.stride * which.size());

  for_each_index(which, options_.parallel, options_.threads, [&](std::size_t k) {
    ForestPotentials& state = states_[which[k]];
    state.save(batch.components, batch.saved.data() + k * batch.stride);
    if (options_.force_all) state.mark_all_dirty();
    state.enter_evidence(fresh);
    batch.log_likelihoods[k] = state.propagate_log(batch.components, batch.messages[k]);
  });
  return batch;
}

void CutsetEnsemble::rollback(const InstanceBatch& batch) {
  for (std::size_t k = 0; k < batch.instances.size(); ++k) {
    states_[batch.instances[k]].load(batch.components,
                                     batch.saved.data() + k * batch.stride);
  }
}

LikelihoodRecord CutsetEnsemble::absorb_evidence(const Evidence& new_evidence) {
  const Evidence fresh = fresh_observations(new_evidence);
  const std::size_t count = instances_.size();
  LikelihoodRecord record;
  if (fresh.empty()) {
    record.likelihoods.assign(count, 1.0);
    record.log_likelihoods.assign(count, 0.0);
    summary_ = PropagationReport{};
    return record;
  }

  std::vector<std::size_t> all(count);
  for (std::size_t i = 0; i < count; ++i) all[i] = i;
  const InstanceBatch batch = propagate_instances(all, fresh);

  std::vector<double> log_masses(count);
  record.log_likelihoods.resize(count);
  record.likelihoods.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double log_l = batch.log_likelihoods[i];
    record.log_likelihoods[i] = log_l;
    record.likelihoods[i] = std::exp(log_l);
    const double w = instances_[i].weight;
    log_masses[i] = w > 0.0 ? std::log(w) + log_l : kNegInf;
  }
  std::vector<double> updated;
  const double log_total = normalize_log_masses(log_masses, updated);
  if (log_total == kNegInf) {
    rollback(batch);
    throw ImpossibleEvidenceError("evidence has probability zero under every "
                                  "cutset instance");
  }
  record.log_alpha = -log_total;
  record.alpha = std::exp(-log_total);
  for (std::size_t i = 0; i < count; ++i) {
    instances_[i].weight = updated[i];
    instances_[i].log_scale += record.log_likelihoods[i];
  }
  evidence_ = evidence_.merged(fresh);
  summary_ = summarize({&batch, 1});
  return record;
}

std::vector<double> CutsetEnsemble::cutset_posterior() const {
  std::vector<double> w;
  w.reserve(instances_.size());
  for (const CutsetInstance& inst : instances_) w.push_back(inst.weight);
  return w;
}

std::vector<double> CutsetEnsemble::member_posterior(NodeIndex member) const {
  auto it = std::find(cutset_.members.begin(), cutset_.members.end(), member);
  if (it == cutset_.members.end()) {
    throw InvalidArgumentError("node is not a cutset member");
  }
  const std::size_t k = static_cast<std::size_t>(it - cutset_.members.begin());
  std::vector<double> dist(net_->cardinality(member), 0.0);
  for (const CutsetInstance& inst : instances_) {
    dist[inst.assignment[k]] += inst.weight;
  }
  return dist;
}

std::vector<double> CutsetEnsemble::feature_posterior(NodeIndex node) const {
  if (node >= net_->size()) {
    throw NotFoundError("unknown node index " + std::to_string(node));
  }
  if (is_cutset_member(node)) {
    throw InvalidArgumentError("node '" + net_->node(node).id +
                               "' is a cutset member; use member_posterior");
  }
  const auto var = static_cast<std::size_t>(forest_->variable_of(node));
  std::vector<double> dist(net_->cardinality(node), 0.0);
  for (std::size_t i = 0; i < instances_.size(); ++i) {
    const double w = instances_[i].weight;
    if (w <= 0.0) continue;
    const std::vector<double> local = states_[i].variable_marginal(var);
    for (std::size_t v = 0; v < dist.size(); ++v) dist[v] += w * local[v];
  }
  return dist;
}

void CutsetEnsemble::recalibrate_all() {
  for (ForestPotentials& state : states_) {
    state.mark_all_dirty();
    state.propagate(ForestPotentials::ZeroMass::kReport);
  }
}

}  // namespace adinfer

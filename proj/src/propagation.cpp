#include "adinfer/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "adinfer/errors.hpp"

namespace adinfer {

namespace {
std::ptrdiff_t position(const std::vector<std::size_t>& sorted, std::size_t c) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), c);
  if (it == sorted.end() || *it != c) return -1;
  return it - sorted.begin();
}
}  // namespace

double PropagationReport::constant_for(std::size_t component) const {
  const auto k = position(touched_components, component);
  return k < 0 ? 1.0 : constants[static_cast<std::size_t>(k)];
}

std::size_t PropagationReport::messages_for(std::size_t component) const {
  const auto k = position(touched_components, component);
  return k < 0 ? 0 : messages[static_cast<std::size_t>(k)];
}

bool PropagationReport::touched(std::size_t component) const {
  return position(touched_components, component) >= 0;
}

double forest_likelihood(const PropagationReport& report) {
  double p = 1.0;
  for (double constant : report.constants) p *= constant;
  return p;
}

double forest_log_likelihood(const PropagationReport& report) {
  double log_p = 0.0;
  for (double constant : report.constants) {
    if (constant <= 0.0) return -std::numeric_limits<double>::infinity();
    log_p += std::log(constant);
  }
  return log_p;
}

ForestPotentials ForestPotentials::initialize(
    std::shared_ptr<const CliqueForest> forest, const FactorModel& model) {
  ForestPotentials p;
  p.forest_ = std::move(forest);
  const CliqueForest& f = *p.forest_;
  if (model.factors.size() != f.placements().size()) {
    throw InternalError("factor model does not match the forest");
  }
  p.cliques_.assign(f.clique_storage(), 1.0);
  p.separators_.assign(f.separator_storage(), 1.0);
  p.dirty_.assign(f.components().size(), 1);
  for (std::size_t i = 0; i < model.factors.size(); ++i) {
    const FactorPlacement& place = f.placements()[i];
    const auto& entries = model.factors[i].entries;
    double* clique = p.cliques_.data() + f.clique_offset(place.clique);
    for (std::size_t e = 0; e < place.map.size(); ++e) {
      clique[e] *= entries[place.map[e]];
    }
  }
  return p;
}

void ForestPotentials::enter_observation(std::size_t variable, ValueIndex value) {
  const CliqueForest& f = *forest_;
  if (variable >= f.variable_count()) {
    throw NotFoundError("variable " + std::to_string(variable) +
                        " is not in the forest");
  }
  const VariableHome& home = f.homes()[variable];
  if (value >= home.card) {
    throw NotFoundError("value " + std::to_string(value) +
                        " out of range for '" + f.ids()[variable] + "'");
  }
  double* clique = cliques_.data() + f.clique_offset(home.clique);
  const std::size_t size = f.cliques()[home.clique].state_space_size;
  const std::size_t block = home.stride * home.card;
  for (std::size_t base = 0; base < size; base += block) {
    for (std::size_t v = 0; v < home.card; ++v) {
      if (v == value) continue;
      std::fill_n(clique + base + v * home.stride, home.stride, 0.0);
    }
  }
  dirty_[home.component] = 1;
}

void ForestPotentials::enter_evidence(const Evidence& evidence) {
  for (auto [node, value] : evidence) {
    const std::ptrdiff_t var = forest_->variable_of(node);
    if (var < 0) {
      throw NotFoundError("node " + std::to_string(node) +
                          " is not in the forest");
    }
    enter_observation(static_cast<std::size_t>(var), value);
  }
}

std::size_t ForestPotentials::pass_message(const MessageStep& step) {
  const CliqueForest& f = *forest_;
  const ForestEdge& edge = f.edges()[step.edge];
  const bool from_a = step.from == edge.a;
  const auto& from_map = from_a ? edge.map_a : edge.map_b;
  const auto& to_map = from_a ? edge.map_b : edge.map_a;
  const double* from = cliques_.data() + f.clique_offset(step.from);
  double* to = cliques_.data() + f.clique_offset(step.to);
  double* sep = separators_.data() + f.separator_offset(step.edge);
  const std::size_t sep_size = edge.separator_state_space;

  scratch_.assign(sep_size, 0.0);
  for (std::size_t e = 0; e < from_map.size(); ++e) scratch_[from_map[e]] += from[e];
  for (std::size_t s = 0; s < sep_size; ++s) {
    const double updated = scratch_[s];
    scratch_[s] = sep[s] > 0.0 ? updated / sep[s] : 0.0;
    sep[s] = updated;
  }
  for (std::size_t e = 0; e < to_map.size(); ++e) to[e] *= scratch_[to_map[e]];
  return 1;
}

double ForestPotentials::propagate_component(std::size_t c,
                                            std::size_t& messages) {
  const CliqueForest& f = *forest_;
  const ForestComponent& comp = f.components()[c];
  for (const MessageStep& step : comp.collect) messages += pass_message(step);

  double* top = cliques_.data() + f.clique_offset(comp.top_clique);
  const std::size_t top_size = f.cliques()[comp.top_clique].state_space_size;
  double constant = 0.0;
  for (std::size_t e = 0; e < top_size; ++e) constant += top[e];
  if (constant > 0.0) {
    const double inv = 1.0 / constant;
    for (std::size_t e = 0; e < top_size; ++e) top[e] *= inv;
  }

  for (auto it = comp.collect.rbegin(); it != comp.collect.rend(); ++it) {
    messages += pass_message({it->edge, it->to, it->from});
  }
  dirty_[c] = 0;
  return constant;
}

PropagationReport ForestPotentials::propagate(ZeroMass on_zero) {
  PropagationReport report;
  const std::size_t dirty = dirty_count();
  report.touched_components.reserve(dirty);
  report.constants.reserve(dirty);
  report.messages.reserve(dirty);
  bool zero = false;
  for (std::size_t c = 0; c < dirty_.size(); ++c) {
    if (!dirty_[c]) continue;
    std::size_t messages = 0;
    const double constant = propagate_component(c, messages);
    if (!(constant > 0.0)) zero = true;
    report.touched_components.push_back(c);
    report.constants.push_back(constant);
    report.messages.push_back(messages);
    report.messages_passed += messages;
  }
  if (zero && on_zero == ZeroMass::kThrow) {
    throw ImpossibleEvidenceError("evidence has probability zero");
  }
  return report;
}

double ForestPotentials::propagate_log(const std::vector<std::size_t>& components,
                                       std::size_t& messages) {
  double log_p = 0.0;
  for (std::size_t c : components) {
    if (!dirty_[c]) continue;
    const double constant = propagate_component(c, messages);
    log_p = constant > 0.0 ? log_p + std::log(constant)
                           : -std::numeric_limits<double>::infinity();
  }
  return log_p;
}

void ForestPotentials::mark_all_dirty() {
  std::fill(dirty_.begin(), dirty_.end(), 1);
}

std::size_t ForestPotentials::dirty_count() const {
  return static_cast<std::size_t>(std::count(dirty_.begin(), dirty_.end(), 1));
}

std::vector<double> ForestPotentials::variable_marginal(
    std::size_t variable) const {
  if (variable >= forest_->variable_count()) {
    throw NotFoundError("variable " + std::to_string(variable) +
                        " is not in the forest");
  }
  return variable_marginal(variable, forest_->homes()[variable].clique);
}

std::vector<double> ForestPotentials::variable_marginal(
    std::size_t variable, std::size_t clique) const {
  const CliqueForest& f = *forest_;
  const Clique& c = f.cliques().at(clique);
  auto it = std::find(c.members.begin(), c.members.end(), variable);
  if (it == c.members.end()) {
    throw NotFoundError("variable '" + f.ids().at(variable) +
                        "' is not in clique " + std::to_string(clique));
  }
  std::size_t stride = 1;
  for (auto after = std::next(it); after != c.members.end(); ++after) {
    stride *= f.cards()[*after];
  }
  const std::size_t card = f.cards()[variable];
  std::vector<double> dist(card, 0.0);
  const double* entries = cliques_.data() + f.clique_offset(clique);
  for (std::size_t e = 0; e < c.state_space_size; ++e) {
    dist[(e / stride) % card] += entries[e];
  }
  double total = 0.0;
  for (double p : dist) total += p;
  if (total <= 0.0) {
    throw ImpossibleEvidenceError("component holding '" + f.ids()[variable] +
                                  "' has zero mass");
  }
  for (double& p : dist) p /= total;
  return dist;
}

std::span<const double> ForestPotentials::clique_potential(std::size_t c) const {
  return {cliques_.data() + forest_->clique_offset(c),
          forest_->cliques().at(c).state_space_size};
}

std::span<const double> ForestPotentials::separator_potential(
    std::size_t e) const {
  return {separators_.data() + forest_->separator_offset(e),
          forest_->edges().at(e).separator_state_space};
}

std::size_t ForestPotentials::saved_size(
    const std::vector<std::size_t>& components) const {
  const CliqueForest& f = *forest_;
  std::size_t n = components.size();
  for (std::size_t comp : components) {
    for (std::size_t c : f.components()[comp].cliques) {
      n += f.cliques()[c].state_space_size;
    }
    for (const MessageStep& step : f.components()[comp].collect) {
      n += f.edges()[step.edge].separator_state_space;
    }
  }
  return n;
}

void ForestPotentials::save(const std::vector<std::size_t>& components,
                            double* out) const {
  const CliqueForest& f = *forest_;
  for (std::size_t comp : components) {
    *out++ = dirty_[comp];
    for (std::size_t c : f.components()[comp].cliques) {
      const std::size_t n = f.cliques()[c].state_space_size;
      std::copy_n(cliques_.data() + f.clique_offset(c), n, out);
      out += n;
    }
    for (const MessageStep& step : f.components()[comp].collect) {
      const std::size_t n = f.edges()[step.edge].separator_state_space;
      std::copy_n(separators_.data() + f.separator_offset(step.edge), n, out);
      out += n;
    }
  }
}

void ForestPotentials::load(const std::vector<std::size_t>& components,
                            const double* in) {
  const CliqueForest& f = *forest_;
  for (std::size_t comp : components) {
    dirty_[comp] = *in++ != 0.0;
    for (std::size_t c : f.components()[comp].cliques) {
      const std::size_t n = f.cliques()[c].state_space_size;
      std::copy_n(in, n, cliques_.data() + f.clique_offset(c));
      in += n;
    }
    for (const MessageStep& step : f.components()[comp].collect) {
      const std::size_t n = f.edges()[step.edge].separator_state_space;
      std::copy_n(in, n, separators_.data() + f.separator_offset(step.edge));
      in += n;
    }
  }
}

}  // namespace adinfer

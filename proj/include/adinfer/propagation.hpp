#pragma once

#include <memory>
#include <span>
#include <vector>

#include "adinfer/clique_forest.hpp"
#include "adinfer/factor.hpp"
#include "adinfer/network.hpp"

namespace adinfer {

struct PropagationReport {
  std::vector<std::size_t> touched_components;  // ascending
  // Aligned with touched_components: probability of the newly entered
  // evidence in that component given everything absorbed before, and the
  // number of messages passed there.
  std::vector<double> constants;
  std::vector<std::size_t> messages;
  std::size_t messages_passed = 0;

  // 1 / 0 for components that were not touched.
  double constant_for(std::size_t component) const;
  std::size_t messages_for(std::size_t component) const;
  bool touched(std::size_t component) const;
};

// Product of the component constants; 1 for an empty report.
double forest_likelihood(const PropagationReport& report);
// Sum of log constants; -inf when any constant is 0.
double forest_log_likelihood(const PropagationReport& report);

// Clique and separator potentials for one CliqueForest. Single writer: the
// structure is shared, the potentials are owned.
class ForestPotentials {
 public:
  enum class ZeroMass { kThrow, kReport };

  ForestPotentials() = default;

  // Multiplies each factor into its placement clique; all other entries are
  // 1. Every component starts dirty (uncalibrated).
  static ForestPotentials initialize(std::shared_ptr<const CliqueForest> forest,
                                     const FactorModel& model);

  const CliqueForest& forest() const { return *forest_; }
  const std::shared_ptr<const CliqueForest>& forest_ptr() const {
    return forest_;
  }

  // Zeroes the home-clique entries inconsistent with each observation and
  // marks the owning components dirty. Nodes are network node indices.
  // Throws NotFoundError for nodes outside the forest or bad values.
  void enter_evidence(const Evidence& evidence);
  void enter_observation(std::size_t variable, ValueIndex value);

  // Collect-to-top then distribute on every dirty component; renormalizes each
  // processed component to total mass 1 and clears the dirty flags. With
  // ZeroMass::kThrow a zero constant raises ImpossibleEvidenceError after the
  // sweep (state is not rolled back; see snapshot()).
  PropagationReport propagate(ZeroMass on_zero = ZeroMass::kThrow);

  // Marks every component dirty, so the next propagate recalibrates all.
  void mark_all_dirty();
  bool is_dirty(std::size_t component) const { return dirty_[component] != 0; }
  std::size_t dirty_count() const;

  // Marginal of a variable from its home clique, or from `clique`.
  std::vector<double> variable_marginal(std::size_t variable) const;
  std::vector<double> variable_marginal(std::size_t variable,
                                        std::size_t clique) const;

  std::span<const double> clique_potential(std::size_t c) const;
  std::span<const double> separator_potential(std::size_t e) const;

  // Rollback support. save() writes saved_size(components) values: clique
  // and separator entries plus one dirty flag per component; load()
  // reverses it.
  std::size_t saved_size(const std::vector<std::size_t>& components) const;
  void save(const std::vector<std::size_t>& components, double* out) const;
  void load(const std::vector<std::size_t>& components, const double* in);
  // Propagates the dirty components among `components` and returns the sum
  // of their log normalization constants (-inf when one is zero). Adds the
  // number of messages passed to `messages`.
  double propagate_log(const std::vector<std::size_t>& components,
                       std::size_t& messages);

 private:
  std::size_t pass_message(const MessageStep& step);
  // Collect, normalize the top clique, distribute. Returns the constant.
  double propagate_component(std::size_t c, std::size_t& messages);

  std::shared_ptr<const CliqueForest> forest_;
  std::vector<double> cliques_;
  std::vector<double> separators_;
  std::vector<char> dirty_;
  std::vector<double> scratch_;
};

}  // namespace adinfer

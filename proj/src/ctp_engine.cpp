#include "adinfer/ctp_engine.hpp"

#include <set>

#include "adinfer/errors.hpp"

namespace adinfer {

CtpEngine::CtpEngine(std::shared_ptr<const BeliefNetwork> net)
    : net_(std::move(net)) {
  const FactorModel model = factor_model(*net_);
  auto forest = std::make_shared<const CliqueForest>(CliqueForest::from_model(model));
  prior_ = ForestPotentials::initialize(std::move(forest), model);
  prior_.propagate();
  potentials_ = prior_;
}

PropagationReport CtpEngine::absorb(const Evidence& new_evidence) {
  new_evidence.validate(*net_);
  Evidence fresh;
  for (auto [node, value] : new_evidence) {
    if (auto old = evidence_.value_of(node)) {
      if (*old != value) {
        throw ConflictError("node '" + net_->node(node).id +
                            "' already observed with a different value");
      }
      continue;
    }
    fresh.observe(node, value);
  }

  std::set<std::size_t> touched;
  for (auto [node, value] : fresh) {
    const auto var = static_cast<std::size_t>(forest().variable_of(node));
    touched.insert(forest().homes()[var].component);
  }
  const std::vector<std::size_t> components(touched.begin(), touched.end());
  std::vector<double> saved(potentials_.saved_size(components));
  potentials_.save(components, saved.data());
  potentials_.enter_evidence(fresh);
  PropagationReport report =
      potentials_.propagate(ForestPotentials::ZeroMass::kReport);
  const double likelihood = forest_likelihood(report);
  if (!(likelihood > 0.0)) {
    potentials_.load(components, saved.data());
    throw ImpossibleEvidenceError("evidence has probability zero");
  }
  evidence_ = evidence_.merged(fresh);
  evidence_probability_ *= likelihood;
  return report;
}

std::vector<double> CtpEngine::posterior(NodeIndex node) const {
  const std::ptrdiff_t var = forest().variable_of(node);
  if (var < 0) {
    throw NotFoundError("node " + std::to_string(node) + " is not in the forest");
  }
  return potentials_.variable_marginal(static_cast<std::size_t>(var));
}

void CtpEngine::reset() {
  potentials_ = prior_;
  evidence_ = Evidence{};
  evidence_probability_ = 1.0;
}

}  // namespace adinfer

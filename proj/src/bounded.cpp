#include "adinfer/bounded.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "adinfer/errors.hpp"

namespace adinfer {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double w) { return w > 0.0 ? std::log(w) : kNegInf; }
}  // namespace

void RetentionPolicy::validate() const {
  if (mode == Mode::kTopK) {
    if (!(value >= 1.0) || value != std::floor(value)) {
      throw InvalidArgumentError("top-k policy needs an integer k >= 1");
    }
  } else if (!(value >= 0.0 && value < 1.0)) {
    throw InvalidArgumentError("threshold policy needs tau in [0, 1)");
  }
}

std::vector<std::size_t> RetentionPolicy::select(
    const std::vector<double>& weights) const {
  validate();
  std::vector<std::size_t> out;
  if (mode == Mode::kThreshold) {
    for (std::size_t i = 0; i < weights.size(); ++i)
      if (weights[i] >= value) out.push_back(i);
    return out;
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return weights[a] > weights[b];
  });
  const auto k = std::min(order.size(), static_cast<std::size_t>(value));
  out.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(out.begin(), out.end());
  return out;
}

BoundedConditioner::BoundedConditioner(CutsetEnsemble ensemble)
    : ensemble_(std::move(ensemble)),
      base_weights_(ensemble_.cutset_posterior()),
      retained_(base_weights_.size(), false),
      log_likelihood_(base_weights_.size(), 0.0),
      evidence_(ensemble_.evidence()) {}

std::size_t BoundedConditioner::retained_count() const {
  return static_cast<std::size_t>(
      std::count(retained_.begin(), retained_.end(), true));
}

Evidence BoundedConditioner::fresh_observations(
    const Evidence& new_evidence) const {
  new_evidence.validate(ensemble_.network());
  Evidence fresh;
  for (auto [node, value] : new_evidence) {
    if (ensemble_.is_cutset_member(node)) {
      throw ConflictError("node '" + ensemble_.network().node(node).id +
                          "' is a cutset member and cannot be observed");
    }
    if (auto old = evidence_.value_of(node)) {
      if (*old != value) {
        throw ConflictError("node '" + ensemble_.network().node(node).id +
                            "' already observed with a different value");
      }
      continue;
    }
    fresh.observe(node, value);
  }
  return fresh;
}

IntervalPosterior BoundedConditioner::bounded_absorb(
    const Evidence& new_evidence, const RetentionPolicy& policy) {
  const Evidence fresh = fresh_observations(new_evidence);
  const std::vector<std::size_t> selected = policy.select(base_weights_);

  std::vector<std::size_t> existing, joining;
  for (std::size_t i = 0; i < retained_.size(); ++i) {
    if (retained_[i]) {
      existing.push_back(i);
    } else if (std::binary_search(selected.begin(), selected.end(), i)) {
      joining.push_back(i);
    }
  }
  if (existing.empty() && joining.empty()) {
    throw InvalidArgumentError("retention policy keeps no instance");
  }

  const Evidence all_since_start = since_start_.merged(fresh);
  std::vector<InstanceBatch> batches;
  if (!fresh.empty()) batches.push_back(ensemble_.propagate_instances(existing, fresh));
  if (!all_since_start.empty()) {
    batches.push_back(ensemble_.propagate_instances(joining, all_since_start));
  }

  std::vector<double> next_log = log_likelihood_;
  std::vector<bool> next_retained = retained_;
  for (std::size_t i : joining) {
    next_retained[i] = true;
    next_log[i] = 0.0;
  }
  for (const InstanceBatch& b : batches) {
    for (std::size_t k = 0; k < b.instances.size(); ++k) {
      next_log[b.instances[k]] += b.log_likelihoods[k];
    }
  }

  bool any_mass = false;
  for (std::size_t i = 0; i < next_retained.size(); ++i) {
    const double log_w = safe_log(base_weights_[i]);
    if (next_retained[i] ? (log_w + next_log[i] > kNegInf) : (log_w > kNegInf)) {
      any_mass = true;
    }
  }
  if (!any_mass) {
    for (const InstanceBatch& b : batches) ensemble_.rollback(b);
    throw ImpossibleEvidenceError("evidence has probability zero");
  }

  log_likelihood_ = std::move(next_log);
  retained_ = std::move(next_retained);
  since_start_ = all_since_start;
  evidence_ = evidence_.merged(fresh);
  summary_ = summarize(batches);
  return current();
}

IntervalPosterior BoundedConditioner::refine(
    const std::vector<std::size_t>& additional) {
  for (std::size_t i : additional) {
    if (i >= retained_.size()) {
      throw InvalidArgumentError("instance index out of range");
    }
    if (retained_[i]) {
      throw InvalidArgumentError("instance " + std::to_string(i) +
                                 " is already retained");
    }
  }
  std::vector<InstanceBatch> batches;
  if (!since_start_.empty()) {
    batches.push_back(ensemble_.propagate_instances(additional, since_start_));
  }
  for (std::size_t i : additional) {
    retained_[i] = true;
    log_likelihood_[i] = 0.0;
  }
  for (const InstanceBatch& b : batches) {
    for (std::size_t k = 0; k < b.instances.size(); ++k) {
      log_likelihood_[b.instances[k]] += b.log_likelihoods[k];
    }
  }
  summary_ = summarize(batches);
  return current();
}

IntervalPosterior BoundedConditioner::current() const {
  const std::size_t n = base_weights_.size();
  if (since_start_.empty()) {
    // No evidence since the base weights: they are exact.
    IntervalPosterior exact;
    for (std::size_t i = 0; i < n; ++i) {
      exact.bounds.push_back({base_weights_[i], base_weights_[i], retained_[i]});
    }
    return exact;
  }
  std::vector<double> log_mass(n, kNegInf);
  double peak = kNegInf;
  for (std::size_t i = 0; i < n; ++i) {
    const double log_w = safe_log(base_weights_[i]);
    log_mass[i] = retained_[i] ? log_w + log_likelihood_[i] : log_w;
    peak = std::max(peak, log_mass[i]);
  }

  // Everything is rescaled by exp(-peak) so long evidence runs cannot
  // underflow the retained mass.
  std::vector<double> scaled(n, 0.0);
  double retained_mass = 0.0, eliminated_weight = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (peak > kNegInf) scaled[i] = std::exp(log_mass[i] - peak);
    (retained_[i] ? retained_mass : eliminated_weight) += scaled[i];
  }

  IntervalPosterior out;
  out.bounds.resize(n);
  double best_retained_lower = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    IntervalBound& b = out.bounds[i];
    b.retained = retained_[i];
    if (retained_[i]) {
      if (retained_mass > 0.0) {
        b.lower = scaled[i] / (retained_mass + eliminated_weight);
        b.upper = scaled[i] / retained_mass;
      }
      best_retained_lower = std::max(best_retained_lower, b.lower);
    } else if (scaled[i] > 0.0) {
      b.upper = scaled[i] / (retained_mass + scaled[i]);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!retained_[i] && out.bounds[i].upper > best_retained_lower) {
      out.rank_uncertain = true;
    }
  }
  return out;
}

}  // namespace adinfer

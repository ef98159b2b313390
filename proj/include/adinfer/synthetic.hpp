#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "adinfer/network.hpp"

namespace adinfer {

// One group of disease-dependent features that stay connected to each other
// once the disease node is conditioned away.
struct PortionSpec {
  enum class Pattern { kIsolated, kChain, kTree };
  std::size_t feature_count = 1;
  Pattern pattern = Pattern::kIsolated;
  // Emit this many identical portions (handy for many singleton features).
  std::size_t repeat = 1;
};

// Shape of a diagnostic network: one disease node, parent of every
// feature except the independent ones.
struct SyntheticSpec {
  std::size_t disease_cardinality = 63;
  std::vector<PortionSpec> portions;
  std::size_t independent_features = 2;
  std::size_t min_feature_cardinality = 2;
  std::size_t max_feature_cardinality = 10;
  std::uint64_t seed = 1;

  // 63-value disease; one 12-feature chain portion; 20 singleton portions;
  // 2 disease-independent features.
  static SyntheticSpec desk_default();

  // Throws InvalidArgumentError for an unusable spec.
  void validate() const;
};

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);
nlohmann::json synthetic_spec_to_json(const SyntheticSpec& spec);

struct SyntheticNetwork {
  BeliefNetwork network;
  NodeIndex disease = 0;
  // Feature nodes of each expanded portion, in generation order.
  std::vector<std::vector<NodeIndex>> portions;
  std::vector<NodeIndex> independent;
  // Every non-disease node.
  std::vector<NodeIndex> features;
};

// Deterministic per seed: same spec, byte-identical dump_network output.
SyntheticNetwork generate(const SyntheticSpec& spec);

struct CaseSample {
  Evidence evidence;
  std::size_t feature_count = 0;
};

// Each case observes between 3 and 10 distinct features (uniform, capped by
// the number of candidates), with values from one forward sample of the
// network so the evidence is never impossible.
std::vector<CaseSample> sample_cases(const BeliefNetwork& net,
                                     const std::vector<NodeIndex>& candidates,
                                     std::size_t n, std::uint64_t seed);

// One forward (ancestral) sample of every node.
template <typename Rng>
std::vector<ValueIndex> forward_sample(const BeliefNetwork& net, Rng& rng);

}  // namespace adinfer

#include "adinfer/synthetic_inl.hpp"

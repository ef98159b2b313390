#pragma once

// Seeded random networks for property tests: at most 10 nodes, 2..4 values,
// at most 3 parents drawn from earlier nodes.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "adinfer/network.hpp"
#include "adinfer/synthetic.hpp"

namespace adinfer::testing {

struct RandomNetworkOptions {
  std::size_t max_nodes = 10;
  std::size_t min_nodes = 2;
  std::size_t max_values = 4;
  std::size_t max_parents = 3;
  double zero_entry_rate = 0.0;  // chance a CPT entry is forced to zero
};

inline BeliefNetwork random_network(std::uint64_t seed,
                                    const RandomNetworkOptions& opt = {}) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  const std::size_t n = uniform(opt.min_nodes, opt.max_nodes);
  std::vector<NodeSpec> specs(n);
  std::vector<std::size_t> cards(n);
  for (std::size_t i = 0; i < n; ++i) {
    NodeSpec& s = specs[i];
    s.id = "n" + std::to_string(i);
    s.label = s.id;
    cards[i] = uniform(2, opt.max_values);
    for (std::size_t v = 0; v < cards[i]; ++v) s.values.push_back("v" + std::to_string(v));

    std::vector<std::size_t> pool(i);
    for (std::size_t k = 0; k < i; ++k) pool[k] = k;
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::size_t k = i == 0 ? 0 : uniform(0, std::min(opt.max_parents, i));
    std::size_t rows = 1;
    for (std::size_t p = 0; p < k; ++p) {
      s.parents.push_back("n" + std::to_string(pool[p]));
      rows *= cards[pool[p]];
    }
    for (std::size_t r = 0; r < rows; ++r) {
      std::vector<double> row(cards[i]);
      double total = 0.0;
      for (double& x : row) {
        x = coin(rng) < opt.zero_entry_rate ? 0.0 : unit(rng);
        total += x;
      }
      if (total == 0.0) {
        row[0] = 1.0;
        total = 1.0;
      }
      for (double x : row) s.cpt.push_back(x / total);
    }
  }
  return BeliefNetwork::from_specs(specs);
}

// Evidence on up to `max_size` distinct nodes, values from one forward
// sample so the evidence is always possible.
inline Evidence random_evidence(const BeliefNetwork& net, std::uint64_t seed,
                                std::size_t max_size,
                                const std::vector<NodeIndex>& excluded = {}) {
  std::mt19937_64 rng(seed);
  const auto sample = forward_sample(net, rng);
  std::vector<NodeIndex> pool;
  for (NodeIndex v = 0; v < net.size(); ++v) {
    if (std::find(excluded.begin(), excluded.end(), v) == excluded.end()) pool.push_back(v);
  }
  std::shuffle(pool.begin(), pool.end(), rng);
  const std::size_t hi = std::min(max_size, pool.size());
  const std::size_t k = std::uniform_int_distribution<std::size_t>(0, hi)(rng);
  Evidence ev;
  for (std::size_t i = 0; i < k; ++i) ev.observe(pool[i], sample[pool[i]]);
  return ev;
}

// The roots of a network, in declaration order.
inline std::vector<NodeIndex> roots(const BeliefNetwork& net) {
  std::vector<NodeIndex> out;
  for (NodeIndex v = 0; v < net.size(); ++v) {
    if (net.parents(v).empty()) out.push_back(v);
  }
  return out;
}

inline std::shared_ptr<const BeliefNetwork> shared(BeliefNetwork net) {
  return std::make_shared<const BeliefNetwork>(std::move(net));
}

// D -> F with P(d1) = 0.6, P(f=t|d1) = 0.8, P(f=t|d2) = 0.3.
inline BeliefNetwork disease_feature() {
  return BeliefNetwork::from_specs({
      {"D", "Disease", {"d1", "d2"}, {}, {0.6, 0.4}},
      {"F", "Feature", {"t", "f"}, {"D"}, {0.8, 0.2, 0.3, 0.7}},
  });
}

inline BeliefNetwork single_node() {
  return BeliefNetwork::from_specs({{"D", "Disease", {"d1", "d2"}, {}, {0.6, 0.4}}});
}

}  // namespace adinfer::testing

#pragma once

#include <random>

namespace adinfer {

template <typename Rng>
std::vector<ValueIndex> forward_sample(const BeliefNetwork& net, Rng& rng) {
  std::vector<ValueIndex> values(net.size(), 0);
  std::vector<ValueIndex> parent_values;
  for (NodeIndex v : net.topological_order()) {
    parent_values.clear();
    for (NodeIndex p : net.parents(v)) parent_values.push_back(values[p]);
    // Inverse-CDF draw on 53 random bits; independent of the standard
    // library's distribution implementations.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    double cumulative = 0.0;
    ValueIndex chosen = net.cardinality(v) - 1;
    for (ValueIndex x = 0; x < net.cardinality(v); ++x) {
      cumulative += net.probability(v, parent_values, x);
      if (u < cumulative) {
        chosen = x;
        break;
      }
    }
    // Never land on a zero-probability value through rounding.
    while (net.probability(v, parent_values, chosen) <= 0.0 && chosen > 0) {
      --chosen;
    }
    values[v] = chosen;
  }
  return values;
}

}  // namespace adinfer

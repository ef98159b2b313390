#include "adinfer/factor.hpp"

#include <algorithm>

#include "adinfer/errors.hpp"

namespace adinfer {

std::size_t state_space_size(const std::vector<std::size_t>& cards) {
  std::size_t n = 1;
  for (std::size_t c : cards) n *= c;
  return n;
}

std::vector<std::uint32_t> projection_map(const std::vector<NodeIndex>& scope,
                                          const std::vector<std::size_t>& cards,
                                          const std::vector<NodeIndex>& target) {
  // Stride in the target table of every source position (0 when the source
  // variable is summed out).
  std::vector<std::size_t> target_stride(scope.size(), 0);
  std::size_t stride = 1;
  for (std::size_t t = target.size(); t-- > 0;) {
    auto it = std::find(scope.begin(), scope.end(), target[t]);
    if (it == scope.end()) {
      throw InternalError("projection target is not a subset of the scope");
    }
    const std::size_t pos = static_cast<std::size_t>(it - scope.begin());
    target_stride[pos] = stride;
    stride *= cards[pos];
  }

  const std::size_t total = state_space_size(cards);
  std::vector<std::uint32_t> map(total);
  std::vector<std::size_t> digits(scope.size(), 0);
  std::size_t index = 0;
  for (std::size_t e = 0; e < total; ++e) {
    map[e] = static_cast<std::uint32_t>(index);
    for (std::size_t k = scope.size(); k-- > 0;) {
      index += target_stride[k];
      if (++digits[k] < cards[k]) break;
      index -= target_stride[k] * cards[k];
      digits[k] = 0;
    }
  }
  return map;
}

PotentialTable marginalize(const PotentialTable& table,
                           const std::vector<NodeIndex>& target) {
  PotentialTable out;
  out.scope = target;
  for (NodeIndex v : target) {
    auto it = std::find(table.scope.begin(), table.scope.end(), v);
    if (it == table.scope.end()) {
      throw InternalError("marginalization target outside table scope");
    }
    out.cards.push_back(table.cards[it - table.scope.begin()]);
  }
  out.entries.assign(state_space_size(out.cards), 0.0);
  const auto map = projection_map(table.scope, table.cards, target);
  for (std::size_t e = 0; e < table.entries.size(); ++e) {
    out.entries[map[e]] += table.entries[e];
  }
  return out;
}

std::ptrdiff_t FactorModel::variable_of(NodeIndex node) const {
  auto it = std::find(origin.begin(), origin.end(), node);
  if (it == origin.end()) return -1;
  return it - origin.begin();
}

FactorModel factor_model(const BeliefNetwork& net) {
  FactorModel model;
  for (std::size_t i = 0; i < net.size(); ++i) {
    model.ids.push_back(net.node(i).id);
    model.cards.push_back(net.cardinality(i));
    model.origin.push_back(i);
  }
  for (std::size_t i = 0; i < net.size(); ++i) {
    PotentialTable f;
    f.scope = net.parents(i);
    f.scope.push_back(i);
    for (NodeIndex v : f.scope) f.cards.push_back(net.cardinality(v));
    f.entries = net.table(i).rows;
    model.factors.push_back(std::move(f));
  }
  return model;
}

}  // namespace adinfer

#include "adinfer/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>

#include "adinfer/errors.hpp"

namespace adinfer {

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t uniform_int(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
}

std::vector<std::string> value_labels(std::size_t card, const char* prefix,
                                      int width) {
  std::vector<std::string> labels;
  for (std::size_t v = 0; v < card; ++v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, v + 1);
    labels.emplace_back(buf);
  }
  return labels;
}

// Random rows, skewed away from uniform so that features carry evidence.
std::vector<double> random_table(std::mt19937_64& rng, std::size_t rows,
                                 std::size_t card, double floor, int power) {
  std::vector<double> cpt(rows * card);
  for (std::size_t r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (std::size_t v = 0; v < card; ++v) {
      double u = uniform01(rng);
      double x = u;
      for (int k = 1; k < power; ++k) x *= u;
      cpt[r * card + v] = x + floor;
      sum += cpt[r * card + v];
    }
    for (std::size_t v = 0; v < card; ++v) cpt[r * card + v] /= sum;
  }
  return cpt;
}

const char* pattern_name(PortionSpec::Pattern p) {
  switch (p) {
    case PortionSpec::Pattern::kIsolated: return "isolated";
    case PortionSpec::Pattern::kChain: return "chain";
    case PortionSpec::Pattern::kTree: return "tree";
  }
  return "isolated";
}

}  // namespace

SyntheticSpec SyntheticSpec::desk_default() {
  SyntheticSpec spec;
  spec.portions.push_back({12, PortionSpec::Pattern::kChain, 1});
  spec.portions.push_back({1, PortionSpec::Pattern::kIsolated, 20});
  spec.independent_features = 2;
  spec.seed = 1990;
  return spec;
}

void SyntheticSpec::validate() const {
  if (disease_cardinality < 2) {
    throw InvalidArgumentError("disease node needs at least 2 values");
  }
  if (portions.empty()) throw InvalidArgumentError("spec needs a portion");
  if (min_feature_cardinality < 2 ||
      max_feature_cardinality < min_feature_cardinality ||
      max_feature_cardinality > 10) {
    throw InvalidArgumentError("feature cardinality range is invalid");
  }
  for (const PortionSpec& p : portions) {
    if (p.feature_count == 0 || p.repeat == 0) {
      throw InvalidArgumentError("portion needs at least one feature");
    }
    if (p.pattern == PortionSpec::Pattern::kIsolated && p.feature_count != 1) {
      throw InvalidArgumentError(
          "isolated portions hold one feature; use 'repeat' for more");
    }
  }
}

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
  SyntheticSpec spec;
  try {
    spec.disease_cardinality = j.value("disease_cardinality", spec.disease_cardinality);
    spec.independent_features =
        j.value("independent_features", spec.independent_features);
    spec.min_feature_cardinality =
        j.value("min_feature_cardinality", spec.min_feature_cardinality);
    spec.max_feature_cardinality =
        j.value("max_feature_cardinality", spec.max_feature_cardinality);
    spec.seed = j.value("seed", spec.seed);
    for (const auto& p : j.at("portions")) {
      PortionSpec portion;
      portion.feature_count = p.value("feature_count", std::size_t{1});
      portion.repeat = p.value("repeat", std::size_t{1});
      const std::string pattern = p.value("pattern", std::string("isolated"));
      if (pattern == "isolated") {
        portion.pattern = PortionSpec::Pattern::kIsolated;
      } else if (pattern == "chain") {
        portion.pattern = PortionSpec::Pattern::kChain;
      } else if (pattern == "tree") {
        portion.pattern = PortionSpec::Pattern::kTree;
      } else {
        throw ParseError("unknown portion pattern '" + pattern + "'");
      }
      spec.portions.push_back(portion);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad synthetic spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

nlohmann::json synthetic_spec_to_json(const SyntheticSpec& spec) {
  nlohmann::json portions = nlohmann::json::array();
  for (const PortionSpec& p : spec.portions) {
    portions.push_back({{"feature_count", p.feature_count},
                        {"pattern", pattern_name(p.pattern)},
                        {"repeat", p.repeat}});
  }
  return {{"disease_cardinality", spec.disease_cardinality},
          {"portions", portions},
          {"independent_features", spec.independent_features},
          {"min_feature_cardinality", spec.min_feature_cardinality},
          {"max_feature_cardinality", spec.max_feature_cardinality},
          {"seed", spec.seed}};
}

SyntheticNetwork generate(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::vector<NodeSpec> specs;

  NodeSpec disease;
  disease.id = "disease";
  disease.label = "Disease";
  disease.values = value_labels(spec.disease_cardinality, "dx", 2);
  disease.cpt = random_table(rng, 1, spec.disease_cardinality, 0.01, 2);
  specs.push_back(std::move(disease));

  SyntheticNetwork out;
  out.disease = 0;
  auto feature_card = [&] {
    return uniform_int(rng, spec.min_feature_cardinality,
                       spec.max_feature_cardinality);
  };

  std::size_t portion_index = 0;
  for (const PortionSpec& portion : spec.portions) {
    for (std::size_t r = 0; r < portion.repeat; ++r, ++portion_index) {
      std::vector<NodeIndex> members;
      for (std::size_t k = 0; k < portion.feature_count; ++k) {
        NodeSpec f;
        f.id = "p" + std::to_string(portion_index) + "_f" + std::to_string(k);
        f.label = "Portion " + std::to_string(portion_index) + " feature " +
                  std::to_string(k);
        f.values = value_labels(feature_card(), "v", 1);
        f.parents.push_back("disease");
        std::size_t rows = spec.disease_cardinality;
        if (k > 0 && portion.pattern != PortionSpec::Pattern::kIsolated) {
          const std::size_t link =
              portion.pattern == PortionSpec::Pattern::kChain
                  ? k - 1
                  : uniform_int(rng, 0, k - 1);
          const NodeSpec& parent = specs[members[link]];
          f.parents.push_back(parent.id);
          rows *= parent.values.size();
        }
        f.cpt = random_table(rng, rows, f.values.size(), 0.02, 3);
        members.push_back(specs.size());
        specs.push_back(std::move(f));
      }
      out.portions.push_back(members);
    }
  }

  for (std::size_t k = 0; k < spec.independent_features; ++k) {
    NodeSpec f;
    f.id = "ind" + std::to_string(k);
    f.label = "Independent feature " + std::to_string(k);
    f.values = value_labels(feature_card(), "v", 1);
    f.cpt = random_table(rng, 1, f.values.size(), 0.02, 3);
    out.independent.push_back(specs.size());
    specs.push_back(std::move(f));
  }

  out.network = BeliefNetwork::from_specs(specs);
  for (NodeIndex v = 1; v < out.network.size(); ++v) out.features.push_back(v);
  return out;
}

std::vector<CaseSample> sample_cases(const BeliefNetwork& net,
                                     const std::vector<NodeIndex>& candidates,
                                     std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidArgumentError("need at least one case");
  if (candidates.empty()) throw InvalidArgumentError("no candidate features");
  std::mt19937_64 rng(seed);
  std::vector<CaseSample> cases;
  for (std::size_t c = 0; c < n; ++c) {
    const std::vector<ValueIndex> world = forward_sample(net, rng);
    const std::size_t want =
        std::min(uniform_int(rng, 3, 10), candidates.size());
    // Partial Fisher-Yates over the candidate list.
    std::vector<NodeIndex> pool = candidates;
    CaseSample sample;
    for (std::size_t k = 0; k < want; ++k) {
      const std::size_t pick = uniform_int(rng, k, pool.size() - 1);
      std::swap(pool[k], pool[pick]);
      sample.evidence.observe(pool[k], world[pool[k]]);
    }
    sample.feature_count = want;
    cases.push_back(std::move(sample));
  }
  return cases;
}

}  // namespace adinfer

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "adinfer/conditioning.hpp"
#include "adinfer/ctp_engine.hpp"
#include "adinfer/errors.hpp"
#include "adinfer/oracle.hpp"
#include "adinfer/synthetic.hpp"
#include "support/random_network.hpp"

using namespace adinfer;
namespace t = adinfer::testing;

namespace {

void expect_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "entry " << i;
}

BeliefNetwork two_roots_and_child() {
  return BeliefNetwork::from_specs({
      {"A", "", {"a0", "a1"}, {}, {0.5, 0.5}},
      {"B", "", {"b0", "b1"}, {}, {0.2, 0.8}},
      {"C", "", {"c0", "c1"}, {"A", "B"}, {0.9, 0.1, 0.6, 0.4, 0.3, 0.7, 0.5, 0.5}},
  });
}

BeliefNetwork small_star() {
  return BeliefNetwork::from_specs({
      {"D", "", {"d1", "d2", "d3"}, {}, {0.5, 0.3, 0.2}},
      {"F1", "", {"t", "f"}, {"D"}, {0.9, 0.1, 0.4, 0.6, 0.2, 0.8}},
      {"F2", "", {"x", "y", "z"}, {"D"}, {0.2, 0.3, 0.5, 0.6, 0.3, 0.1, 0.1, 0.1, 0.8}},
      {"G", "", {"t", "f"}, {}, {0.3, 0.7}},
  });
}

}  // namespace

TEST(SelectCutset, Examples) {
  SyntheticSpec spec;
  spec.disease_cardinality = 63;
  spec.portions = {{3, PortionSpec::Pattern::kChain, 1}, {1, PortionSpec::Pattern::kIsolated, 4}};
  const SyntheticNetwork synth = generate(spec);
  const LoopCutset autoc = select_cutset_auto(synth.network);
  EXPECT_EQ(autoc.members, std::vector<NodeIndex>{synth.disease});
  EXPECT_EQ(autoc.instance_count, 63u);

  const LoopCutset explicit_d = select_cutset(synth.network, {"disease"});
  EXPECT_EQ(explicit_d.instance_count, 63u);

  const BeliefNetwork net = BeliefNetwork::from_specs({
      {"A", "", {"0", "1"}, {}, {0.5, 0.5}},
      {"B", "", {"0", "1", "2"}, {}, {0.2, 0.3, 0.5}},
  });
  EXPECT_EQ(select_cutset(net, {"A", "B"}).instance_count, 6u);
}

TEST(SelectCutset, Errors) {
  EXPECT_THROW(select_cutset(t::disease_feature(), {"X"}), NotFoundError);
  EXPECT_THROW(select_cutset_auto(t::single_node()), InvalidArgumentError);
  EXPECT_THROW(select_cutset(t::disease_feature(), {}), InvalidArgumentError);
}

TEST(SelectCutset, AutoTieBreaksBySmallerCardinality) {
  // chain A - B - C: B and ... only B splits; with equal splits the smaller card wins
  const BeliefNetwork net = BeliefNetwork::from_specs({
      {"A", "", {"0", "1", "2"}, {}, {0.2, 0.3, 0.5}},
      {"B", "", {"0", "1"}, {}, {0.5, 0.5}},
      {"C", "", {"0", "1"}, {"A", "B"}, {0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5}},
  });
  EXPECT_EQ(select_cutset_auto(net).members, std::vector<NodeIndex>{1});
}

TEST(Decompose, StarDisconnects) {
  const BeliefNetwork net = small_star();
  const LoopCutset cutset = select_cutset(net, {"D"});
  const std::vector<ValueIndex> at{0};
  const ConditionedNetwork cn = decompose(net, cutset, at);
  ASSERT_EQ(cn.network.size(), 3u);
  EXPECT_TRUE(cn.network.edges().empty());
  EXPECT_EQ(cn.network.table(0).rows, (std::vector<double>{0.9, 0.1}));
  EXPECT_EQ(cn.network.table(1).rows, (std::vector<double>{0.2, 0.3, 0.5}));
  // G has no cutset parent: unchanged
  EXPECT_EQ(cn.network.table(2).rows, net.table(3).rows);
  const CliqueForest f = CliqueForest::from_model(cn.model());
  EXPECT_EQ(f.components().size(), 3u);
}

TEST(Decompose, IndependentFeaturesUnaffectedBySlice) {
  SyntheticSpec spec;
  spec.disease_cardinality = 4;
  spec.portions = {{2, PortionSpec::Pattern::kChain, 1}};
  spec.independent_features = 2;
  const SyntheticNetwork synth = generate(spec);
  const LoopCutset cutset = make_cutset(synth.network, {synth.disease});
  const auto a = decompose(synth.network, cutset, std::vector<ValueIndex>{0});
  const auto b = decompose(synth.network, cutset, std::vector<ValueIndex>{3});
  for (NodeIndex f : synth.independent) {
    const auto pos = std::find(a.origin.begin(), a.origin.end(), f) - a.origin.begin();
    EXPECT_EQ(a.network.table(pos).rows, b.network.table(pos).rows);
    EXPECT_EQ(a.network.table(pos).rows, synth.network.table(f).rows);
  }
}

TEST(Decompose, ComponentMonotonicity) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const BeliefNetwork net = t::random_network(seed);
    const CliqueForest whole = CliqueForest::from_model(factor_model(net));
    for (NodeIndex c = 0; c < net.size(); ++c) {
      // a cutset node that is its own component leaves nothing behind
      if (net.parents(c).empty() && net.children(c).empty()) continue;
      const LoopCutset cutset = make_cutset(net, {c});
      const auto cn = decompose(net, cutset, cutset_assignment(net, cutset, 0));
      const CliqueForest f = CliqueForest::from_model(cn.model());
      EXPECT_GE(f.components().size(), whole.components().size()) << seed << " " << c;
    }
  }
}

TEST(InitEnsemble, Weights) {
  CutsetEnsemble df(t::shared(t::disease_feature()), select_cutset(t::disease_feature(), {"D"}));
  expect_close(df.cutset_posterior(), {0.6, 0.4}, 1e-15);

  std::vector<double> flat(63, 1.0 / 63);
  NodeSpec d{"D", "", {}, {}, flat};
  for (int i = 0; i < 63; ++i) d.values.push_back("d" + std::to_string(i));
  const BeliefNetwork uni = BeliefNetwork::from_specs(
      {d, {"F", "", {"t", "f"}, {"D"}, [] {
             std::vector<double> r;
             for (int i = 0; i < 63; ++i) r.insert(r.end(), {0.3, 0.7});
             return r;
           }()}});
  CutsetEnsemble ue(t::shared(uni), select_cutset(uni, {"D"}));
  for (double w : ue.cutset_posterior()) EXPECT_NEAR(w, 1.0 / 63, 1e-15);

  const BeliefNetwork two = two_roots_and_child();
  CutsetEnsemble te(t::shared(two), select_cutset(two, {"A", "B"}));
  expect_close(te.cutset_posterior(), {0.10, 0.40, 0.10, 0.40}, 1e-15);
}

TEST(InitEnsemble, NonRootCutsetWeightsAreMarginals) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const BeliefNetwork net = t::random_network(seed, {.min_nodes = 3});
    const NodeIndex c = net.size() - 1;
    if (net.parents(c).empty()) continue;
    CutsetEnsemble e(t::shared(net), make_cutset(net, {c}));
    expect_close(e.cutset_posterior(), oracle::enumerate_posterior(net, c, {}), 1e-12);
  }
}

TEST(AbsorbEvidence, EmptyIsNoOp) {
  CutsetEnsemble e(t::shared(t::disease_feature()), select_cutset(t::disease_feature(), {"D"}));
  const LikelihoodRecord r = e.absorb_evidence({});
  for (double l : r.likelihoods) EXPECT_EQ(l, 1.0);
  EXPECT_EQ(r.alpha, 1.0);
  expect_close(e.cutset_posterior(), {0.6, 0.4}, 1e-15);
}

TEST(AbsorbEvidence, DiseaseFeature) {
  CutsetEnsemble e(t::shared(t::disease_feature()), select_cutset(t::disease_feature(), {"D"}));
  Evidence ev;
  ev.observe(1, 0);
  const LikelihoodRecord r = e.absorb_evidence(ev);
  expect_close(r.likelihoods, {0.8, 0.3}, 1e-15);
  EXPECT_NEAR(r.alpha, 1.0 / 0.6, 1e-12);
  expect_close(e.cutset_posterior(), {0.8, 0.2}, 1e-12);
}

TEST(AbsorbEvidence, SequentialEqualsCombined) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const BeliefNetwork net = t::random_network(seed, {.min_nodes = 4});
    const LoopCutset cutset = make_cutset(net, {0});
    const Evidence ev = t::random_evidence(net, seed + 9, 4, {0});
    CutsetEnsemble seq(t::shared(net), cutset);
    CutsetEnsemble all(t::shared(net), cutset);
    for (auto [node, value] : ev) {
      Evidence one;
      one.observe(node, value);
      seq.absorb_evidence(one);
    }
    all.absorb_evidence(ev);
    expect_close(seq.cutset_posterior(), all.cutset_posterior(), 1e-10);
  }
}

TEST(AbsorbEvidence, ImpossibleLeavesEnsembleUnchanged) {
  const BeliefNetwork net = BeliefNetwork::from_specs({
      {"D", "", {"d1", "d2"}, {}, {0.6, 0.4}},
      {"F", "", {"t", "f"}, {"D"}, {0.8, 0.2, 0.3, 0.7}},
      {"G", "", {"t", "f"}, {"D"}, {0.0, 1.0, 0.0, 1.0}},
  });
  CutsetEnsemble e(t::shared(net), select_cutset(net, {"D"}));
  Evidence f;
  f.observe(1, 0);
  e.absorb_evidence(f);
  const auto before = e.cutset_posterior();
  const auto g_before = e.feature_posterior(2);
  Evidence g;
  g.observe(2, 0);
  EXPECT_THROW(e.absorb_evidence(g), ImpossibleEvidenceError);
  EXPECT_EQ(e.cutset_posterior(), before);
  EXPECT_EQ(e.feature_posterior(2), g_before);
  EXPECT_FALSE(e.evidence().contains(2));
  // still usable
  Evidence g2;
  g2.observe(2, 1);
  e.absorb_evidence(g2);
  expect_close(e.cutset_posterior(), {0.8, 0.2}, 1e-12);
}

TEST(AbsorbEvidence, ConflictsAndCutsetEvidence) {
  CutsetEnsemble e(t::shared(t::disease_feature()), select_cutset(t::disease_feature(), {"D"}));
  Evidence f;
  f.observe(1, 0);
  e.absorb_evidence(f);
  e.absorb_evidence(f);  // same value is not new evidence
  expect_close(e.cutset_posterior(), {0.8, 0.2}, 1e-12);
  Evidence g;
  g.observe(1, 1);
  EXPECT_THROW(e.absorb_evidence(g), ConflictError);
  Evidence d;
  d.observe(0, 0);
  EXPECT_THROW(e.absorb_evidence(d), ConflictError);
}

TEST(FeaturePosterior, Examples) {
  CutsetEnsemble e(t::shared(t::disease_feature()), select_cutset(t::disease_feature(), {"D"}));
  expect_close(e.feature_posterior(1), {0.60, 0.40}, 1e-12);
  EXPECT_THROW(e.feature_posterior(0), InvalidArgumentError);

  Evidence f;
  f.observe(1, 1);
  e.absorb_evidence(f);
  expect_close(e.feature_posterior(1), {0.0, 1.0}, 1e-15);

  // deterministic root: everything on one instance
  const BeliefNetwork det = BeliefNetwork::from_specs({
      {"D", "", {"d1", "d2"}, {}, {1.0, 0.0}},
      {"F", "", {"t", "f"}, {"D"}, {0.35, 0.65, 0.9, 0.1}},
  });
  CutsetEnsemble de(t::shared(det), select_cutset(det, {"D"}));
  expect_close(de.feature_posterior(1), {0.35, 0.65}, 0.0);
}

TEST(PropagationSummary, SelectiveAndTotals) {
  const BeliefNetwork net = small_star();
  CutsetEnsemble e(t::shared(net), select_cutset(net, {"D"}));
  const std::size_t comps = e.forest().components().size();
  ASSERT_EQ(comps, 3u);

  Evidence one;
  one.observe(1, 0);
  e.absorb_evidence(one);
  EXPECT_EQ(e.propagation_summary().touched_components.size(), 1u);

  CutsetEnsemble all(t::shared(net), select_cutset(net, {"D"}));
  Evidence every;
  every.observe(1, 0);
  every.observe(2, 2);
  every.observe(3, 1);
  all.absorb_evidence(every);
  EXPECT_EQ(all.propagation_summary().touched_components.size(), comps);
}

TEST(PropagationSummary, MessagesScaleWithInstances) {
  SyntheticSpec spec;
  spec.disease_cardinality = 5;
  spec.portions = {{4, PortionSpec::Pattern::kChain, 1}, {1, PortionSpec::Pattern::kIsolated, 3}};
  const SyntheticNetwork synth = generate(spec);
  auto net = t::shared(synth.network);
  CutsetEnsemble e(net, make_cutset(*net, {synth.disease}));
  Evidence ev;
  ev.observe(synth.portions[0][3], 0);
  e.absorb_evidence(ev);

  // one instance alone
  const auto cn = decompose(*net, e.cutset(), cutset_assignment(*net, e.cutset(), 0));
  auto forest = std::make_shared<const CliqueForest>(CliqueForest::from_model(cn.model()));
  ForestPotentials p = ForestPotentials::initialize(forest, cn.model());
  p.propagate();
  Evidence local;
  local.observe(std::find(cn.origin.begin(), cn.origin.end(), synth.portions[0][3]) -
                    cn.origin.begin(),
                0);
  p.enter_evidence(local);
  const std::size_t per_instance = p.propagate().messages_passed;
  EXPECT_GT(per_instance, 0u);
  EXPECT_EQ(e.propagation_summary().messages_passed, 5 * per_instance);
}

TEST(AdProperties, MatchesOracle) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const BeliefNetwork net = t::random_network(seed, {.min_nodes = 2});
    const auto rs = t::roots(net);
    const NodeIndex c = rs[seed % rs.size()];
    const Evidence ev = t::random_evidence(net, seed + 500, 4, {c});
    CutsetEnsemble e(t::shared(net), make_cutset(net, {c}));
    const auto prior = e.cutset_posterior();
    const LikelihoodRecord r = e.absorb_evidence(ev);
    double pe = 0.0;
    for (std::size_t i = 0; i < prior.size(); ++i) pe += prior[i] * r.likelihoods[i];
    EXPECT_NEAR(pe, oracle::evidence_likelihood(net, ev), 1e-9);
    const auto all = oracle::enumerate_all_posteriors(net, ev);
    expect_close(e.cutset_posterior(), all[c], 1e-9);
    for (NodeIndex v = 0; v < net.size(); ++v) {
      if (v != c) expect_close(e.feature_posterior(v), all[v], 1e-9);
    }
  }
}

TEST(AdProperties, WeightsStayNormalized) {
  const BeliefNetwork net = t::random_network(3, {.min_nodes = 6});
  CutsetEnsemble e(t::shared(net), make_cutset(net, {0}));
  const Evidence ev = t::random_evidence(net, 4, 5, {0});
  for (auto [node, value] : ev) {
    Evidence one;
    one.observe(node, value);
    e.absorb_evidence(one);
    const auto w = e.cutset_posterior();
    EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-9);
  }
}

TEST(AdProperties, MultiNodeCutsetMembers) {
  const BeliefNetwork net = two_roots_and_child();
  CutsetEnsemble e(t::shared(net), select_cutset(net, {"A", "B"}));
  Evidence ev;
  ev.observe(2, 1);
  e.absorb_evidence(ev);
  const auto all = oracle::enumerate_all_posteriors(net, ev);
  expect_close(e.member_posterior(0), all[0], 1e-12);
  expect_close(e.member_posterior(1), all[1], 1e-12);
}

TEST(AdProperties, UnderflowSurvivesLongEvidence) {
  // 400 binary features with likelihood ratios far from 1
  std::vector<NodeSpec> specs{{"D", "", {"d1", "d2"}, {}, {0.5, 0.5}}};
  for (int i = 0; i < 400; ++i) {
    specs.push_back({"F" + std::to_string(i), "", {"t", "f"}, {"D"}, {0.02, 0.98, 0.01, 0.99}});
  }
  const BeliefNetwork net = BeliefNetwork::from_specs(specs);
  CutsetEnsemble e(t::shared(net), select_cutset(net, {"D"}));
  Evidence ev;
  for (NodeIndex i = 1; i <= 400; ++i) ev.observe(i, 0);
  e.absorb_evidence(ev);
  // log odds = 400 * log 2
  const auto w = e.cutset_posterior();
  EXPECT_NEAR(w[0], 1.0, 1e-12);
  EXPECT_GT(w[1], 0.0);
  EXPECT_NEAR(std::log(w[1]), -400 * std::log(2.0), 1e-6);
}

TEST(AdProperties, ParallelIdenticalToSerial) {
  const SyntheticNetwork synth = generate(SyntheticSpec::desk_default());
  auto net = t::shared(synth.network);
  const auto cases = sample_cases(*net, synth.features, 3, 11);
  for (const CaseSample& c : cases) {
    CutsetEnsemble serial(net, make_cutset(*net, {synth.disease}));
    CutsetEnsemble parallel(net, make_cutset(*net, {synth.disease}), {.parallel = true, .threads = 4});
    serial.absorb_evidence(c.evidence);
    parallel.absorb_evidence(c.evidence);
    EXPECT_EQ(serial.cutset_posterior(), parallel.cutset_posterior());
    EXPECT_EQ(serial.propagation_summary().messages_passed,
              parallel.propagation_summary().messages_passed);
  }
}

TEST(AdProperties, SelectiveEqualsForcedPropagation) {
  const SyntheticNetwork synth = generate(SyntheticSpec::desk_default());
  auto net = t::shared(synth.network);
  const auto cases = sample_cases(*net, synth.features, 4, 5);
  for (const CaseSample& c : cases) {
    CutsetEnsemble selective(net, make_cutset(*net, {synth.disease}));
    CutsetEnsemble forced(net, make_cutset(*net, {synth.disease}), {.force_all = true});
    selective.absorb_evidence(c.evidence);
    forced.absorb_evidence(c.evidence);
    EXPECT_EQ(forced.propagation_summary().touched_components.size(),
              forced.forest().components().size());
    EXPECT_LE(selective.propagation_summary().messages_passed,
              forced.propagation_summary().messages_passed);
    expect_close(selective.cutset_posterior(), forced.cutset_posterior(), 1e-12);
  }
}

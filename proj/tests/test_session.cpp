#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <thread>

#include "adinfer/errors.hpp"
#include "adinfer/session.hpp"
#include "adinfer/synthetic.hpp"
#include "support/random_network.hpp"

using namespace adinfer;
namespace t = adinfer::testing;

namespace {

std::vector<double> by_index(const Differential& d, bool lower = false) {
  std::vector<double> out(d.ranked.size());
  for (const DiagnosisEntry& e : d.ranked) out[e.index] = lower ? e.lower : e.p;
  return out;
}

void expect_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "entry " << i;
}

struct Fixture {
  SessionManager manager;
  SyntheticNetwork synth;
  std::string df_id;
  std::string one_id;
  std::string synth_id;

  Fixture() {
    df_id = manager.register_network(t::disease_feature(), "df");
    one_id = manager.register_network(t::single_node(), "one");
    SyntheticSpec s;
    s.disease_cardinality = 5;
    s.portions = {{3, PortionSpec::Pattern::kChain, 1}, {1, PortionSpec::Pattern::kIsolated, 3}};
    s.seed = 12;
    synth = generate(s);
    synth_id = manager.register_network(synth.network, "synth");
  }
};

}  // namespace

TEST(SessionMode, Parse) {
  EXPECT_EQ(SessionMode::parse("ad").engine, SessionMode::Engine::kAd);
  EXPECT_EQ(SessionMode::parse("ctp").engine, SessionMode::Engine::kCtp);
  const SessionMode b = SessionMode::parse("bounded", {{"top_k", 3}});
  EXPECT_EQ(b.policy.mode, RetentionPolicy::Mode::kTopK);
  EXPECT_THROW(SessionMode::parse("magic"), InvalidArgumentError);
  EXPECT_THROW(SessionMode::parse("bounded", {{"threshold", 2.0}}), InvalidArgumentError);
}

TEST(CreateSession, Examples) {
  Fixture fx;
  auto one = fx.manager.create_session(fx.one_id, SessionMode::parse("ad"));
  expect_close(by_index(one->snapshot()->differential), {0.6, 0.4}, 1e-15);

  auto ad = fx.manager.create_session(fx.synth_id, SessionMode::parse("ad"));
  auto bounded =
      fx.manager.create_session(fx.synth_id, SessionMode::parse("bounded", {{"threshold", 0.0}}));
  expect_close(by_index(bounded->snapshot()->differential, true),
               by_index(ad->snapshot()->differential), 1e-12);

  EXPECT_THROW(fx.manager.create_session("nope", SessionMode::parse("ad")), NotFoundError);
}

TEST(AddObservation, Examples) {
  Fixture fx;
  auto s = fx.manager.create_session(fx.df_id, SessionMode::parse("ad"));
  const Differential d = s->add_observation("F", "t");
  ASSERT_EQ(d.ranked.size(), 2u);
  EXPECT_EQ(d.ranked[0].diagnosis, "d1");
  EXPECT_NEAR(d.ranked[0].p, 0.8, 1e-12);
  EXPECT_NEAR(d.ranked[1].p, 0.2, 1e-12);

  EXPECT_THROW(s->add_observation("F", "t"), ConflictError);
  EXPECT_THROW(s->add_observation("D", "d1"), ConflictError);
  EXPECT_THROW(s->add_observation("X", "t"), NotFoundError);

  auto syn = fx.manager.create_session(fx.synth_id, SessionMode::parse("ad"));
  const NodeIndex lonely = fx.synth.portions[1][0];
  const Differential one =
      syn->add_observation(fx.synth.network.node(lonely).id, fx.synth.network.node(lonely).values[0]);
  EXPECT_EQ(one.touched_portions.size(), 1u);
  EXPECT_EQ(one.touched_portions[0], syn->portion_of(lonely));
}

TEST(AddObservation, ImpossibleKeepsState) {
  SessionManager m;
  const std::string id = m.register_network(BeliefNetwork::from_specs({
      {"D", "", {"d1", "d2"}, {}, {0.6, 0.4}},
      {"F", "", {"t", "f"}, {"D"}, {0.8, 0.2, 0.3, 0.7}},
      {"G", "", {"t", "f"}, {"D"}, {0.0, 1.0, 0.0, 1.0}},
  }));
  for (const char* mode : {"ad", "ctp", "bounded"}) {
    auto s = m.create_session(id, SessionMode::parse(mode));
    s->add_observation("F", "t");
    const auto before = s->snapshot();
    EXPECT_THROW(s->add_observation("G", "t"), ImpossibleEvidenceError) << mode;
    EXPECT_EQ(s->snapshot(), before);
    EXPECT_EQ(s->snapshot()->history.size(), 1u);
  }
}

TEST(AddObservation, ModesAgree) {
  Fixture fx;
  const auto cases = sample_cases(fx.synth.network, fx.synth.features, 4, 21);
  for (const CaseSample& c : cases) {
    auto ad = fx.manager.create_session(fx.synth_id, SessionMode::parse("ad"));
    auto ctp = fx.manager.create_session(fx.synth_id, SessionMode::parse("ctp"));
    auto bd = fx.manager.create_session(fx.synth_id,
                                        SessionMode::parse("bounded", {{"threshold", 0.0}}));
    Differential a, b, c2;
    for (auto [node, value] : c.evidence) {
      const auto& def = fx.synth.network.node(node);
      a = ad->add_observation(def.id, def.values[value]);
      b = ctp->add_observation(def.id, def.values[value]);
      c2 = bd->add_observation(def.id, def.values[value]);
    }
    expect_close(by_index(a), by_index(b), 1e-10);
    expect_close(by_index(a), by_index(c2, true), 1e-10);
    const auto p = by_index(a);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-9);
    EXPECT_TRUE(std::is_sorted(a.ranked.begin(), a.ranked.end(),
                               [](const auto& x, const auto& y) { return x.p > y.p; }));
  }
}

TEST(AddObservation, MatchesBatchAd) {
  Fixture fx;
  auto net = t::shared(fx.synth.network);
  for (const CaseSample& c : sample_cases(*net, fx.synth.features, 3, 44)) {
    auto s = fx.manager.create_session(fx.synth_id, SessionMode::parse("ad"));
    Differential d;
    for (auto [node, value] : c.evidence)
      d = s->add_observation(net->node(node).id, net->node(node).values[value]);
    CutsetEnsemble batch(net, make_cutset(*net, {fx.synth.disease}));
    batch.absorb_evidence(c.evidence);
    expect_close(by_index(d), batch.cutset_posterior(), 1e-10);
  }
}

TEST(RetractObservation, Examples) {
  Fixture fx;
  auto s = fx.manager.create_session(fx.df_id, SessionMode::parse("ad"));
  s->add_observation("F", "t");
  expect_close(by_index(s->retract_observation("F")), {0.6, 0.4}, 1e-12);
  EXPECT_THROW(s->retract_observation("F"), NotFoundError);
  EXPECT_THROW(s->retract_observation("nothing"), NotFoundError);
}

TEST(RetractObservation, EqualsFreshSession) {
  Fixture fx;
  const auto& net = fx.synth.network;
  for (const CaseSample& c : sample_cases(net, fx.synth.features, 6, 9)) {
    std::vector<std::pair<NodeIndex, ValueIndex>> obs(c.evidence.begin(), c.evidence.end());
    obs.resize(std::min<std::size_t>(obs.size(), 4));
    for (const char* mode : {"ad", "ctp", "bounded"}) {
      auto s = fx.manager.create_session(fx.synth_id, SessionMode::parse(mode, {{"top_k", 2}}));
      for (auto [n, v] : obs) s->add_observation(net.node(n).id, net.node(n).values[v]);
      const Differential after = s->retract_observation(net.node(obs[0].first).id);
      auto fresh = fx.manager.create_session(fx.synth_id, SessionMode::parse(mode, {{"top_k", 2}}));
      Differential expected = fresh->snapshot()->differential;
      for (std::size_t i = 1; i < obs.size(); ++i)
        expected = fresh->add_observation(net.node(obs[i].first).id,
                                          net.node(obs[i].first).values[obs[i].second]);
      expect_close(by_index(after), by_index(expected), 1e-10);
      expect_close(by_index(after, true), by_index(expected, true), 1e-10);
    }
  }
}

TEST(SessionProperties, TouchedPortionsCoverObservedFeatures) {
  Fixture fx;
  const auto& net = fx.synth.network;
  auto s = fx.manager.create_session(fx.synth_id, SessionMode::parse("ad"));
  std::set<std::size_t> reported, expected;
  for (const CaseSample& c : sample_cases(net, fx.synth.features, 1, 3)) {
    for (auto [n, v] : c.evidence) {
      const Differential d = s->add_observation(net.node(n).id, net.node(n).values[v]);
      reported.insert(d.touched_portions.begin(), d.touched_portions.end());
      expected.insert(s->portion_of(n));
    }
  }
  EXPECT_EQ(reported, expected);
}

TEST(SessionProperties, ConcurrentReadersSeeWholeSnapshots) {
  Fixture fx;
  auto s = fx.manager.create_session(fx.synth_id, SessionMode::parse("ad"));
  const auto cases = sample_cases(fx.synth.network, fx.synth.features, 1, 30);
  std::atomic<bool> done{false};
  std::atomic<int> bad{0};
  std::jthread reader([&] {
    while (!done) {
      const auto snap = s->snapshot();
      double total = 0.0;
      for (const auto& e : snap->differential.ranked) total += e.p;
      if (std::abs(total - 1.0) > 1e-9) ++bad;
    }
  });
  for (auto [n, v] : cases[0].evidence)
    s->add_observation(fx.synth.network.node(n).id, fx.synth.network.node(n).values[v]);
  done = true;
  reader.join();
  EXPECT_EQ(bad.load(), 0);
}

TEST(SessionManager, RegistryAndPersistence) {
  Fixture fx;
  EXPECT_THROW(fx.manager.register_network(t::single_node(), "df"), ConflictError);
  const std::string auto_id = fx.manager.register_network(t::single_node());
  EXPECT_EQ(auto_id.rfind("net", 0), 0u);
  EXPECT_EQ(fx.manager.networks().size(), 4u);
  EXPECT_THROW(fx.manager.session("missing"), NotFoundError);

  auto s = fx.manager.create_session(fx.df_id, SessionMode::parse("ad"));
  s->add_observation("F", "t");
  const auto path = std::filesystem::temp_directory_path() / "adinfer_session_test.json";
  fx.manager.save_session(s->snapshot()->id, path.string());
  auto restored = fx.manager.restore_session(path.string());
  std::filesystem::remove(path);
  EXPECT_NE(restored->snapshot()->id, s->snapshot()->id);
  expect_close(by_index(restored->snapshot()->differential), {0.8, 0.2}, 1e-12);
  EXPECT_EQ(restored->snapshot()->history.size(), 1u);
}

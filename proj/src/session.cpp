#include "adinfer/session.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "adinfer/errors.hpp"
#include "adinfer/network_io.hpp"

namespace adinfer {

using nlohmann::json;

SessionMode SessionMode::parse(const std::string& name, const json& options) {
  SessionMode mode;
  if (name == "ad") {
    mode.engine = Engine::kAd;
  } else if (name == "ctp") {
    mode.engine = Engine::kCtp;
  } else if (name == "bounded") {
    mode.engine = Engine::kBounded;
    if (options.is_object() && options.contains("top_k")) {
      if (!options["top_k"].is_number_integer()) {
        throw InvalidArgumentError("top_k must be an integer");
      }
      mode.policy = RetentionPolicy::top_k(options["top_k"].get<std::size_t>());
    } else if (options.is_object() && options.contains("threshold")) {
      if (!options["threshold"].is_number()) {
        throw InvalidArgumentError("threshold must be a number");
      }
      mode.policy = RetentionPolicy::threshold(options["threshold"].get<double>());
    }
    mode.policy.validate();
  } else {
    throw InvalidArgumentError("unknown mode '" + name +
                               "' (expected ad, ctp or bounded)");
  }
  return mode;
}

std::string SessionMode::name() const {
  switch (engine) {
    case Engine::kAd: return "ad";
    case Engine::kCtp: return "ctp";
    case Engine::kBounded: return "bounded";
  }
  return "ad";
}

json SessionMode::to_json() const {
  json j{{"mode", name()}};
  if (engine == Engine::kBounded) {
    if (policy.mode == RetentionPolicy::Mode::kTopK) {
      j["top_k"] = static_cast<std::size_t>(policy.value);
    } else {
      j["threshold"] = policy.value;
    }
  }
  return j;
}

NodeIndex diagnosis_node(const BeliefNetwork& net) {
  if (net.size() == 0) throw InvalidArgumentError("network has no nodes");
  if (net.size() == 1) return 0;
  return select_cutset_auto(net).members.front();
}

Session::Session(std::string id, std::string network_id,
                 std::shared_ptr<const BeliefNetwork> net, SessionMode mode)
    : id_(std::move(id)),
      network_id_(std::move(network_id)),
      net_(std::move(net)),
      mode_(mode),
      diagnosis_(diagnosis_node(*net_)) {
  const LoopCutset cutset = make_cutset(*net_, {diagnosis_});
  const auto first = cutset_assignment(*net_, cutset, 0);
  portions_ = std::make_shared<const CliqueForest>(
      CliqueForest::from_model(decompose(*net_, cutset, first).model()));
  engine_ = std::make_unique<Engine>(fresh_engine());
  publish(read(*engine_));
}

Session::Engine Session::fresh_engine() const {
  switch (mode_.engine) {
    case SessionMode::Engine::kCtp:
      return Engine(std::in_place_type<CtpEngine>, net_);
    case SessionMode::Engine::kBounded:
      return Engine(std::in_place_type<BoundedConditioner>,
                    CutsetEnsemble(net_, make_cutset(*net_, {diagnosis_})));
    case SessionMode::Engine::kAd:
      break;
  }
  return Engine(std::in_place_type<CutsetEnsemble>, net_,
                make_cutset(*net_, {diagnosis_}));
}

std::size_t Session::portion_of(NodeIndex feature) const {
  const std::ptrdiff_t var = portions_->variable_of(feature);
  if (var < 0) {
    throw NotFoundError("node '" + net_->node(feature).id +
                        "' is not a feature");
  }
  return portions_->homes()[static_cast<std::size_t>(var)].component;
}

std::vector<std::size_t> Session::absorb(Engine& engine,
                                         const Observation& obs) const {
  Evidence ev;
  ev.observe(obs.node, obs.value);
  return std::visit(
      [&](auto& e) -> std::vector<std::size_t> {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, CtpEngine>) {
          return e.absorb(ev).touched_components;
        } else if constexpr (std::is_same_v<T, CutsetEnsemble>) {
          e.absorb_evidence(ev);
          return e.propagation_summary().touched_components;
        } else {
          e.bounded_absorb(ev, mode_.policy);
          return e.propagation_summary().touched_components;
        }
      },
      engine);
}

Differential Session::read(const Engine& engine) const {
  Differential d;
  const auto& labels = net_->node(diagnosis_).values;
  d.ranked.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    d.ranked[i].index = i;
    d.ranked[i].diagnosis = labels[i];
  }
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, BoundedConditioner>) {
          const IntervalPosterior bounds = e.current();
          d.interval = true;
          d.rank_uncertain = bounds.rank_uncertain;
          for (std::size_t i = 0; i < labels.size(); ++i) {
            d.ranked[i].lower = bounds.bounds[i].lower;
            d.ranked[i].upper = bounds.bounds[i].upper;
            d.ranked[i].retained = bounds.bounds[i].retained;
            d.ranked[i].p = 0.5 * (bounds.bounds[i].lower + bounds.bounds[i].upper);
          }
        } else {
          std::vector<double> p;
          if constexpr (std::is_same_v<T, CtpEngine>) {
            p = e.posterior(diagnosis_);
          } else {
            p = e.cutset_posterior();
          }
          for (std::size_t i = 0; i < labels.size(); ++i) {
            d.ranked[i].p = d.ranked[i].lower = d.ranked[i].upper = p[i];
          }
        }
      },
      engine);
  std::stable_sort(d.ranked.begin(), d.ranked.end(),
                   [&](const DiagnosisEntry& a, const DiagnosisEntry& b) {
                     return d.interval ? a.lower > b.lower : a.p > b.p;
                   });
  return d;
}

void Session::publish(Differential differential) {
  auto snap = std::make_shared<SessionSnapshot>();
  snap->id = id_;
  snap->network_id = network_id_;
  snap->mode = mode_;
  snap->history = history_;
  snap->differential = std::move(differential);
  std::lock_guard lock(snapshot_mutex_);
  snapshot_ = std::move(snap);
}

std::shared_ptr<const SessionSnapshot> Session::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return snapshot_;
}

Differential Session::add_observation(const std::string& feature,
                                      const std::string& value) {
  std::lock_guard lock(write_mutex_);
  const NodeIndex node = net_->index_of(feature);
  const ValueIndex v = net_->value_index(node, value);
  if (node == diagnosis_) {
    throw ConflictError("'" + feature + "' is the diagnosis node");
  }
  for (const Observation& o : history_) {
    if (o.node == node) {
      throw ConflictError("feature '" + feature + "' is already observed");
    }
  }
  const Observation obs{node, v};
  std::vector<std::size_t> touched = absorb(*engine_, obs);
  history_.push_back(obs);
  Differential d = read(*engine_);
  d.touched_portions = std::move(touched);
  publish(d);
  return d;
}

Differential Session::retract_observation(const std::string& feature) {
  std::lock_guard lock(write_mutex_);
  const NodeIndex node = net_->index_of(feature);
  auto it = std::find_if(history_.begin(), history_.end(),
                         [&](const Observation& o) { return o.node == node; });
  if (it == history_.end()) {
    throw NotFoundError("feature '" + feature + "' is not observed");
  }
  std::vector<Observation> remaining = history_;
  remaining.erase(remaining.begin() + (it - history_.begin()));

  auto rebuilt = std::make_unique<Engine>(fresh_engine());
  for (const Observation& o : remaining) absorb(*rebuilt, o);
  engine_ = std::move(rebuilt);
  history_ = std::move(remaining);
  Differential d = read(*engine_);
  publish(d);
  return d;
}

json differential_to_json(const Differential& d) {
  json entries = json::array();
  for (const DiagnosisEntry& e : d.ranked) {
    json row{{"diagnosis", e.diagnosis}, {"index", e.index}};
    if (d.interval) {
      row["lower"] = e.lower;
      row["upper"] = e.upper;
      row["retained"] = e.retained;
    } else {
      row["p"] = e.p;
    }
    entries.push_back(std::move(row));
  }
  json out{{"differential", entries}, {"touched_portions", d.touched_portions}};
  if (d.interval) out["rank_uncertain"] = d.rank_uncertain;
  return out;
}

json snapshot_to_json(const SessionSnapshot& s, const BeliefNetwork& net) {
  json history = json::array();
  for (const Observation& o : s.history) {
    history.push_back({{"feature", net.node(o.node).id},
                       {"value", net.node(o.node).values[o.value]}});
  }
  json out = differential_to_json(s.differential);
  out["id"] = s.id;
  out["network_id"] = s.network_id;
  out["mode"] = s.mode.to_json();
  out["history"] = history;
  return out;
}

std::string SessionManager::register_network(BeliefNetwork net, std::string id) {
  std::lock_guard lock(mutex_);
  if (id.empty()) {
    do {
      id = "net" + std::to_string(next_network_++);
    } while (networks_.count(id));
  }
  if (networks_.count(id)) {
    throw ConflictError("network id '" + id + "' is already registered");
  }
  networks_[id] = std::make_shared<const BeliefNetwork>(std::move(net));
  return id;
}

std::vector<std::string> SessionManager::load_directory(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw NotFoundError("'" + dir + "' is not a directory");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<std::string> ids;
  for (const fs::path& f : files) {
    ids.push_back(register_network(load_network_file(f.string()),
                                   f.stem().string()));
  }
  return ids;
}

std::vector<NetworkInfo> SessionManager::networks() const {
  std::lock_guard lock(mutex_);
  std::vector<NetworkInfo> out;
  for (const auto& [id, net] : networks_) out.push_back({id, net});
  return out;
}

std::shared_ptr<const BeliefNetwork> SessionManager::network(
    const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = networks_.find(id);
  if (it == networks_.end()) throw NotFoundError("unknown network '" + id + "'");
  return it->second;
}

std::shared_ptr<Session> SessionManager::create_session(
    const std::string& network_id, const SessionMode& mode) {
  auto net = network(network_id);
  std::string id;
  {
    std::lock_guard lock(mutex_);
    id = "s" + std::to_string(next_session_++);
  }
  auto session = std::make_shared<Session>(id, network_id, net, mode);
  std::lock_guard lock(mutex_);
  sessions_[id] = session;
  return session;
}

std::shared_ptr<Session> SessionManager::session(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFoundError("unknown session '" + id + "'");
  return it->second;
}

void SessionManager::save_session(const std::string& id,
                                  const std::string& path) const {
  auto s = session(id);
  auto snap = s->snapshot();
  json doc = snapshot_to_json(*snap, s->network());
  std::ofstream out(path);
  if (!out) throw NotFoundError("cannot write '" + path + "'");
  out << doc.dump(2) << "\n";
}

std::shared_ptr<Session> SessionManager::restore_session(const std::string& path) {
  const json doc = parse_json(read_file(path));
  try {
    const json& mode_doc = doc.at("mode");
    const SessionMode mode =
        SessionMode::parse(mode_doc.at("mode").get<std::string>(), mode_doc);
    auto s = create_session(doc.at("network_id").get<std::string>(), mode);
    for (const json& o : doc.at("history")) {
      s->add_observation(o.at("feature").get<std::string>(),
                         o.at("value").get<std::string>());
    }
    return s;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad session snapshot: ") + e.what());
  }
}

}  // namespace adinfer

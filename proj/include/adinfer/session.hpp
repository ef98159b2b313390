#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "adinfer/bounded.hpp"
#include "adinfer/conditioning.hpp"
#include "adinfer/ctp_engine.hpp"

namespace adinfer {

struct SessionMode {
  enum class Engine { kAd, kCtp, kBounded };
  Engine engine = Engine::kAd;
  RetentionPolicy policy;  // bounded only

  // Accepts "ad" | "ctp" | "bounded"; bounded reads optional "threshold" or
  // "top_k" from `options`. Throws InvalidArgumentError.
  static SessionMode parse(const std::string& name,
                           const nlohmann::json& options = {});
  std::string name() const;
  nlohmann::json to_json() const;
};

struct DiagnosisEntry {
  std::size_t index = 0;
  std::string diagnosis;
  double p = 0.0;      // point modes
  double lower = 0.0;  // bounded mode (equal to p otherwise)
  double upper = 0.0;
  bool retained = true;
};

struct Differential {
  // Descending by p (bounded: by lower bound); ties by declaration order.
  std::vector<DiagnosisEntry> ranked;
  bool interval = false;
  bool rank_uncertain = false;
  std::vector<std::size_t> touched_portions;
};

struct Observation {
  NodeIndex node = 0;
  ValueIndex value = 0;
};

// Immutable view of a session after its latest change.
struct SessionSnapshot {
  std::string id;
  std::string network_id;
  SessionMode mode;
  std::vector<Observation> history;
  Differential differential;
};

// The diagnosis node a session reports on: the automatic single-node cutset,
// or the only node of a one-node network.
NodeIndex diagnosis_node(const BeliefNetwork& net);

// One incremental diagnosis: observations in, ranked differential out.
// Writers are serialized; snapshot() is safe from any thread.
class Session {
 public:
  Session(std::string id, std::string network_id,
          std::shared_ptr<const BeliefNetwork> net, SessionMode mode);

  // Throws NotFoundError (feature/value), ConflictError (already observed or
  // the diagnosis node itself), ImpossibleEvidenceError (state unchanged).
  Differential add_observation(const std::string& feature,
                               const std::string& value);
  // Replays the remaining history on a fresh engine. Throws NotFoundError
  // when the feature was not observed.
  Differential retract_observation(const std::string& feature);

  std::shared_ptr<const SessionSnapshot> snapshot() const;

  const BeliefNetwork& network() const { return *net_; }
  NodeIndex diagnosis() const { return diagnosis_; }
  // Portion (conditioned component) of a feature.
  std::size_t portion_of(NodeIndex feature) const;

 private:
  using Engine = std::variant<CutsetEnsemble, CtpEngine, BoundedConditioner>;

  Engine fresh_engine() const;
  // Absorbs one observation; returns the touched portions.
  std::vector<std::size_t> absorb(Engine& engine, const Observation& obs) const;
  Differential read(const Engine& engine) const;
  void publish(Differential differential);

  std::string id_;
  std::string network_id_;
  std::shared_ptr<const BeliefNetwork> net_;
  SessionMode mode_;
  NodeIndex diagnosis_;
  std::shared_ptr<const CliqueForest> portions_;

  std::mutex write_mutex_;
  std::unique_ptr<Engine> engine_;
  std::vector<Observation> history_;

  mutable std::mutex snapshot_mutex_;
  std::shared_ptr<const SessionSnapshot> snapshot_;
};

nlohmann::json differential_to_json(const Differential& d);
nlohmann::json snapshot_to_json(const SessionSnapshot& s,
                                const BeliefNetwork& net);

struct NetworkInfo {
  std::string id;
  std::shared_ptr<const BeliefNetwork> network;
};

// Registry of networks and live sessions.
class SessionManager {
 public:
  // Returns the id used; generates "net<N>" when `id` is empty. Throws
  // ConflictError when the id is taken.
  std::string register_network(BeliefNetwork net, std::string id = {});
  // Registers every *.json file in `dir`, id = file stem.
  std::vector<std::string> load_directory(const std::string& dir);
  std::vector<NetworkInfo> networks() const;
  std::shared_ptr<const BeliefNetwork> network(const std::string& id) const;

  std::shared_ptr<Session> create_session(const std::string& network_id,
                                          const SessionMode& mode);
  std::shared_ptr<Session> session(const std::string& id) const;

  // Persists network id, mode and observation history as JSON; restoring
  // replays the history into a new session.
  void save_session(const std::string& id, const std::string& path) const;
  std::shared_ptr<Session> restore_session(const std::string& path);

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const BeliefNetwork>> networks_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::size_t next_network_ = 1;
  std::size_t next_session_ = 1;
};

}  // namespace adinfer

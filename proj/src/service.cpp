#include "adinfer/service.hpp"

#include <httplib.h>

#include "adinfer/errors.hpp"
#include "adinfer/network_io.hpp"

namespace adinfer {

using nlohmann::json;

namespace {

ServiceResponse error(int status, const char* code, const std::string& message) {
  return {status, json{{"code", code}, {"message", message}}};
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string current;
  for (char ch : path) {
    if (ch == '/') {
      if (!current.empty()) parts.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  if (!current.empty()) parts.push_back(std::move(current));
  return parts;
}

std::string required_string(const json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key) || !doc[key].is_string()) {
    throw ParseError(std::string("request needs a string field '") + key + "'");
  }
  return doc[key].get<std::string>();
}

}  // namespace

ServiceResponse DiagnosisService::dispatch(const std::string& method,
                                           const std::string& path,
                                           const std::string& body) const {
  try {
    const auto parts = split_path(path);
    if (parts.size() == 1 && parts[0] == "networks") {
      if (method == "GET") return list_networks();
      if (method == "POST") return upload_network(body);
    } else if (parts.size() == 1 && parts[0] == "sessions" && method == "POST") {
      return create_session(body);
    } else if (parts.size() == 2 && parts[0] == "sessions" && method == "GET") {
      return get_session(parts[1]);
    } else if (parts.size() == 3 && parts[0] == "sessions" &&
               parts[2] == "observations" && method == "POST") {
      return observe(parts[1], body);
    } else if (parts.size() == 4 && parts[0] == "sessions" &&
               parts[2] == "observations" && method == "DELETE") {
      return retract(parts[1], parts[3]);
    }
    return error(404, "not_found", "no route for " + method + " " + path);
  } catch (const NotFoundError& e) {
    return error(404, "not_found", e.what());
  } catch (const ConflictError& e) {
    return error(409, "conflict", e.what());
  } catch (const ImpossibleEvidenceError& e) {
    return error(422, "impossible_evidence", e.what());
  } catch (const ParseError& e) {
    return error(400, "bad_request", e.what());
  } catch (const ValidationError& e) {
    return error(400, "bad_request", e.what());
  } catch (const InvalidArgumentError& e) {
    return error(400, "bad_request", e.what());
  } catch (const std::exception& e) {
    return error(500, "internal", e.what());
  }
}

ServiceResponse DiagnosisService::list_networks() const {
  json out = json::array();
  for (const NetworkInfo& info : sessions_.networks()) {
    const BeliefNetwork& net = *info.network;
    const NodeIndex diagnosis = diagnosis_node(net);
    json features = json::array();
    for (NodeIndex v = 0; v < net.size(); ++v) {
      if (v == diagnosis) continue;
      features.push_back({{"id", net.node(v).id},
                          {"label", net.node(v).label},
                          {"values", net.node(v).values}});
    }
    out.push_back({{"id", info.id},
                   {"nodes", net.size()},
                   {"diagnosis_node", net.node(diagnosis).id},
                   {"diagnoses", net.node(diagnosis).values},
                   {"features", features}});
  }
  return {200, out};
}

ServiceResponse DiagnosisService::upload_network(const std::string& body) const {
  BeliefNetwork net = load_network(body);
  const std::string id = sessions_.register_network(std::move(net));
  return {201, json{{"id", id}}};
}

ServiceResponse DiagnosisService::create_session(const std::string& body) const {
  const json doc = parse_json(body);
  const std::string network_id = required_string(doc, "network_id");
  const std::string mode_name =
      doc.contains("mode") && doc["mode"].is_string() ? doc["mode"].get<std::string>()
                                                      : "ad";
  const SessionMode mode = SessionMode::parse(mode_name, doc);
  auto session = sessions_.create_session(network_id, mode);
  return {201, snapshot_to_json(*session->snapshot(), session->network())};
}

ServiceResponse DiagnosisService::get_session(const std::string& id) const {
  auto session = sessions_.session(id);
  return {200, snapshot_to_json(*session->snapshot(), session->network())};
}

ServiceResponse DiagnosisService::observe(const std::string& id,
                                          const std::string& body) const {
  auto session = sessions_.session(id);
  const json doc = parse_json(body);
  const Differential d = session->add_observation(required_string(doc, "feature"),
                                                  required_string(doc, "value"));
  return {200, differential_to_json(d)};
}

ServiceResponse DiagnosisService::retract(const std::string& id,
                                          const std::string& feature) const {
  auto session = sessions_.session(id);
  const Differential d = session->retract_observation(feature);
  return {200, differential_to_json(d)};
}

void DiagnosisService::mount(httplib::Server& server) const {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    const ServiceResponse r = dispatch(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.Get(R"(/.*)", handler);
  server.Post(R"(/.*)", handler);
  server.Delete(R"(/.*)", handler);
}

}  // namespace adinfer

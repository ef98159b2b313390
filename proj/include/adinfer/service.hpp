#pragma once

#include <string>

#include <json.hpp>

#include "adinfer/session.hpp"

namespace httplib {
class Server;
}

namespace adinfer {

struct ServiceResponse {
  int status = 200;
  nlohmann::json body;
};

// HTTP + JSON front end over a SessionManager.
//
//   GET    /networks
//   POST   /networks                          body: network document
//   POST   /sessions                          {network_id, mode[, threshold|top_k]}
//   GET    /sessions/{id}
//   POST   /sessions/{id}/observations        {feature, value}
//   DELETE /sessions/{id}/observations/{feature}
//
// Errors are {code, message}: 400 bad_request, 404 not_found, 409 conflict,
// 422 impossible_evidence.
class DiagnosisService {
 public:
  explicit DiagnosisService(SessionManager& sessions) : sessions_(sessions) {}

  // Transport-independent routing; never throws.
  ServiceResponse dispatch(const std::string& method, const std::string& path,
                           const std::string& body) const;

  // Routes every request on `server` through dispatch().
  void mount(httplib::Server& server) const;

 private:
  ServiceResponse list_networks() const;
  ServiceResponse upload_network(const std::string& body) const;
  ServiceResponse create_session(const std::string& body) const;
  ServiceResponse get_session(const std::string& id) const;
  ServiceResponse observe(const std::string& id, const std::string& body) const;
  ServiceResponse retract(const std::string& id, const std::string& feature) const;

  SessionManager& sessions_;
};

}  // namespace adinfer

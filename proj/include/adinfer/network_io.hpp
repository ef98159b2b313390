#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "adinfer/network.hpp"

namespace adinfer {

// Parses a JSON network document:
//   {"nodes": [{"id", "label", "values": [...], "parents": [...],
//               "cpt": [...]}, ...]}
// Throws ParseError (with line/column) or ValidationError.
BeliefNetwork load_network(std::string_view document);
BeliefNetwork load_network_file(const std::string& path);

nlohmann::json network_to_json(const BeliefNetwork& net);
// Deterministic, pretty-printed document; load_network(dump) reproduces net.
std::string dump_network(const BeliefNetwork& net);

// Evidence document: {"<node id>": "<value label>", ...}.
Evidence load_evidence(const BeliefNetwork& net, std::string_view document);
Evidence evidence_from_json(const BeliefNetwork& net, const nlohmann::json& j);
nlohmann::json evidence_to_json(const BeliefNetwork& net, const Evidence& ev);

// Parses `document` as JSON, translating parse failures into ParseError with
// line and column.
nlohmann::json parse_json(std::string_view document);

std::string read_file(const std::string& path);

}  // namespace adinfer

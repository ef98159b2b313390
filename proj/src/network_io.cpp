#include "adinfer/network_io.hpp"

#include <fstream>
#include <sstream>

#include "adinfer/errors.hpp"

namespace adinfer {

using nlohmann::json;

namespace {

std::pair<std::size_t, std::size_t> locate(std::string_view text,
                                           std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(where + ": missing field '" + key + "'");
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace

json parse_json(std::string_view document) {
  try {
    return json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    // nlohmann reports the 1-based byte index of the offending character.
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    auto [line, column] = locate(document, byte);
    throw ParseError("malformed JSON", line, column);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

BeliefNetwork load_network(std::string_view document) {
  const json doc = parse_json(document);
  if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array()) {
    throw ParseError("network document must be an object with a 'nodes' array");
  }
  std::vector<NodeSpec> specs;
  std::size_t k = 0;
  for (const json& n : doc["nodes"]) {
    const std::string where = "nodes[" + std::to_string(k++) + "]";
    if (!n.is_object()) throw ParseError(where + ": expected an object");
    NodeSpec s;
    s.id = field<std::string>(n, "id", where);
    s.label = n.value("label", s.id);
    s.values = field<std::vector<std::string>>(n, "values", where);
    if (n.contains("parents")) {
      s.parents = field<std::vector<std::string>>(n, "parents", where);
    }
    s.cpt = field<std::vector<double>>(n, "cpt", where);
    specs.push_back(std::move(s));
  }
  return BeliefNetwork::from_specs(specs);
}

BeliefNetwork load_network_file(const std::string& path) {
  return load_network(read_file(path));
}

json network_to_json(const BeliefNetwork& net) {
  json nodes = json::array();
  for (std::size_t i = 0; i < net.size(); ++i) {
    const NodeDef& d = net.node(i);
    json parents = json::array();
    for (NodeIndex p : net.parents(i)) parents.push_back(net.node(p).id);
    nodes.push_back({{"id", d.id},
                     {"label", d.label},
                     {"values", d.values},
                     {"parents", parents},
                     {"cpt", net.table(i).rows}});
  }
  return json{{"nodes", nodes}};
}

std::string dump_network(const BeliefNetwork& net) {
  return network_to_json(net).dump(2) + "\n";
}

Evidence evidence_from_json(const BeliefNetwork& net, const json& j) {
  if (!j.is_object()) {
    throw ParseError("evidence document must be an object of id -> value");
  }
  Evidence ev;
  for (const auto& [id, value] : j.items()) {
    if (!value.is_string()) {
      throw ParseError("evidence for '" + id + "' must be a value label");
    }
    const NodeIndex node = net.index_of(id);
    ev.observe(node, net.value_index(node, value.get<std::string>()));
  }
  return ev;
}

Evidence load_evidence(const BeliefNetwork& net, std::string_view document) {
  return evidence_from_json(net, parse_json(document));
}

json evidence_to_json(const BeliefNetwork& net, const Evidence& ev) {
  json out = json::object();
  for (auto [node, value] : ev) {
    out[net.node(node).id] = net.node(node).values[value];
  }
  return out;
}

}  // namespace adinfer

#include "znekit/io.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "znekit/errors.hpp"

namespace znekit {

namespace {

using nlohmann::json;

json parse_text(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
}

void reject_unknown_keys(const json& object, std::initializer_list<std::string_view> known,
                         std::string_view where) {
  for (const auto& [key, value] : object.items()) {
    bool ok = false;
    for (std::string_view k : known) ok = ok || key == k;
    if (!ok) {
      throw ParseError("unknown key '" + key + "' in " + std::string(where));
    }
  }
}

const json& require_key(const json& object, std::string_view key, std::string_view where) {
  auto it = object.find(key);
  if (it == object.end()) {
    throw ParseError("missing key '" + std::string(key) + "' in " + std::string(where));
  }
  return *it;
}

}  // namespace

std::string circuit_to_json(const Circuit& circuit) {
  validate_circuit(circuit);
  json gates = json::array();
  for (const Gate& gate : circuit.gates) {
    json record = {{"name", std::string(gate_name(gate.kind))}, {"qubits", gate.qubits}};
    if (!gate.params.empty()) record["params"] = gate.params;
    gates.push_back(std::move(record));
  }
  const json doc = {{"num_qubits", circuit.num_qubits},
                    {"terminal_measurement", circuit.terminal_measurement},
                    {"gates", std::move(gates)}};
  return doc.dump(2) + "\n";
}

Circuit circuit_from_json(std::string_view text) {
  const json doc = parse_text(text);
  if (!doc.is_object()) throw ParseError("circuit document must be a JSON object");
  reject_unknown_keys(doc, {"num_qubits", "terminal_measurement", "gates"}, "circuit");

  Circuit circuit;
  const json& nq = require_key(doc, "num_qubits", "circuit");
  if (!nq.is_number_integer() || nq.get<long>() < 1) {
    throw ParseError("'num_qubits' must be a positive integer");
  }
  circuit.num_qubits = nq.get<int>();
  if (auto it = doc.find("terminal_measurement"); it != doc.end()) {
    if (!it->is_boolean()) throw ParseError("'terminal_measurement' must be a boolean");
    circuit.terminal_measurement = it->get<bool>();
  }
  const json& gates = require_key(doc, "gates", "circuit");
  if (!gates.is_array()) throw ParseError("'gates' must be an array");
  for (const json& record : gates) {
    if (!record.is_object()) throw ParseError("each gate must be a JSON object");
    reject_unknown_keys(record, {"name", "qubits", "params"}, "gate record");
    const json& name = require_key(record, "name", "gate record");
    if (!name.is_string()) throw ParseError("gate 'name' must be a string");
    const auto kind = gate_kind_from_name(name.get<std::string>());
    if (!kind) {
      throw ParseError("unknown gate name \"" + name.get<std::string>() + "\"");
    }
    Gate gate;
    gate.kind = *kind;
    const json& qubits = require_key(record, "qubits", "gate record");
    if (!qubits.is_array()) throw ParseError("gate 'qubits' must be an array");
    for (const json& q : qubits) {
      if (!q.is_number_integer()) throw ParseError("qubit indices must be integers");
      gate.qubits.push_back(q.get<int>());
    }
    if (auto it = record.find("params"); it != record.end()) {
      if (!it->is_array()) throw ParseError("gate 'params' must be an array");
      for (const json& p : *it) {
        if (!p.is_number()) throw ParseError("gate params must be numbers");
        gate.params.push_back(p.get<double>());
      }
    }
    validate_gate(gate, circuit.num_qubits);
    circuit.gates.push_back(std::move(gate));
  }
  return circuit;
}

std::string observable_to_json(const Observable& obs) {
  validate_observable(obs);
  json terms = json::array();
  for (const PauliTerm& term : obs.terms) {
    terms.push_back({{"coeff", term.coeff}, {"paulis", term.paulis}});
  }
  const json doc = {{"terms", std::move(terms)}};
  return doc.dump(2) + "\n";
}

Observable observable_from_json(std::string_view text) {
  const json doc = parse_text(text);
  if (!doc.is_object()) throw ParseError("observable document must be a JSON object");
  reject_unknown_keys(doc, {"terms"}, "observable");
  const json& terms = require_key(doc, "terms", "observable");
  if (!terms.is_array()) throw ParseError("'terms' must be an array");
  Observable obs;
  for (const json& record : terms) {
    if (!record.is_object()) throw ParseError("each term must be a JSON object");
    reject_unknown_keys(record, {"coeff", "paulis"}, "observable term");
    const json& coeff = require_key(record, "coeff", "observable term");
    const json& paulis = require_key(record, "paulis", "observable term");
    if (!coeff.is_number()) throw ParseError("term 'coeff' must be a number");
    if (!paulis.is_string()) throw ParseError("term 'paulis' must be a string");
    obs.terms.push_back({coeff.get<double>(), paulis.get<std::string>()});
  }
  validate_observable(obs);
  return obs;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open file: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

Circuit load_circuit(const std::filesystem::path& path) {
  try {
    return circuit_from_json(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

Observable load_observable(const std::filesystem::path& path) {
  try {
    return observable_from_json(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace znekit

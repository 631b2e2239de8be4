#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "znekit/circuit.hpp"
#include "znekit/sim.hpp"

namespace znekit {

/// Circuit wire format:
/// {"num_qubits": <int>, "terminal_measurement": <bool>,
///  "gates": [{"name": "<ID>", "qubits": [..], "params": [..]}, ...]}
/// "params" may be omitted when empty; unknown keys are rejected. On input,
/// a missing "terminal_measurement" defaults to false.
std::string circuit_to_json(const Circuit& circuit);
Circuit circuit_from_json(std::string_view text);

/// Observable wire format:
/// {"terms": [{"coeff": <float>, "paulis": "<string over IXYZ>"}, ...]}
std::string observable_to_json(const Observable& obs);
Observable observable_from_json(std::string_view text);

Circuit load_circuit(const std::filesystem::path& path);
Observable load_observable(const std::filesystem::path& path);

}  // namespace znekit

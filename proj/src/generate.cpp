#include "znekit/generate.hpp"

#include <algorithm>
#include <numbers>

#include "znekit/errors.hpp"
#include "znekit/rng.hpp"

namespace znekit {

namespace {

Gate random_gate(Rng& rng, int num_qubits) {
  GateKind kind;
  do {
    kind = static_cast<GateKind>(rng.bounded(kNumGateKinds));
  } while (gate_num_qubits(kind) > num_qubits);

  Gate gate;
  gate.kind = kind;
  if (gate_num_qubits(kind) == 1) {
    gate.qubits = {static_cast<int>(rng.bounded(static_cast<std::size_t>(num_qubits)))};
  } else {
    const int a = static_cast<int>(rng.bounded(static_cast<std::size_t>(num_qubits)));
    int b = static_cast<int>(rng.bounded(static_cast<std::size_t>(num_qubits - 1)));
    if (b >= a) ++b;
    gate.qubits = {a, b};
  }
  if (gate_num_params(kind) == 1) {
    gate.params = {rng.uniform(-std::numbers::pi, std::numbers::pi)};
  }
  return gate;
}

}  // namespace

Circuit random_circuit(int num_qubits, int num_gates, std::uint64_t seed) {
  if (num_qubits < 1) throw ValidationError("random_circuit needs at least one qubit");
  if (num_gates < 0) throw ValidationError("random_circuit needs a non-negative gate count");
  Rng rng(seed);
  Circuit circuit;
  circuit.num_qubits = num_qubits;
  circuit.gates.reserve(static_cast<std::size_t>(num_gates));
  for (int i = 0; i < num_gates; ++i) circuit.gates.push_back(random_gate(rng, num_qubits));
  return circuit;
}

Circuit mirror_circuit(int num_qubits, int depth, std::uint64_t seed) {
  if (depth < 2 || depth % 2 != 0) {
    throw ValidationError("mirror circuits need an even depth >= 2, got " + std::to_string(depth));
  }
  Circuit circuit = random_circuit(num_qubits, depth / 2, seed);
  for (std::size_t i = circuit.gates.size(); i-- > 0;) {
    circuit.gates.push_back(inverse(circuit.gates[i]));
  }
  return circuit;
}

}  // namespace znekit

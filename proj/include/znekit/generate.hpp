#pragma once

#include <cstdint>

#include "znekit/circuit.hpp"

namespace znekit {

/// Seeded random circuit over the full gate set: uniform gate kinds, uniform
/// operand qubits (ordered distinct pairs for two-qubit gates), rotation
/// angles uniform in [-pi, pi]. Single-qubit kinds only when num_qubits == 1.
Circuit random_circuit(int num_qubits, int num_gates, std::uint64_t seed);

/// Mirror circuit: a random prefix of depth/2 gates followed by the exact
/// inverses in reverse order, so the whole circuit composes to the identity
/// and the ideal all-zeros survival probability is 1. Depth must be even.
Circuit mirror_circuit(int num_qubits, int depth, std::uint64_t seed);

}  // namespace znekit

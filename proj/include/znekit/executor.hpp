#pragma once

#include <functional>

#include "znekit/circuit.hpp"

namespace znekit {

/// The executor plug-in contract: any callable mapping a circuit to the real
/// expectation value of some observable evaluated on the backend of its
/// choice. Mitigation treats executors as black boxes; they must be total
/// over valid circuits of the agreed qubit count and deterministic given
/// their own seeding policy. The built-in reference executor comes from
/// make_executor() in sim.hpp; anything with this signature (a hardware
/// client, a different simulator) plugs in the same way.
using Executor = std::function<double(const Circuit&)>;

}  // namespace znekit

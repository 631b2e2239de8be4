#pragma once

#include <cstdint>
#include <vector>

#include "znekit/circuit.hpp"

namespace znekit {

/// Gate-selection order for local folding. AtRandom carries its own seed;
/// equal seeds give identical folded circuits.
struct FoldStrategy {
  enum class Kind { FromLeft, FromRight, AtRandom };

  Kind kind = Kind::AtRandom;
  std::uint64_t seed = 0;

  static FoldStrategy from_left() { return {Kind::FromLeft, 0}; }
  static FoldStrategy from_right() { return {Kind::FromRight, 0}; }
  static FoldStrategy at_random(std::uint64_t seed) { return {Kind::AtRandom, seed}; }
};

/// Per-gate fold multiplicities for one local-folding application; counts[i]
/// is how many times gate i of the input circuit gets mapped G -> G (G'G)^k
/// (G' the inverse). Serves as the fold ledger in tests.
struct FoldPlan {
  std::vector<int> counts;

  int total_folds() const;
};

/// Selects which gates to fold, without building the folded circuit.
///
/// Uniform case (no fidelities): m = floor((scale-1)/2) whole passes fold
/// every gate once each; a partial pass then folds s = round(d*(scale-1-2m)/2)
/// gates (ties half-up) in strategy order. With fidelities, each gate carries
/// weight 1 - fidelity, zero-weight gates are excluded, and the partial pass
/// greedily targets folded weight (scale-1)/2 * total weight.
FoldPlan plan_local_folds(const Circuit& circuit, double scale_factor,
                          const FoldStrategy& strategy,
                          const GateFidelities* fidelities = nullptr);

/// Expands a fold plan into a new circuit; the input is left untouched.
Circuit apply_fold_plan(const Circuit& circuit, const FoldPlan& plan);

/// Local unitary folding: G -> G G' G on selected gates. The folded circuit
/// has the same unitary as the input; its gate count follows the plan
/// arithmetic above. Scale factor 1 folds nothing.
///
/// Throws EmptyCircuit on a gate-free circuit and InvalidScaleFactor for
/// scale factors below 1.
Circuit fold_local(const Circuit& circuit, double scale_factor,
                   const FoldStrategy& strategy,
                   const GateFidelities* fidelities = nullptr);

/// Global folding: C -> C (C'C)^m followed by a partial fold of the last
/// s gates as a block (inverse of the suffix, then the suffix again).
Circuit fold_global(const Circuit& circuit, double scale_factor);

}  // namespace znekit

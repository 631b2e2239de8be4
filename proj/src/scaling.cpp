#include "znekit/scaling.hpp"

#include <cmath>
#include <numeric>

#include "znekit/errors.hpp"
#include "znekit/rng.hpp"

namespace znekit {

namespace {

void check_fold_inputs(const Circuit& circuit, double scale_factor) {
  validate_circuit(circuit);
  if (circuit.gates.empty()) {
    throw EmptyCircuit("cannot fold an empty circuit");
  }
  if (!(scale_factor >= 1.0) || !std::isfinite(scale_factor)) {
    throw InvalidScaleFactor("scale factor must be >= 1, got " + std::to_string(scale_factor));
  }
}

/// Candidate gate indices in strategy order (partial-pass order).
std::vector<std::size_t> strategy_order(const std::vector<std::size_t>& foldable,
                                        const FoldStrategy& strategy, int pass_index) {
  switch (strategy.kind) {
    case FoldStrategy::Kind::FromLeft:
      return foldable;
    case FoldStrategy::Kind::FromRight:
      return {foldable.rbegin(), foldable.rend()};
    case FoldStrategy::Kind::AtRandom: {
      Rng rng(mix_seed(strategy.seed, {static_cast<std::uint64_t>(pass_index)}));
      std::vector<std::size_t> order(foldable.size());
      const std::vector<std::size_t> perm = rng.permutation(foldable.size());
      for (std::size_t i = 0; i < foldable.size(); ++i) order[i] = foldable[perm[i]];
      return order;
    }
  }
  throw ValidationError("unknown fold strategy");
}

}  // namespace

int FoldPlan::total_folds() const { return std::accumulate(counts.begin(), counts.end(), 0); }

FoldPlan plan_local_folds(const Circuit& circuit, double scale_factor,
                          const FoldStrategy& strategy, const GateFidelities* fidelities) {
  check_fold_inputs(circuit, scale_factor);
  const std::size_t d = circuit.gates.size();

  std::vector<double> weight(d, 1.0);
  if (fidelities != nullptr) {
    for (std::size_t i = 0; i < d; ++i) weight[i] = 1.0 - fidelities->fidelity_for(circuit.gates[i]);
  }
  std::vector<std::size_t> foldable;
  double total_weight = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    if (weight[i] > 0.0) {
      foldable.push_back(i);
      total_weight += weight[i];
    }
  }

  FoldPlan plan;
  plan.counts.assign(d, 0);
  if (foldable.empty()) return plan;

  // Whole passes fold every foldable gate once each.
  const int m = static_cast<int>(std::floor((scale_factor - 1.0) / 2.0));
  for (std::size_t i : foldable) plan.counts[i] = m;

  // Partial pass: greedy in strategy order toward the remaining weight
  // target; a gate is taken only while that keeps the deviation shrinking
  // (ties fold, which reduces to round-half-up for uniform weights).
  const double target = total_weight * (scale_factor - 1.0 - 2.0 * m) / 2.0;
  double achieved = 0.0;
  for (std::size_t i : strategy_order(foldable, strategy, m)) {
    const double remaining = target - achieved;
    if (remaining < weight[i] / 2.0) break;
    plan.counts[i] += 1;
    achieved += weight[i];
  }
  return plan;
}

Circuit apply_fold_plan(const Circuit& circuit, const FoldPlan& plan) {
  if (plan.counts.size() != circuit.gates.size()) {
    throw ValidationError("fold plan does not match the circuit gate count");
  }
  Circuit folded;
  folded.num_qubits = circuit.num_qubits;
  folded.terminal_measurement = circuit.terminal_measurement;
  folded.gates.reserve(circuit.gates.size() + 2 * static_cast<std::size_t>(plan.total_folds()));
  for (std::size_t i = 0; i < circuit.gates.size(); ++i) {
    const Gate& gate = circuit.gates[i];
    folded.gates.push_back(gate);
    const Gate inv = inverse(gate);
    for (int k = 0; k < plan.counts[i]; ++k) {
      folded.gates.push_back(inv);
      folded.gates.push_back(gate);
    }
  }
  return folded;
}

Circuit fold_local(const Circuit& circuit, double scale_factor, const FoldStrategy& strategy,
                   const GateFidelities* fidelities) {
  return apply_fold_plan(circuit, plan_local_folds(circuit, scale_factor, strategy, fidelities));
}

Circuit fold_global(const Circuit& circuit, double scale_factor) {
  check_fold_inputs(circuit, scale_factor);
  const std::size_t d = circuit.gates.size();
  const int m = static_cast<int>(std::floor((scale_factor - 1.0) / 2.0));
  const auto s =
      static_cast<std::size_t>(std::floor(d * (scale_factor - 1.0 - 2.0 * m) / 2.0 + 0.5));

  Circuit folded;
  folded.num_qubits = circuit.num_qubits;
  folded.terminal_measurement = circuit.terminal_measurement;
  folded.gates.reserve(d + 2 * (m * d + s));
  folded.gates = circuit.gates;
  for (int k = 0; k < m; ++k) {
    for (auto it = circuit.gates.rbegin(); it != circuit.gates.rend(); ++it) {
      folded.gates.push_back(inverse(*it));
    }
    folded.gates.insert(folded.gates.end(), circuit.gates.begin(), circuit.gates.end());
  }
  // Partial fold of the last s gates as a block.
  for (std::size_t k = 0; k < s; ++k) {
    folded.gates.push_back(inverse(circuit.gates[d - 1 - k]));
  }
  folded.gates.insert(folded.gates.end(), circuit.gates.end() - static_cast<std::ptrdiff_t>(s),
                      circuit.gates.end());
  return folded;
}

}  // namespace znekit

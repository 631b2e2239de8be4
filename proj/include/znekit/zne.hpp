#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "znekit/circuit.hpp"
#include "znekit/executor.hpp"
#include "znekit/inference.hpp"
#include "znekit/scaling.hpp"

namespace znekit {

/// Noise-scaling method used by the mitigation loop.
enum class ScaleNoiseMethod { FoldLeft, FoldRight, FoldRandom, FoldGlobal };

/// Parses the CLI tokens "left", "right", "random", "global".
ScaleNoiseMethod parse_scale_noise(std::string_view text);
std::string_view scale_noise_name(ScaleNoiseMethod method);

struct ZneConfig {
  FactorySpec factory;  // default: Richardson at scale factors 1, 2, 3
  ScaleNoiseMethod scale_noise = ScaleNoiseMethod::FoldRandom;
  int num_to_average = 1;
  std::uint64_t seed = 0;
  /// Evaluate the repetitions of one scale factor concurrently. Only valid
  /// for reentrant executors; results are bit-identical to sequential mode.
  bool parallel_repetitions = false;
};

/// Full record of one mitigation run.
struct ZneResult {
  std::vector<double> scale_factors;
  std::vector<std::vector<double>> raw_values;       // [scale][repetition]
  std::vector<std::vector<int>> folded_gate_counts;  // [scale][repetition]
  std::vector<double> means;
  double zne_value = 0.0;
  FitDiagnostics diagnostics;
};

/// Seed for the random-folding pass at one (scale index, repetition) cell;
/// exposed so pipelines can be replayed exactly.
std::uint64_t fold_seed(std::uint64_t config_seed, int scale_index, int repetition);

/// One noise-scaled circuit. Scale factor exactly 1 returns the input
/// unchanged, without a pass through the folding functions.
Circuit scale_circuit(const Circuit& circuit, double scale_factor, ScaleNoiseMethod method,
                      std::uint64_t fold_seed);

/// The mitigation pipeline: schedules scale factors through the configured
/// factory, executes num_to_average noise-scaled copies per scale, pushes the
/// per-scale mean, and extrapolates to the zero-noise limit. The input
/// circuit is never mutated; executor failures abort the run wrapped in an
/// ExecutorError naming the offending scale factor.
ZneResult execute_with_zne(const Circuit& circuit, const Executor& executor,
                           const ZneConfig& config = {});

/// Wraps an executor so that calling it runs the full pipeline and returns
/// the zero-noise estimate; equal seeds give values bit-identical to
/// execute_with_zne.
Executor mitigate_executor(const Executor& executor, const ZneConfig& config = {});

}  // namespace znekit

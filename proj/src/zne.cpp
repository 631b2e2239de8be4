#include "znekit/zne.hpp"

#include <future>
#include <numeric>

#include "znekit/errors.hpp"
#include "znekit/rng.hpp"

namespace znekit {

ScaleNoiseMethod parse_scale_noise(std::string_view text) {
  if (text == "left") return ScaleNoiseMethod::FoldLeft;
  if (text == "right") return ScaleNoiseMethod::FoldRight;
  if (text == "random") return ScaleNoiseMethod::FoldRandom;
  if (text == "global") return ScaleNoiseMethod::FoldGlobal;
  throw ParseError("unknown folding method '" + std::string(text) +
                   "' (expected left, right, random, or global)");
}

std::string_view scale_noise_name(ScaleNoiseMethod method) {
  switch (method) {
    case ScaleNoiseMethod::FoldLeft:
      return "left";
    case ScaleNoiseMethod::FoldRight:
      return "right";
    case ScaleNoiseMethod::FoldRandom:
      return "random";
    case ScaleNoiseMethod::FoldGlobal:
      return "global";
  }
  return "random";
}

std::uint64_t fold_seed(std::uint64_t config_seed, int scale_index, int repetition) {
  return mix_seed(config_seed,
                  {static_cast<std::uint64_t>(scale_index), static_cast<std::uint64_t>(repetition)});
}

Circuit scale_circuit(const Circuit& circuit, double scale_factor, ScaleNoiseMethod method,
                      std::uint64_t seed) {
  if (scale_factor == 1.0) return circuit;
  switch (method) {
    case ScaleNoiseMethod::FoldLeft:
      return fold_local(circuit, scale_factor, FoldStrategy::from_left());
    case ScaleNoiseMethod::FoldRight:
      return fold_local(circuit, scale_factor, FoldStrategy::from_right());
    case ScaleNoiseMethod::FoldRandom:
      return fold_local(circuit, scale_factor, FoldStrategy::at_random(seed));
    case ScaleNoiseMethod::FoldGlobal:
      return fold_global(circuit, scale_factor);
  }
  throw ValidationError("unknown noise-scaling method");
}

ZneResult execute_with_zne(const Circuit& circuit, const Executor& executor,
                           const ZneConfig& config) {
  validate_circuit(circuit);
  if (!executor) throw ValidationError("executor must be callable");
  if (config.num_to_average < 1) throw ValidationError("num_to_average must be >= 1");

  ZneResult result;
  const std::unique_ptr<Factory> factory = make_factory(config.factory);
  int scale_index = 0;
  while (!factory->is_done()) {
    const double scale = factory->next_scale();
    std::vector<double> raw(static_cast<std::size_t>(config.num_to_average), 0.0);
    std::vector<int> counts(static_cast<std::size_t>(config.num_to_average), 0);

    auto run_repetition = [&](int rep) {
      const Circuit folded =
          scale_circuit(circuit, scale, config.scale_noise, fold_seed(config.seed, scale_index, rep));
      counts[static_cast<std::size_t>(rep)] = static_cast<int>(folded.gates.size());
      try {
        raw[static_cast<std::size_t>(rep)] = executor(folded);
      } catch (const std::exception& e) {
        throw ExecutorError("executor failed at scale factor " + std::to_string(scale) + ": " +
                            e.what());
      }
    };

    if (config.parallel_repetitions && config.num_to_average > 1) {
      std::vector<std::future<void>> futures;
      futures.reserve(static_cast<std::size_t>(config.num_to_average));
      for (int rep = 0; rep < config.num_to_average; ++rep) {
        futures.push_back(std::async(std::launch::async, run_repetition, rep));
      }
      for (auto& f : futures) f.get();
    } else {
      for (int rep = 0; rep < config.num_to_average; ++rep) run_repetition(rep);
    }

    // Summed in repetition order so parallel mode stays bit-identical.
    const double mean = std::accumulate(raw.begin(), raw.end(), 0.0) /
                        static_cast<double>(config.num_to_average);
    factory->push(scale, mean);
    result.scale_factors.push_back(scale);
    result.raw_values.push_back(std::move(raw));
    result.folded_gate_counts.push_back(std::move(counts));
    result.means.push_back(mean);
    ++scale_index;
  }

  const ReduceResult reduced = factory->reduce();
  result.zne_value = reduced.zne_value;
  result.diagnostics = reduced.diagnostics;
  return result;
}

Executor mitigate_executor(const Executor& executor, const ZneConfig& config) {
  if (!executor) throw ValidationError("executor must be callable");
  return [executor, config](const Circuit& circuit) {
    return execute_with_zne(circuit, executor, config).zne_value;
  };
}

}  // namespace znekit

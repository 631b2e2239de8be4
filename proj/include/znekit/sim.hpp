#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "znekit/circuit.hpp"
#include "znekit/executor.hpp"

namespace znekit {

/// Per-gate noise channel applied after every gate, on exactly the gate's
/// target qubits. Single-qubit depolarizing uses the Pauli-twirl convention
/// D_p(rho) = (1-p) rho + p/3 (X rho X + Y rho Y + Z rho Z); two-qubit gates
/// get the uniform p/15 two-qubit form. Amplitude damping acts per target
/// qubit with the standard two-Kraus form.
struct NoiseModel {
  enum class Kind { None, Depolarizing, AmplitudeDamping };

  Kind kind = Kind::None;
  double strength = 0.0;  // in [0, 1]

  static NoiseModel none() { return {Kind::None, 0.0}; }
  static NoiseModel depolarizing(double p);
  static NoiseModel amplitude_damping(double p);

  /// Parses the CLI syntax: "none", "depolarizing:<p>", "amplitude-damping:<p>".
  static NoiseModel parse(std::string_view text);

  std::string to_string() const;
};

/// 2^n x 2^n density operator. Valid states have unit trace, are Hermitian
/// and positive semidefinite (up to the stated tolerances).
struct DensityMatrix {
  int num_qubits = 0;
  Eigen::MatrixXcd rho;

  double trace_deviation() const;        // |tr(rho) - 1|
  double hermiticity_deviation() const;  // max |rho - rho^dag|
  double min_eigenvalue() const;
};

/// Real-weighted sum of Pauli strings over a fixed qubit count.
struct PauliTerm {
  double coeff = 0.0;
  std::string paulis;  // one of I, X, Y, Z per qubit

  bool operator==(const PauliTerm&) const = default;
};

struct Observable {
  std::vector<PauliTerm> terms;

  bool operator==(const Observable&) const = default;

  /// Qubit count implied by the Pauli strings. Throws ValidationError if
  /// terms disagree or the observable is malformed.
  int num_qubits() const;
};

void validate_observable(const Observable& obs);

/// Expansion of the all-zeros projector |0...0><0...0| into 2^n Pauli terms
/// with coefficient 2^-n each. Its expectation is the survival probability.
Observable all_zeros_projector(int num_qubits);

/// Exact expectation vs seeded per-Pauli sampling.
struct ExecutionMode {
  bool exact = true;
  int shots = 0;
  std::uint64_t seed = 0;

  static ExecutionMode exact_mode() { return {true, 0, 0}; }
  static ExecutionMode sampled(int shots, std::uint64_t seed);
};

/// Noisy density-matrix simulation: starting from |0...0>, applies each gate
/// as rho -> U rho U^dag followed by the noise channel on the gate's qubits.
/// A terminal-measurement flag does not alter the state. At most 10 qubits.
DensityMatrix simulate(const Circuit& circuit, const NoiseModel& noise);

/// Tr[rho E] for a Pauli-sum observable; the imaginary part (zero for valid
/// inputs) is discarded.
double expectation(const DensityMatrix& rho, const Observable& obs);

/// Per-term two-outcome sampling with mean Tr[rho P_k]; returns the
/// coefficient-weighted empirical mean. Deterministic for a fixed seed.
double sample_expectation(const DensityMatrix& rho, const Observable& obs, int shots,
                          std::uint64_t seed);

/// Builds the reference executor: simulate + expectation (or sampled
/// expectation). In sampled mode each call derives its generator from the
/// seed plus an invocation counter, which keeps repeated calls distinct but
/// deterministic; that counter is not synchronized, so concurrent callers
/// must use distinct executors (or distinct seeds).
Executor make_executor(const NoiseModel& noise, const Observable& obs, const ExecutionMode& mode);

}  // namespace znekit

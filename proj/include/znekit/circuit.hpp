#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace znekit {

/// Fixed gate set. Every member has a closed-form inverse inside the set:
/// self-inverse, DG partner, or angle negation.
enum class GateKind {
  H,
  X,
  Y,
  Z,
  S,
  SDG,
  T,
  TDG,
  RX,
  RY,
  RZ,
  CNOT,
  CZ,
  SWAP,
};

constexpr int kNumGateKinds = 14;

/// Number of qubit operands (1 or 2).
int gate_num_qubits(GateKind kind);

/// Number of angle parameters (1 for RX/RY/RZ, otherwise 0).
int gate_num_params(GateKind kind);

/// Uppercase identifier, e.g. "CNOT".
std::string_view gate_name(GateKind kind);

/// Inverse lookup of gate_name. Returns nullopt for unknown names.
std::optional<GateKind> gate_kind_from_name(std::string_view name);

/// A named unitary on one or two qubits, with an optional angle.
struct Gate {
  GateKind kind = GateKind::H;
  std::vector<int> qubits;
  std::vector<double> params;

  bool operator==(const Gate&) const = default;

  static Gate h(int q) { return {GateKind::H, {q}, {}}; }
  static Gate x(int q) { return {GateKind::X, {q}, {}}; }
  static Gate y(int q) { return {GateKind::Y, {q}, {}}; }
  static Gate z(int q) { return {GateKind::Z, {q}, {}}; }
  static Gate s(int q) { return {GateKind::S, {q}, {}}; }
  static Gate sdg(int q) { return {GateKind::SDG, {q}, {}}; }
  static Gate t(int q) { return {GateKind::T, {q}, {}}; }
  static Gate tdg(int q) { return {GateKind::TDG, {q}, {}}; }
  static Gate rx(int q, double angle) { return {GateKind::RX, {q}, {angle}}; }
  static Gate ry(int q, double angle) { return {GateKind::RY, {q}, {angle}}; }
  static Gate rz(int q, double angle) { return {GateKind::RZ, {q}, {angle}}; }
  static Gate cnot(int control, int target) { return {GateKind::CNOT, {control, target}, {}}; }
  static Gate cz(int a, int b) { return {GateKind::CZ, {a, b}, {}}; }
  static Gate swap(int a, int b) { return {GateKind::SWAP, {a, b}, {}}; }
};

/// Ordered gate sequence over a fixed qubit count. Measurement, when present,
/// is a terminal flag over all qubits; there is no mid-circuit measurement.
///
/// Basis-state convention: qubit 0 is the most significant bit of the
/// computational-basis index, i.e. |q0 q1> maps to index 2*q0 + q1. The
/// simulator and the CLI follow the same convention.
struct Circuit {
  int num_qubits = 1;
  std::vector<Gate> gates;
  bool terminal_measurement = false;

  bool operator==(const Circuit&) const = default;
};

/// Gate fidelities for folding by fidelity. Site entries (kind + exact qubit
/// tuple) take precedence over kind entries; gates with no entry default to
/// fidelity 1.0 and are therefore never folded.
class GateFidelities {
 public:
  /// Fidelity for every occurrence of a gate kind. Requires 0 < f <= 1.
  void set(GateKind kind, double fidelity);

  /// Fidelity for a gate kind on a specific qubit tuple. Requires 0 < f <= 1.
  void set(GateKind kind, std::vector<int> qubits, double fidelity);

  double fidelity_for(const Gate& gate) const;

  bool empty() const { return by_kind_.empty() && by_site_.empty(); }

 private:
  std::map<GateKind, double> by_kind_;
  std::map<std::pair<GateKind, std::vector<int>>, double> by_site_;
};

/// Throws ValidationError unless the gate is well-formed for a circuit of
/// `num_qubits` qubits (arity, parameter count, distinct in-range operands).
void validate_gate(const Gate& gate, int num_qubits);

/// Throws ValidationError unless every gate is well-formed.
void validate_circuit(const Circuit& circuit);

/// Exact inverse within the gate set. Total over valid gates.
Gate inverse(const Gate& gate);

/// The gate's unitary as a dense 2x2 or 4x4 matrix (basis: operand order as
/// listed, first operand most significant).
Eigen::MatrixXcd gate_matrix(const Gate& gate);

/// Applies the gate in place to a state vector of dimension 2^num_qubits.
void apply_gate_to_state(Eigen::Ref<Eigen::VectorXcd> state, const Gate& gate, int num_qubits);

/// Ordered product of gate unitaries embedded in the full Hilbert space.
/// Verification oracle; guarded to at most `kUnitaryQubitGuard` qubits.
///
/// Throws TooManyQubits above the guard and MeasurementPresent if the circuit
/// carries a terminal measurement.
Eigen::MatrixXcd circuit_unitary(const Circuit& circuit);

constexpr int kUnitaryQubitGuard = 10;

}  // namespace znekit

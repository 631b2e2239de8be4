#include "znekit/circuit.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "znekit/errors.hpp"

namespace znekit {

namespace {

using Complex = std::complex<double>;

struct GateInfo {
  GateKind kind;
  std::string_view name;
  int num_qubits;
  int num_params;
};

constexpr std::array<GateInfo, kNumGateKinds> kGateTable = {{
    {GateKind::H, "H", 1, 0},
    {GateKind::X, "X", 1, 0},
    {GateKind::Y, "Y", 1, 0},
    {GateKind::Z, "Z", 1, 0},
    {GateKind::S, "S", 1, 0},
    {GateKind::SDG, "SDG", 1, 0},
    {GateKind::T, "T", 1, 0},
    {GateKind::TDG, "TDG", 1, 0},
    {GateKind::RX, "RX", 1, 1},
    {GateKind::RY, "RY", 1, 1},
    {GateKind::RZ, "RZ", 1, 1},
    {GateKind::CNOT, "CNOT", 2, 0},
    {GateKind::CZ, "CZ", 2, 0},
    {GateKind::SWAP, "SWAP", 2, 0},
}};

const GateInfo& info(GateKind kind) { return kGateTable[static_cast<int>(kind)]; }

}  // namespace

int gate_num_qubits(GateKind kind) { return info(kind).num_qubits; }

int gate_num_params(GateKind kind) { return info(kind).num_params; }

std::string_view gate_name(GateKind kind) { return info(kind).name; }

std::optional<GateKind> gate_kind_from_name(std::string_view name) {
  for (const GateInfo& g : kGateTable) {
    if (g.name == name) return g.kind;
  }
  return std::nullopt;
}

void GateFidelities::set(GateKind kind, double fidelity) {
  if (!(fidelity > 0.0 && fidelity <= 1.0)) {
    throw ValidationError("gate fidelity must lie in (0, 1], got " + std::to_string(fidelity));
  }
  by_kind_[kind] = fidelity;
}

void GateFidelities::set(GateKind kind, std::vector<int> qubits, double fidelity) {
  if (!(fidelity > 0.0 && fidelity <= 1.0)) {
    throw ValidationError("gate fidelity must lie in (0, 1], got " + std::to_string(fidelity));
  }
  by_site_[{kind, std::move(qubits)}] = fidelity;
}

double GateFidelities::fidelity_for(const Gate& gate) const {
  if (auto it = by_site_.find({gate.kind, gate.qubits}); it != by_site_.end()) {
    return it->second;
  }
  if (auto it = by_kind_.find(gate.kind); it != by_kind_.end()) {
    return it->second;
  }
  return 1.0;
}

void validate_gate(const Gate& gate, int num_qubits) {
  const GateInfo& g = info(gate.kind);
  if (static_cast<int>(gate.qubits.size()) != g.num_qubits) {
    throw ValidationError(std::string(g.name) + " expects " + std::to_string(g.num_qubits) +
                          " qubit operand(s), got " + std::to_string(gate.qubits.size()));
  }
  if (static_cast<int>(gate.params.size()) != g.num_params) {
    throw ValidationError(std::string(g.name) + " expects " + std::to_string(g.num_params) +
                          " parameter(s), got " + std::to_string(gate.params.size()));
  }
  for (int q : gate.qubits) {
    if (q < 0 || q >= num_qubits) {
      throw ValidationError("qubit index " + std::to_string(q) + " out of range for a " +
                            std::to_string(num_qubits) + "-qubit circuit");
    }
  }
  if (gate.qubits.size() == 2 && gate.qubits[0] == gate.qubits[1]) {
    throw ValidationError(std::string(g.name) + " requires distinct qubit operands");
  }
  for (double p : gate.params) {
    if (!std::isfinite(p)) {
      throw ValidationError(std::string(g.name) + " has a non-finite angle");
    }
  }
}

void validate_circuit(const Circuit& circuit) {
  if (circuit.num_qubits < 1) {
    throw ValidationError("circuit must have at least one qubit");
  }
  for (const Gate& gate : circuit.gates) validate_gate(gate, circuit.num_qubits);
}

Gate inverse(const Gate& gate) {
  Gate inv = gate;
  switch (gate.kind) {
    case GateKind::H:
    case GateKind::X:
    case GateKind::Y:
    case GateKind::Z:
    case GateKind::CNOT:
    case GateKind::CZ:
    case GateKind::SWAP:
      return inv;  // self-inverse
    case GateKind::S:
      inv.kind = GateKind::SDG;
      return inv;
    case GateKind::SDG:
      inv.kind = GateKind::S;
      return inv;
    case GateKind::T:
      inv.kind = GateKind::TDG;
      return inv;
    case GateKind::TDG:
      inv.kind = GateKind::T;
      return inv;
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ:
      inv.params[0] = -gate.params[0];
      return inv;
  }
  throw ValidationError("unknown gate kind");
}

Eigen::MatrixXcd gate_matrix(const Gate& gate) {
  const Complex i(0.0, 1.0);
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  Eigen::MatrixXcd m;
  switch (gate.kind) {
    case GateKind::H:
      m.resize(2, 2);
      m << inv_sqrt2, inv_sqrt2, inv_sqrt2, -inv_sqrt2;
      return m;
    case GateKind::X:
      m.resize(2, 2);
      m << 0, 1, 1, 0;
      return m;
    case GateKind::Y:
      m.resize(2, 2);
      m << 0, -i, i, 0;
      return m;
    case GateKind::Z:
      m.resize(2, 2);
      m << 1, 0, 0, -1;
      return m;
    case GateKind::S:
      m.resize(2, 2);
      m << 1, 0, 0, i;
      return m;
    case GateKind::SDG:
      m.resize(2, 2);
      m << 1, 0, 0, -i;
      return m;
    case GateKind::T:
      m.resize(2, 2);
      m << 1, 0, 0, std::exp(i * (std::numbers::pi / 4.0));
      return m;
    case GateKind::TDG:
      m.resize(2, 2);
      m << 1, 0, 0, std::exp(-i * (std::numbers::pi / 4.0));
      return m;
    case GateKind::RX: {
      const double half = gate.params.at(0) / 2.0;
      m.resize(2, 2);
      m << std::cos(half), -i * std::sin(half), -i * std::sin(half), std::cos(half);
      return m;
    }
    case GateKind::RY: {
      const double half = gate.params.at(0) / 2.0;
      m.resize(2, 2);
      m << std::cos(half), -std::sin(half), std::sin(half), std::cos(half);
      return m;
    }
    case GateKind::RZ: {
      const double half = gate.params.at(0) / 2.0;
      m.resize(2, 2);
      m << std::exp(-i * half), 0, 0, std::exp(i * half);
      return m;
    }
    case GateKind::CNOT:
      // First operand is the control.
      m = Eigen::MatrixXcd::Zero(4, 4);
      m(0, 0) = 1;
      m(1, 1) = 1;
      m(2, 3) = 1;
      m(3, 2) = 1;
      return m;
    case GateKind::CZ:
      m = Eigen::MatrixXcd::Identity(4, 4);
      m(3, 3) = -1;
      return m;
    case GateKind::SWAP:
      m = Eigen::MatrixXcd::Zero(4, 4);
      m(0, 0) = 1;
      m(1, 2) = 1;
      m(2, 1) = 1;
      m(3, 3) = 1;
      return m;
  }
  throw ValidationError("unknown gate kind");
}

void apply_gate_to_state(Eigen::Ref<Eigen::VectorXcd> state, const Gate& gate, int num_qubits) {
  const Eigen::MatrixXcd u = gate_matrix(gate);
  const Eigen::Index dim = Eigen::Index{1} << num_qubits;
  if (gate.qubits.size() == 1) {
    // Qubit 0 is the most significant bit of the basis index.
    const Eigen::Index mask = Eigen::Index{1} << (num_qubits - 1 - gate.qubits[0]);
    for (Eigen::Index base = 0; base < dim; ++base) {
      if (base & mask) continue;
      const Complex a0 = state[base];
      const Complex a1 = state[base | mask];
      state[base] = u(0, 0) * a0 + u(0, 1) * a1;
      state[base | mask] = u(1, 0) * a0 + u(1, 1) * a1;
    }
  } else {
    const Eigen::Index mask_hi = Eigen::Index{1} << (num_qubits - 1 - gate.qubits[0]);
    const Eigen::Index mask_lo = Eigen::Index{1} << (num_qubits - 1 - gate.qubits[1]);
    for (Eigen::Index base = 0; base < dim; ++base) {
      if ((base & mask_hi) || (base & mask_lo)) continue;
      const std::array<Eigen::Index, 4> idx = {base, base | mask_lo, base | mask_hi,
                                               base | mask_hi | mask_lo};
      std::array<Complex, 4> amp;
      for (int k = 0; k < 4; ++k) amp[k] = state[idx[k]];
      for (int r = 0; r < 4; ++r) {
        Complex acc = 0.0;
        for (int c = 0; c < 4; ++c) acc += u(r, c) * amp[c];
        state[idx[r]] = acc;
      }
    }
  }
}

Eigen::MatrixXcd circuit_unitary(const Circuit& circuit) {
  validate_circuit(circuit);
  if (circuit.num_qubits > kUnitaryQubitGuard) {
    throw TooManyQubits("circuit_unitary supports at most " + std::to_string(kUnitaryQubitGuard) +
                        " qubits, got " + std::to_string(circuit.num_qubits));
  }
  if (circuit.terminal_measurement) {
    throw MeasurementPresent("circuit_unitary requires a measurement-free circuit");
  }
  const Eigen::Index dim = Eigen::Index{1} << circuit.num_qubits;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
  for (const Gate& gate : circuit.gates) {
    for (Eigen::Index col = 0; col < dim; ++col) {
      apply_gate_to_state(u.col(col), gate, circuit.num_qubits);
    }
  }
  return u;
}

}  // namespace znekit

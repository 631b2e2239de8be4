#include "znekit/sim.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <memory>

#include "znekit/errors.hpp"
#include "znekit/rng.hpp"

namespace znekit {

namespace {

using Complex = std::complex<double>;

double parse_probability(std::string_view text, std::string_view what) {
  try {
    std::size_t consumed = 0;
    const double p = std::stod(std::string(text), &consumed);
    if (consumed != text.size()) throw std::invalid_argument("trailing characters");
    return p;
  } catch (const std::exception&) {
    throw ParseError("invalid " + std::string(what) + " strength: '" + std::string(text) + "'");
  }
}

void check_strength(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ValidationError("noise strength must lie in [0, 1], got " + std::to_string(p));
  }
}

/// rho -> A rho on one qubit (A need not be unitary).
void apply_left_1q(Eigen::MatrixXcd& rho, const Eigen::Matrix2cd& a, int q, int n) {
  const Eigen::Index dim = rho.rows();
  const Eigen::Index mask = Eigen::Index{1} << (n - 1 - q);
  for (Eigen::Index col = 0; col < dim; ++col) {
    for (Eigen::Index base = 0; base < dim; ++base) {
      if (base & mask) continue;
      const Complex r0 = rho(base, col);
      const Complex r1 = rho(base | mask, col);
      rho(base, col) = a(0, 0) * r0 + a(0, 1) * r1;
      rho(base | mask, col) = a(1, 0) * r0 + a(1, 1) * r1;
    }
  }
}

/// rho -> rho B on one qubit.
void apply_right_1q(Eigen::MatrixXcd& rho, const Eigen::Matrix2cd& b, int q, int n) {
  const Eigen::Index dim = rho.rows();
  const Eigen::Index mask = Eigen::Index{1} << (n - 1 - q);
  for (Eigen::Index row = 0; row < dim; ++row) {
    for (Eigen::Index base = 0; base < dim; ++base) {
      if (base & mask) continue;
      const Complex r0 = rho(row, base);
      const Complex r1 = rho(row, base | mask);
      rho(row, base) = r0 * b(0, 0) + r1 * b(1, 0);
      rho(row, base | mask) = r0 * b(0, 1) + r1 * b(1, 1);
    }
  }
}

/// rho -> K rho K^dag for a single-qubit Kraus operator.
Eigen::MatrixXcd conjugate_1q(const Eigen::MatrixXcd& rho, const Eigen::Matrix2cd& k, int q,
                              int n) {
  Eigen::MatrixXcd out = rho;
  apply_left_1q(out, k, q, n);
  apply_right_1q(out, k.adjoint(), q, n);
  return out;
}

/// rho -> U rho U^dag for a gate unitary (1 or 2 qubits).
void conjugate_gate(Eigen::MatrixXcd& rho, const Gate& gate, int n) {
  const Eigen::Index dim = rho.rows();
  // Columns first (U rho), then rows (.. U^dag) via the state kernel applied
  // to the conjugated rows.
  for (Eigen::Index col = 0; col < dim; ++col) {
    apply_gate_to_state(rho.col(col), gate, n);
  }
  rho.adjointInPlace();
  for (Eigen::Index col = 0; col < dim; ++col) {
    apply_gate_to_state(rho.col(col), gate, n);
  }
  rho.adjointInPlace();
}

const Eigen::Matrix2cd& pauli_matrix(char which) {
  static const Eigen::Matrix2cd x = (Eigen::Matrix2cd() << 0, 1, 1, 0).finished();
  static const Eigen::Matrix2cd y =
      (Eigen::Matrix2cd() << 0, Complex(0, -1), Complex(0, 1), 0).finished();
  static const Eigen::Matrix2cd z = (Eigen::Matrix2cd() << 1, 0, 0, -1).finished();
  static const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  switch (which) {
    case 'X':
      return x;
    case 'Y':
      return y;
    case 'Z':
      return z;
    default:
      return id;
  }
}

void apply_depolarizing_1q(Eigen::MatrixXcd& rho, double p, int q, int n) {
  Eigen::MatrixXcd mixed = Eigen::MatrixXcd::Zero(rho.rows(), rho.cols());
  for (char pauli : {'X', 'Y', 'Z'}) {
    mixed += conjugate_1q(rho, pauli_matrix(pauli), q, n);
  }
  rho = (1.0 - p) * rho + (p / 3.0) * mixed;
}

void apply_depolarizing_2q(Eigen::MatrixXcd& rho, double p, int qa, int qb, int n) {
  const char paulis[] = {'I', 'X', 'Y', 'Z'};
  Eigen::MatrixXcd mixed = Eigen::MatrixXcd::Zero(rho.rows(), rho.cols());
  for (char pa : paulis) {
    for (char pb : paulis) {
      if (pa == 'I' && pb == 'I') continue;
      Eigen::MatrixXcd term = rho;
      if (pa != 'I') term = conjugate_1q(term, pauli_matrix(pa), qa, n);
      if (pb != 'I') term = conjugate_1q(term, pauli_matrix(pb), qb, n);
      mixed += term;
    }
  }
  rho = (1.0 - p) * rho + (p / 15.0) * mixed;
}

void apply_amplitude_damping_1q(Eigen::MatrixXcd& rho, double p, int q, int n) {
  Eigen::Matrix2cd k0;
  k0 << 1, 0, 0, std::sqrt(1.0 - p);
  Eigen::Matrix2cd k1;
  k1 << 0, std::sqrt(p), 0, 0;
  rho = conjugate_1q(rho, k0, q, n) + conjugate_1q(rho, k1, q, n);
}

void apply_noise(Eigen::MatrixXcd& rho, const NoiseModel& noise, const std::vector<int>& qubits,
                 int n) {
  switch (noise.kind) {
    case NoiseModel::Kind::None:
      return;
    case NoiseModel::Kind::Depolarizing:
      if (qubits.size() == 1) {
        apply_depolarizing_1q(rho, noise.strength, qubits[0], n);
      } else {
        apply_depolarizing_2q(rho, noise.strength, qubits[0], qubits[1], n);
      }
      return;
    case NoiseModel::Kind::AmplitudeDamping:
      for (int q : qubits) apply_amplitude_damping_1q(rho, noise.strength, q, n);
      return;
  }
}

}  // namespace

NoiseModel NoiseModel::depolarizing(double p) {
  check_strength(p);
  return {Kind::Depolarizing, p};
}

NoiseModel NoiseModel::amplitude_damping(double p) {
  check_strength(p);
  return {Kind::AmplitudeDamping, p};
}

NoiseModel NoiseModel::parse(std::string_view text) {
  if (text == "none") return none();
  const auto colon = text.find(':');
  const std::string_view kind = text.substr(0, colon);
  if (colon == std::string_view::npos) {
    throw ParseError("noise spec '" + std::string(text) +
                     "' must be 'none' or '<kind>:<strength>'");
  }
  const std::string_view rest = text.substr(colon + 1);
  if (kind == "depolarizing") return depolarizing(parse_probability(rest, "depolarizing"));
  if (kind == "amplitude-damping") {
    return amplitude_damping(parse_probability(rest, "amplitude-damping"));
  }
  throw ParseError("unknown noise kind '" + std::string(kind) + "'");
}

std::string NoiseModel::to_string() const {
  char buf[64];
  switch (kind) {
    case Kind::None:
      return "none";
    case Kind::Depolarizing:
      std::snprintf(buf, sizeof buf, "depolarizing:%g", strength);
      return buf;
    case Kind::AmplitudeDamping:
      std::snprintf(buf, sizeof buf, "amplitude-damping:%g", strength);
      return buf;
  }
  return "none";
}

double DensityMatrix::trace_deviation() const { return std::abs(rho.trace() - Complex(1.0)); }

double DensityMatrix::hermiticity_deviation() const {
  return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver((rho + rho.adjoint()) / 2.0);
  return solver.eigenvalues().minCoeff();
}

int Observable::num_qubits() const {
  validate_observable(*this);
  return static_cast<int>(terms.front().paulis.size());
}

void validate_observable(const Observable& obs) {
  if (obs.terms.empty()) {
    throw ValidationError("observable must have at least one term");
  }
  const std::size_t n = obs.terms.front().paulis.size();
  for (const PauliTerm& term : obs.terms) {
    if (!std::isfinite(term.coeff)) {
      throw ValidationError("observable coefficient is not finite");
    }
    if (term.paulis.empty() || term.paulis.size() != n) {
      throw ValidationError("observable Pauli strings must be non-empty and of equal length");
    }
    for (char c : term.paulis) {
      if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') {
        throw ValidationError(std::string("invalid Pauli letter '") + c + "'");
      }
    }
  }
}

Observable all_zeros_projector(int num_qubits) {
  if (num_qubits < 1 || num_qubits > kUnitaryQubitGuard) {
    throw ValidationError("all_zeros_projector supports 1..10 qubits");
  }
  Observable obs;
  const std::size_t count = std::size_t{1} << num_qubits;
  const double coeff = 1.0 / static_cast<double>(count);
  for (std::size_t bits = 0; bits < count; ++bits) {
    std::string paulis(num_qubits, 'I');
    for (int q = 0; q < num_qubits; ++q) {
      if (bits & (std::size_t{1} << q)) paulis[q] = 'Z';
    }
    obs.terms.push_back({coeff, paulis});
  }
  return obs;
}

ExecutionMode ExecutionMode::sampled(int shots, std::uint64_t seed) {
  if (shots < 1) throw ValidationError("shots must be >= 1");
  return {false, shots, seed};
}

DensityMatrix simulate(const Circuit& circuit, const NoiseModel& noise) {
  validate_circuit(circuit);
  if (circuit.num_qubits > kUnitaryQubitGuard) {
    throw TooManyQubits("simulate supports at most " + std::to_string(kUnitaryQubitGuard) +
                        " qubits, got " + std::to_string(circuit.num_qubits));
  }
  const Eigen::Index dim = Eigen::Index{1} << circuit.num_qubits;
  DensityMatrix state;
  state.num_qubits = circuit.num_qubits;
  state.rho = Eigen::MatrixXcd::Zero(dim, dim);
  state.rho(0, 0) = 1.0;
  for (const Gate& gate : circuit.gates) {
    conjugate_gate(state.rho, gate, circuit.num_qubits);
    apply_noise(state.rho, noise, gate.qubits, circuit.num_qubits);
  }
  return state;
}

namespace {

/// Tr[rho P] for one Pauli string; exact (no dense Pauli matrix is built).
Complex pauli_trace(const DensityMatrix& state, const std::string& paulis) {
  const int n = state.num_qubits;
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::Index xmask = 0;
  for (int q = 0; q < n; ++q) {
    const char c = paulis[static_cast<std::size_t>(q)];
    if (c == 'X' || c == 'Y') xmask |= Eigen::Index{1} << (n - 1 - q);
  }
  Complex total = 0.0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    const Eigen::Index j = i ^ xmask;
    // Element P(j, i): the product over qubits of the single-qubit entries.
    Complex element = 1.0;
    for (int q = 0; q < n; ++q) {
      const bool bit = (i >> (n - 1 - q)) & 1;
      switch (paulis[static_cast<std::size_t>(q)]) {
        case 'Y':
          element *= bit ? Complex(0, -1) : Complex(0, 1);
          break;
        case 'Z':
          element *= bit ? -1.0 : 1.0;
          break;
        default:
          break;  // I and X contribute a factor of 1
      }
    }
    total += state.rho(i, j) * element;
  }
  return total;
}

void check_dimensions(const DensityMatrix& rho, const Observable& obs) {
  validate_observable(obs);
  if (obs.num_qubits() != rho.num_qubits) {
    throw DimensionMismatch("observable acts on " + std::to_string(obs.num_qubits()) +
                            " qubits but the state has " + std::to_string(rho.num_qubits));
  }
}

}  // namespace

double expectation(const DensityMatrix& rho, const Observable& obs) {
  check_dimensions(rho, obs);
  Complex total = 0.0;
  for (const PauliTerm& term : obs.terms) {
    total += term.coeff * pauli_trace(rho, term.paulis);
  }
  return total.real();
}

double sample_expectation(const DensityMatrix& rho, const Observable& obs, int shots,
                          std::uint64_t seed) {
  check_dimensions(rho, obs);
  if (shots < 1) throw ValidationError("shots must be >= 1");
  Rng rng(seed);
  double total = 0.0;
  for (const PauliTerm& term : obs.terms) {
    const double mean = pauli_trace(rho, term.paulis).real();
    // Two-outcome distribution on {-1, +1} with the exact mean; clamping
    // guards round-off just outside [-1, 1].
    const double p_plus = std::min(1.0, std::max(0.0, (1.0 + mean) / 2.0));
    long sum = 0;
    for (int s = 0; s < shots; ++s) {
      sum += rng.uniform() < p_plus ? 1 : -1;
    }
    total += term.coeff * static_cast<double>(sum) / static_cast<double>(shots);
  }
  return total;
}

Executor make_executor(const NoiseModel& noise, const Observable& obs, const ExecutionMode& mode) {
  validate_observable(obs);
  if (mode.exact) {
    return [noise, obs](const Circuit& circuit) {
      return expectation(simulate(circuit, noise), obs);
    };
  }
  // Invocation counter so repeated calls draw fresh but reproducible samples.
  auto counter = std::make_shared<std::uint64_t>(0);
  return [noise, obs, mode, counter](const Circuit& circuit) {
    const std::uint64_t call_seed = mix_seed(mode.seed, {(*counter)++});
    return sample_expectation(simulate(circuit, noise), obs, mode.shots, call_seed);
  };
}

}  // namespace znekit

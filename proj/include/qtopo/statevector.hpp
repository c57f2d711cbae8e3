#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qtopo/kernels.hpp"

namespace qtopo {

using cplx = std::complex<double>;

// Dense statevector over num_qubits qubits. Qubit 0 is the most significant
// bit of the basis index, so a register split |x>|i> with m structure qubits
// and n node qubits stores amplitude (x, i) at index x * 2^n + i.
struct StateVector {
  int num_qubits = 0;
  std::vector<cplx> amps;

  StateVector() = default;
  explicit StateVector(int qubits)
      : num_qubits(qubits), amps(std::size_t{1} << qubits, cplx{0.0, 0.0}) {}

  static StateVector zero_state(int qubits) {
    StateVector s(qubits);
    s.amps[0] = 1.0;
    return s;
  }

  std::size_t dim() const { return amps.size(); }
  double norm() const;
  std::vector<double> probabilities() const;
};

struct Gate {
  enum class Kind { RY, X, H, CZ, PermuteBasis };

  Kind kind = Kind::X;
  int target = -1;       // RY, X, H
  int partner = -1;      // CZ second qubit (CZ is symmetric in its qubits)
  double angle = 0.0;    // RY
  int block_start = 0;   // PermuteBasis
  int block_qubits = 0;
  std::vector<std::uint64_t> perm;

  static Gate ry(int target, double angle);
  static Gate x(int target);
  static Gate h(int target);
  static Gate cz(int a, int b);
  static Gate permute_basis(int block_start, int block_qubits,
                            std::vector<std::uint64_t> perm);

  Gate adjoint() const;
};

struct Circuit {
  int num_qubits = 0;
  std::vector<Gate> gates;

  Circuit() = default;
  explicit Circuit(int qubits) : num_qubits(qubits) {}

  Circuit& add(Gate g);
  Circuit& add(const Circuit& other);
  Circuit adjoint() const;
};

void apply(StateVector& state, const Gate& gate,
           kernels::Exec exec = kernels::Exec::Auto);
void apply(StateVector& state, const Circuit& circuit,
           kernels::Exec exec = kernels::Exec::Auto);

// <state| M |state> for a dense Hermitian observable. Throws if M is not
// Hermitian or if the imaginary residue of the expectation exceeds 1e-10.
double expectation(const StateVector& state, const Eigen::MatrixXcd& observable);

cplx inner(const StateVector& lhs, const StateVector& rhs);

// Multinomial sample of basis-state outcomes: `shots` draws from |amps|^2
// with a dedicated PRNG seeded by `seed`. Keys are basis indices.
std::map<std::uint64_t, std::uint64_t> sample(const StateVector& state,
                                              std::uint64_t shots,
                                              std::uint64_t seed);

// Renders a basis index as a bit string, qubit 0 first.
std::string basis_label(std::uint64_t index, int num_qubits);

// splitmix64-based seed derivation so concurrent estimators can draw
// reproducible per-circuit streams from one master seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0, std::uint64_t d = 0);

}  // namespace qtopo

#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "qtopo/model.hpp"
#include "qtopo/statevector.hpp"

namespace qtopo {

// Alternating layered ansatz: each layer is a row of Y-rotations (one
// parameter per qubit) followed by CZ entanglers on every qubit pair. The
// entanglers are diagonal and self-inverse, so with all parameters zero the
// circuit is the identity exactly when the layer count is even.
struct AnsatzConfig {
  int num_qubits = 0;
  int layers = 1;

  int parameter_count() const { return layers * num_qubits; }
};

std::vector<std::pair<int, int>> entangler_pairs(int num_qubits);

// Parametrized circuit for the given angles; |params| must equal
// layers * num_qubits.
Circuit ansatz_circuit(const AnsatzConfig& config, std::span<const double> params);

// |b> = (H^(x)m (x) U_f)|0...0>: Hadamards on the structure register and X
// gates writing the source node's free index into the node register.
Circuit prepare_b_circuit(int edge_count, int node_qubits, std::uint64_t source_index);

// |+>^(x)m on the structure register alone.
Circuit prepare_plus_circuit(int edge_count);

// Full preparation |0...0>  ->  U_theta |b> on m+n qubits. The psi ansatz
// layer count must be even (identity-at-zero initialization).
Circuit psi_preparation(const AssembledSystem& sys, std::span<const double> theta,
                        int layers);
StateVector psi_state(const AssembledSystem& sys, std::span<const double> theta,
                      int layers);

// |0...0> -> U_eta |+>^(x)m on m qubits; any layer count >= 1.
Circuit phi_preparation(int edge_count, std::span<const double> eta, int layers);
StateVector phi_state(int edge_count, std::span<const double> eta, int layers);

}  // namespace qtopo

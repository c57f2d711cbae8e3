#include "qtopo/ansatz.hpp"

#include <stdexcept>
#include <string>

namespace qtopo {

std::vector<std::pair<int, int>> entangler_pairs(int num_qubits) {
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < num_qubits; ++a) {
    for (int b = a + 1; b < num_qubits; ++b) pairs.emplace_back(a, b);
  }
  return pairs;
}

Circuit ansatz_circuit(const AnsatzConfig& config, std::span<const double> params) {
  if (config.num_qubits < 1 || config.layers < 1) {
    throw std::invalid_argument("ansatz: need at least one qubit and one layer");
  }
  if (static_cast<int>(params.size()) != config.parameter_count()) {
    throw std::invalid_argument("ansatz: expected " +
                                std::to_string(config.parameter_count()) +
                                " parameters, got " + std::to_string(params.size()));
  }
  const auto pairs = entangler_pairs(config.num_qubits);
  Circuit c(config.num_qubits);
  std::size_t p = 0;
  for (int layer = 0; layer < config.layers; ++layer) {
    for (int q = 0; q < config.num_qubits; ++q) c.add(Gate::ry(q, params[p++]));
    for (const auto& [a, b] : pairs) c.add(Gate::cz(a, b));
  }
  return c;
}

Circuit prepare_b_circuit(int edge_count, int node_qubits, std::uint64_t source_index) {
  Circuit c(edge_count + node_qubits);
  for (int q = 0; q < edge_count; ++q) c.add(Gate::h(q));
  for (int t = 0; t < node_qubits; ++t) {
    if ((source_index >> (node_qubits - 1 - t)) & 1ULL) c.add(Gate::x(edge_count + t));
  }
  return c;
}

Circuit prepare_plus_circuit(int edge_count) {
  Circuit c(edge_count);
  for (int q = 0; q < edge_count; ++q) c.add(Gate::h(q));
  return c;
}

Circuit psi_preparation(const AssembledSystem& sys, std::span<const double> theta,
                        int layers) {
  if (layers % 2 != 0) {
    throw std::invalid_argument("psi ansatz: layer count must be even");
  }
  const int k = sys.edge_count + sys.node_qubits;
  Circuit c = prepare_b_circuit(sys.edge_count, sys.node_qubits,
                                static_cast<std::uint64_t>(sys.source_index));
  c.add(ansatz_circuit({k, layers}, theta));
  return c;
}

StateVector psi_state(const AssembledSystem& sys, std::span<const double> theta,
                      int layers) {
  const int k = sys.edge_count + sys.node_qubits;
  StateVector s = StateVector::zero_state(k);
  apply(s, psi_preparation(sys, theta, layers));
  return s;
}

Circuit phi_preparation(int edge_count, std::span<const double> eta, int layers) {
  Circuit c = prepare_plus_circuit(edge_count);
  c.add(ansatz_circuit({edge_count, layers}, eta));
  return c;
}

StateVector phi_state(int edge_count, std::span<const double> eta, int layers) {
  StateVector s = StateVector::zero_state(edge_count);
  apply(s, phi_preparation(edge_count, eta, layers));
  return s;
}

}  // namespace qtopo

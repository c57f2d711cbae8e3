#include "qtopo/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace qtopo {

Eigen::VectorXd solve_temperature(const AssembledSystem& sys, std::uint64_t x) {
  if (x >= sys.structure_count()) {
    throw std::out_of_range("solve_temperature: structure index out of range");
  }
  const int n_free = sys.free_count;
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n_free, n_free);
  for (int j = 0; j < sys.edge_count; ++j) {
    k += sys.edge_coefficient(x, j) *
         sys.element_matrices[static_cast<std::size_t>(j)].topLeftCorner(n_free, n_free);
  }
  const Eigen::VectorXd f = sys.source_vector.head(n_free);
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("solve_temperature: stiffness matrix is not positive definite");
  }
  const Eigen::VectorXd u = llt.solve(f);
  const double residual = (k * u - f).norm() / f.norm();
  if (!(residual <= 1e-12)) {
    throw std::runtime_error("solve_temperature: relative residual above 1e-12");
  }
  Eigen::VectorXd padded = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sys.padded_dim()));
  padded.head(n_free) = u;
  return padded;
}

OracleTable brute_force(const AssembledSystem& sys, int max_edges) {
  if (sys.edge_count > max_edges) {
    throw std::invalid_argument("brute_force: " + std::to_string(sys.edge_count) +
                                " edges exceed the enumeration cap of " +
                                std::to_string(max_edges));
  }
  OracleTable table;
  table.edge_count = sys.edge_count;
  table.node_qubits = sys.node_qubits;
  const std::uint64_t count = sys.structure_count();
  const auto block = static_cast<Eigen::Index>(sys.padded_dim());
  table.temperatures.resize(count);
  table.target_temperature.resize(count);
  table.objective.resize(count);
  table.psi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(count) * block);
  const double block_scale = std::pow(2.0, -0.5 * sys.edge_count);

  double source_sum = 0.0;
  for (std::uint64_t x = 0; x < count; ++x) {
    Eigen::VectorXd u = solve_temperature(sys, x);
    table.target_temperature[x] = u(sys.target_index);
    table.objective[x] = u(sys.target_index) * u(sys.target_index);
    source_sum += u(sys.source_index);
    table.psi.segment(static_cast<Eigen::Index>(x) * block, block) = block_scale * u;
    table.temperatures[x] = std::move(u);
  }
  table.b_ainv_b = source_sum / static_cast<double>(count);
  table.scale = table.psi.norm();

  std::uint64_t best = 0;
  for (std::uint64_t x = 1; x < count; ++x) {
    if (table.objective[x] < table.objective[best]) best = x;
  }
  table.argmin = best;
  return table;
}

Eigen::VectorXd exact_psi(const AssembledSystem& sys, int max_qubits) {
  if (sys.edge_count + sys.node_qubits > max_qubits) {
    throw std::invalid_argument("exact_psi: " +
                                std::to_string(sys.edge_count + sys.node_qubits) +
                                " qubits exceed the cap of " + std::to_string(max_qubits));
  }
  const std::uint64_t count = sys.structure_count();
  const auto block = static_cast<Eigen::Index>(sys.padded_dim());
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(count) * block);
  const double block_scale = std::pow(2.0, -0.5 * sys.edge_count);
  for (std::uint64_t x = 0; x < count; ++x) {
    psi.segment(static_cast<Eigen::Index>(x) * block, block) =
        block_scale * solve_temperature(sys, x);
  }
  return psi;
}

}  // namespace qtopo

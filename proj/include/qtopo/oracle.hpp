#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "qtopo/model.hpp"

namespace qtopo {

// Classical ground truth: direct solves of the governing equation for every
// structure, the brute-force argmin, and the exact stacked solution vector
// used to cross-check the quantum-side quantities.
struct OracleTable {
  int edge_count = 0;
  int node_qubits = 0;
  std::vector<Eigen::VectorXd> temperatures;  // U(x), padded length 2^n
  std::vector<double> target_temperature;     // U_target(x)
  std::vector<double> objective;              // L(x) = U_target(x)^2
  std::uint64_t argmin = 0;                   // lowest objective, ties to lowest x
  Eigen::VectorXd psi;                        // stacked 2^{-m/2} U(x) blocks
  double scale = 0.0;                         // r = ||psi||_2

  // <b|A^{-1}|b> = 2^{-m} sum_x U_source(x); the stage-1 variational bound.
  double b_ainv_b = 0.0;
};

// Solves K(x) U = F; relative residual is verified to stay below 1e-12.
// The returned vector has padded length 2^n with exact zeros in the padding.
Eigen::VectorXd solve_temperature(const AssembledSystem& sys, std::uint64_t x);

// Enumerates all 2^m structures. Refuses (std::invalid_argument) when m
// exceeds max_edges.
OracleTable brute_force(const AssembledSystem& sys, int max_edges = 20);

// The exact solution of A |Psi> = |b>, laid out as 2^{-m/2} U(x) blocks
// ordered by x as an unsigned integer (edge 1 most significant). Refuses when
// m + n exceeds max_qubits.
Eigen::VectorXd exact_psi(const AssembledSystem& sys, int max_qubits = 16);

}  // namespace qtopo

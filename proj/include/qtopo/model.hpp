#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace qtopo {

struct Edge {
  int node_a = 0;
  int node_b = 0;
  double length = 1.0;
};

// Candidate heat-path graph: every edge is assigned one of two materials,
// conductivity lambda (bit 1) or epsilon * lambda (bit 0). The base node is
// held at temperature zero, the source node carries the unit heat load and
// the target node's steady-state temperature is the quantity to minimize.
struct GroundStructure {
  int num_nodes = 0;
  std::vector<Edge> edges;
  double lambda = 1.0;
  double epsilon = 0.1;
  int source = 0;
  int target = 0;
  int base = 0;

  int edge_count() const { return static_cast<int>(edges.size()); }

  // Throws std::invalid_argument naming the offending field when a basic
  // invariant is violated (ids, ranges, degenerate edges, connectivity).
  void validate() const;
};

// Edge endpoints after boundary reduction: free-node indices, -1 for the
// eliminated base node.
struct AssembledEdge {
  int free_a = -1;
  int free_b = -1;
  double length = 1.0;
};

// Boundary-reduced system padded to dimension 2^n, n = ceil(log2 N) with N
// the number of free (non-base) nodes. Immutable after assembly.
struct AssembledSystem {
  int edge_count = 0;        // m
  int node_qubits = 0;       // n
  int free_count = 0;        // N
  double lambda = 1.0;
  double epsilon = 0.1;
  int source_index = 0;      // free index of the source node
  int target_index = 0;      // free index of the target node
  std::vector<Eigen::MatrixXd> element_matrices;  // padded per-edge matrices, 2^n x 2^n
  std::vector<AssembledEdge> edge_info;           // reduced endpoints per edge
  Eigen::VectorXd source_vector;                  // padded unit source vector
  std::vector<int> free_index_of_node;            // node id -> free index, -1 for base
  std::vector<int> node_of_free_index;            // free index -> node id

  std::int64_t padded_dim() const { return std::int64_t{1} << node_qubits; }
  std::uint64_t structure_count() const { return std::uint64_t{1} << edge_count; }

  // Material coefficient of edge j (0-based) under structure x:
  // (1 - epsilon) * x_j + epsilon.
  double edge_coefficient(std::uint64_t x, int edge) const {
    return structure_bit(x, edge) ? 1.0 : epsilon;
  }

  // Bit of edge j (0-based) in structure x; edge 0 is the most significant
  // bit, matching the printed orientation where the leftmost character of a
  // structure string is edge 1.
  bool structure_bit(std::uint64_t x, int edge) const {
    return (x >> (edge_count - 1 - edge)) & 1ULL;
  }
};

// Per-edge conduction matrix restricted to free-node indices: rows/columns
// of the base node are removed, which realizes the zero-temperature boundary
// condition. Size N x N (unpadded).
Eigen::MatrixXd element_stiffness(const GroundStructure& gs, int edge_index);

AssembledSystem assemble(const GroundStructure& gs);

// K(x) = sum_j K_j ((1 - eps) x_j + eps) over the padded dimension.
Eigen::MatrixXd structure_stiffness(const AssembledSystem& sys, std::uint64_t x);

std::string structure_to_string(std::uint64_t x, int edge_count);
std::uint64_t structure_from_string(const std::string& s);

}  // namespace qtopo

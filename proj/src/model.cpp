#include "qtopo/model.hpp"

#include <numeric>
#include <stdexcept>

namespace qtopo {

namespace {

int find_root(std::vector<int>& parent, int v) {
  while (parent[v] != v) {
    parent[v] = parent[parent[v]];
    v = parent[v];
  }
  return v;
}

}  // namespace

void GroundStructure::validate() const {
  if (num_nodes < 2) throw std::invalid_argument("ground structure: need at least 2 nodes");
  if (edges.empty()) throw std::invalid_argument("ground structure: no edges");
  auto check_node = [this](int v, const char* what) {
    if (v < 0 || v >= num_nodes) {
      throw std::invalid_argument(std::string("ground structure: ") + what + " node " +
                                  std::to_string(v) + " out of range");
    }
  };
  for (std::size_t j = 0; j < edges.size(); ++j) {
    const Edge& e = edges[j];
    check_node(e.node_a, "edge endpoint");
    check_node(e.node_b, "edge endpoint");
    if (e.node_a == e.node_b) {
      throw std::invalid_argument("ground structure: edge " + std::to_string(j + 1) +
                                  " is degenerate (identical endpoints " +
                                  std::to_string(e.node_a) + ")");
    }
    if (!(e.length > 0.0)) {
      throw std::invalid_argument("ground structure: edge " + std::to_string(j + 1) +
                                  " has non-positive length");
    }
  }
  check_node(source, "source");
  check_node(target, "target");
  check_node(base, "base");
  if (source == target || source == base || target == base) {
    throw std::invalid_argument("ground structure: source, target and base must be distinct");
  }
  if (!(lambda > 0.0)) throw std::invalid_argument("ground structure: lambda must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("ground structure: epsilon must lie in (0, 1)");
  }

  // The graph over all edges must be one component containing the base node;
  // otherwise the boundary-reduced stiffness is singular.
  std::vector<int> parent(static_cast<std::size_t>(num_nodes));
  std::iota(parent.begin(), parent.end(), 0);
  for (const Edge& e : edges) {
    const int ra = find_root(parent, e.node_a);
    const int rb = find_root(parent, e.node_b);
    if (ra != rb) parent[ra] = rb;
  }
  const int base_root = find_root(parent, base);
  for (int v = 0; v < num_nodes; ++v) {
    if (find_root(parent, v) != base_root) {
      throw std::invalid_argument("ground structure: graph is disconnected; node " +
                                  std::to_string(v) + " has no path to the base node " +
                                  std::to_string(base));
    }
  }
}

Eigen::MatrixXd element_stiffness(const GroundStructure& gs, int edge_index) {
  if (edge_index < 0 || edge_index >= gs.edge_count()) {
    throw std::out_of_range("element_stiffness: edge index out of range");
  }
  const Edge& e = gs.edges[static_cast<std::size_t>(edge_index)];
  if (e.node_a == e.node_b) {
    throw std::invalid_argument("element_stiffness: degenerate edge");
  }
  std::vector<int> free_index(static_cast<std::size_t>(gs.num_nodes), -1);
  int next = 0;
  for (int v = 0; v < gs.num_nodes; ++v) {
    if (v != gs.base) free_index[static_cast<std::size_t>(v)] = next++;
  }
  const int n_free = next;
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n_free, n_free);
  const double w = gs.lambda / e.length;
  const int ia = free_index[static_cast<std::size_t>(e.node_a)];
  const int ib = free_index[static_cast<std::size_t>(e.node_b)];
  if (ia >= 0) k(ia, ia) += w;
  if (ib >= 0) k(ib, ib) += w;
  if (ia >= 0 && ib >= 0) {
    k(ia, ib) -= w;
    k(ib, ia) -= w;
  }
  return k;
}

AssembledSystem assemble(const GroundStructure& gs) {
  gs.validate();

  AssembledSystem sys;
  sys.edge_count = gs.edge_count();
  sys.lambda = gs.lambda;
  sys.epsilon = gs.epsilon;
  sys.free_index_of_node.assign(static_cast<std::size_t>(gs.num_nodes), -1);
  for (int v = 0; v < gs.num_nodes; ++v) {
    if (v == gs.base) continue;
    sys.free_index_of_node[static_cast<std::size_t>(v)] =
        static_cast<int>(sys.node_of_free_index.size());
    sys.node_of_free_index.push_back(v);
  }
  sys.free_count = static_cast<int>(sys.node_of_free_index.size());

  int n = 0;
  while ((1 << n) < sys.free_count) ++n;
  if (n == 0) n = 1;  // a single free node still occupies one qubit
  sys.node_qubits = n;
  const auto dim = static_cast<Eigen::Index>(sys.padded_dim());

  sys.element_matrices.reserve(static_cast<std::size_t>(sys.edge_count));
  sys.edge_info.reserve(static_cast<std::size_t>(sys.edge_count));
  for (int j = 0; j < sys.edge_count; ++j) {
    Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(dim, dim);
    padded.topLeftCorner(sys.free_count, sys.free_count) = element_stiffness(gs, j);
    for (Eigen::Index d = sys.free_count; d < dim; ++d) padded(d, d) = 1.0;
    sys.element_matrices.push_back(std::move(padded));
    const Edge& e = gs.edges[static_cast<std::size_t>(j)];
    sys.edge_info.push_back({sys.free_index_of_node[static_cast<std::size_t>(e.node_a)],
                             sys.free_index_of_node[static_cast<std::size_t>(e.node_b)],
                             e.length});
  }

  sys.source_index = sys.free_index_of_node[static_cast<std::size_t>(gs.source)];
  sys.target_index = sys.free_index_of_node[static_cast<std::size_t>(gs.target)];
  sys.source_vector = Eigen::VectorXd::Zero(dim);
  sys.source_vector(sys.source_index) = 1.0;
  return sys;
}

Eigen::MatrixXd structure_stiffness(const AssembledSystem& sys, std::uint64_t x) {
  if (x >= sys.structure_count()) {
    throw std::out_of_range("structure_stiffness: structure index out of range");
  }
  const auto dim = static_cast<Eigen::Index>(sys.padded_dim());
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(dim, dim);
  for (int j = 0; j < sys.edge_count; ++j) {
    k += sys.edge_coefficient(x, j) * sys.element_matrices[static_cast<std::size_t>(j)];
  }
  return k;
}

std::string structure_to_string(std::uint64_t x, int edge_count) {
  std::string s(static_cast<std::size_t>(edge_count), '0');
  for (int j = 0; j < edge_count; ++j) {
    if ((x >> (edge_count - 1 - j)) & 1ULL) s[static_cast<std::size_t>(j)] = '1';
  }
  return s;
}

std::uint64_t structure_from_string(const std::string& s) {
  std::uint64_t x = 0;
  for (char c : s) {
    if (c != '0' && c != '1') {
      throw std::invalid_argument("structure string must contain only 0/1");
    }
    x = (x << 1) | static_cast<std::uint64_t>(c == '1');
  }
  return x;
}

}  // namespace qtopo

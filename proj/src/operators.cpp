#include "qtopo/operators.hpp"

#include <cmath>
#include <stdexcept>

namespace qtopo {

namespace {

// Permutation on the node register sending v_a -> 0...0 and v_b -> 0...01,
// remaining basis states filled in ascending order.
std::vector<std::uint64_t> pair_front_permutation(int node_qubits, std::uint64_t v_a,
                                                  std::uint64_t v_b) {
  const std::uint64_t dim = std::uint64_t{1} << node_qubits;
  std::vector<std::uint64_t> perm(dim);
  perm[v_a] = 0;
  perm[v_b] = 1;
  std::uint64_t next = 2;
  for (std::uint64_t s = 0; s < dim; ++s) {
    if (s == v_a || s == v_b) continue;
    perm[s] = next++;
  }
  return perm;
}

Eigen::MatrixXd circuit_matrix(const Circuit& c) {
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << c.num_qubits);
  Eigen::MatrixXd u(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    StateVector s(c.num_qubits);
    s.amps[static_cast<std::size_t>(col)] = 1.0;
    apply(s, c);
    for (Eigen::Index row = 0; row < dim; ++row) {
      u(row, col) = s.amps[static_cast<std::size_t>(row)].real();
    }
  }
  return u;
}

}  // namespace

BlockOperatorA::BlockOperatorA(const AssembledSystem& sys)
    : sys_(&sys), block_dim_(static_cast<std::size_t>(sys.padded_dim())) {
  const std::uint64_t blocks = sys.structure_count();
  stacked_.assign(blocks * block_dim_ * block_dim_, 0.0);
  for (std::uint64_t x = 0; x < blocks; ++x) {
    double* mat = stacked_.data() + x * block_dim_ * block_dim_;
    for (int j = 0; j < sys.edge_count; ++j) {
      const double c = sys.edge_coefficient(x, j);
      const Eigen::MatrixXd& k = sys.element_matrices[static_cast<std::size_t>(j)];
      for (std::size_t r = 0; r < block_dim_; ++r) {
        for (std::size_t col = 0; col < block_dim_; ++col) {
          mat[r * block_dim_ + col] +=
              c * k(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col));
        }
      }
    }
  }
}

std::vector<double> BlockOperatorA::block_expectations(const StateVector& psi) const {
  if (psi.num_qubits != total_qubits()) {
    throw std::invalid_argument("BlockOperatorA: state arity mismatch");
  }
  const std::uint64_t blocks = sys_->structure_count();
  std::vector<double> out(blocks);
  kernels::block_quadratic(stacked_.data(), psi.amps.data(), out.data(), blocks,
                           block_dim_);
  return out;
}

double BlockOperatorA::expectation(const StateVector& psi) const {
  const std::vector<double> per_block = block_expectations(psi);
  double acc = 0.0;
  for (double v : per_block) acc += v;
  return acc;
}

void BlockOperatorA::apply(const StateVector& in, StateVector& out) const {
  if (in.num_qubits != total_qubits()) {
    throw std::invalid_argument("BlockOperatorA: state arity mismatch");
  }
  out.num_qubits = in.num_qubits;
  out.amps.resize(in.amps.size());
  kernels::block_matvec(stacked_.data(), in.amps.data(), out.amps.data(),
                        sys_->structure_count(), block_dim_);
}

Eigen::MatrixXd BlockOperatorA::dense() const {
  const auto dim = static_cast<Eigen::Index>(sys_->structure_count() * block_dim_);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
  for (std::uint64_t x = 0; x < sys_->structure_count(); ++x) {
    const double* mat = stacked_.data() + x * block_dim_ * block_dim_;
    for (std::size_t r = 0; r < block_dim_; ++r) {
      for (std::size_t c = 0; c < block_dim_; ++c) {
        a(static_cast<Eigen::Index>(x * block_dim_ + r),
          static_cast<Eigen::Index>(x * block_dim_ + c)) = mat[r * block_dim_ + c];
      }
    }
  }
  return a;
}

TargetObservable TargetObservable::for_system(const AssembledSystem& sys) {
  TargetObservable obs;
  obs.node_qubits = sys.node_qubits;
  obs.target_index = static_cast<std::uint64_t>(sys.target_index);
  return obs;
}

Circuit TargetObservable::unprojector(int total_qubits) const {
  Circuit c(total_qubits);
  const int offset = total_qubits - node_qubits;
  for (int t = 0; t < node_qubits; ++t) {
    if ((target_index >> (node_qubits - 1 - t)) & 1ULL) c.add(Gate::x(offset + t));
  }
  return c;
}

Eigen::MatrixXd TargetObservable::dense() const {
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << node_qubits);
  Eigen::MatrixXd o = Eigen::MatrixXd::Zero(dim, dim);
  o(static_cast<Eigen::Index>(target_index), static_cast<Eigen::Index>(target_index)) = 1.0;
  return o;
}

Eigen::MatrixXd XbmTerm::reconstruct() const {
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << m_plus.num_qubits);
  const Eigen::MatrixXd up = circuit_matrix(m_plus);
  const Eigen::MatrixXd um = circuit_matrix(m_minus);
  const Eigen::VectorXd col_p = up.col(static_cast<Eigen::Index>(ref_plus));
  const Eigen::VectorXd col_m = um.col(static_cast<Eigen::Index>(ref_minus));
  Eigen::MatrixXd k(dim, dim);
  k = 0.5 * eigenvalue * (col_p * col_p.transpose() + col_m * col_m.transpose());
  return k;
}

std::vector<XbmTerm> build_xbm_terms(const AssembledSystem& sys) {
  std::vector<XbmTerm> terms;
  terms.reserve(static_cast<std::size_t>(sys.edge_count));
  const int n = sys.node_qubits;
  for (int j = 0; j < sys.edge_count; ++j) {
    const AssembledEdge& e = sys.edge_info[static_cast<std::size_t>(j)];
    XbmTerm t;
    t.edge = j;
    if (e.free_a < 0 || e.free_b < 0) {
      const int w = e.free_a >= 0 ? e.free_a : e.free_b;
      t.base_incident = true;
      t.v_a = t.v_b = static_cast<std::uint64_t>(w);
      t.eigenvalue = sys.lambda / e.length;
      t.m_plus = Circuit(n);
      t.m_minus = Circuit(n);
      t.ref_plus = t.ref_minus = t.v_a;
    } else {
      t.base_incident = false;
      t.v_a = static_cast<std::uint64_t>(e.free_a);
      t.v_b = static_cast<std::uint64_t>(e.free_b);
      t.eigenvalue = 2.0 * sys.lambda / e.length;
      const auto perm = pair_front_permutation(n, t.v_a, t.v_b);
      const Gate fwd = Gate::permute_basis(0, n, perm);
      const Gate bwd = fwd.adjoint();
      t.m_plus = Circuit(n);
      t.m_plus.add(fwd).add(Gate::h(n - 1)).add(bwd);
      t.m_minus = Circuit(n);
      t.m_minus.add(fwd).add(Gate::x(n - 1)).add(Gate::h(n - 1)).add(bwd);
      t.ref_minus = t.v_a;
      t.ref_plus = t.v_b;
    }
    terms.push_back(std::move(t));
  }
  return terms;
}

double expect_A_exact(const BlockOperatorA& op, const StateVector& psi) {
  return op.expectation(psi);
}

double expect_bb_exact(const StateVector& b, const StateVector& psi) {
  return std::norm(inner(b, psi));
}

namespace {

// Embeds a node-register circuit into the full m+n register.
Circuit embed_on_node_register(const Circuit& node_circuit, int total_qubits) {
  const int offset = total_qubits - node_circuit.num_qubits;
  Circuit out(total_qubits);
  for (Gate g : node_circuit.gates) {
    switch (g.kind) {
      case Gate::Kind::RY:
      case Gate::Kind::X:
      case Gate::Kind::H:
        g.target += offset;
        break;
      case Gate::Kind::CZ:
        g.target += offset;
        g.partner += offset;
        break;
      case Gate::Kind::PermuteBasis:
        g.block_start += offset;
        break;
    }
    out.add(std::move(g));
  }
  return out;
}

struct BranchStats {
  double p_hat = 0.0;  // frequency of the reference node outcome
  double q_hat = 0.0;  // signed frequency, sign = parity of the edge bit
  double var = 0.0;    // per-shot variance of the combined variable
};

BranchStats run_xbm_branch(const Circuit& prepare_psi, const Circuit& measure,
                           const XbmTerm& term, int edge_count, int node_qubits,
                           double eps, std::uint64_t ref, std::uint64_t shots,
                           std::uint64_t seed) {
  StateVector s = StateVector::zero_state(prepare_psi.num_qubits);
  apply(s, prepare_psi);
  apply(s, measure);
  const auto counts = sample(s, shots, seed);
  const std::uint64_t node_mask = (std::uint64_t{1} << node_qubits) - 1;

  std::uint64_t hits = 0;
  std::int64_t signed_hits = 0;
  for (const auto& [index, count] : counts) {
    if ((index & node_mask) != ref) continue;
    const std::uint64_t x = index >> node_qubits;
    const bool bit = (x >> (edge_count - 1 - term.edge)) & 1ULL;
    hits += count;
    signed_hits += bit ? -static_cast<std::int64_t>(count) : static_cast<std::int64_t>(count);
  }
  BranchStats st;
  const double ns = static_cast<double>(shots);
  st.p_hat = static_cast<double>(hits) / ns;
  st.q_hat = static_cast<double>(signed_hits) / ns;
  // Per-shot variable y = w * ((1+eps) - (1-eps)*sign) on a reference hit,
  // 0 otherwise, with w = eigenvalue / 4 folded in by the caller; variance is
  // computed on the unweighted combination and scaled outside.
  const double mean = (1.0 + eps) * st.p_hat - (1.0 - eps) * st.q_hat;
  const double y_even = (1.0 + eps) - (1.0 - eps);  // bit = 0
  const double y_odd = (1.0 + eps) + (1.0 - eps);   // bit = 1
  const double p_odd = 0.5 * (st.p_hat - st.q_hat);
  const double p_even = 0.5 * (st.p_hat + st.q_hat);
  const double second_moment = p_even * y_even * y_even + p_odd * y_odd * y_odd;
  st.var = second_moment - mean * mean;
  return st;
}

}  // namespace

SampledValue expect_A_sampled(const BlockOperatorA& op, const std::vector<XbmTerm>& terms,
                              const Circuit& prepare_psi, std::uint64_t shots,
                              std::uint64_t seed) {
  if (shots == 0) throw std::invalid_argument("expect_A_sampled: shots must be >= 1");
  const AssembledSystem& sys = op.system();
  const int total = op.total_qubits();
  double value = 0.0;
  double variance = 0.0;
  for (const XbmTerm& term : terms) {
    const Circuit meas_plus = embed_on_node_register(term.m_plus.adjoint(), total);
    const Circuit meas_minus = embed_on_node_register(term.m_minus.adjoint(), total);
    const BranchStats plus =
        run_xbm_branch(prepare_psi, meas_plus, term, sys.edge_count, sys.node_qubits,
                       sys.epsilon, term.ref_plus, shots,
                       derive_seed(seed, 0xA11CE, static_cast<std::uint64_t>(term.edge), 0));
    const BranchStats minus =
        run_xbm_branch(prepare_psi, meas_minus, term, sys.edge_count, sys.node_qubits,
                       sys.epsilon, term.ref_minus, shots,
                       derive_seed(seed, 0xA11CE, static_cast<std::uint64_t>(term.edge), 1));
    const double w = term.eigenvalue / 4.0;  // (1/2 spectral) * (1/2 branch average)
    value += w * ((1.0 + sys.epsilon) * (plus.p_hat + minus.p_hat) -
                  (1.0 - sys.epsilon) * (plus.q_hat + minus.q_hat));
    variance += w * w * (plus.var + minus.var) / static_cast<double>(shots);
  }
  return {value, std::sqrt(variance)};
}

SampledValue expect_bb_inversion_test(const Circuit& prepare_b, const Circuit& u_theta,
                                      std::uint64_t shots, std::uint64_t seed) {
  if (shots == 0) throw std::invalid_argument("inversion test: shots must be >= 1");
  StateVector s = StateVector::zero_state(prepare_b.num_qubits);
  apply(s, prepare_b);
  apply(s, u_theta);
  apply(s, prepare_b.adjoint());
  const auto counts = sample(s, shots, seed);
  std::uint64_t zeros = 0;
  if (const auto it = counts.find(0); it != counts.end()) zeros = it->second;
  const double p = static_cast<double>(zeros) / static_cast<double>(shots);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(shots))};
}

std::vector<double> structure_weights(const StateVector& psi, const TargetObservable& obs,
                                      int edge_count) {
  const std::uint64_t blocks = std::uint64_t{1} << edge_count;
  const std::uint64_t block_dim = std::uint64_t{1} << obs.node_qubits;
  if (psi.dim() != blocks * block_dim) {
    throw std::invalid_argument("structure_weights: state arity mismatch");
  }
  std::vector<double> g(blocks);
  for (std::uint64_t x = 0; x < blocks; ++x) {
    g[x] = std::norm(psi.amps[x * block_dim + obs.target_index]);
  }
  return g;
}

double expect_rhoO_exact(const StateVector& psi, const StateVector& phi,
                         const TargetObservable& obs) {
  const int m = phi.num_qubits;
  const std::vector<double> g = structure_weights(psi, obs, m);
  const std::vector<double> p = phi.probabilities();
  double acc = 0.0;
  for (std::size_t x = 0; x < g.size(); ++x) acc += p[x] * g[x];
  return acc;
}

RhoOSample expect_rhoO_sampled(const Circuit& prepare_psi, const Circuit& prepare_phi,
                               const TargetObservable& obs, int edge_count,
                               std::uint64_t shots, std::uint64_t seed) {
  if (shots == 0) throw std::invalid_argument("expect_rhoO_sampled: shots must be >= 1");
  const std::uint64_t structures = std::uint64_t{1} << edge_count;
  const double ns = static_cast<double>(shots);

  RhoOSample out;
  out.p_hat.assign(structures, 0.0);
  out.f_hat.assign(structures, 0.0);

  {
    StateVector phi = StateVector::zero_state(prepare_phi.num_qubits);
    apply(phi, prepare_phi);
    const auto counts = sample(phi, shots, derive_seed(seed, 0xF51, 0, 0));
    for (const auto& [x, count] : counts) out.p_hat[x] = static_cast<double>(count) / ns;
  }
  {
    StateVector psi = StateVector::zero_state(prepare_psi.num_qubits);
    apply(psi, prepare_psi);
    apply(psi, obs.unprojector(prepare_psi.num_qubits));
    const auto counts = sample(psi, shots, derive_seed(seed, 0xF52, 0, 0));
    const std::uint64_t node_mask = (std::uint64_t{1} << obs.node_qubits) - 1;
    for (const auto& [index, count] : counts) {
      if ((index & node_mask) != 0) continue;
      out.f_hat[index >> obs.node_qubits] += static_cast<double>(count) / ns;
    }
  }

  double value = 0.0;
  double variance = 0.0;
  for (std::uint64_t x = 0; x < structures; ++x) {
    value += out.p_hat[x] * out.f_hat[x];
    // First-order propagation for the product of two independent estimates.
    const double vp = out.p_hat[x] * (1.0 - out.p_hat[x]) / ns;
    const double vf = out.f_hat[x] * (1.0 - out.f_hat[x]) / ns;
    variance += out.f_hat[x] * out.f_hat[x] * vp + out.p_hat[x] * out.p_hat[x] * vf;
  }
  out.total = {value, std::sqrt(variance)};
  return out;
}

}  // namespace qtopo

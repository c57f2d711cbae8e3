#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "qtopo/model.hpp"
#include "qtopo/statevector.hpp"

namespace qtopo {

// Block operator A = sum_j (1/2)((1+eps) I - (1-eps) Z_j) (x) K_j. It is
// block-diagonal over the structure register: block x acts as K(x). The
// action is evaluated blockwise (2^m dense blocks of size 2^n) instead of
// densifying the full 2^{m+n} matrix.
class BlockOperatorA {
 public:
  explicit BlockOperatorA(const AssembledSystem& sys);

  int total_qubits() const { return sys_->edge_count + sys_->node_qubits; }

  // <psi| A |psi>, summed over blocks in index order.
  double expectation(const StateVector& psi) const;

  // out = A |in|.
  void apply(const StateVector& in, StateVector& out) const;

  // Per-block quadratic forms <psi_x| K(x) |psi_x>.
  std::vector<double> block_expectations(const StateVector& psi) const;

  // Full dense matrix; intended for small systems in tests.
  Eigen::MatrixXd dense() const;

  const AssembledSystem& system() const { return *sys_; }

 private:
  const AssembledSystem* sys_;
  std::size_t block_dim_;
  std::vector<double> stacked_;  // 2^m row-major K(x) blocks
};

// O = |v_target><v_target| on the node register, together with the X-gate
// product that maps |v_target> to |0...0> (its own inverse).
struct TargetObservable {
  int node_qubits = 0;
  std::uint64_t target_index = 0;

  static TargetObservable for_system(const AssembledSystem& sys);

  // X gates on the node-register qubits where target_index has a set bit.
  // `total_qubits` embeds the node register as the trailing qubits.
  Circuit unprojector(int total_qubits) const;

  Eigen::MatrixXd dense() const;
};

// Extended-Bell-measurement decomposition of one element matrix. A reduced
// free-free edge matrix has the single nonzero eigenpair
// (2 lambda / l, (|v_a> - |v_b>)/sqrt(2)); a base-incident edge reduces to
// (lambda / l) |v_w><v_w|. Both measurement branches of an edge estimate that
// eigenweight: the minus branch reads it at outcome v_a after M_-^dagger, the
// plus branch at outcome v_b after M_+^dagger, and their average enters the
// estimator. M_+- are realized as basis permutation + H on the last node
// qubit + inverse permutation.
struct XbmTerm {
  int edge = 0;
  double eigenvalue = 0.0;       // 2*lambda/l free-free, lambda/l base-incident
  bool base_incident = false;
  std::uint64_t v_a = 0;         // free index of the first endpoint
  std::uint64_t v_b = 0;         // second endpoint (= v_a when base-incident)
  Circuit m_plus;                // on node_qubits qubits
  Circuit m_minus;
  std::uint64_t ref_plus = 0;    // node outcome carrying the eigenweight
  std::uint64_t ref_minus = 0;

  // eigenvalue * mean over branches of V |ref><ref| V^dagger; equals the
  // reduced-and-padded element matrix.
  Eigen::MatrixXd reconstruct() const;
};

std::vector<XbmTerm> build_xbm_terms(const AssembledSystem& sys);

struct SampledValue {
  double value = 0.0;
  double std_error = 0.0;
};

double expect_A_exact(const BlockOperatorA& op, const StateVector& psi);

// |<b|psi>|^2.
double expect_bb_exact(const StateVector& b, const StateVector& psi);

// Shot-based <A> via the XBM decomposition: one measurement circuit per edge
// and sign, each with the full shot budget, combined as
// sum_j a_j [ (1+eps)/2 * (p+ + p-)/2 - (1-eps)/2 * (q+ + q-)/2 ].
SampledValue expect_A_sampled(const BlockOperatorA& op,
                              const std::vector<XbmTerm>& terms,
                              const Circuit& prepare_psi, std::uint64_t shots,
                              std::uint64_t seed);

// Inversion test: runs prepare_b + U_theta + prepare_b^dagger and returns the
// all-zeros frequency, an unbiased estimate of |<b|psi(theta)>|^2.
SampledValue expect_bb_inversion_test(const Circuit& prepare_b,
                                      const Circuit& u_theta, std::uint64_t shots,
                                      std::uint64_t seed);

// g(x) = <psi| (|x><x| (x) O) |psi> for every structure x.
std::vector<double> structure_weights(const StateVector& psi,
                                      const TargetObservable& obs, int edge_count);

// F_s = sum_x P_eta(x) g(x) with P_eta read off |phi(eta)|^2.
double expect_rhoO_exact(const StateVector& psi, const StateVector& phi,
                         const TargetObservable& obs);

struct RhoOSample {
  SampledValue total;
  std::vector<double> p_hat;  // sampled structure distribution of phi
  std::vector<double> f_hat;  // sampled projected frequencies from psi
};

// Sampled F_s: samples phi(eta) for P-hat, then measures psi(theta) with the
// target unprojector appended and reads f-hat(x) as the frequency of
// [structure = x and node register = 0...0]; returns sum_x P-hat(x) f-hat(x).
RhoOSample expect_rhoO_sampled(const Circuit& prepare_psi, const Circuit& prepare_phi,
                               const TargetObservable& obs, int edge_count,
                               std::uint64_t shots, std::uint64_t seed);

}  // namespace qtopo

#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <numbers>
#include <random>

#include "qtopo/ansatz.hpp"
#include "qtopo/operators.hpp"
#include "qtopo/oracle.hpp"

using namespace qtopo;

namespace {

GroundStructure tri3_gs() {
  GroundStructure gs;
  gs.num_nodes = 3;
  gs.edges = {{0, 2, 1.0}, {0, 1, 1.0}, {1, 2, 1.0}};
  gs.lambda = 1.0;
  gs.epsilon = 0.1;
  gs.source = 0;
  gs.target = 1;
  gs.base = 2;
  return gs;
}

// Two-edge path with the base at the end: source 0 - target 1 - base 2.
GroundStructure path_m2() {
  GroundStructure gs;
  gs.num_nodes = 3;
  gs.edges = {{0, 1, 1.0}, {1, 2, 1.0}};
  gs.lambda = 1.0;
  gs.epsilon = 0.1;
  gs.source = 0;
  gs.target = 1;
  gs.base = 2;
  return gs;
}

GroundStructure padded_gs() {
  GroundStructure gs;
  gs.num_nodes = 4;
  gs.edges = {{0, 1, 1.0}, {1, 2, 2.0}, {2, 3, 1.0}, {0, 3, 1.5}};
  gs.lambda = 2.0;
  gs.epsilon = 0.25;
  gs.source = 0;
  gs.target = 2;
  gs.base = 3;
  return gs;
}

StateVector b_state(const AssembledSystem& sys) {
  StateVector b = StateVector::zero_state(sys.edge_count + sys.node_qubits);
  apply(b, prepare_b_circuit(sys.edge_count, sys.node_qubits,
                             static_cast<std::uint64_t>(sys.source_index)));
  return b;
}

std::vector<double> random_angles(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  std::vector<double> v(count);
  for (auto& t : v) t = angle(rng);
  return v;
}

}  // namespace

TEST_CASE("dense A matches the m=2 block layout") {
  const AssembledSystem sys = assemble(path_m2());
  const BlockOperatorA op(sys);
  const Eigen::MatrixXd a = op.dense();
  REQUIRE(a.rows() == 8);

  const Eigen::MatrixXd k1 = sys.element_matrices[0];
  const Eigen::MatrixXd k2 = sys.element_matrices[1];
  const double eps = sys.epsilon;
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(8, 8);
  expected.block(0, 0, 2, 2) = eps * k1 + eps * k2;
  expected.block(2, 2, 2, 2) = eps * k1 + k2;
  expected.block(4, 4, 2, 2) = k1 + eps * k2;
  expected.block(6, 6, 2, 2) = k1 + k2;
  CHECK((a - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("A is block diagonal, Hermitian and positive definite") {
  const AssembledSystem sys = assemble(tri3_gs());
  const BlockOperatorA op(sys);
  const Eigen::MatrixXd a = op.dense();
  CHECK((a - a.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  for (int r = 0; r < a.rows(); ++r) {
    for (int c = 0; c < a.cols(); ++c) {
      if (r / 2 != c / 2) CHECK(a(r, c) == 0.0);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  CHECK(eig.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("exact expectations of A") {
  const AssembledSystem sys = assemble(tri3_gs());
  const BlockOperatorA op(sys);

  // <b|A|b> = 1.1 on tri3
  CHECK(op.expectation(b_state(sys)) == doctest::Approx(1.1).epsilon(1e-12));

  // basis state |x> (x) |i> picks the diagonal entry K(x)[i][i]
  StateVector basis = StateVector::zero_state(4);
  apply(basis, Gate::x(0));  // x = 100
  apply(basis, Gate::x(3));  // node index 1
  const Eigen::MatrixXd kx = structure_stiffness(sys, structure_from_string("100"));
  CHECK(op.expectation(basis) == doctest::Approx(kx(1, 1)).epsilon(1e-12));

  // action consistency with the dense matrix
  StateVector s(4);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& amp : s.amps) amp = cplx{gauss(rng), gauss(rng)};
  StateVector out;
  op.apply(s, out);
  Eigen::VectorXcd v(16), expect(16);
  for (int i = 0; i < 16; ++i) v(i) = s.amps[static_cast<std::size_t>(i)];
  expect = op.dense() * v;
  for (int i = 0; i < 16; ++i) {
    CHECK(std::abs(out.amps[static_cast<std::size_t>(i)] - expect(i)) < 1e-12);
  }
}

TEST_CASE("XBM terms reproduce every element matrix") {
  for (const GroundStructure& gs : {tri3_gs(), padded_gs()}) {
    const AssembledSystem sys = assemble(gs);
    const auto terms = build_xbm_terms(sys);
    REQUIRE(terms.size() == static_cast<std::size_t>(sys.edge_count));
    for (const XbmTerm& t : terms) {
      const Eigen::MatrixXd rebuilt = t.reconstruct();
      const Eigen::MatrixXd& k = sys.element_matrices[static_cast<std::size_t>(t.edge)];
      // padded identity rows are not part of the measurement decomposition
      Eigen::MatrixXd k_reduced = k;
      for (Eigen::Index d = sys.free_count; d < k.rows(); ++d) k_reduced(d, d) = 0.0;
      CHECK((rebuilt - k_reduced).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("M_plus and M_minus act as Bell-pair builders on |v_a>") {
  const AssembledSystem sys = assemble(padded_gs());
  const auto terms = build_xbm_terms(sys);
  for (const XbmTerm& t : terms) {
    if (t.base_incident) continue;
    StateVector va = StateVector::zero_state(sys.node_qubits);
    va.amps[0] = 0.0;
    va.amps[t.v_a] = 1.0;
    StateVector plus = va;
    apply(plus, t.m_plus);
    StateVector minus = va;
    apply(minus, t.m_minus);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(plus.amps[t.v_a].real() == doctest::Approx(r).epsilon(1e-12));
    CHECK(plus.amps[t.v_b].real() == doctest::Approx(r).epsilon(1e-12));
    CHECK(minus.amps[t.v_a].real() == doctest::Approx(r).epsilon(1e-12));
    CHECK(minus.amps[t.v_b].real() == doctest::Approx(-r).epsilon(1e-12));
  }
}

TEST_CASE("sampled <A> is unbiased at |b> on tri3") {
  const AssembledSystem sys = assemble(tri3_gs());
  const BlockOperatorA op(sys);
  const auto terms = build_xbm_terms(sys);
  const Circuit prep = prepare_b_circuit(sys.edge_count, sys.node_qubits,
                                         static_cast<std::uint64_t>(sys.source_index));
  const SampledValue est = expect_A_sampled(op, terms, prep, 100000, 17);
  CHECK(std::abs(est.value - 1.1) < 3.0 * est.std_error + 1e-9);
  CHECK(est.std_error > 0.0);
  // determinism
  const SampledValue est2 = expect_A_sampled(op, terms, prep, 100000, 17);
  CHECK(est.value == est2.value);
}

TEST_CASE("reported standard error shrinks like 1/sqrt(shots)") {
  const AssembledSystem sys = assemble(tri3_gs());
  const BlockOperatorA op(sys);
  const auto terms = build_xbm_terms(sys);
  const auto theta = random_angles(16, 61);
  Circuit prep = prepare_b_circuit(sys.edge_count, sys.node_qubits,
                                   static_cast<std::uint64_t>(sys.source_index));
  prep.add(ansatz_circuit({4, 4}, theta));
  const double se_small = expect_A_sampled(op, terms, prep, 1000, 5).std_error;
  const double se_large = expect_A_sampled(op, terms, prep, 100000, 5).std_error;
  CHECK(se_small / se_large > 5.0);
  CHECK(se_small / se_large < 20.0);
}

TEST_CASE("sampled <A> on a basis state reproduces the diagonal entry") {
  const AssembledSystem sys = assemble(path_m2());
  const BlockOperatorA op(sys);
  const auto terms = build_xbm_terms(sys);
  // |x=11> (x) |node 0>: exact <A> = K(11)[0][0]
  Circuit prep(3);
  prep.add(Gate::x(0)).add(Gate::x(1));
  StateVector s = StateVector::zero_state(3);
  apply(s, prep);
  const double exact = op.expectation(s);
  const SampledValue est = expect_A_sampled(op, terms, prep, 200000, 23);
  CHECK(std::abs(est.value - exact) < 3.0 * est.std_error + 1e-9);
}

TEST_CASE("inversion test estimates |<b|psi>|^2") {
  const AssembledSystem sys = assemble(tri3_gs());
  const Circuit prep_b = prepare_b_circuit(sys.edge_count, sys.node_qubits,
                                           static_cast<std::uint64_t>(sys.source_index));

  // theta = 0 with even layers: every shot lands on all-zeros
  const std::vector<double> zeros(16, 0.0);
  const Circuit u_zero = ansatz_circuit({4, 4}, zeros);
  CHECK(expect_bb_inversion_test(prep_b, u_zero, 1, 3).value == 1.0);
  CHECK(expect_bb_inversion_test(prep_b, u_zero, 5000, 3).value == 1.0);

  // random theta: within 3 standard errors of the exact fidelity
  const auto theta = random_angles(16, 31);
  const Circuit u_theta = ansatz_circuit({4, 4}, theta);
  const StateVector psi = psi_state(sys, theta, 4);
  const double exact = expect_bb_exact(b_state(sys), psi);
  const SampledValue est = expect_bb_inversion_test(prep_b, u_theta, 100000, 7);
  CHECK(std::abs(est.value - exact) < 3.0 * est.std_error + 1e-9);
}

TEST_CASE("structure weights and rho(x)O expectations") {
  const AssembledSystem sys = assemble(tri3_gs());
  const TargetObservable obs = TargetObservable::for_system(sys);
  const OracleTable table = brute_force(sys);

  StateVector psi_hat(4);
  for (std::size_t i = 0; i < psi_hat.amps.size(); ++i) {
    psi_hat.amps[i] = table.psi(static_cast<Eigen::Index>(i)) / table.scale;
  }
  const auto g = structure_weights(psi_hat, obs, sys.edge_count);

  // g(x) = U_target(x)^2 / (2^m r^2)
  const double denom = 8.0 * table.scale * table.scale;
  for (std::uint64_t x = 0; x < 8; ++x) {
    CHECK(g[x] == doctest::Approx(table.objective[x] / denom).epsilon(1e-12));
  }

  // eta = 0: uniform weights give the mean of g
  const std::vector<double> eta0(3, 0.0);
  const StateVector phi0 = phi_state(3, eta0, 1);
  double mean_g = 0.0;
  for (double v : g) mean_g += v / 8.0;
  CHECK(expect_rhoO_exact(psi_hat, phi0, obs) == doctest::Approx(mean_g).epsilon(1e-12));

  // concentrated distribution picks out a single g(x): RY(+-pi/2) rows pin
  // each structure bit exactly
  const double hp = std::numbers::pi / 2.0;
  const std::vector<double> eta101 = {hp, -hp, hp};
  const StateVector phi101 = phi_state(3, eta101, 1);
  CHECK(phi101.probabilities()[5] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(expect_rhoO_exact(psi_hat, phi101, obs) ==
        doctest::Approx(g[5]).epsilon(1e-12));
  CHECK(g[5] == doctest::Approx((1.0 / 144.0) / denom).epsilon(1e-10));
}

TEST_CASE("sampled rho(x)O estimate tracks the exact value") {
  const AssembledSystem sys = assemble(tri3_gs());
  const TargetObservable obs = TargetObservable::for_system(sys);
  const auto theta = random_angles(16, 41);
  const std::vector<double> eta = random_angles(3, 43);
  const Circuit prep_psi = psi_preparation(sys, theta, 4);
  const Circuit prep_phi = phi_preparation(3, eta, 1);
  const StateVector psi = psi_state(sys, theta, 4);
  const StateVector phi = phi_state(3, eta, 1);
  const double exact = expect_rhoO_exact(psi, phi, obs);
  const RhoOSample est = expect_rhoO_sampled(prep_psi, prep_phi, obs, 3, 64000, 11);
  CHECK(std::abs(est.total.value - exact) < 3.0 * est.total.std_error + 1e-6);
}

TEST_CASE("weighted-sum bridge between oracle objectives and psi-hat") {
  const AssembledSystem sys = assemble(tri3_gs());
  const TargetObservable obs = TargetObservable::for_system(sys);
  const OracleTable table = brute_force(sys);
  StateVector psi_hat(4);
  for (std::size_t i = 0; i < psi_hat.amps.size(); ++i) {
    psi_hat.amps[i] = table.psi(static_cast<Eigen::Index>(i)) / table.scale;
  }
  const auto g = structure_weights(psi_hat, obs, sys.edge_count);

  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> p(8);
  double total = 0.0;
  for (auto& v : p) total += (v = unif(rng));
  for (auto& v : p) v /= total;

  double lhs = 0.0, rhs = 0.0;
  const double scale = 8.0 * table.scale * table.scale;
  for (std::uint64_t x = 0; x < 8; ++x) {
    lhs += p[x] * table.objective[x];
    rhs += p[x] * g[x] * scale;
  }
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

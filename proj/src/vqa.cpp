#include "qtopo/vqa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace qtopo {

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("adam: learning rate must be > 0");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
    throw std::invalid_argument("adam: betas must lie in [0, 1)");
  }
  if (iterations < 1) throw std::invalid_argument("adam: iterations must be >= 1");
}

Eigen::VectorXd adam_step(AdamState& state, const Eigen::VectorXd& params,
                          const Eigen::VectorXd& gradient, const AdamConfig& config) {
  if (params.size() != gradient.size() || params.size() != state.first_moment.size()) {
    throw std::invalid_argument("adam_step: dimension mismatch");
  }
  state.step_count += 1;
  state.first_moment = config.beta1 * state.first_moment + (1.0 - config.beta1) * gradient;
  state.second_moment = config.beta2 * state.second_moment +
                        (1.0 - config.beta2) * gradient.cwiseProduct(gradient).eval();
  const double c1 = 1.0 - std::pow(config.beta1, state.step_count);
  const double c2 = 1.0 - std::pow(config.beta2, state.step_count);
  const Eigen::VectorXd m_hat = state.first_moment / c1;
  const Eigen::VectorXd v_hat = state.second_moment / c2;
  return params - config.learning_rate *
                      (m_hat.array() / (v_hat.array().sqrt() + config.eps_hat)).matrix();
}

// ---------------------------------------------------------------------------
// stage 1

StageOneObjective::StageOneObjective(const AssembledSystem& sys, int layers,
                                     EvalBackend backend)
    : sys_(&sys),
      config_{sys.edge_count + sys.node_qubits, layers},
      backend_(backend),
      op_(sys),
      xbm_(build_xbm_terms(sys)),
      prepare_b_(prepare_b_circuit(sys.edge_count, sys.node_qubits,
                                   static_cast<std::uint64_t>(sys.source_index))),
      b_state_(StateVector::zero_state(sys.edge_count + sys.node_qubits)) {
  if (layers % 2 != 0) throw std::invalid_argument("stage 1: psi layers must be even");
  apply(b_state_, prepare_b_);
}

StageOneObjective::Expectations StageOneObjective::measure(std::span<const double> theta,
                                                           std::uint64_t s1,
                                                           std::uint64_t s2) const {
  Expectations e;
  if (backend_.mode == BackendMode::Exact) {
    const StateVector psi = psi_state(*sys_, theta, config_.layers);
    e.bb = expect_bb_exact(b_state_, psi);
    e.aa = op_.expectation(psi);
    return e;
  }
  const Circuit u_theta = ansatz_circuit(config_, theta);
  Circuit prep = prepare_b_;
  prep.add(u_theta);
  e.bb = expect_bb_inversion_test(prepare_b_, u_theta, backend_.shots, s1).value;
  e.aa = expect_A_sampled(op_, xbm_, prep, backend_.shots, s2).value;
  return e;
}

StageOneObjective::Value StageOneObjective::evaluate(std::span<const double> theta,
                                                     std::uint64_t tag_iter,
                                                     std::uint64_t tag_param,
                                                     std::uint64_t tag_shift) const {
  if (static_cast<int>(theta.size()) != parameter_count()) {
    throw std::invalid_argument("stage 1: parameter length mismatch");
  }
  const std::uint64_t tag =
      derive_seed(backend_.seed, 0x51, tag_iter, tag_param, tag_shift);
  Expectations e = measure(theta, derive_seed(tag, 1), derive_seed(tag, 2));
  if (backend_.mode == BackendMode::Sampled) {
    // A is positive definite, so the exact denominator is positive; a
    // non-positive estimate is a statistical fluke worth a fresh draw.
    int retries = 0;
    while (e.aa <= 0.0 && retries < 3) {
      ++retries;
      e = measure(theta, derive_seed(tag, 1, static_cast<std::uint64_t>(retries)),
                  derive_seed(tag, 2, static_cast<std::uint64_t>(retries)));
    }
    if (e.aa <= 0.0) {
      throw EvaluationError("stage 1: sampled <A> estimate stayed non-positive after 3 "
                            "re-draws (iteration " +
                            std::to_string(tag_iter) + ")");
    }
  }
  return {-e.bb / e.aa, e.bb, e.aa};
}

Eigen::VectorXd StageOneObjective::gradient(std::span<const double> theta,
                                            const Value& base,
                                            std::uint64_t tag_iter) const {
  const int p = parameter_count();
  Eigen::VectorXd grad(p);
  const double half_pi = std::numbers::pi / 2.0;
  std::vector<double> shifted(theta.begin(), theta.end());
#pragma omp parallel for schedule(dynamic) firstprivate(shifted)
  for (int i = 0; i < p; ++i) {
    shifted[static_cast<std::size_t>(i)] = theta[static_cast<std::size_t>(i)] + half_pi;
    const std::uint64_t tag_p =
        derive_seed(backend_.seed, 0x51, tag_iter, static_cast<std::uint64_t>(i) + 1, 1);
    const Expectations plus =
        measure(shifted, derive_seed(tag_p, 1), derive_seed(tag_p, 2));
    shifted[static_cast<std::size_t>(i)] = theta[static_cast<std::size_t>(i)] - half_pi;
    const std::uint64_t tag_m =
        derive_seed(backend_.seed, 0x51, tag_iter, static_cast<std::uint64_t>(i) + 1, 2);
    const Expectations minus =
        measure(shifted, derive_seed(tag_m, 1), derive_seed(tag_m, 2));
    shifted[static_cast<std::size_t>(i)] = theta[static_cast<std::size_t>(i)];

    const double d_bb = 0.5 * (plus.bb - minus.bb);
    const double d_aa = 0.5 * (plus.aa - minus.aa);
    grad(i) = -d_bb / base.aa + base.bb * d_aa / (base.aa * base.aa);
  }
  return grad;
}

double StageOneObjective::r_star(const Value& v) {
  return v.aa > 0.0 ? std::sqrt(std::max(v.bb, 0.0)) / v.aa : 0.0;
}

double f_u(const StageOneObjective& obj, std::span<const double> theta) {
  return obj.evaluate(theta, 0, 0, 0).f_u;
}

double r_star(const StageOneObjective& obj, std::span<const double> theta) {
  return StageOneObjective::r_star(obj.evaluate(theta, 0, 0, 0));
}

Eigen::VectorXd grad_f_u(const StageOneObjective& obj, std::span<const double> theta) {
  const auto base = obj.evaluate(theta, 0, 0, 0);
  return obj.gradient(theta, base, 0);
}

// ---------------------------------------------------------------------------
// stage 2

StageTwoObjective::StageTwoObjective(const AssembledSystem& sys, int layers_phi,
                                     EvalBackend backend, Circuit prepare_psi_star,
                                     const StateVector& psi_star)
    : sys_(&sys),
      config_{sys.edge_count, layers_phi},
      backend_(backend),
      obs_(TargetObservable::for_system(sys)),
      prepare_psi_star_(std::move(prepare_psi_star)) {
  g_exact_ = structure_weights(psi_star, obs_, sys.edge_count);
  g_active_ = g_exact_;
}

void StageTwoObjective::begin_iteration(std::uint64_t iteration) {
  if (backend_.mode == BackendMode::Exact) return;
  // Re-measure the frozen psi(theta*) circuit: projective measurement of the
  // structure register with the target unprojector on the node register.
  StateVector psi = StateVector::zero_state(prepare_psi_star_.num_qubits);
  apply(psi, prepare_psi_star_);
  apply(psi, obs_.unprojector(prepare_psi_star_.num_qubits));
  const auto counts =
      sample(psi, backend_.shots, derive_seed(backend_.seed, 0x52F, iteration));
  const std::uint64_t node_mask = (std::uint64_t{1} << sys_->node_qubits) - 1;
  std::fill(g_active_.begin(), g_active_.end(), 0.0);
  for (const auto& [index, count] : counts) {
    if ((index & node_mask) != 0) continue;
    g_active_[index >> sys_->node_qubits] +=
        static_cast<double>(count) / static_cast<double>(backend_.shots);
  }
}

std::vector<double> StageTwoObjective::structure_distribution(
    std::span<const double> eta, std::uint64_t s) const {
  const StateVector phi = phi_state(sys_->edge_count, eta, config_.layers);
  if (backend_.mode == BackendMode::Exact) return phi.probabilities();
  std::vector<double> p(phi.dim(), 0.0);
  const auto counts = sample(phi, backend_.shots, s);
  for (const auto& [x, count] : counts) {
    p[x] = static_cast<double>(count) / static_cast<double>(backend_.shots);
  }
  return p;
}

double StageTwoObjective::evaluate(std::span<const double> eta, std::uint64_t tag_iter,
                                   std::uint64_t tag_param,
                                   std::uint64_t tag_shift) const {
  if (static_cast<int>(eta.size()) != parameter_count()) {
    throw std::invalid_argument("stage 2: parameter length mismatch");
  }
  const std::uint64_t s =
      derive_seed(backend_.seed, 0x52, tag_iter, tag_param, tag_shift);
  const std::vector<double> p = structure_distribution(eta, s);
  double acc = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) acc += p[x] * g_active_[x];
  return acc;
}

Eigen::VectorXd StageTwoObjective::gradient(std::span<const double> eta,
                                            std::uint64_t tag_iter) const {
  const int p = parameter_count();
  Eigen::VectorXd grad(p);
  const double half_pi = std::numbers::pi / 2.0;
  std::vector<double> shifted(eta.begin(), eta.end());
#pragma omp parallel for schedule(dynamic) firstprivate(shifted)
  for (int i = 0; i < p; ++i) {
    shifted[static_cast<std::size_t>(i)] = eta[static_cast<std::size_t>(i)] + half_pi;
    const double plus =
        evaluate(shifted, tag_iter, static_cast<std::uint64_t>(i) + 1, 1);
    shifted[static_cast<std::size_t>(i)] = eta[static_cast<std::size_t>(i)] - half_pi;
    const double minus =
        evaluate(shifted, tag_iter, static_cast<std::uint64_t>(i) + 1, 2);
    shifted[static_cast<std::size_t>(i)] = eta[static_cast<std::size_t>(i)];
    grad(i) = 0.5 * (plus - minus);
  }
  return grad;
}

double f_s(const StageTwoObjective& obj, std::span<const double> eta) {
  return obj.evaluate(eta, 0, 0, 0);
}

Eigen::VectorXd grad_f_s(const StageTwoObjective& obj, std::span<const double> eta) {
  return obj.gradient(eta, 0);
}

// ---------------------------------------------------------------------------
// pipeline

namespace {

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

// On EvaluationError the partial history up to the failing iteration is
// kept in `result` and the error rethrown for the pipeline to report.
void optimize_stage_one(const StageOneObjective& objective, const AdamConfig& adam,
                        StageResult& result) {
  result.history.reserve(static_cast<std::size_t>(adam.iterations) + 1);
  result.grad_norms.reserve(static_cast<std::size_t>(adam.iterations) + 1);
  Eigen::VectorXd params = Eigen::VectorXd::Zero(objective.parameter_count());
  AdamState state(params.size());
  result.best_objective = std::numeric_limits<double>::infinity();

  for (int t = 0; t <= adam.iterations; ++t) {
    const auto tag = static_cast<std::uint64_t>(t);
    const StageOneObjective::Value value = objective.evaluate(as_span(params), tag, 0, 0);
    result.history.push_back(value.f_u);
    if (value.f_u < result.best_objective) {
      result.best_objective = value.f_u;
      result.best_params = params;
      result.best_iteration = t;
      result.r_star = StageOneObjective::r_star(value);
    }
    const Eigen::VectorXd grad = objective.gradient(as_span(params), value, tag);
    result.grad_norms.push_back(grad.norm());
    if (t < adam.iterations) params = adam_step(state, params, grad, adam);
  }
}

void optimize_stage_two(StageTwoObjective& objective, const AdamConfig& adam,
                        StageResult& result) {
  result.history.reserve(static_cast<std::size_t>(adam.iterations) + 1);
  result.grad_norms.reserve(static_cast<std::size_t>(adam.iterations) + 1);
  Eigen::VectorXd params = Eigen::VectorXd::Zero(objective.parameter_count());
  AdamState state(static_cast<Eigen::Index>(params.size()));
  result.best_objective = std::numeric_limits<double>::infinity();

  for (int t = 0; t <= adam.iterations; ++t) {
    const auto tag = static_cast<std::uint64_t>(t);
    objective.begin_iteration(tag);
    const double value = objective.evaluate(as_span(params), tag, 0, 0);
    result.history.push_back(value);
    if (value < result.best_objective) {
      result.best_objective = value;
      result.best_params = params;
      result.best_iteration = t;
    }
    const Eigen::VectorXd grad = objective.gradient(as_span(params), tag);
    result.grad_norms.push_back(grad.norm());
    if (t < adam.iterations) params = adam_step(state, params, grad, adam);
  }
}

}  // namespace

RunResult run_pipeline(const AssembledSystem& sys, const RunConfig& config) {
  config.adam.validate();
  if (config.mode == BackendMode::Sampled && config.shots < 1) {
    throw std::invalid_argument("run: sampled mode needs shots >= 1");
  }
  RunResult result;
  const EvalBackend backend{config.mode, config.shots, config.seed};

  // Step 1/2: theta = 0, minimize F_u, keep the lowest point of the history.
  StageOneObjective stage1(sys, config.layers_psi, backend);
  try {
    optimize_stage_one(stage1, config.adam, result.stage_u);
  } catch (const EvaluationError& err) {
    result.aborted = true;
    result.abort_reason = err.what();
    return result;  // stage_u carries the partial history
  }
  result.r_star = result.stage_u.r_star;

  const std::span<const double> theta_bar = as_span(result.stage_u.best_params);
  const StateVector psi_bar = psi_state(sys, theta_bar, config.layers_psi);
  const Circuit psi_prep = psi_preparation(sys, theta_bar, config.layers_psi);

  // Stationarity diagnostic at theta-bar.
  {
    StateVector a_psi;
    stage1.block_operator().apply(psi_bar, a_psi);
    StateVector b = StateVector::zero_state(psi_bar.num_qubits);
    apply(b, prepare_b_circuit(sys.edge_count, sys.node_qubits,
                               static_cast<std::uint64_t>(sys.source_index)));
    const double denom = a_psi.norm();
    result.residual_alignment = denom > 0.0 ? std::abs(inner(b, a_psi)) / denom : 0.0;
  }

  // Step 3: freeze theta*, minimize F_s.
  StageTwoObjective stage2(sys, config.layers_phi, backend, psi_prep, psi_bar);
  try {
    optimize_stage_two(stage2, config.adam, result.stage_s);
  } catch (const EvaluationError& err) {
    result.aborted = true;
    result.abort_reason = err.what();
    return result;
  }

  // Step 4: read the structure distribution off phi(eta-bar).
  const std::span<const double> eta_bar = as_span(result.stage_s.best_params);
  const StateVector phi_bar = phi_state(sys.edge_count, eta_bar, config.layers_phi);
  if (config.mode == BackendMode::Exact) {
    result.final_distribution = phi_bar.probabilities();
  } else {
    result.final_distribution.assign(phi_bar.dim(), 0.0);
    const auto counts =
        sample(phi_bar, config.shots, derive_seed(config.seed, 0xD157, 0));
    for (const auto& [x, count] : counts) {
      result.final_distribution[x] =
          static_cast<double>(count) / static_cast<double>(config.shots);
    }
  }
  std::uint64_t best_x = 0;
  for (std::uint64_t x = 1; x < result.final_distribution.size(); ++x) {
    if (result.final_distribution[x] > result.final_distribution[best_x]) best_x = x;
  }
  result.selected_structure = best_x;
  result.selected_probability = result.final_distribution[best_x];

  // Oracle references for |F - F*| traces and end-to-end checks.
  if (sys.edge_count <= config.oracle_edge_cap) {
    const OracleTable table = brute_force(sys);
    result.has_oracle = true;
    result.f_u_reference = -table.b_ainv_b;
    result.oracle_optimum = table.argmin;
    const std::vector<double>& g = stage2.exact_weights();
    result.f_s_reference = *std::min_element(g.begin(), g.end());
    StateVector oracle_state(psi_bar.num_qubits);
    for (std::size_t i = 0; i < oracle_state.amps.size(); ++i) {
      oracle_state.amps[i] = table.psi(static_cast<Eigen::Index>(i)) / table.scale;
    }
    result.fidelity_to_oracle = std::norm(inner(oracle_state, psi_bar));
  }
  return result;
}

}  // namespace qtopo

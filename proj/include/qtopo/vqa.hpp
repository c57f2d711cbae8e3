#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qtopo/ansatz.hpp"
#include "qtopo/model.hpp"
#include "qtopo/operators.hpp"
#include "qtopo/oracle.hpp"

namespace qtopo {

struct AdamConfig {
  double learning_rate = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;
  int iterations = 1000;

  void validate() const;
};

struct AdamState {
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  int step_count = 0;

  explicit AdamState(Eigen::Index dim)
      : first_moment(Eigen::VectorXd::Zero(dim)),
        second_moment(Eigen::VectorXd::Zero(dim)) {}
};

// One bias-corrected update; deterministic.
Eigen::VectorXd adam_step(AdamState& state, const Eigen::VectorXd& params,
                          const Eigen::VectorXd& gradient, const AdamConfig& config);

enum class BackendMode { Exact, Sampled };

struct EvalBackend {
  BackendMode mode = BackendMode::Exact;
  std::uint64_t shots = 32000;
  std::uint64_t seed = 0;
};

// Raised when a sampled denominator estimate stays non-positive after the
// retry budget; carries the diagnostics the pipeline reports.
struct EvaluationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Stage-1 objective F_u(theta) = -|<b|psi>|^2 / <psi|A|psi> with its
// constituent expectations, in exact or shot-sampled form.
class StageOneObjective {
 public:
  StageOneObjective(const AssembledSystem& sys, int layers, EvalBackend backend);

  struct Value {
    double f_u = 0.0;
    double bb = 0.0;  // |<b|psi>|^2
    double aa = 0.0;  // <psi|A|psi>
  };

  int parameter_count() const { return config_.parameter_count(); }
  const BlockOperatorA& block_operator() const { return op_; }
  const AssembledSystem& system() const { return *sys_; }
  int layers() const { return config_.layers; }

  // tag identifies the evaluation for seed derivation: (iteration,
  // parameter slot, shift slot); exact mode ignores it.
  Value evaluate(std::span<const double> theta, std::uint64_t tag_iter,
                 std::uint64_t tag_param, std::uint64_t tag_shift) const;

  // Parameter-shift gradient combined by the quotient rule around `base`.
  Eigen::VectorXd gradient(std::span<const double> theta, const Value& base,
                           std::uint64_t tag_iter) const;

  static double r_star(const Value& v);

 private:
  struct Expectations {
    double bb = 0.0;
    double aa = 0.0;
  };
  Expectations measure(std::span<const double> theta, std::uint64_t s1,
                       std::uint64_t s2) const;

  const AssembledSystem* sys_;
  AnsatzConfig config_;
  EvalBackend backend_;
  BlockOperatorA op_;
  std::vector<XbmTerm> xbm_;
  Circuit prepare_b_;
  StateVector b_state_;
};

double f_u(const StageOneObjective& obj, std::span<const double> theta);
double r_star(const StageOneObjective& obj, std::span<const double> theta);
Eigen::VectorXd grad_f_u(const StageOneObjective& obj, std::span<const double> theta);

// Stage-2 objective F_s(eta) = sum_x P_eta(x) g(x), the diagonal observable
// expectation <phi(eta)| G |phi(eta)> with G = diag(g). theta* is frozen:
// in exact mode g is computed once from psi(theta*); in sampled mode the
// projected frequencies are re-estimated each iteration.
class StageTwoObjective {
 public:
  StageTwoObjective(const AssembledSystem& sys, int layers_phi, EvalBackend backend,
                    Circuit prepare_psi_star, const StateVector& psi_star);

  int parameter_count() const { return config_.parameter_count(); }
  int layers() const { return config_.layers; }
  const std::vector<double>& exact_weights() const { return g_exact_; }

  // Sampled mode refreshes the psi-side frequency estimates; exact mode is a
  // no-op. Call once per optimizer iteration.
  void begin_iteration(std::uint64_t iteration);

  double evaluate(std::span<const double> eta, std::uint64_t tag_iter,
                  std::uint64_t tag_param, std::uint64_t tag_shift) const;

  Eigen::VectorXd gradient(std::span<const double> eta, std::uint64_t tag_iter) const;

 private:
  std::vector<double> structure_distribution(std::span<const double> eta,
                                             std::uint64_t s) const;

  const AssembledSystem* sys_;
  AnsatzConfig config_;
  EvalBackend backend_;
  TargetObservable obs_;
  Circuit prepare_psi_star_;
  std::vector<double> g_exact_;    // from the exact psi(theta*)
  std::vector<double> g_active_;   // what evaluate() uses (f-hat in sampled mode)
};

double f_s(const StageTwoObjective& obj, std::span<const double> eta);
Eigen::VectorXd grad_f_s(const StageTwoObjective& obj, std::span<const double> eta);

struct StageResult {
  std::vector<double> history;     // objective per iteration, size iterations+1
  std::vector<double> grad_norms;  // gradient norm at each iterate
  Eigen::VectorXd best_params;
  double best_objective = 0.0;
  int best_iteration = 0;
  double r_star = 0.0;  // stage 1 only
};

struct RunConfig {
  BackendMode mode = BackendMode::Exact;
  std::uint64_t shots = 32000;
  std::uint64_t seed = 0;
  AdamConfig adam;
  int layers_psi = 4;
  int layers_phi = 1;
  int oracle_edge_cap = 12;  // attach oracle references up to this edge count
};

struct RunResult {
  StageResult stage_u;
  StageResult stage_s;
  double r_star = 0.0;
  std::vector<double> final_distribution;  // over 2^m structures
  std::uint64_t selected_structure = 0;
  double selected_probability = 0.0;
  double residual_alignment = 0.0;  // |<b|A psi>| / ||A psi|| at theta-bar
  bool has_oracle = false;
  double f_u_reference = 0.0;           // -<b|A^{-1}|b>
  double f_s_reference = 0.0;           // min_x g(x) at the frozen theta*
  std::uint64_t oracle_optimum = 0;
  double fidelity_to_oracle = 0.0;      // |<Psi/r | psi(theta-bar)>|^2
  bool aborted = false;
  std::string abort_reason;
};

RunResult run_pipeline(const AssembledSystem& sys, const RunConfig& config);

}  // namespace qtopo

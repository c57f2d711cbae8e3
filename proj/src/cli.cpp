#include "qtopo/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "qtopo/ansatz.hpp"
#include "qtopo/operators.hpp"
#include "qtopo/oracle.hpp"

namespace qtopo::cli {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& tok, int line_no, const char* what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError(line_no, std::string("expected a number for ") + what + ", got '" + tok + "'");
  }
  if (pos != tok.size()) {
    throw ParseError(line_no, std::string("trailing characters in ") + what + " '" + tok + "'");
  }
  return v;
}

int parse_int(const std::string& tok, int line_no, const char* what) {
  std::size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError(line_no, std::string("expected an integer for ") + what + ", got '" + tok + "'");
  }
  if (pos != tok.size()) {
    throw ParseError(line_no, std::string("trailing characters in ") + what + " '" + tok + "'");
  }
  return v;
}

}  // namespace

GroundStructure parse_problem(std::istream& in) {
  GroundStructure gs;
  std::vector<int> node_ids;
  bool saw_lambda = false, saw_epsilon = false;
  std::optional<int> source, target, base;
  enum class Section { None, Nodes, Edges, Materials, Roles };
  Section section = Section::None;

  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::string line = raw;
    const auto tokens = tokenize(line);
    if (tokens.empty()) continue;

    if (tokens.size() == 1 && tokens[0].front() == '[') {
      const std::string& name = tokens[0];
      if (name == "[nodes]") section = Section::Nodes;
      else if (name == "[edges]") section = Section::Edges;
      else if (name == "[materials]") section = Section::Materials;
      else if (name == "[roles]") section = Section::Roles;
      else throw ParseError(line_no, "unknown section " + name);
      continue;
    }

    switch (section) {
      case Section::None:
        throw ParseError(line_no, "content before the first section header");
      case Section::Nodes: {
        if (tokens.size() != 1 && tokens.size() != 3) {
          throw ParseError(line_no, "node line must be 'id' or 'id x y'");
        }
        node_ids.push_back(parse_int(tokens[0], line_no, "node id"));
        break;
      }
      case Section::Edges: {
        if (tokens.size() != 3) throw ParseError(line_no, "edge line must be 'a b length'");
        Edge e;
        e.node_a = parse_int(tokens[0], line_no, "edge endpoint");
        e.node_b = parse_int(tokens[1], line_no, "edge endpoint");
        e.length = parse_double(tokens[2], line_no, "edge length");
        if (e.node_a == e.node_b) {
          throw ParseError(line_no, "edge " + std::to_string(gs.edges.size() + 1) +
                                        " is a self-loop on node " + std::to_string(e.node_a));
        }
        gs.edges.push_back(e);
        break;
      }
      case Section::Materials:
      case Section::Roles: {
        if (tokens.size() != 3 || tokens[1] != "=") {
          throw ParseError(line_no, "expected 'key = value'");
        }
        const std::string& key = tokens[0];
        if (section == Section::Materials) {
          if (key == "lambda") {
            gs.lambda = parse_double(tokens[2], line_no, "lambda");
            saw_lambda = true;
          } else if (key == "epsilon") {
            gs.epsilon = parse_double(tokens[2], line_no, "epsilon");
            saw_epsilon = true;
          } else {
            throw ParseError(line_no, "unknown materials key '" + key + "'");
          }
        } else {
          const int v = parse_int(tokens[2], line_no, key.c_str());
          if (key == "source") source = v;
          else if (key == "target") target = v;
          else if (key == "base") base = v;
          else throw ParseError(line_no, "unknown roles key '" + key + "'");
        }
        break;
      }
    }
  }

  if (node_ids.empty()) throw ParseError(line_no, "missing [nodes] section");
  if (gs.edges.empty()) throw ParseError(line_no, "missing [edges] section");
  if (!saw_lambda || !saw_epsilon) throw ParseError(line_no, "missing lambda/epsilon");
  if (!source || !target || !base) throw ParseError(line_no, "missing source/target/base roles");

  std::vector<int> sorted = node_ids;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] != static_cast<int>(i)) {
      throw ParseError(line_no, "node ids must be exactly 0.." +
                                    std::to_string(sorted.size() - 1));
    }
  }
  gs.num_nodes = static_cast<int>(node_ids.size());
  gs.source = *source;
  gs.target = *target;
  gs.base = *base;
  try {
    gs.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(line_no, e.what());
  }
  return gs;
}

GroundStructure parse_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open problem file " + path);
  return parse_problem(in);
}

std::string emit_problem(const GroundStructure& gs) {
  std::ostringstream os;
  os << "[nodes]\n";
  for (int v = 0; v < gs.num_nodes; ++v) os << v << "\n";
  os << "\n[edges]\n";
  for (const Edge& e : gs.edges) {
    os << e.node_a << " " << e.node_b << " " << fmt(e.length) << "\n";
  }
  os << "\n[materials]\n";
  os << "lambda = " << fmt(gs.lambda) << "\n";
  os << "epsilon = " << fmt(gs.epsilon) << "\n";
  os << "\n[roles]\n";
  os << "source = " << gs.source << "\n";
  os << "target = " << gs.target << "\n";
  os << "base = " << gs.base << "\n";
  return os.str();
}

namespace {

void write_history(const std::string& path, const StageResult& stage,
                   std::optional<double> reference) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "iteration,objective";
  if (reference) out << ",abs_error";
  out << ",grad_norm\n";
  for (std::size_t t = 0; t < stage.history.size(); ++t) {
    out << t << "," << fmt(stage.history[t]);
    if (reference) out << "," << fmt(std::abs(stage.history[t] - *reference));
    // an aborted stage can have one evaluated row whose gradient never ran
    out << "," << (t < stage.grad_norms.size() ? fmt(stage.grad_norms[t]) : "") << "\n";
  }
}

}  // namespace

int cmd_solve(const std::string& problem_path, const RunConfig& config,
              const std::string& out_dir, std::ostream& log, std::ostream& err) {
  if (config.layers_psi < 2 || config.layers_psi % 2 != 0) {
    err << "--layers-psi must be an even number >= 2\n";
    return kParseError;
  }
  if (config.mode == BackendMode::Sampled && config.shots < 1) {
    err << "--shots must be >= 1 in sampled mode\n";
    return kParseError;
  }
  GroundStructure gs;
  try {
    gs = parse_problem_file(problem_path);
  } catch (const ParseError& e) {
    err << "parse error in " << problem_path << ": " << e.what() << "\n";
    return kParseError;
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return kParseError;
  }

  const AssembledSystem sys = assemble(gs);
  RunResult result;
  try {
    result = run_pipeline(sys, config);
  } catch (const std::exception& e) {
    err << "pipeline error: " << e.what() << "\n";
    return kPipelineError;
  }
  std::filesystem::create_directories(out_dir);
  const std::optional<double> fu_ref =
      result.has_oracle ? std::optional<double>(result.f_u_reference) : std::nullopt;
  const std::optional<double> fs_ref =
      result.has_oracle ? std::optional<double>(result.f_s_reference) : std::nullopt;
  write_history(out_dir + "/history_fu.csv", result.stage_u, fu_ref);
  write_history(out_dir + "/history_fs.csv", result.stage_s, fs_ref);

  if (result.aborted) {
    err << "pipeline aborted: " << result.abort_reason << "\n";
    err << "partial histories written to " << out_dir << " (stage 1: "
        << result.stage_u.history.size() << " rows, stage 2: "
        << result.stage_s.history.size() << " rows)\n";
    return kPipelineError;
  }

  std::ofstream res(out_dir + "/results.txt", std::ios::binary);
  if (!res) {
    err << "cannot write " << out_dir << "/results.txt\n";
    return kPipelineError;
  }
  const int m = sys.edge_count;
  res << "problem: " << problem_path << "\n";
  res << "mode: " << (config.mode == BackendMode::Exact ? "exact" : "sampled") << "\n";
  if (config.mode == BackendMode::Sampled) res << "shots: " << config.shots << "\n";
  res << "seed: " << config.seed << "\n";
  res << "layers_psi: " << config.layers_psi << "\n";
  res << "layers_phi: " << config.layers_phi << "\n";
  res << "iterations: " << config.adam.iterations << "\n";
  res << "learning_rate: " << fmt(config.adam.learning_rate) << "\n";
  res << "selected_structure: " << structure_to_string(result.selected_structure, m) << "\n";
  res << "selected_probability: " << fmt(result.selected_probability) << "\n";
  res << "stage1_best_objective: " << fmt(result.stage_u.best_objective) << "\n";
  res << "stage1_best_iteration: " << result.stage_u.best_iteration << "\n";
  res << "r_star: " << fmt(result.r_star) << "\n";
  res << "stage2_best_objective: " << fmt(result.stage_s.best_objective) << "\n";
  res << "stage2_best_iteration: " << result.stage_s.best_iteration << "\n";
  res << "residual_alignment: " << fmt(result.residual_alignment) << "\n";
  if (result.has_oracle) {
    res << "f_u_reference: " << fmt(result.f_u_reference) << "\n";
    res << "f_s_reference: " << fmt(result.f_s_reference) << "\n";
    res << "oracle_optimum: " << structure_to_string(result.oracle_optimum, m) << "\n";
    res << "fidelity_to_oracle: " << fmt(result.fidelity_to_oracle) << "\n";
  }
  res << "final_distribution:\n";
  for (std::size_t x = 0; x < result.final_distribution.size(); ++x) {
    res << "  " << structure_to_string(x, m) << " " << fmt(result.final_distribution[x])
        << "\n";
  }

  log << "selected structure " << structure_to_string(result.selected_structure, m)
      << " with probability " << fmt(result.selected_probability) << "\n";
  if (result.has_oracle) {
    log << "oracle optimum " << structure_to_string(result.oracle_optimum, m)
        << (result.oracle_optimum == result.selected_structure ? " (match)" : " (MISMATCH)")
        << "\n";
  }
  return kOk;
}

int cmd_oracle(const std::string& problem_path, std::ostream& out, std::ostream& err,
               int max_edges) {
  GroundStructure gs;
  try {
    gs = parse_problem_file(problem_path);
  } catch (const std::exception& e) {
    err << "parse error in " << problem_path << ": " << e.what() << "\n";
    return kParseError;
  }
  const AssembledSystem sys = assemble(gs);
  OracleTable table;
  try {
    table = brute_force(sys, max_edges);
  } catch (const std::invalid_argument& e) {
    err << e.what() << "\n";
    return kCapExceeded;
  }
  std::vector<std::uint64_t> order(sys.structure_count());
  for (std::uint64_t x = 0; x < order.size(); ++x) order[x] = x;
  std::sort(order.begin(), order.end(), [&](std::uint64_t a, std::uint64_t b) {
    if (table.objective[a] != table.objective[b]) {
      return table.objective[a] < table.objective[b];
    }
    return a < b;
  });
  out << "structure,U_target,objective\n";
  for (std::uint64_t x : order) {
    out << structure_to_string(x, sys.edge_count) << "," << fmt(table.target_temperature[x])
        << "," << fmt(table.objective[x]);
    if (x == table.argmin) out << ",argmin";
    out << "\n";
  }
  return kOk;
}

namespace {

std::vector<double> read_parameter_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open parameter file " + path);
  std::vector<double> values;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    for (const std::string& tok : tokenize(raw)) {
      values.push_back(parse_double(tok, line_no, "parameter"));
    }
  }
  return values;
}

}  // namespace

int cmd_estimate(const std::string& problem_path, const std::string& theta_path,
                 const RunConfig& config, std::ostream& out, std::ostream& err) {
  GroundStructure gs;
  std::vector<double> theta;
  try {
    gs = parse_problem_file(problem_path);
    theta = read_parameter_file(theta_path);
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return kParseError;
  }
  const AssembledSystem sys = assemble(gs);
  const int k = sys.edge_count + sys.node_qubits;
  const int expected = config.layers_psi * k;
  if (static_cast<int>(theta.size()) != expected) {
    err << "parameter file has " << theta.size() << " values; ansatz with "
        << config.layers_psi << " layers on " << k << " qubits needs " << expected << "\n";
    return kParseError;
  }

  const BlockOperatorA op(sys);
  const auto xbm = build_xbm_terms(sys);
  const Circuit prep_b = prepare_b_circuit(sys.edge_count, sys.node_qubits,
                                           static_cast<std::uint64_t>(sys.source_index));
  const Circuit u_theta = ansatz_circuit({k, config.layers_psi}, theta);
  Circuit prep_psi = prep_b;
  prep_psi.add(u_theta);
  const StateVector psi = psi_state(sys, theta, config.layers_psi);
  StateVector b_state = StateVector::zero_state(k);
  apply(b_state, prep_b);

  const double a_exact = op.expectation(psi);
  const SampledValue a_est =
      expect_A_sampled(op, xbm, prep_psi, config.shots, derive_seed(config.seed, 0xE1));
  const double bb_exact = expect_bb_exact(b_state, psi);
  const SampledValue bb_est =
      expect_bb_inversion_test(prep_b, u_theta, config.shots, derive_seed(config.seed, 0xE2));

  out << "shots: " << config.shots << "\n";
  out << "<A>           exact " << fmt(a_exact) << "  sampled " << fmt(a_est.value)
      << " +/- " << fmt(a_est.std_error) << "\n";
  out << "|<b|psi>|^2   exact " << fmt(bb_exact) << "  sampled " << fmt(bb_est.value)
      << " +/- " << fmt(bb_est.std_error) << "\n";

  // F_s factors at eta = 0 (uniform structure superposition).
  const TargetObservable obs = TargetObservable::for_system(sys);
  const std::vector<double> eta(static_cast<std::size_t>(config.layers_phi * sys.edge_count),
                                0.0);
  const StateVector phi = phi_state(sys.edge_count, eta, config.layers_phi);
  const Circuit prep_phi = phi_preparation(sys.edge_count, eta, config.layers_phi);
  const std::vector<double> g = structure_weights(psi, obs, sys.edge_count);
  const std::vector<double> p = phi.probabilities();
  const RhoOSample rho = expect_rhoO_sampled(prep_psi, prep_phi, obs, sys.edge_count,
                                             config.shots, derive_seed(config.seed, 0xE3));
  out << "F_s factors (eta = 0):\n";
  out << "structure,P_eta_exact,P_hat,g_exact,f_hat\n";
  for (std::size_t x = 0; x < g.size(); ++x) {
    out << structure_to_string(x, sys.edge_count) << "," << fmt(p[x]) << ","
        << fmt(rho.p_hat[x]) << "," << fmt(g[x]) << "," << fmt(rho.f_hat[x]) << "\n";
  }
  const double fs_exact = expect_rhoO_exact(psi, phi, obs);
  out << "F_s           exact " << fmt(fs_exact) << "  sampled " << fmt(rho.total.value)
      << " +/- " << fmt(rho.total.std_error) << "\n";
  return kOk;
}

}  // namespace qtopo::cli

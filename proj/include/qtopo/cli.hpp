#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "qtopo/model.hpp"
#include "qtopo/vqa.hpp"

namespace qtopo::cli {

// Exit statuses shared by all subcommands.
inline constexpr int kOk = 0;
inline constexpr int kParseError = 2;    // problem/parameter file or dimension errors
inline constexpr int kPipelineError = 3; // a stage aborted
inline constexpr int kCapExceeded = 4;   // oracle enumeration refused

struct ParseError : std::runtime_error {
  int line = 0;
  ParseError(int line_no, const std::string& message)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + message),
        line(line_no) {}
};

// Problem files are section-based text:
//
//   [nodes]      one node per line: id [x y]   (coordinates are ignored)
//   [edges]      one edge per line: a b length
//   [materials]  lambda = <v>, epsilon = <v>
//   [roles]      source = <id>, target = <id>, base = <id>
//
// Unknown sections or keys are rejected.
GroundStructure parse_problem(std::istream& in);
GroundStructure parse_problem_file(const std::string& path);
std::string emit_problem(const GroundStructure& gs);

// Runs the two-stage pipeline and writes results.txt, history_fu.csv and
// history_fs.csv under out_dir. Returns an exit status.
int cmd_solve(const std::string& problem_path, const RunConfig& config,
              const std::string& out_dir, std::ostream& log, std::ostream& err);

// Prints all 2^m rows (structure, U_target, objective) sorted by objective.
int cmd_oracle(const std::string& problem_path, std::ostream& out, std::ostream& err,
               int max_edges = 20);

// Estimator validation harness: exact vs sampled values of <A>, |<b|psi>|^2
// and the F_s factors at eta = 0 for the parameters in theta_path.
int cmd_estimate(const std::string& problem_path, const std::string& theta_path,
                 const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace qtopo::cli

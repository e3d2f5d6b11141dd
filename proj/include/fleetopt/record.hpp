#pragma once

#include "fleetopt/bilevel.hpp"

#include <map>
#include <string>

namespace fleetopt {

/// Machine-readable result of one CLI run. Re-running the same command with
/// the same seed reproduces every numeric field except wall_time.
struct RunRecord {
  std::string command;
  std::string network_digest;
  std::map<std::string, double> parameters;
  std::string algorithm;
  std::uint64_t seed = 0;
  double total_profit = 0.0;
  double av_profit = 0.0;
  double cv_platform_profit = 0.0;
  VectorXd revealed;
  MatrixXd av_rates;
  MatrixXd cv_rates;
  VectorXd waiting;
  double av_active_mass = 0.0;
  double cv_active_mass = 0.0;
  int iterations = 0;
  long evaluations = 0;
  double wall_time = 0.0;
};

std::string fnv1a_hex(const std::string& bytes);

RunRecord make_record(const std::string& command, const std::string& network_digest,
                      const std::map<std::string, double>& parameters, std::uint64_t seed,
                      const BilevelSolution& solution);

std::string format_record(const RunRecord& record);
RunRecord parse_record(const std::string& text);
void save_record(const RunRecord& record, const std::string& path);
RunRecord load_record(const std::string& path);

/// Re-checks every equilibrium and feasibility invariant of a stored record
/// against the network it claims to solve. Profits are recomputed from the
/// stored rates; the stored totals must agree.
ValidationReport validate_record(const RunRecord& record, const NetworkSpec& spec);

}  // namespace fleetopt

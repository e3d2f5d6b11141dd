#pragma once

#include "fleetopt/cv_equilibrium.hpp"
#include "fleetopt/search.hpp"

#include <string>

namespace fleetopt {

/// Platform-optimal dispatch of a controlled fleet on demand `av_demand`:
/// maximize (reward_av - purchase_cost * drive_time) . x subject to
/// capacity, flow balance and, when `av_mass` is finite, a total active-mass
/// budget. Unutilized mass is allowed.
struct AvDispatch {
  MatrixXd rates;
  double profit = 0.0;       // objective value, net of purchase cost
  double active_mass = 0.0;  // drive_time . rates
  SolveStatus status = SolveStatus::Optimal;
};

AvDispatch av_dispatch_lp(const DerivedNetwork& net, const VectorXd& av_demand,
                          double av_mass, double purchase_cost = 0.0);

/// Outcome of one upper-level candidate: the revealed demand, the AV
/// dispatch on the residual, and the embedded CV equilibrium.
struct BilevelSolution {
  VectorXd revealed;
  MatrixXd av_rates;
  CvEquilibrium cv;
  double av_profit = 0.0;
  double total_profit = 0.0;
  double av_active_mass = 0.0;
  std::string algorithm;
  int iterations = 0;
  long evaluations = 0;
  double wall_time = 0.0;
  bool converged = true;
};

/// The objective all upper-level algorithms maximize: dispatch the AV fleet
/// on the demand not revealed to CVs, add the commission income of the CV
/// equilibrium on the revealed part.
BilevelSolution evaluate_profit(const DerivedNetwork& net, const VectorXd& revealed,
                                double av_mass, double cv_mass);

/// Dispatch AVs on the full demand first, reveal whatever they leave.
BilevelSolution av_first(const DerivedNetwork& net, double av_mass, double cv_mass);

VectorXd numerical_gradient(const DerivedNetwork& net, const VectorXd& revealed,
                            double av_mass, double cv_mass, double fd_step);

struct GdConfig {
  double step = 0.0;     // 0: 0.05 * max region demand
  double epsilon = 1e-6;
  int max_iterations = 100;
  double fd_step = 0.0;  // 0: 1e-4 * max region demand
};

struct BundleConfig {
  double proximal_weight = 0.0;  // 0: cv_mass * price / total demand
  double termination = 1e-6;
  double center_margin = 1e-7;
  int max_iterations = 100;
  double fd_step = 0.0;
};

struct GeneticConfig {
  int population = 10;
  double selection_q = 0.1;
  double crossover_prob = 0.5;
  double mutation_prob = 0.6;
  int max_generations = 100;
  int stall_window = 10;
  int retry_cap = 50;
  std::uint64_t seed = 0;
};

BilevelSolution gradient_descent(const DerivedNetwork& net, double av_mass, double cv_mass,
                                 const GdConfig& cfg, const VectorXd& start);
BilevelSolution bundle_method(const DerivedNetwork& net, double av_mass, double cv_mass,
                              const BundleConfig& cfg, const VectorXd& start);
BilevelSolution genetic(const DerivedNetwork& net, double av_mass, double cv_mass,
                        const GeneticConfig& cfg);
BilevelSolution exhaustive_search(const DerivedNetwork& net, double av_mass, double cv_mass,
                                  int steps_per_region, long max_evaluations = 1000000);

/// Start set used by the multi-start wrappers: the av-first residual plus
/// 0, b/4, b/2, 3b/4 and b.
std::vector<VectorXd> standard_starts(const DerivedNetwork& net, double av_mass,
                                      double cv_mass);

/// The 2^L corners of the demand box (capped; intended for small L).
std::vector<VectorXd> corner_starts(const DerivedNetwork& net);

BilevelSolution best_gradient_descent(const DerivedNetwork& net, double av_mass,
                                      double cv_mass, const GdConfig& cfg,
                                      const std::vector<VectorXd>& starts);
BilevelSolution best_bundle_method(const DerivedNetwork& net, double av_mass, double cv_mass,
                                   const BundleConfig& cfg, const std::vector<VectorXd>& starts);

/// Checks the feasibility invariants of a candidate solution against the
/// network and fleet sizes; returns per-condition residuals.
ValidationReport verify_bilevel(const DerivedNetwork& net, const BilevelSolution& sol,
                                double av_mass, double cv_mass);

}  // namespace fleetopt

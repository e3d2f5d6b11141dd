#pragma once

#include "fleetopt/lp.hpp"
#include "fleetopt/network.hpp"

namespace fleetopt {

/// maximize  mass * log(sum reward . x) - sum drive_time . x   over action
/// rates x >= 0 subject to per-region capacity (duals are the waiting
/// times) and flow balance under the routing matrix.
///
/// The optimizer is recovered from the scalarized family
///   max (theta * reward - drive_time) . x
/// whose optimal reward total is nondecreasing in theta; the root of
/// theta * reward_total = mass is located by bisection and the optimum is a
/// point on the final LP face with exactly that reward total. Capacity duals
/// of that LP are the waiting times.
struct ConcaveLogResult {
  MatrixXd rates;      // L x L action rates
  VectorXd waiting;    // capacity duals per region
  double value = 0.0;  // objective at the optimum (0 for the zero solution)
  double reward_total = 0.0;
  double drive_mass = 0.0;
  SolveStatus status = SolveStatus::Optimal;
  int iterations = 0;
};

ConcaveLogResult solve_concave_log(const MatrixXd& reward, const MatrixXd& drive_time,
                                   double mass, const VectorXd& capacity,
                                   const MatrixXd& routing, const std::vector<bool>& active,
                                   std::uint64_t perturb_seed = 0);

/// LP over the same feasible set: max reward . x subject to capacity, flow
/// balance, optionally a total drive-time budget. Used for the AV dispatch,
/// the controlled-fleet problem, and the zero-reward guard.
struct CirculationLp {
  MatrixXd objective;       // per-action coefficients
  VectorXd capacity;        // per-region service limits
  double mass_budget = -1;  // drive_time . x <= budget when >= 0
};

struct CirculationResult {
  MatrixXd rates;
  VectorXd capacity_duals;
  double mass_dual = 0.0;
  double value = 0.0;
  SolveStatus status = SolveStatus::Optimal;
  int iterations = 0;
};

CirculationResult solve_circulation_lp(const CirculationLp& problem, const MatrixXd& drive_time,
                                       const MatrixXd& routing, const std::vector<bool>& active,
                                       std::uint64_t perturb_seed = 0);

}  // namespace fleetopt

#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace fleetopt {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// maximize objective . x  subject to
///   eq_lhs x = eq_rhs,  ub_lhs x <= ub_rhs,  x >= 0.
/// Either constraint block may be empty (0 rows).
struct LinearProgram {
  VectorXd objective;
  MatrixXd eq_lhs;
  VectorXd eq_rhs;
  MatrixXd ub_lhs;
  VectorXd ub_rhs;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

const char* to_string(SolveStatus status);

struct SolveResult {
  VectorXd primal;
  VectorXd ineq_duals;  // one per ub row, nonnegative at optimum
  VectorXd eq_duals;    // one per eq row, sign-free
  double value = 0.0;
  SolveStatus status = SolveStatus::NumericalFailure;
  int iterations = 0;
  double max_residual = 0.0;  // worst primal/dual/slackness violation
};

struct SimplexOptions {
  // Nonzero seed shuffles the variable order used for entering-column
  // tie-breaks, selecting a different optimal vertex on degenerate faces.
  std::uint64_t perturb_seed = 0;
  int max_iterations = 0;  // 0: derived from problem size
  double tol = 1e-9;
};

/// Dense two-phase simplex. Entering column by largest reduced cost, with a
/// switch to Bland's least-index rule once degenerate pivots stall, so the
/// method cannot cycle. The final basis is refactorized against the original
/// data before primal and dual values are reported.
SolveResult solve_lp(const LinearProgram& lp, const SimplexOptions& options = {});

}  // namespace fleetopt

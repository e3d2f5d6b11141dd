#pragma once

#include "fleetopt/bilevel.hpp"

namespace fleetopt {

struct EndogenousConfig {
  double purchase_cost = 0.0;  // amortized cost per unit vehicle mass
  double driver_pool = 0.0;    // mass of potential drivers
  double bisect_tol = 1e-7;    // tolerance on the fleet mass
  int max_bisect_iterations = 60;
};

/// Profit of a revealed-demand candidate when the platform buys exactly the
/// AV mass it keeps active: the dispatch prices mass through the purchase
/// cost instead of a budget row.
BilevelSolution evaluate_profit_endogenous_av(const DerivedNetwork& net,
                                              const VectorXd& revealed, double purchase_cost,
                                              double cv_mass);

/// Participation fixed point: the mass N of working drivers satisfies
/// u(N) = ((1-R)p - c) N / pool with u the per-mass equilibrium earning,
/// located by bisection on the non-increasing u. Returns the mass and the
/// equilibrium at it.
struct CvCountResult {
  double fleet = 0.0;
  CvEquilibrium equilibrium;
  int iterations = 0;
  bool monotone = true;  // false if a probe contradicted non-increasing u
};

CvCountResult equilibrium_cv_count(const DerivedNetwork& net, const VectorXd& revealed,
                                   double pool, double tol = 1e-7, int max_iterations = 60);

enum class EndogenousAlgorithm { AvFirst, GradientDescent, Bundle, Genetic };

/// Upper-level search where every fitness call first resolves CV
/// participation by bisection and then prices AV mass by the purchase cost.
BilevelSolution solve_endogenous(const DerivedNetwork& net, const EndogenousConfig& cfg,
                                 EndogenousAlgorithm algorithm,
                                 const GdConfig& gd = {}, const BundleConfig& bundle = {},
                                 const GeneticConfig& genetic_cfg = {});

}  // namespace fleetopt

#pragma once

#include "fleetopt/network.hpp"

#include <string>

namespace fleetopt {

/// Cycle decomposition of an imbalanced two-region network (b_21 >= b_12,
/// b_21 > 0, region 1 with positive demand). The demand splits into a "stay"
/// cycle that serves without repositioning and a "reposition" cycle that
/// carries the cross-region imbalance; every threshold below is a mass or
/// price at which the optimal allocation changes structure.
struct TwoRegionAnalysis {
  MatrixXd stay_rates;        // normalized action rates of the stay cycle
  MatrixXd reposition_rates;  // normalized action rates of the reposition cycle
  double stay_unit_mass = 0;        // vehicle mass per unit stay-cycle rate
  double reposition_unit_mass = 0;  // vehicle mass per unit reposition rate
  double service_fraction = 0;      // serving share of reposition-cycle time
  double earning_ratio = 0;         // reposition vs stay driver earning per mass
  double commission_stay_limit = 0;       // above: drivers quit entirely
  double commission_reposition_limit = 0; // above: drivers never reposition
  double stay_mass = 0;        // mass serving the whole stay cycle
  double reposition_mass = 0;  // mass serving the whole reposition cycle
  double queue_threshold_mass = 0;  // stay mass + queue at the reposition point
  double waiting_threshold = 0;     // region-1 waiting that triggers repositioning
  double purchase_threshold1 = 0;  // above: repositioning better left to drivers
  double purchase_threshold2 = 0;  // above: reposition cycle loses money for AVs
  double purchase_threshold3 = 0;  // above: stay cycle better left to drivers
  double purchase_threshold4 = 0;  // above: drivers preferred even wasting demand
  double purchase_max = 0;         // above: no AV is ever bought

  double price = 0, cost = 0, commission = 0;
  double b11 = 0, b12 = 0, b21 = 0, b22 = 0;
};

TwoRegionAnalysis analyze_two_region(const NetworkSpec& spec);

struct TwoRegionOptimum {
  double profit = 0.0;
  MatrixXd av_rates;
  MatrixXd cv_rates;
  std::string case_label;
};

/// Closed-form optimum of the mixed-fleet problem for fleet masses (M, N).
TwoRegionOptimum closed_form_optimum(const NetworkSpec& spec, double av_mass,
                                     double cv_mass);

/// Closed-form optimum with endogenous AV purchase at amortized cost I and a
/// driver pool of mass `pool` with uniformly distributed opportunity costs.
TwoRegionOptimum closed_form_endogenous(const NetworkSpec& spec, double purchase_cost,
                                        double pool);

/// Commission income of a driver-only fleet of mass N with all demand
/// revealed, in closed form.
double cv_only_profit(const TwoRegionAnalysis& a, double fleet);

/// Waiting times and served rates of the single-destination instance (all
/// trips end in region 1, every leg takes `trip_time`) as the driver mass
/// grows through its four regimes.
struct SingleDestinationState {
  int regime = 1;
  double w1 = 0, w2 = 0;
  double served1 = 0, served2 = 0;
};

SingleDestinationState single_destination_regimes(double demand_rate, double trip_time,
                                                  double mass);
SingleDestinationState single_destination_regimes(const NetworkSpec& spec, double mass);

/// Swap the two region labels (used to meet the b_21 >= b_12 convention).
NetworkSpec swap_two_region(const NetworkSpec& spec);

/// Closed-form optimum profit with automatic relabeling.
double two_region_optimum_profit(const NetworkSpec& spec, double av_mass, double cv_mass);
double two_region_endogenous_profit(const NetworkSpec& spec, double purchase_cost,
                                    double pool);

}  // namespace fleetopt

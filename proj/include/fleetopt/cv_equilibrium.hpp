#pragma once

#include "fleetopt/concave.hpp"
#include "fleetopt/network.hpp"

#include <atomic>
#include <string>
#include <vector>

namespace fleetopt {

struct EquilibriumError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Tolerance used by equilibrium verification and record validation.
inline std::atomic<double>& validation_tolerance_slot() {
  static std::atomic<double> tol{1e-6};
  return tol;
}
inline double validation_tolerance() { return validation_tolerance_slot().load(); }
inline void set_validation_tolerance(double tol) { validation_tolerance_slot().store(tol); }

/// A conventional-vehicle equilibrium for a revealed demand vector: action
/// rates, per-region waiting times (capacity duals), and the derived profit
/// and mass totals.
struct CvEquilibrium {
  MatrixXd rates;
  VectorXd waiting;
  double driver_profit = 0.0;
  double active_mass = 0.0;
  double platform_profit = 0.0;
  VectorXd revealed_demand;
  double fleet_size = 0.0;
};

/// Computes the equilibrium for demand `revealed` (componentwise within the
/// network demand) and fleet mass `fleet`. A zero fleet, or a network where
/// no circulation earns a positive driver reward, yields the zero
/// equilibrium. `perturb_seed` selects among optima on degenerate faces
/// without affecting the platform profit or active mass.
CvEquilibrium solve_cv_equilibrium(const DerivedNetwork& net, const VectorXd& revealed,
                                   double fleet, std::uint64_t perturb_seed = 0);

/// Commission income of the platform at this equilibrium. Cross-checks the
/// transfer identity commission = R/(1-R) * (driver profit + cost * active
/// mass) and throws EquilibriumError if it fails.
double platform_profit_from_cv(const DerivedNetwork& net, const CvEquilibrium& eq);

struct ValidationReport {
  struct Condition {
    std::string name;
    double residual = 0.0;
    bool pass = true;
  };
  std::vector<Condition> conditions;
  double tolerance = 0.0;

  bool all_pass() const {
    for (const auto& c : conditions)
      if (!c.pass) return false;
    return true;
  }
  double max_residual() const {
    double r = 0;
    for (const auto& c : conditions) r = std::max(r, c.residual);
    return r;
  }
};

/// Checks every equilibrium condition (best response through the first-order
/// conditions, capacity feasibility, complementary slackness, mass
/// conservation, transfer identity) and reports the residuals. Failures are
/// data in the report, not errors.
ValidationReport verify_equilibrium(const DerivedNetwork& net, const CvEquilibrium& eq,
                                    const VectorXd& revealed, double fleet);

/// The fully-controlled counterpart: maximize driver reward subject to
/// capacity, flow balance, and an active-mass budget.
CirculationResult controlled_cv_lp(const DerivedNetwork& net, const VectorXd& revealed,
                                   double active_mass);

}  // namespace fleetopt

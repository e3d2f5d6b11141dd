#include "fleetopt/cv_equilibrium.hpp"

#include <cmath>

namespace fleetopt {

CvEquilibrium solve_cv_equilibrium(const DerivedNetwork& net, const VectorXd& revealed,
                                   double fleet, std::uint64_t perturb_seed) {
  const int L = net.regions;
  CvEquilibrium eq;
  eq.revealed_demand = revealed;
  eq.fleet_size = fleet;
  eq.rates = MatrixXd::Zero(L, L);
  eq.waiting = VectorXd::Zero(L);
  if (fleet <= 0) return eq;

  ConcaveLogResult r = solve_concave_log(net.reward_cv, net.drive_time, fleet, revealed,
                                         net.routing, net.active, perturb_seed);
  if (r.status == SolveStatus::NumericalFailure || r.status == SolveStatus::Unbounded) {
    std::string msg = std::string("equilibrium solve failed: ") + to_string(r.status) +
                      " (fleet " + std::to_string(fleet) + ", revealed";
    for (int i = 0; i < L; ++i) msg += " " + std::to_string(revealed(i));
    throw EquilibriumError(msg + ")");
  }

  eq.rates = r.rates;
  eq.waiting = r.waiting;
  eq.driver_profit = r.reward_total;
  eq.active_mass = r.drive_mass;
  eq.platform_profit = net.reward_commission.cwiseProduct(eq.rates).sum();
  return eq;
}

double platform_profit_from_cv(const DerivedNetwork& net, const CvEquilibrium& eq) {
  const double commission = net.reward_commission.cwiseProduct(eq.rates).sum();
  const double transfer = net.commission / (1.0 - net.commission) *
                          (eq.driver_profit + net.cost * eq.active_mass);
  const double scale = 1.0 + std::abs(commission);
  if (std::abs(commission - transfer) > 1e-7 * scale)
    throw EquilibriumError("transfer identity violated: commission " +
                           std::to_string(commission) + " vs " + std::to_string(transfer));
  return commission;
}

ValidationReport verify_equilibrium(const DerivedNetwork& net, const CvEquilibrium& eq,
                                    const VectorXd& revealed, double fleet) {
  const int L = net.regions;
  ValidationReport report;
  report.tolerance = validation_tolerance();
  const double tol = report.tolerance;
  auto add = [&](const std::string& name, double residual) {
    report.conditions.push_back({name, residual, residual <= tol});
  };

  const MatrixXd& x = eq.rates;
  VectorXd served = x.colwise().sum();

  double cap = 0;
  for (int i = 0; i < L; ++i) cap = std::max(cap, served(i) - revealed(i));
  add("capacity", std::max(0.0, cap));

  double flow = 0;
  for (int i = 0; i < L; ++i) {
    double inflow = 0;
    for (int a = 0; a < L; ++a) inflow += served(a) * net.routing(a, i);
    flow = std::max(flow, std::abs(inflow - x.row(i).sum()));
  }
  add("flow_balance", flow);

  double slack = 0;
  for (int i = 0; i < L; ++i)
    slack = std::max(slack, std::abs(eq.waiting(i) * (revealed(i) - served(i))));
  add("complementary_slackness", slack);

  const double driver = net.reward_cv.cwiseProduct(x).sum();
  const double active = net.drive_time.cwiseProduct(x).sum();

  // Best response: first-order conditions of the drivers' average-reward
  // problem, with the state-balance multipliers recovered by least squares.
  double best_response = 0;
  if (driver > tol) {
    std::vector<std::pair<int, int>> support, all;
    for (int i = 0; i < L; ++i)
      for (int a = 0; a < L; ++a)
        if (net.active[a]) {
          all.emplace_back(i, a);
          if (x(i, a) > tol) support.emplace_back(i, a);
        }
    MatrixXd g = fleet / driver * net.reward_cv - net.drive_time;
    for (int i = 0; i < L; ++i)
      for (int a = 0; a < L; ++a) g(i, a) -= eq.waiting(a);
    if (!support.empty()) {
      MatrixXd A(support.size(), L);
      VectorXd rhs(support.size());
      for (size_t k = 0; k < support.size(); ++k) {
        const auto [i, a] = support[k];
        VectorXd row = -net.routing.row(a).transpose();
        row(i) += 1.0;
        A.row(k) = row.transpose();
        rhs(k) = -g(i, a);
      }
      VectorXd lambda = A.colPivHouseholderQr().solve(rhs);
      for (const auto& [i, a] : all) {
        const double e = g(i, a) + lambda(i) - net.routing.row(a).dot(lambda);
        const bool on_support = x(i, a) > tol;
        best_response = std::max(best_response, on_support ? std::abs(e) : e);
      }
    }
    best_response = std::max(best_response, 0.0);
  } else {
    // Zero equilibrium: valid only if no circulation earns a positive reward.
    CirculationLp probe;
    probe.objective = net.reward_cv;
    probe.capacity = revealed;
    CirculationResult r =
        solve_circulation_lp(probe, net.drive_time, net.routing, net.active);
    best_response = std::max(0.0, r.value);
  }
  add("best_response", best_response);

  double mass = 0;
  if (driver > tol) {
    double waiting_mass = 0;
    for (int a = 0; a < L; ++a) waiting_mass += eq.waiting(a) * served(a);
    mass = std::abs(active + waiting_mass - fleet);
  }
  add("mass_conservation", mass);

  const double commission = net.reward_commission.cwiseProduct(x).sum();
  const double transfer =
      net.commission / (1.0 - net.commission) * (driver + net.cost * active);
  add("transfer_identity", std::abs(commission - transfer) / (1.0 + std::abs(commission)));

  return report;
}

CirculationResult controlled_cv_lp(const DerivedNetwork& net, const VectorXd& revealed,
                                   double active_mass) {
  CirculationLp problem;
  problem.objective = net.reward_cv;
  problem.capacity = revealed;
  problem.mass_budget = std::max(active_mass, 0.0);
  return solve_circulation_lp(problem, net.drive_time, net.routing, net.active);
}

}  // namespace fleetopt

#include "fleetopt/bilevel.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace fleetopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double max_region_demand(const DerivedNetwork& net) {
  return net.region_demand.maxCoeff();
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

Objective profit_objective(const DerivedNetwork& net, double av_mass, double cv_mass) {
  return [&net, av_mass, cv_mass](const VectorXd& revealed) {
    return evaluate_profit(net, revealed, av_mass, cv_mass).total_profit;
  };
}

// Rebuilds the full solution at the argmax so the reported profit is the
// re-evaluated one.
BilevelSolution finish(const DerivedNetwork& net, const BoxSearchResult& r, double av_mass,
                       double cv_mass, const std::string& tag, const Timer& timer) {
  BilevelSolution sol = evaluate_profit(net, r.point, av_mass, cv_mass);
  sol.algorithm = tag;
  sol.iterations = r.iterations;
  sol.evaluations = r.evaluations + 1;
  sol.converged = r.converged;
  sol.wall_time = timer.seconds();
  return sol;
}

}  // namespace

AvDispatch av_dispatch_lp(const DerivedNetwork& net, const VectorXd& av_demand,
                          double av_mass, double purchase_cost) {
  CirculationLp problem;
  problem.objective = net.reward_av;
  if (purchase_cost != 0.0) problem.objective -= purchase_cost * net.drive_time;
  problem.capacity = av_demand.cwiseMax(0.0);
  problem.mass_budget = std::isinf(av_mass) ? -1.0 : std::max(av_mass, 0.0);
  CirculationResult r =
      solve_circulation_lp(problem, net.drive_time, net.routing, net.active);
  if (r.status != SolveStatus::Optimal)
    throw EquilibriumError(std::string("av dispatch failed: ") + to_string(r.status));
  AvDispatch out;
  out.rates = r.rates;
  out.profit = r.value;
  out.active_mass = net.drive_time.cwiseProduct(r.rates).sum();
  out.status = r.status;
  return out;
}

BilevelSolution evaluate_profit(const DerivedNetwork& net, const VectorXd& revealed,
                                double av_mass, double cv_mass) {
  BilevelSolution sol;
  sol.revealed = revealed.cwiseMax(0.0).cwiseMin(net.region_demand);
  const VectorXd residual = (net.region_demand - sol.revealed).cwiseMax(0.0);
  AvDispatch av = av_dispatch_lp(net, residual, av_mass);
  sol.av_rates = av.rates;
  sol.av_profit = av.profit;
  sol.av_active_mass = av.active_mass;
  sol.cv = solve_cv_equilibrium(net, sol.revealed, cv_mass);
  sol.total_profit = sol.av_profit + sol.cv.platform_profit;
  sol.algorithm = "evaluate";
  sol.evaluations = 1;
  return sol;
}

BilevelSolution av_first(const DerivedNetwork& net, double av_mass, double cv_mass) {
  Timer timer;
  AvDispatch av = av_dispatch_lp(net, net.region_demand, av_mass);
  VectorXd served = av.rates.colwise().sum().transpose();
  VectorXd revealed = (net.region_demand - served).cwiseMax(0.0);
  BilevelSolution sol;
  sol.revealed = revealed;
  sol.av_rates = av.rates;
  sol.av_profit = av.profit;
  sol.av_active_mass = av.active_mass;
  sol.cv = solve_cv_equilibrium(net, revealed, cv_mass);
  sol.total_profit = sol.av_profit + sol.cv.platform_profit;
  sol.algorithm = "av-first";
  sol.evaluations = 1;
  sol.wall_time = timer.seconds();
  return sol;
}

VectorXd numerical_gradient(const DerivedNetwork& net, const VectorXd& revealed,
                            double av_mass, double cv_mass, double fd_step) {
  Objective fit = profit_objective(net, av_mass, cv_mass);
  const double h = fd_step > 0 ? fd_step : 1e-4 * max_region_demand(net);
  long evals = 0;
  const double base = fit(revealed);
  return box_gradient(fit, revealed, base, net.region_demand, h, evals);
}

BilevelSolution gradient_descent(const DerivedNetwork& net, double av_mass, double cv_mass,
                                 const GdConfig& cfg, const VectorXd& start) {
  Timer timer;
  GradientAscentOptions opt;
  opt.step = cfg.step > 0 ? cfg.step : 0.05 * max_region_demand(net);
  opt.fd_step = cfg.fd_step > 0 ? cfg.fd_step : 1e-4 * max_region_demand(net);
  opt.epsilon = cfg.epsilon;
  opt.max_iterations = cfg.max_iterations;
  BoxSearchResult r = gradient_ascent_box(profit_objective(net, av_mass, cv_mass), start,
                                          net.region_demand, opt);
  return finish(net, r, av_mass, cv_mass, "gd", timer);
}

BilevelSolution bundle_method(const DerivedNetwork& net, double av_mass, double cv_mass,
                              const BundleConfig& cfg, const VectorXd& start) {
  Timer timer;
  BundleOptions opt;
  const double demand_total = net.region_demand.sum();
  opt.proximal_weight = cfg.proximal_weight > 0
                            ? cfg.proximal_weight
                            : std::max(1e-6, cv_mass * net.price / demand_total);
  opt.termination = cfg.termination;
  opt.center_margin = cfg.center_margin;
  opt.max_iterations = cfg.max_iterations;
  opt.fd_step = cfg.fd_step > 0 ? cfg.fd_step : 1e-4 * max_region_demand(net);
  BoxSearchResult r = bundle_ascent_box(profit_objective(net, av_mass, cv_mass), start,
                                        net.region_demand, opt);
  return finish(net, r, av_mass, cv_mass, "bundle", timer);
}

BilevelSolution genetic(const DerivedNetwork& net, double av_mass, double cv_mass,
                        const GeneticConfig& cfg) {
  Timer timer;
  GeneticOptions opt;
  opt.population = cfg.population;
  opt.selection_q = cfg.selection_q;
  opt.crossover_prob = cfg.crossover_prob;
  opt.mutation_prob = cfg.mutation_prob;
  opt.max_generations = cfg.max_generations;
  opt.stall_window = cfg.stall_window;
  opt.retry_cap = cfg.retry_cap;
  opt.seed = cfg.seed;
  BoxSearchResult r =
      genetic_box(profit_objective(net, av_mass, cv_mass), net.region_demand, opt);
  return finish(net, r, av_mass, cv_mass, "genetic", timer);
}

BilevelSolution exhaustive_search(const DerivedNetwork& net, double av_mass, double cv_mass,
                                  int steps_per_region, long max_evaluations) {
  Timer timer;
  GridSearchOptions opt;
  opt.steps = steps_per_region;
  opt.max_evaluations = max_evaluations;
  BoxSearchResult r =
      grid_search_box(profit_objective(net, av_mass, cv_mass), net.region_demand, opt);
  return finish(net, r, av_mass, cv_mass, "exhaustive", timer);
}

std::vector<VectorXd> standard_starts(const DerivedNetwork& net, double av_mass,
                                      double cv_mass) {
  const VectorXd& b = net.region_demand;
  std::vector<VectorXd> starts;
  starts.push_back(av_first(net, av_mass, cv_mass).revealed);
  starts.push_back(VectorXd::Zero(net.regions));
  starts.push_back(0.25 * b);
  starts.push_back(0.5 * b);
  starts.push_back(0.75 * b);
  starts.push_back(b);
  return starts;
}

std::vector<VectorXd> corner_starts(const DerivedNetwork& net) {
  const int L = net.regions;
  if (L > 16) throw std::invalid_argument("corner_starts: too many regions");
  std::vector<VectorXd> starts;
  for (int mask = 0; mask < (1 << L); ++mask) {
    VectorXd x = VectorXd::Zero(L);
    for (int i = 0; i < L; ++i)
      if (mask & (1 << i)) x(i) = net.region_demand(i);
    starts.push_back(x);
  }
  return starts;
}

namespace {

template <typename Runner>
BilevelSolution best_over(const std::vector<VectorXd>& starts, Runner run) {
  BilevelSolution best;
  bool first = true;
  long evals = 0;
  double time = 0;
  int iters = 0;
  for (const VectorXd& s : starts) {
    BilevelSolution sol = run(s);
    evals += sol.evaluations;
    time += sol.wall_time;
    iters += sol.iterations;
    if (first || sol.total_profit > best.total_profit) {
      best = sol;
      first = false;
    }
  }
  best.evaluations = evals;
  best.wall_time = time;
  best.iterations = iters;
  return best;
}

}  // namespace

BilevelSolution best_gradient_descent(const DerivedNetwork& net, double av_mass,
                                      double cv_mass, const GdConfig& cfg,
                                      const std::vector<VectorXd>& starts) {
  return best_over(starts, [&](const VectorXd& s) {
    return gradient_descent(net, av_mass, cv_mass, cfg, s);
  });
}

BilevelSolution best_bundle_method(const DerivedNetwork& net, double av_mass, double cv_mass,
                                   const BundleConfig& cfg,
                                   const std::vector<VectorXd>& starts) {
  return best_over(starts, [&](const VectorXd& s) {
    return bundle_method(net, av_mass, cv_mass, cfg, s);
  });
}

ValidationReport verify_bilevel(const DerivedNetwork& net, const BilevelSolution& sol,
                                double av_mass, double cv_mass) {
  (void)cv_mass;
  const int L = net.regions;
  ValidationReport report;
  report.tolerance = validation_tolerance();
  auto add = [&](const std::string& name, double residual) {
    report.conditions.push_back({name, residual, residual <= report.tolerance});
  };

  VectorXd av_served = sol.av_rates.colwise().sum().transpose();
  double cap = 0;
  for (int i = 0; i < L; ++i)
    cap = std::max(cap, av_served(i) + sol.revealed(i) - net.region_demand(i));
  add("av_capacity", std::max(0.0, cap));

  double flow = 0;
  for (int i = 0; i < L; ++i) {
    double inflow = 0;
    for (int a = 0; a < L; ++a) inflow += av_served(a) * net.routing(a, i);
    flow = std::max(flow, std::abs(inflow - sol.av_rates.row(i).sum()));
  }
  add("av_flow_balance", flow);

  const double mass = net.drive_time.cwiseProduct(sol.av_rates).sum();
  add("av_mass_budget", std::isinf(av_mass) ? 0.0 : std::max(0.0, mass - av_mass));
  add("profit_sum",
      std::abs(sol.total_profit - sol.av_profit - sol.cv.platform_profit) /
          (1 + std::abs(sol.total_profit)));
  return report;
}

}  // namespace fleetopt

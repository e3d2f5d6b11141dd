#include "fleetopt/endogenous.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace fleetopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double max_region_demand(const DerivedNetwork& net) { return net.region_demand.maxCoeff(); }

}  // namespace

BilevelSolution evaluate_profit_endogenous_av(const DerivedNetwork& net,
                                              const VectorXd& revealed, double purchase_cost,
                                              double cv_mass) {
  BilevelSolution sol;
  sol.revealed = revealed.cwiseMax(0.0).cwiseMin(net.region_demand);
  const VectorXd residual = (net.region_demand - sol.revealed).cwiseMax(0.0);
  AvDispatch av = av_dispatch_lp(net, residual, kInf, purchase_cost);
  sol.av_rates = av.rates;
  sol.av_profit = av.profit;
  sol.av_active_mass = av.active_mass;
  sol.cv = solve_cv_equilibrium(net, sol.revealed, cv_mass);
  sol.total_profit = sol.av_profit + sol.cv.platform_profit;
  sol.algorithm = "endogenous-evaluate";
  sol.evaluations = 1;
  return sol;
}

CvCountResult equilibrium_cv_count(const DerivedNetwork& net, const VectorXd& revealed,
                                   double pool, double tol, int max_iterations) {
  CvCountResult out;
  if (pool <= 0) {
    out.equilibrium = solve_cv_equilibrium(net, revealed, 0.0);
    return out;
  }
  const double earning_cap = (1 - net.commission) * net.price - net.cost;
  if (earning_cap <= 0) {
    // Even the best conceivable trip loses money; nobody participates.
    out.equilibrium = solve_cv_equilibrium(net, revealed, 0.0);
    return out;
  }

  auto earning = [&](double fleet) {
    CvEquilibrium eq = solve_cv_equilibrium(net, revealed, fleet);
    return std::make_pair(eq.driver_profit / fleet, eq);
  };

  // Probe near zero for the limit of u, then the full pool.
  const double probe = std::max(1e-6 * pool, 1e-12);
  auto [u_low, eq_low] = earning(probe);
  ++out.iterations;
  if (u_low <= earning_cap * probe / pool + tol * earning_cap) {
    // The line already dominates at the origin: nobody enters.
    out.fleet = 0.0;
    out.equilibrium = solve_cv_equilibrium(net, revealed, 0.0);
    return out;
  }
  auto [u_full, eq_full] = earning(pool);
  ++out.iterations;
  if (u_full >= earning_cap) {
    out.fleet = pool;
    out.equilibrium = eq_full;
    return out;
  }

  double lo = probe, hi = pool;
  double u_lo = u_low, u_hi = u_full;
  CvEquilibrium eq_mid = eq_full;
  double mid = pool;
  while (hi - lo > tol * pool && out.iterations < max_iterations) {
    mid = 0.5 * (lo + hi);
    auto [u, eq] = earning(mid);
    eq_mid = eq;
    ++out.iterations;
    if (u > u_lo + 1e-7 * (1 + std::abs(u_lo)) || u < u_hi - 1e-7 * (1 + std::abs(u_hi)))
      out.monotone = false;
    if (u > earning_cap * mid / pool) {
      lo = mid;
      u_lo = u;
    } else {
      hi = mid;
      u_hi = u;
    }
  }
  out.fleet = 0.5 * (lo + hi);
  out.equilibrium = solve_cv_equilibrium(net, revealed, out.fleet);
  return out;
}

BilevelSolution solve_endogenous(const DerivedNetwork& net, const EndogenousConfig& cfg,
                                 EndogenousAlgorithm algorithm, const GdConfig& gd,
                                 const BundleConfig& bundle, const GeneticConfig& genetic_cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  long evaluations = 0;

  auto evaluate_at = [&](const VectorXd& revealed) {
    CvCountResult count =
        equilibrium_cv_count(net, revealed, cfg.driver_pool, cfg.bisect_tol,
                             cfg.max_bisect_iterations);
    BilevelSolution sol =
        evaluate_profit_endogenous_av(net, revealed, cfg.purchase_cost, count.fleet);
    ++evaluations;
    return sol;
  };
  Objective fitness = [&](const VectorXd& revealed) {
    return evaluate_at(revealed).total_profit;
  };

  BilevelSolution best;
  if (algorithm == EndogenousAlgorithm::AvFirst) {
    // Buy and deploy AVs for the AV-only profit, then reveal the residual.
    AvDispatch av = av_dispatch_lp(net, net.region_demand, kInf, cfg.purchase_cost);
    VectorXd served = av.rates.colwise().sum().transpose();
    VectorXd revealed = (net.region_demand - served).cwiseMax(0.0);
    CvCountResult count = equilibrium_cv_count(net, revealed, cfg.driver_pool,
                                               cfg.bisect_tol, cfg.max_bisect_iterations);
    best.revealed = revealed;
    best.av_rates = av.rates;
    best.av_profit = av.profit;
    best.av_active_mass = av.active_mass;
    best.cv = count.equilibrium;
    best.total_profit = av.profit + count.equilibrium.platform_profit;
    best.algorithm = "av-first";
    best.evaluations = 1;
  } else if (algorithm == EndogenousAlgorithm::Genetic) {
    GeneticOptions opt;
    opt.population = genetic_cfg.population;
    opt.selection_q = genetic_cfg.selection_q;
    opt.crossover_prob = genetic_cfg.crossover_prob;
    opt.mutation_prob = genetic_cfg.mutation_prob;
    opt.max_generations = genetic_cfg.max_generations;
    opt.stall_window = genetic_cfg.stall_window;
    opt.retry_cap = genetic_cfg.retry_cap;
    opt.seed = genetic_cfg.seed;
    BoxSearchResult r = genetic_box(fitness, net.region_demand, opt);
    best = evaluate_at(r.point);
    best.algorithm = "genetic";
    best.iterations = r.iterations;
    best.converged = r.converged;
  } else {
    // Gradient and bundle searches run from the standard start set.
    std::vector<VectorXd> starts;
    {
      AvDispatch av = av_dispatch_lp(net, net.region_demand, kInf, cfg.purchase_cost);
      VectorXd served = av.rates.colwise().sum().transpose();
      starts.push_back((net.region_demand - served).cwiseMax(0.0));
    }
    const VectorXd& b = net.region_demand;
    starts.push_back(VectorXd::Zero(net.regions));
    starts.push_back(0.25 * b);
    starts.push_back(0.5 * b);
    starts.push_back(0.75 * b);
    starts.push_back(b);

    BoxSearchResult best_r;
    bool first = true;
    int iters = 0;
    for (const VectorXd& s : starts) {
      BoxSearchResult r;
      if (algorithm == EndogenousAlgorithm::GradientDescent) {
        GradientAscentOptions opt;
        opt.step = gd.step > 0 ? gd.step : 0.05 * max_region_demand(net);
        opt.fd_step = gd.fd_step > 0 ? gd.fd_step : 1e-4 * max_region_demand(net);
        opt.epsilon = gd.epsilon;
        opt.max_iterations = gd.max_iterations;
        r = gradient_ascent_box(fitness, s, net.region_demand, opt);
      } else {
        BundleOptions opt;
        opt.proximal_weight =
            bundle.proximal_weight > 0
                ? bundle.proximal_weight
                : std::max(1e-6, cfg.driver_pool * net.price / net.region_demand.sum());
        opt.termination = bundle.termination;
        opt.center_margin = bundle.center_margin;
        opt.max_iterations = bundle.max_iterations;
        opt.fd_step = bundle.fd_step > 0 ? bundle.fd_step : 1e-4 * max_region_demand(net);
        r = bundle_ascent_box(fitness, s, net.region_demand, opt);
      }
      iters += r.iterations;
      if (first || r.value > best_r.value) {
        best_r = r;
        first = false;
      }
    }
    best = evaluate_at(best_r.point);
    best.algorithm =
        algorithm == EndogenousAlgorithm::GradientDescent ? "gd" : "bundle";
    best.iterations = iters;
    best.converged = best_r.converged;
  }
  best.evaluations = evaluations ? evaluations : best.evaluations;
  best.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return best;
}

}  // namespace fleetopt

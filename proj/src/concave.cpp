#include "fleetopt/concave.hpp"

#include <cmath>
#include <vector>

namespace fleetopt {

namespace {

struct VarMap {
  std::vector<std::pair<int, int>> vars;  // (state, action) with active action
  int L = 0;

  explicit VarMap(const std::vector<bool>& active) {
    L = static_cast<int>(active.size());
    for (int i = 0; i < L; ++i)
      for (int a = 0; a < L; ++a)
        if (active[a]) vars.emplace_back(i, a);
  }

  MatrixXd unpack(const VectorXd& x) const {
    MatrixXd m = MatrixXd::Zero(L, L);
    for (size_t k = 0; k < vars.size(); ++k) m(vars[k].first, vars[k].second) = x(k);
    return m;
  }
};

// Capacity rows (active regions), flow-balance rows (all regions), and an
// optional drive-time budget row appended to the inequalities.
struct LpSkeleton {
  VarMap map;
  std::vector<int> cap_row;  // per region, -1 when inactive
  LinearProgram lp;
  bool has_mass_row = false;

  LpSkeleton(const MatrixXd& drive_time, const MatrixXd& routing,
             const std::vector<bool>& active, const VectorXd& capacity, double mass_budget)
      : map(active) {
    const int L = map.L;
    const int n = static_cast<int>(map.vars.size());
    int m_ub = 0;
    cap_row.assign(L, -1);
    for (int r = 0; r < L; ++r)
      if (active[r]) cap_row[r] = m_ub++;
    has_mass_row = mass_budget >= 0;
    if (has_mass_row) ++m_ub;

    lp.ub_lhs = MatrixXd::Zero(m_ub, n);
    lp.ub_rhs = VectorXd::Zero(m_ub);
    lp.eq_lhs = MatrixXd::Zero(L, n);
    lp.eq_rhs = VectorXd::Zero(L);
    for (int k = 0; k < n; ++k) {
      const auto [i, a] = map.vars[k];
      lp.ub_lhs(cap_row[a], k) = 1.0;
      if (has_mass_row) lp.ub_lhs(m_ub - 1, k) = drive_time(i, a);
      for (int r = 0; r < L; ++r) {
        double coeff = (i == r ? 1.0 : 0.0) - routing(a, r);
        if (coeff != 0.0) lp.eq_lhs(r, k) = coeff;
      }
    }
    for (int r = 0; r < L; ++r)
      if (cap_row[r] >= 0) lp.ub_rhs(cap_row[r]) = std::max(capacity(r), 0.0);
    if (has_mass_row) lp.ub_rhs(m_ub - 1) = mass_budget;
  }

  void set_objective(const MatrixXd& coeffs) {
    const int n = static_cast<int>(map.vars.size());
    lp.objective.resize(n);
    for (int k = 0; k < n; ++k)
      lp.objective(k) = coeffs(map.vars[k].first, map.vars[k].second);
  }

  VectorXd region_duals(const SolveResult& r) const {
    const int L = map.L;
    VectorXd w = VectorXd::Zero(L);
    for (int reg = 0; reg < L; ++reg)
      if (cap_row[reg] >= 0) w(reg) = std::max(r.ineq_duals(cap_row[reg]), 0.0);
    return w;
  }
};

}  // namespace

CirculationResult solve_circulation_lp(const CirculationLp& problem, const MatrixXd& drive_time,
                                       const MatrixXd& routing, const std::vector<bool>& active,
                                       std::uint64_t perturb_seed) {
  LpSkeleton sk(drive_time, routing, active, problem.capacity, problem.mass_budget);
  sk.set_objective(problem.objective);
  SimplexOptions opt;
  opt.perturb_seed = perturb_seed;
  SolveResult r = solve_lp(sk.lp, opt);
  CirculationResult out;
  out.status = r.status;
  out.iterations = r.iterations;
  out.value = r.value;
  out.rates = sk.map.unpack(r.primal);
  out.capacity_duals = sk.region_duals(r);
  if (sk.has_mass_row) out.mass_dual = r.ineq_duals(r.ineq_duals.size() - 1);
  return out;
}

ConcaveLogResult solve_concave_log(const MatrixXd& reward, const MatrixXd& drive_time,
                                   double mass, const VectorXd& capacity,
                                   const MatrixXd& routing, const std::vector<bool>& active,
                                   std::uint64_t perturb_seed) {
  const int L = static_cast<int>(reward.rows());
  ConcaveLogResult out;
  out.rates = MatrixXd::Zero(L, L);
  out.waiting = VectorXd::Zero(L);
  if (mass <= 0) return out;

  LpSkeleton sk(drive_time, routing, active, capacity, -1.0);
  SimplexOptions opt;
  opt.perturb_seed = perturb_seed;

  // Guard: no feasible circulation earns a positive reward.
  sk.set_objective(reward);
  SolveResult guard = solve_lp(sk.lp, opt);
  out.iterations += guard.iterations;
  if (guard.status != SolveStatus::Optimal) {
    out.status = guard.status;
    return out;
  }
  // Below this the implied waiting times overflow double-precision duals;
  // such a circulation earns nothing worth modeling.
  const double reward_max = guard.value;
  if (reward_max <= 1e-8 * (1.0 + mass)) {
    const bool zero_only = sk.lp.ub_rhs.size() == 0 || sk.lp.ub_rhs.maxCoeff() <= 0.0;
    out.status = zero_only ? SolveStatus::Infeasible : SolveStatus::Optimal;
    return out;
  }

  auto solve_at = [&](double theta, SolveResult& r) {
    sk.set_objective(theta * reward - drive_time);
    r = solve_lp(sk.lp, opt);
    out.iterations += r.iterations;
    return r.status == SolveStatus::Optimal;
  };
  auto reward_of = [&](const SolveResult& r) {
    double v = 0;
    for (size_t k = 0; k < sk.map.vars.size(); ++k)
      v += reward(sk.map.vars[k].first, sk.map.vars[k].second) * r.primal(k);
    return v;
  };

  double theta_lo = 0.0;
  SolveResult lo;  // primal absent: the zero vertex
  double reward_lo = 0.0;
  bool have_lo = false;

  double theta_hi = mass / reward_max;
  SolveResult hi;
  double reward_hi = 0.0;
  for (int tries = 0;; ++tries) {
    if (!solve_at(theta_hi, hi)) {
      out.status = hi.status;
      return out;
    }
    reward_hi = reward_of(hi);
    if (theta_hi * reward_hi >= mass) break;
    if (tries > 200) {
      out.status = SolveStatus::NumericalFailure;
      return out;
    }
    theta_lo = theta_hi;
    lo = hi;
    reward_lo = reward_hi;
    have_lo = true;
    theta_hi *= 2.0;
  }

  for (int it = 0; it < 120 && theta_hi - theta_lo > 5e-14 * theta_hi; ++it) {
    const double theta = 0.5 * (theta_lo + theta_hi);
    SolveResult mid;
    if (!solve_at(theta, mid)) {
      out.status = mid.status;
      return out;
    }
    const double rv = reward_of(mid);
    if (theta * rv >= mass) {
      theta_hi = theta;
      hi = mid;
      reward_hi = rv;
    } else {
      theta_lo = theta;
      lo = mid;
      reward_lo = rv;
      have_lo = true;
    }
  }

  // Point on the optimal face of the final LP with reward total mass/theta.
  const double target = mass / theta_hi;
  double lambda = 1.0;
  if (reward_hi > reward_lo + 1e-15)
    lambda = std::min(1.0, std::max(0.0, (target - reward_lo) / (reward_hi - reward_lo)));
  VectorXd x = hi.primal;
  if (have_lo && lambda < 1.0) x = lambda * hi.primal + (1.0 - lambda) * lo.primal;
  else if (!have_lo) x *= lambda;  // lower endpoint is the zero vertex

  out.rates = sk.map.unpack(x);
  out.waiting = sk.region_duals(hi);
  out.reward_total = 0;
  out.drive_mass = 0;
  for (size_t k = 0; k < sk.map.vars.size(); ++k) {
    const auto [i, a] = sk.map.vars[k];
    out.reward_total += reward(i, a) * x(k);
    out.drive_mass += drive_time(i, a) * x(k);
  }
  out.value = out.reward_total > 0 ? mass * std::log(out.reward_total) - out.drive_mass : 0.0;
  out.status = SolveStatus::Optimal;
  return out;
}

}  // namespace fleetopt

#include "fleetopt/prox_qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace fleetopt {

namespace {

struct WorkingSet {
  std::set<int> cuts;       // equalized cuts
  std::vector<int> bound;   // per coord: -1 lower, +1 upper, 0 free
};

}  // namespace

VectorXd solve_proximal_cut_model(const CuttingPlanes& cuts, const VectorXd& center,
                                  double weight, const VectorXd& lower,
                                  const VectorXd& upper, double tol) {
  const int n = static_cast<int>(center.size());
  const int m = cuts.size();
  auto clamp = [&](VectorXd y) {
    for (int j = 0; j < n; ++j) y(j) = std::min(upper(j), std::max(lower(j), y(j)));
    return y;
  };
  VectorXd y = clamp(center);
  if (m == 0) return y;

  auto objective = [&](const VectorXd& v) {
    return cuts.eval(v) - 0.5 * weight * (v - center).squaredNorm();
  };

  WorkingSet ws;
  ws.bound.assign(n, 0);
  {
    const double mv = cuts.eval(y);
    for (int i = 0; i < m; ++i)
      if (cuts.cut(i, y) <= mv + 1e-12 * (1 + std::abs(mv))) ws.cuts.insert(i);
  }

  VectorXd best_y = y;
  double best_obj = objective(y);

  const int max_iters = 60 + 12 * (m + n);
  for (int iter = 0; iter < max_iters; ++iter) {
    // Subproblem: equalize the working cuts over the free coordinates.
    std::vector<int> E(ws.cuts.begin(), ws.cuts.end());
    const int ne = static_cast<int>(E.size());
    VectorXd base = y;
    for (int j = 0; j < n; ++j)
      if (ws.bound[j] == 0) base(j) = center(j);

    // y(lambda) = base + (1/weight) * P_F G lambda
    MatrixXd PG = MatrixXd::Zero(n, ne);
    for (int k = 0; k < ne; ++k)
      for (int j = 0; j < n; ++j)
        if (ws.bound[j] == 0) PG(j, k) = cuts.grads[E[k]](j);

    MatrixXd M(ne, ne);
    VectorXd rhs(ne);
    for (int r = 1; r < ne; ++r) {
      const VectorXd diff = cuts.grads[E[r]] - cuts.grads[E[0]];
      const double a_r = cuts.values[E[r]] - cuts.grads[E[r]].dot(cuts.points[E[r]]);
      const double a_0 = cuts.values[E[0]] - cuts.grads[E[0]].dot(cuts.points[E[0]]);
      M.row(r - 1) = (diff.transpose() * PG) / weight;
      rhs(r - 1) = -(a_r - a_0) - diff.dot(base);
    }
    M.row(ne - 1).setOnes();
    rhs(ne - 1) = 1.0;

    Eigen::FullPivLU<MatrixXd> lu(M);
    VectorXd lambda;
    if (lu.rank() < ne) {
      // Dependent cut in the working set: drop the newest and retry.
      ws.cuts.erase(*ws.cuts.rbegin());
      if (ws.cuts.empty()) ws.cuts.insert(E[0]);
      continue;
    }
    lambda = lu.solve(rhs);

    VectorXd target = base + PG * lambda / weight;
    for (int j = 0; j < n; ++j)
      if (ws.bound[j] != 0) target(j) = y(j);

    VectorXd d = target - y;
    const double step_norm = d.cwiseAbs().maxCoeff();

    if (step_norm <= tol * (1 + y.cwiseAbs().maxCoeff())) {
      // Optimal for the working set; check multiplier signs.
      int drop_cut = -1;
      double worst = -tol;
      for (int k = 0; k < ne; ++k)
        if (lambda(k) < worst) {
          worst = lambda(k);
          drop_cut = E[k];
        }
      if (drop_cut >= 0 && ne > 1) {
        ws.cuts.erase(drop_cut);
        continue;
      }
      VectorXd grad = -weight * (y - center);
      for (int k = 0; k < ne; ++k) grad += lambda(k) * cuts.grads[E[k]];
      int release = -1;
      double viol = tol * (1 + grad.cwiseAbs().maxCoeff());
      for (int j = 0; j < n; ++j) {
        if (ws.bound[j] == 1 && grad(j) < -viol) { release = j; break; }
        if (ws.bound[j] == -1 && grad(j) > viol) { release = j; break; }
      }
      if (release >= 0) {
        ws.bound[release] = 0;
        continue;
      }
      return objective(y) >= best_obj ? y : best_y;
    }

    // Step toward the subproblem solution, stopping at the first blocker.
    double alpha = 1.0;
    int block_coord = -1, block_side = 0, block_cut = -1;
    for (int j = 0; j < n; ++j) {
      if (ws.bound[j] != 0 || d(j) == 0.0) continue;
      if (d(j) > 0 && y(j) + alpha * d(j) > upper(j)) {
        alpha = (upper(j) - y(j)) / d(j);
        block_coord = j; block_side = 1; block_cut = -1;
      } else if (d(j) < 0 && y(j) + alpha * d(j) < lower(j)) {
        alpha = (lower(j) - y(j)) / d(j);
        block_coord = j; block_side = -1; block_cut = -1;
      }
    }
    const double e_now = cuts.cut(E[0], y);
    const double e_dir = cuts.grads[E[0]].dot(d);
    for (int i = 0; i < m; ++i) {
      if (ws.cuts.count(i)) continue;
      const double f0 = cuts.cut(i, y) - e_now;
      const double f1 = cuts.grads[i].dot(d) - e_dir;
      if (f1 >= -1e-14) continue;  // cut not decreasing relative to the set
      const double a = -f0 / f1;
      if (a < alpha - 1e-14) {
        alpha = std::max(a, 0.0);
        block_cut = i; block_coord = -1;
      }
    }

    y = clamp(y + alpha * d);
    const double obj = objective(y);
    if (obj > best_obj) {
      best_obj = obj;
      best_y = y;
    }
    if (block_cut >= 0) ws.cuts.insert(block_cut);
    if (block_coord >= 0) {
      ws.bound[block_coord] = block_side;
      y(block_coord) = block_side > 0 ? upper(block_coord) : lower(block_coord);
    }
    if (block_cut < 0 && block_coord < 0 && alpha >= 1.0) {
      // Full step; loop again to test multipliers at the new point.
      continue;
    }
  }
  return best_y;
}

}  // namespace fleetopt

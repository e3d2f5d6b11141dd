#include "fleetopt/lp.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace fleetopt {

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Tableau {
  MatrixXd A;            // working rows, updated by pivots
  VectorXd b;            // working rhs, kept nonnegative
  std::vector<int> basis;
  int rows = 0;
  int cols = 0;

  void pivot(int r, int j) {
    const double piv = A(r, j);
    A.row(r) /= piv;
    b(r) /= piv;
    for (int i = 0; i < rows; ++i) {
      if (i == r) continue;
      const double f = A(i, j);
      if (f == 0.0) continue;
      A.row(i) -= f * A.row(r);
      b(i) -= f * b(r);
      if (b(i) < 0 && b(i) > -1e-13) b(i) = 0;
    }
    basis[r] = j;
  }
};

struct Phase {
  Tableau& t;
  const VectorXd& cost;             // per-column objective (maximize)
  const std::vector<bool>& barred;  // columns that may not enter
  const std::vector<int>& order;    // tie-break permutation rank per column
  double tol;

  VectorXd reduced_costs() const {
    VectorXd z = cost;
    for (int i = 0; i < t.rows; ++i) {
      const double cb = cost(t.basis[i]);
      if (cb != 0.0) z -= cb * t.A.row(i).transpose();
    }
    for (int i = 0; i < t.rows; ++i) z(t.basis[i]) = 0.0;
    return z;
  }

  double objective() const {
    double v = 0;
    for (int i = 0; i < t.rows; ++i) v += cost(t.basis[i]) * t.b(i);
    return v;
  }

  // Returns Optimal / Unbounded / NumericalFailure (iteration cap).
  SolveStatus run(int max_iters, int& iterations) {
    int stall = 0;
    bool bland = false;
    double last_obj = objective();
    for (int it = 0; it < max_iters; ++it) {
      VectorXd z = reduced_costs();
      int enter = -1;
      if (!bland) {
        double best = tol;
        for (int j = 0; j < t.cols; ++j) {
          if (barred[j]) continue;
          if (z(j) > best || (z(j) == best && enter >= 0 && order[j] < order[enter])) {
            best = z(j);
            enter = j;
          }
        }
      } else {
        int best_rank = std::numeric_limits<int>::max();
        for (int j = 0; j < t.cols; ++j) {
          if (barred[j] || z(j) <= tol) continue;
          if (order[j] < best_rank) {
            best_rank = order[j];
            enter = j;
          }
        }
      }
      if (enter < 0) return SolveStatus::Optimal;

      int leave = -1;
      double best_ratio = kInf;
      for (int i = 0; i < t.rows; ++i) {
        const double a = t.A(i, enter);
        if (a <= tol) continue;
        const double ratio = t.b(i) / a;
        bool better = ratio < best_ratio - 1e-12;
        bool tie = std::abs(ratio - best_ratio) <= 1e-12;
        if (tie && leave >= 0) {
          if (bland)
            better = order[t.basis[i]] < order[t.basis[leave]];
          else
            better = a > t.A(leave, enter);
        }
        if (leave < 0 || better) {
          best_ratio = ratio;
          leave = i;
        }
      }
      if (leave < 0) return SolveStatus::Unbounded;

      t.pivot(leave, enter);
      ++iterations;

      const double obj = objective();
      if (obj > last_obj + 1e-12 * (1 + std::abs(last_obj))) {
        stall = 0;
        bland = false;
        last_obj = obj;
      } else if (++stall > 2 * t.rows + 20) {
        bland = true;
      }
    }
    return SolveStatus::NumericalFailure;
  }
};

}  // namespace

SolveResult solve_lp(const LinearProgram& lp, const SimplexOptions& options) {
  const int n = static_cast<int>(lp.objective.size());
  const int m_eq = static_cast<int>(lp.eq_rhs.size());
  const int m_ub = static_cast<int>(lp.ub_rhs.size());
  const int m = m_eq + m_ub;
  if ((m_eq && lp.eq_lhs.cols() != n) || (m_ub && lp.ub_lhs.cols() != n) ||
      (m_eq && lp.eq_lhs.rows() != m_eq) || (m_ub && lp.ub_lhs.rows() != m_ub))
    throw std::invalid_argument("solve_lp: inconsistent dimensions");
  if (m_eq && !lp.eq_rhs.allFinite()) throw std::invalid_argument("solve_lp: eq_rhs not finite");
  if (m_ub && !lp.ub_rhs.allFinite()) throw std::invalid_argument("solve_lp: ub_rhs not finite");

  SolveResult res;
  res.primal = VectorXd::Zero(n);
  res.ineq_duals = VectorXd::Zero(m_ub);
  res.eq_duals = VectorXd::Zero(m_eq);

  // Rows: ub first then eq. Columns: structural, slacks, artificials.
  std::vector<double> row_sign(m, 1.0);
  MatrixXd A0 = MatrixXd::Zero(m, n);
  VectorXd b0 = VectorXd::Zero(m);
  if (m_ub) {
    A0.topRows(m_ub) = lp.ub_lhs;
    b0.head(m_ub) = lp.ub_rhs;
  }
  if (m_eq) {
    A0.bottomRows(m_eq) = lp.eq_lhs;
    b0.tail(m_eq) = lp.eq_rhs;
  }
  for (int i = 0; i < m; ++i) {
    if (b0(i) < 0) {
      row_sign[i] = -1.0;
      A0.row(i) = -A0.row(i);
      b0(i) = -b0(i);
    }
  }

  std::vector<int> slack_col(m, -1), art_col(m, -1), unit_col(m, -1);
  int cols = n;
  for (int i = 0; i < m_ub; ++i) slack_col[i] = cols++;
  std::vector<int> need_art;
  for (int i = 0; i < m; ++i) {
    const bool plus_slack = i < m_ub && row_sign[i] > 0;
    if (!plus_slack) need_art.push_back(i);
  }
  const int first_art = cols;
  for (int i : need_art) art_col[i] = cols++;

  Tableau t;
  t.rows = m;
  t.cols = cols;
  t.A = MatrixXd::Zero(m, cols);
  t.A.leftCols(n) = A0;
  t.b = b0;
  t.basis.resize(m);
  for (int i = 0; i < m; ++i) {
    if (slack_col[i] >= 0) t.A(i, slack_col[i]) = row_sign[i];
    if (art_col[i] >= 0) t.A(i, art_col[i]) = 1.0;
    unit_col[i] = art_col[i] >= 0 ? art_col[i] : slack_col[i];
    t.basis[i] = art_col[i] >= 0 ? art_col[i] : slack_col[i];
  }

  std::vector<int> order(cols);
  std::iota(order.begin(), order.end(), 0);
  if (options.perturb_seed != 0) {
    std::vector<int> perm(cols);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 gen(options.perturb_seed);
    for (int j = cols - 1; j > 0; --j) {
      const int k = static_cast<int>(gen() % static_cast<std::uint64_t>(j + 1));
      std::swap(perm[j], perm[k]);
    }
    for (int j = 0; j < cols; ++j) order[perm[j]] = j;
  }

  const double tol = options.tol;
  const int max_iters =
      options.max_iterations > 0 ? options.max_iterations : 200 * (m + cols) + 2000;
  int iterations = 0;

  std::vector<bool> barred(cols, false);

  // Phase 1: drive artificial variables to zero.
  if (!need_art.empty()) {
    VectorXd c1 = VectorXd::Zero(cols);
    for (int i : need_art) c1(art_col[i]) = -1.0;
    Phase p1{t, c1, barred, order, tol};
    const SolveStatus st = p1.run(max_iters, iterations);
    if (st == SolveStatus::NumericalFailure) {
      res.status = SolveStatus::NumericalFailure;
      res.iterations = iterations;
      return res;
    }
    if (p1.objective() < -1e-7) {
      res.status = SolveStatus::Infeasible;
      res.iterations = iterations;
      return res;
    }
    // Pivot remaining basic artificials out where possible; rows that stay
    // artificial-basic are redundant and inert from here on.
    for (int i = 0; i < m; ++i) {
      if (t.basis[i] < first_art) continue;
      for (int j = 0; j < first_art; ++j) {
        if (std::abs(t.A(i, j)) > 1e-7) {
          t.pivot(i, j);
          ++iterations;
          break;
        }
      }
    }
    for (int j = first_art; j < cols; ++j) barred[j] = true;
  }

  // Phase 2: original objective.
  VectorXd c2 = VectorXd::Zero(cols);
  c2.head(n) = lp.objective;
  Phase p2{t, c2, barred, order, tol};
  const SolveStatus st = p2.run(max_iters, iterations);
  res.iterations = iterations;
  if (st != SolveStatus::Optimal) {
    res.status = st;
    return res;
  }

  // Refactorize the final basis against the original data.
  MatrixXd B = MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    const int j = t.basis[i];
    if (j < n) {
      B.col(i) = A0.col(j);
    } else {
      VectorXd e = VectorXd::Zero(m);
      const int row = j < first_art
                          ? static_cast<int>(std::find(slack_col.begin(), slack_col.end(), j) -
                                             slack_col.begin())
                          : static_cast<int>(std::find(art_col.begin(), art_col.end(), j) -
                                             art_col.begin());
      e(row) = j < first_art ? row_sign[row] : 1.0;
      B.col(i) = e;
    }
  }
  Eigen::PartialPivLU<MatrixXd> lu(B);
  VectorXd xb = lu.solve(b0);
  VectorXd cb(m);
  for (int i = 0; i < m; ++i) cb(i) = t.basis[i] < n ? lp.objective(t.basis[i]) : 0.0;
  VectorXd y = lu.transpose().solve(cb);  // duals of the sign-fixed rows

  res.primal.setZero();
  for (int i = 0; i < m; ++i)
    if (t.basis[i] < n) res.primal(t.basis[i]) = xb(i);
  for (int i = 0; i < n; ++i)
    if (res.primal(i) < 0 && res.primal(i) > -1e-9) res.primal(i) = 0;
  res.value = lp.objective.dot(res.primal);
  for (int i = 0; i < m_ub; ++i) res.ineq_duals(i) = row_sign[i] * y(i);
  for (int i = 0; i < m_eq; ++i) res.eq_duals(i) = row_sign[m_ub + i] * y(m_ub + i);
  for (int i = 0; i < m_ub; ++i)
    if (res.ineq_duals(i) < 0 && res.ineq_duals(i) > -1e-9) res.ineq_duals(i) = 0;

  // KKT residuals.
  double resid = 0.0;
  if (m_ub) {
    VectorXd slack = lp.ub_rhs - lp.ub_lhs * res.primal;
    resid = std::max(resid, std::max(0.0, -slack.minCoeff()));
    for (int i = 0; i < m_ub; ++i) {
      resid = std::max(resid, std::max(0.0, -res.ineq_duals(i)));
      resid = std::max(resid, std::abs(res.ineq_duals(i) * slack(i)));
    }
  }
  if (m_eq) resid = std::max(resid, (lp.eq_lhs * res.primal - lp.eq_rhs).cwiseAbs().maxCoeff());
  resid = std::max(resid, std::max(0.0, -res.primal.minCoeff()));
  VectorXd zfinal = lp.objective;
  if (m_ub) zfinal -= lp.ub_lhs.transpose() * res.ineq_duals;
  if (m_eq) zfinal -= lp.eq_lhs.transpose() * res.eq_duals;
  for (int j = 0; j < n; ++j) {
    resid = std::max(resid, std::max(0.0, zfinal(j)));               // dual feasibility
    resid = std::max(resid, std::abs(zfinal(j) * res.primal(j)));    // slackness
  }
  res.max_residual = resid;
  const double scale = 1.0 + std::abs(res.value);
  res.status = resid <= 1e-7 * scale ? SolveStatus::Optimal : SolveStatus::NumericalFailure;
  return res;
}

}  // namespace fleetopt

#pragma once

#include "fleetopt/prox_qp.hpp"

#include <cstdint>
#include <functional>

namespace fleetopt {

using Objective = std::function<double(const VectorXd&)>;

struct BoxSearchResult {
  VectorXd point;
  double value = 0.0;
  int iterations = 0;
  long evaluations = 0;
  bool converged = true;
};

/// Forward differences, switching to backward at the upper face of the box.
/// Coordinates with a degenerate range get a zero component.
VectorXd box_gradient(const Objective& f, const VectorXd& x, double f_at_x,
                      const VectorXd& upper, double h, long& evaluations);

struct GradientAscentOptions {
  double step = 0.1;
  double epsilon = 1e-6;  // relative improvement threshold
  int max_iterations = 100;
  double fd_step = 1e-4;
  // After the fixed-step loop stalls, restart from the best point with the
  // step scaled by step_shrink, while iterations remain.
  int refinements = 3;
  double step_shrink = 0.25;
};

/// Fixed-step ascent along the L1-normalized finite-difference gradient,
/// projected onto [0, upper]; returns the best iterate visited.
BoxSearchResult gradient_ascent_box(const Objective& f, const VectorXd& start,
                                    const VectorXd& upper, const GradientAscentOptions& opt);

struct BundleOptions {
  double proximal_weight = 1.0;
  double termination = 1e-6;    // stop once the model promises less than this
  double center_margin = 1e-7;  // improvement needed to move the center
  int max_iterations = 100;
  double fd_step = 1e-4;
  // The objective is not concave, so cuts taken in one linear piece can bury
  // optima in another. Cuts are lifted so none undercuts the center, only
  // the most recent `bundle_size` cuts are kept (0: twice the dimension
  // plus one), and on convergence the model is rebuilt from the center alone,
  // up to `restarts` times within the iteration budget.
  int bundle_size = 0;
  int restarts = 3;
};

/// Proximal bundle ascent: cutting-plane model of the objective, next
/// iterate from the proximal subproblem over the box, center moved on
/// sufficient improvement. Returns the final center.
BoxSearchResult bundle_ascent_box(const Objective& f, const VectorXd& start,
                                  const VectorXd& upper, const BundleOptions& opt);

struct GeneticOptions {
  int population = 10;
  double selection_q = 0.1;
  double crossover_prob = 0.5;
  double mutation_prob = 0.6;
  int max_generations = 100;
  int stall_window = 10;
  int retry_cap = 50;
  std::uint64_t seed = 0;
};

/// Rank p among `population` under the normalized geometric scheme with
/// parameter q (rank 1 is the fittest).
double selection_probability(int rank, int population, double q);

BoxSearchResult genetic_box(const Objective& f, const VectorXd& upper,
                            const GeneticOptions& opt);

struct GridSearchOptions {
  int steps = 10;
  long max_evaluations = 1000000;
};

/// Full grid over [0, upper] with `steps` intervals per coordinate, then one
/// refinement pass around the winner at a tenth of the step. Throws if the
/// evaluation budget would be exceeded.
BoxSearchResult grid_search_box(const Objective& f, const VectorXd& upper,
                                const GridSearchOptions& opt);

}  // namespace fleetopt

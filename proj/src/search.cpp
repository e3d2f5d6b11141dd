#include "fleetopt/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace fleetopt {

namespace {

double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

std::uint64_t uniform_below(std::mt19937_64& gen, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do {
    v = gen();
  } while (v >= limit);
  return v % n;
}

VectorXd clamp_box(VectorXd x, const VectorXd& upper) {
  for (int i = 0; i < x.size(); ++i) x(i) = std::min(upper(i), std::max(0.0, x(i)));
  return x;
}

}  // namespace

VectorXd box_gradient(const Objective& f, const VectorXd& x, double f_at_x,
                      const VectorXd& upper, double h, long& evaluations) {
  const int n = static_cast<int>(x.size());
  VectorXd d = VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    const double hi = std::min(h, upper(i));
    if (hi <= 0) continue;
    VectorXd probe = x;
    if (x(i) + hi <= upper(i)) {
      probe(i) = x(i) + hi;
      d(i) = (f(probe) - f_at_x) / hi;
    } else {
      probe(i) = x(i) - hi;
      d(i) = (f_at_x - f(probe)) / hi;
    }
    ++evaluations;
  }
  return d;
}

namespace {

BoxSearchResult gradient_ascent_phase(const Objective& f, VectorXd x, double fx,
                                      const VectorXd& upper,
                                      const GradientAscentOptions& opt, long& evaluations) {
  BoxSearchResult res;
  res.point = x;
  res.value = fx;
  double f_old = fx;
  for (int t = 0; t < opt.max_iterations; ++t) {
    res.iterations = t + 1;
    VectorXd d = box_gradient(f, x, fx, upper, opt.fd_step, evaluations);
    const double norm1 = d.lpNorm<1>();
    if (norm1 <= 1e-15) break;  // stationary plateau
    x = clamp_box(x + (opt.step / norm1) * d, upper);
    fx = f(x);
    ++evaluations;
    if (fx > res.value) {
      res.value = fx;
      res.point = x;
    }
    if (fx - f_old <= opt.epsilon * (1 + std::abs(f_old))) break;
    f_old = fx;
  }
  return res;
}

}  // namespace

BoxSearchResult gradient_ascent_box(const Objective& f, const VectorXd& start,
                                    const VectorXd& upper, const GradientAscentOptions& opt) {
  BoxSearchResult res;
  VectorXd x = clamp_box(start, upper);
  res.value = f(x);
  res.point = x;
  res.evaluations = 1;
  double step = opt.step;
  int budget = opt.max_iterations;
  for (int phase = 0; phase <= opt.refinements && budget > 0; ++phase) {
    GradientAscentOptions o = opt;
    o.step = step;
    o.max_iterations = budget;
    BoxSearchResult r =
        gradient_ascent_phase(f, res.point, res.value, upper, o, res.evaluations);
    budget -= r.iterations;
    res.iterations += r.iterations;
    if (r.value > res.value) {
      res.value = r.value;
      res.point = r.point;
    }
    step *= opt.step_shrink;
  }
  return res;
}

namespace {

BoxSearchResult bundle_phase(const Objective& f, VectorXd center, double f_center,
                             const VectorXd& upper, const BundleOptions& opt,
                             long& evaluations) {
  BoxSearchResult res;
  const VectorXd lower = VectorXd::Zero(center.size());
  const int width = opt.bundle_size > 0 ? opt.bundle_size
                                        : 2 * static_cast<int>(center.size()) + 1;
  std::vector<VectorXd> points, grads;
  std::vector<double> values;
  points.push_back(center);
  values.push_back(f_center);
  grads.push_back(box_gradient(f, center, f_center, upper, opt.fd_step, evaluations));

  res.converged = false;
  for (int k = 0; k < opt.max_iterations; ++k) {
    res.iterations = k + 1;
    CuttingPlanes model;
    const int first = std::max(0, static_cast<int>(points.size()) - width);
    for (size_t i = first; i < points.size(); ++i) {
      // lift stale cuts so none undercuts the center value
      const double at_center = values[i] + grads[i].dot(center - points[i]);
      model.add(points[i], values[i] + std::max(0.0, f_center - at_center), grads[i]);
    }
    VectorXd y = solve_proximal_cut_model(model, center, opt.proximal_weight, lower, upper);
    const double delta = model.eval(y) -
                         0.5 * opt.proximal_weight * (y - center).squaredNorm() - f_center;
    if (delta < opt.termination) {
      res.converged = true;
      break;
    }
    const double fy = f(y);
    ++evaluations;
    points.push_back(y);
    values.push_back(fy);
    grads.push_back(box_gradient(f, y, fy, upper, opt.fd_step, evaluations));
    if (fy - f_center >= opt.center_margin) {
      center = y;
      f_center = fy;
    }
  }
  res.point = center;
  res.value = f_center;
  return res;
}

}  // namespace

BoxSearchResult bundle_ascent_box(const Objective& f, const VectorXd& start,
                                  const VectorXd& upper, const BundleOptions& opt) {
  BoxSearchResult res;
  VectorXd center = clamp_box(start, upper);
  res.value = f(center);
  res.point = center;
  res.evaluations = 1;
  int budget = opt.max_iterations;
  for (int phase = 0; phase <= opt.restarts && budget > 0; ++phase) {
    BundleOptions o = opt;
    o.max_iterations = budget;
    BoxSearchResult r = bundle_phase(f, res.point, res.value, upper, o, res.evaluations);
    budget -= std::max(r.iterations, 1);
    res.iterations += r.iterations;
    res.converged = r.converged;
    if (r.value > res.value) {
      res.value = r.value;
      res.point = r.point;
    }
  }
  return res;
}

double selection_probability(int rank, int population, double q) {
  return q * std::pow(1 - q, rank - 1) / (1 - std::pow(1 - q, population));
}

BoxSearchResult genetic_box(const Objective& f, const VectorXd& upper,
                            const GeneticOptions& opt) {
  if (opt.population < 2) throw std::invalid_argument("genetic: population must be >= 2");
  const int n = static_cast<int>(upper.size());
  const int K = opt.population;
  std::mt19937_64 gen(opt.seed);
  auto random_point = [&] {
    VectorXd x(n);
    for (int i = 0; i < n; ++i) x(i) = uniform01(gen) * upper(i);
    return x;
  };

  BoxSearchResult res;
  std::vector<VectorXd> pop(K);
  std::vector<double> fit(K);
  for (int k = 0; k < K; ++k) {
    pop[k] = random_point();
    fit[k] = f(pop[k]);
    ++res.evaluations;
  }

  auto best_of_population = [&] {
    int arg = 0;
    for (int k = 1; k < K; ++k)
      if (fit[k] > fit[arg]) arg = k;
    return arg;
  };
  int arg = best_of_population();
  res.point = pop[arg];
  res.value = fit[arg];

  VectorXd cumulative(K);
  {
    double acc = 0;
    for (int r = 1; r <= K; ++r) {
      acc += selection_probability(r, K, opt.selection_q);
      cumulative(r - 1) = acc;
    }
  }
  auto draw_rank = [&] {
    const double u = uniform01(gen) * cumulative(K - 1);
    for (int r = 0; r < K; ++r)
      if (u < cumulative(r)) return r;
    return K - 1;
  };

  std::vector<double> best_history{res.value};
  for (int t = 1; t <= opt.max_generations; ++t) {
    res.iterations = t;
    std::vector<int> ranked(K);
    for (int k = 0; k < K; ++k) ranked[k] = k;
    std::stable_sort(ranked.begin(), ranked.end(),
                     [&](int a, int b) { return fit[a] > fit[b]; });

    std::vector<VectorXd> next(K);
    std::vector<double> next_fit(K);
    for (int k = 0; k < K; ++k) {
      const int p1 = ranked[draw_rank()];
      const int p2 = ranked[draw_rank()];
      const double parent_bar = std::max(fit[p1], fit[p2]);
      VectorXd best_child;
      double best_child_fit = -std::numeric_limits<double>::infinity();
      for (int attempt = 0; attempt < std::max(1, opt.retry_cap); ++attempt) {
        VectorXd child = pop[p1];
        if (uniform01(gen) < opt.crossover_prob)
          for (int i = 0; i < n; ++i)
            if (uniform01(gen) < 0.5) child(i) = pop[p2](i);
        if (uniform01(gen) < opt.mutation_prob) {
          const int i = static_cast<int>(uniform_below(gen, n));
          child(i) = uniform01(gen) * upper(i);
        }
        const double fc = f(child);
        ++res.evaluations;
        if (fc > best_child_fit) {
          best_child_fit = fc;
          best_child = child;
        }
        if (fc > parent_bar) break;
      }
      next[k] = best_child;
      next_fit[k] = best_child_fit;
    }
    pop.swap(next);
    fit.swap(next_fit);
    arg = best_of_population();
    if (fit[arg] > res.value) {
      res.value = fit[arg];
      res.point = pop[arg];
    }
    best_history.push_back(res.value);
    if (t >= opt.stall_window &&
        res.value <= best_history[t - opt.stall_window] + 1e-12 * (1 + std::abs(res.value)))
      break;
  }
  return res;
}

BoxSearchResult grid_search_box(const Objective& f, const VectorXd& upper,
                                const GridSearchOptions& opt) {
  if (opt.steps < 1) throw std::invalid_argument("grid search: steps must be >= 1");
  const int n = static_cast<int>(upper.size());
  std::vector<int> dims;
  for (int i = 0; i < n; ++i)
    if (upper(i) > 0) dims.push_back(i);

  const int refine_points = 21;
  double count_coarse = 1, count_refine = 1;
  for (size_t k = 0; k < dims.size(); ++k) {
    count_coarse *= opt.steps + 1;
    count_refine *= refine_points;
  }
  if (count_coarse + count_refine > static_cast<double>(opt.max_evaluations))
    throw std::invalid_argument("grid search: evaluation budget exceeded");

  BoxSearchResult res;
  VectorXd x = VectorXd::Zero(n);
  res.point = x;
  res.value = f(x);
  res.evaluations = 1;

  auto sweep = [&](const std::vector<std::vector<double>>& axes) {
    std::vector<size_t> idx(dims.size(), 0);
    VectorXd y = VectorXd::Zero(n);
    while (true) {
      for (size_t k = 0; k < dims.size(); ++k) y(dims[k]) = axes[k][idx[k]];
      const double v = f(y);
      ++res.evaluations;
      if (v > res.value) {
        res.value = v;
        res.point = y;
      }
      size_t k = 0;
      while (k < dims.size() && ++idx[k] == axes[k].size()) idx[k++] = 0;
      if (k == dims.size()) break;
    }
  };

  std::vector<std::vector<double>> axes(dims.size());
  for (size_t k = 0; k < dims.size(); ++k) {
    const double step = upper(dims[k]) / opt.steps;
    for (int j = 0; j <= opt.steps; ++j) axes[k].push_back(j * step);
  }
  sweep(axes);

  const VectorXd winner = res.point;
  for (size_t k = 0; k < dims.size(); ++k) {
    const double step = upper(dims[k]) / opt.steps;
    axes[k].clear();
    for (int j = -(refine_points / 2); j <= refine_points / 2; ++j) {
      double v = winner(dims[k]) + j * step / 10.0;
      v = std::min(upper(dims[k]), std::max(0.0, v));
      axes[k].push_back(v);
    }
  }
  sweep(axes);
  res.iterations = 2;
  return res;
}

}  // namespace fleetopt

#include <doctest.h>

#include "fleetopt/search.hpp"
#include "test_util.hpp"

#include <cmath>
#include <random>

using namespace fleetopt;

namespace {

double brute_force_prox(const CuttingPlanes& cuts, const VectorXd& center, double weight,
                        const VectorXd& lower, const VectorXd& upper, VectorXd* arg) {
  const int n = static_cast<int>(center.size());
  double best = -1e300;
  const int steps = 200;
  VectorXd y(n);
  std::function<void(int)> rec = [&](int k) {
    if (k == n) {
      const double v = cuts.eval(y) - 0.5 * weight * (y - center).squaredNorm();
      if (v > best) {
        best = v;
        if (arg) *arg = y;
      }
      return;
    }
    for (int i = 0; i <= steps; ++i) {
      y(k) = lower(k) + (upper(k) - lower(k)) * i / steps;
      rec(k + 1);
    }
  };
  rec(0);
  return best;
}

}  // namespace

TEST_CASE("proximal cut model matches brute force on random bundles") {
  std::mt19937_64 gen(41);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2;
    const int m = 1 + static_cast<int>(gen() % 6);
    CuttingPlanes cuts;
    VectorXd lower = VectorXd::Zero(n), upper = VectorXd::Constant(n, 2.0);
    for (int i = 0; i < m; ++i) {
      VectorXd p(n), g(n);
      for (int k = 0; k < n; ++k) {
        p(k) = 2 * testutil::unif(gen);
        g(k) = 2 * testutil::unif(gen) - 1;
      }
      cuts.add(p, testutil::unif(gen), g);
    }
    VectorXd center(n);
    for (int k = 0; k < n; ++k) center(k) = 2 * testutil::unif(gen);
    const double weight = 0.3 + 2 * testutil::unif(gen);
    VectorXd y = solve_proximal_cut_model(cuts, center, weight, lower, upper);
    const double got = cuts.eval(y) - 0.5 * weight * (y - center).squaredNorm();
    const double want = brute_force_prox(cuts, center, weight, lower, upper, nullptr);
    // brute force is on a grid, so it can only be below by the grid gap
    CHECK(got >= want - 5e-4);
  }
}

TEST_CASE("gradient ascent climbs a smooth concave bowl") {
  VectorXd upper = VectorXd::Constant(2, 4.0);
  Objective f = [](const VectorXd& x) {
    return -std::pow(x(0) - 1.5, 2) - 2 * std::pow(x(1) - 2.5, 2);
  };
  GradientAscentOptions opt;
  opt.step = 0.2;
  opt.fd_step = 1e-5;
  BoxSearchResult r = gradient_ascent_box(f, VectorXd::Zero(2), upper, opt);
  CHECK(r.point(0) == doctest::Approx(1.5).epsilon(0.02));
  CHECK(r.point(1) == doctest::Approx(2.5).epsilon(0.02));
  CHECK(r.evaluations > 0);
}

TEST_CASE("gradient ascent stays put on a plateau") {
  VectorXd upper = VectorXd::Constant(2, 1.0);
  long calls = 0;
  Objective f = [&](const VectorXd&) {
    ++calls;
    return 7.0;
  };
  GradientAscentOptions opt;
  BoxSearchResult r = gradient_ascent_box(f, VectorXd::Constant(2, 0.5), upper, opt);
  CHECK(r.value == 7.0);
  CHECK(r.point(0) == doctest::Approx(0.5));
}

TEST_CASE("bundle terminates quickly when started at a kinked maximum") {
  // two-piece concave roof with the peak at x = 1
  VectorXd upper = VectorXd::Constant(1, 2.0);
  Objective f = [](const VectorXd& x) { return std::min(x(0), 2.0 - x(0)); };
  BundleOptions opt;
  opt.proximal_weight = 1.0;
  opt.fd_step = 1e-6;
  opt.restarts = 0;
  BoxSearchResult r = bundle_ascent_box(f, VectorXd::Constant(1, 1.0), upper, opt);
  CHECK(r.iterations <= 3);
  CHECK(r.point(0) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("bundle climbs a piecewise-linear roof from the boundary") {
  VectorXd upper = VectorXd::Constant(2, 3.0);
  Objective f = [](const VectorXd& x) {
    return std::min({x(0) + 0.5 * x(1), 4.0 - x(0), 3.5 - x(1)});
  };
  BundleOptions opt;
  opt.proximal_weight = 0.5;
  opt.fd_step = 1e-6;
  BoxSearchResult r = bundle_ascent_box(f, VectorXd::Zero(2), upper, opt);
  const double best = brute_force_prox(
      [] {
        CuttingPlanes c;  // reuse the brute forcer by expressing f as cuts
        VectorXd p = VectorXd::Zero(2);
        VectorXd g1(2), g2(2), g3(2);
        g1 << 1, 0.5;
        g2 << -1, 0;
        g3 << 0, -1;
        c.add(p, 0.0, g1);
        c.add(p, 4.0, g2);
        c.add(p, 3.5, g3);
        return c;
      }(),
      VectorXd::Zero(2), 0.0, VectorXd::Zero(2), upper, nullptr);
  CHECK(r.value == doctest::Approx(best).epsilon(1e-3));
}

TEST_CASE("selection probabilities normalize and rank one is right") {
  double total = 0;
  for (int rank = 1; rank <= 10; ++rank) total += selection_probability(rank, 10, 0.1);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(selection_probability(1, 10, 0.1) ==
        doctest::Approx(0.1 / (1 - std::pow(0.9, 10))).epsilon(1e-12));
  CHECK(selection_probability(1, 10, 0.1) == doctest::Approx(0.153535).epsilon(1e-4));
}

TEST_CASE("genetic search is deterministic per seed and finds a sharp peak") {
  VectorXd upper = VectorXd::Constant(2, 1.0);
  Objective f = [](const VectorXd& x) {
    return -std::abs(x(0) - 0.37) - std::abs(x(1) - 0.81);
  };
  GeneticOptions opt;
  opt.seed = 5;
  BoxSearchResult a = genetic_box(f, upper, opt);
  BoxSearchResult b = genetic_box(f, upper, opt);
  CHECK(a.value == b.value);
  CHECK((a.point - b.point).cwiseAbs().maxCoeff() == 0);
  CHECK(a.evaluations == b.evaluations);
  CHECK(a.point(0) == doctest::Approx(0.37).epsilon(0.05));
  CHECK(a.point(1) == doctest::Approx(0.81).epsilon(0.05));

  opt.seed = 6;
  BoxSearchResult c = genetic_box(f, upper, opt);
  CHECK(c.value == doctest::Approx(a.value).epsilon(0.2));
}

TEST_CASE("grid search refines and enforces its budget") {
  VectorXd upper = VectorXd::Constant(2, 1.0);
  Objective f = [](const VectorXd& x) {
    return -std::pow(x(0) - 0.503, 2) - std::pow(x(1) - 0.247, 2);
  };
  GridSearchOptions opt;
  opt.steps = 10;
  BoxSearchResult r = grid_search_box(f, upper, opt);
  CHECK(r.point(0) == doctest::Approx(0.503).epsilon(0.03));
  CHECK(r.point(1) == doctest::Approx(0.247).epsilon(0.05));

  GridSearchOptions tiny;
  tiny.steps = 40;
  tiny.max_evaluations = 100;
  CHECK_THROWS_AS(grid_search_box(f, upper, tiny), std::invalid_argument);
}

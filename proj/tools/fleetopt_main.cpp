#include <CLI11.hpp>

#include "fleetopt/endogenous.hpp"
#include "fleetopt/record.hpp"
#include "fleetopt/two_region.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace fleetopt;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NetworkError("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct SweepRange {
  double lo = 0, hi = 0, step = 0;
};

SweepRange parse_range(const std::string& text) {
  SweepRange r;
  char c1 = 0, c2 = 0;
  std::istringstream ss(text);
  if (!(ss >> r.lo >> c1 >> r.hi >> c2 >> r.step) || c1 != ':' || c2 != ':')
    throw NetworkError("--range expects lo:hi:step, got \"" + text + "\"");
  if (r.step <= 0 || r.hi < r.lo)
    throw NetworkError("--range is empty or has a nonpositive step: \"" + text + "\"");
  return r;
}

BilevelSolution run_exogenous(const NetworkSpec& spec, const DerivedNetwork& net,
                              const std::string& algorithm, double M, double N,
                              std::uint64_t seed, int steps, int max_iterations) {
  GdConfig gd;
  gd.max_iterations = max_iterations;
  BundleConfig bu;
  bu.max_iterations = max_iterations;
  GeneticConfig ge;
  ge.seed = seed;
  if (algorithm == "av-first") return av_first(net, M, N);
  if (algorithm == "gd")
    return gradient_descent(net, M, N, gd, av_first(net, M, N).revealed);
  if (algorithm == "bundle")
    return bundle_method(net, M, N, bu, av_first(net, M, N).revealed);
  if (algorithm == "genetic") return genetic(net, M, N, ge);
  if (algorithm == "exhaustive") return exhaustive_search(net, M, N, steps);
  if (algorithm == "multistart") {
    const auto starts = standard_starts(net, M, N);
    BilevelSolution best = best_gradient_descent(net, M, N, gd, starts);
    BilevelSolution b2 = best_bundle_method(net, M, N, bu, starts);
    BilevelSolution b3 = genetic(net, M, N, ge);
    if (b2.total_profit > best.total_profit) best = b2;
    if (b3.total_profit > best.total_profit) best = b3;
    best.algorithm = "multistart";
    return best;
  }
  if (algorithm == "oracle") {
    TwoRegionOptimum opt =
        spec.demand(1, 0) >= spec.demand(0, 1)
            ? closed_form_optimum(spec, M, N)
            : closed_form_optimum(swap_two_region(spec), M, N);
    MatrixXd cv = opt.cv_rates;
    if (spec.demand(1, 0) < spec.demand(0, 1)) {
      Eigen::PermutationMatrix<2> perm;
      perm.indices() << 1, 0;
      cv = perm * cv * perm;
    }
    VectorXd revealed = cv.colwise().sum().transpose();
    BilevelSolution sol = evaluate_profit(net, revealed, M, N);
    sol.algorithm = "oracle";
    return sol;
  }
  throw NetworkError("unknown algorithm: " + algorithm);
}

BilevelSolution run_endogenous_alg(const NetworkSpec& spec, const DerivedNetwork& net,
                                   const std::string& algorithm, double I, double pool,
                                   std::uint64_t seed, int max_iterations) {
  EndogenousConfig cfg;
  cfg.purchase_cost = I;
  cfg.driver_pool = pool;
  GdConfig gd;
  gd.max_iterations = max_iterations;
  BundleConfig bu;
  bu.max_iterations = max_iterations;
  GeneticConfig ge;
  ge.seed = seed;
  if (algorithm == "av-first")
    return solve_endogenous(net, cfg, EndogenousAlgorithm::AvFirst);
  if (algorithm == "gd")
    return solve_endogenous(net, cfg, EndogenousAlgorithm::GradientDescent, gd);
  if (algorithm == "bundle")
    return solve_endogenous(net, cfg, EndogenousAlgorithm::Bundle, gd, bu);
  if (algorithm == "genetic")
    return solve_endogenous(net, cfg, EndogenousAlgorithm::Genetic, gd, bu, ge);
  if (algorithm == "oracle") {
    TwoRegionOptimum opt = spec.demand(1, 0) >= spec.demand(0, 1)
                               ? closed_form_endogenous(spec, I, pool)
                               : closed_form_endogenous(swap_two_region(spec), I, pool);
    MatrixXd cv = opt.cv_rates;
    if (spec.demand(1, 0) < spec.demand(0, 1)) {
      Eigen::PermutationMatrix<2> perm;
      perm.indices() << 1, 0;
      cv = perm * cv * perm;
    }
    VectorXd revealed = cv.colwise().sum().transpose();
    CvCountResult count = equilibrium_cv_count(net, revealed, pool);
    BilevelSolution sol =
        evaluate_profit_endogenous_av(net, revealed, I, count.fleet);
    sol.algorithm = "oracle";
    return sol;
  }
  throw NetworkError("unknown algorithm: " + algorithm);
}

int print_validation(const ValidationReport& report) {
  std::printf("%-28s %-12s %s\n", "condition", "residual", "status");
  for (const auto& c : report.conditions)
    std::printf("%-28s %-12.3e %s\n", c.name.c_str(), c.residual,
                c.pass ? "pass" : "FAIL");
  return report.all_pass() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Strategic-driver equilibrium and mixed-fleet profit optimization"};
  app.require_subcommand(1);
  double tolerance = 0.0;
  app.add_option("--tolerance", tolerance, "Override the validation tolerance");

  std::string network_path, out_path, record_path, algorithm = "multistart";
  double M = 0, N = 0, I = 0, pool = 0;
  std::uint64_t seed = 0;
  int steps = 20, max_iterations = 100;
  std::string vary = "M", range_text;
  int rows = 2, cols = 2;
  std::vector<double> demand_values = {0, 1, 2};

  auto* solve = app.add_subcommand("solve", "Solve one instance");
  solve->add_option("network", network_path, "Network file")->required();
  solve->add_option("-a,--algorithm", algorithm,
                    "av-first|gd|bundle|genetic|exhaustive|multistart|oracle");
  solve->add_option("-M,--av-mass", M, "AV fleet mass")->check(CLI::NonNegativeNumber);
  solve->add_option("-N,--cv-mass", N, "CV fleet mass")->check(CLI::NonNegativeNumber);
  solve->add_option("--seed", seed, "Random seed (recorded)");
  solve->add_option("--steps", steps, "Grid steps for exhaustive search");
  solve->add_option("--max-iterations", max_iterations, "Iteration cap for gd/bundle");
  solve->add_option("-o,--out", out_path, "Write the run record here");

  auto* sweep = app.add_subcommand("sweep", "Sweep a parameter, write CSV");
  sweep->add_option("network", network_path, "Network file")->required();
  sweep->add_option("--vary", vary, "M|N|I")->check(CLI::IsMember({"M", "N", "I"}));
  sweep->add_option("--range", range_text, "lo:hi:step")->required();
  sweep->add_option("-a,--algorithm", algorithm, "Algorithm per sweep point");
  sweep->add_option("-M,--av-mass", M, "Fixed AV mass")->check(CLI::NonNegativeNumber);
  sweep->add_option("-N,--cv-mass", N, "Fixed CV mass")->check(CLI::NonNegativeNumber);
  sweep->add_option("--n-max", pool, "Driver pool for I sweeps")
      ->check(CLI::NonNegativeNumber);
  sweep->add_option("--seed", seed, "Random seed");
  sweep->add_option("--steps", steps, "Grid steps for exhaustive search");
  sweep->add_option("--max-iterations", max_iterations, "Iteration cap for gd/bundle");
  sweep->add_option("-o,--out", out_path, "CSV output path")->required();

  auto* endo = app.add_subcommand("endogenous", "Endogenous AV purchase and CV entry");
  endo->add_option("network", network_path, "Network file")->required();
  endo->add_option("-I,--purchase-cost", I, "Amortized AV purchase cost")
      ->required()
      ->check(CLI::NonNegativeNumber);
  endo->add_option("--n-max", pool, "Driver pool mass")
      ->required()
      ->check(CLI::NonNegativeNumber);
  endo->add_option("-a,--algorithm", algorithm, "av-first|gd|bundle|genetic|oracle");
  endo->add_option("--seed", seed, "Random seed");
  endo->add_option("--max-iterations", max_iterations, "Iteration cap for gd/bundle");
  endo->add_option("-o,--out", out_path, "Write the run record here");

  auto* validate = app.add_subcommand("validate", "Re-check a stored run record");
  validate->add_option("record", record_path, "Record file")->required();
  validate->add_option("network", network_path, "Network file")->required();

  auto* gen = app.add_subcommand("gen-grid", "Generate a lattice instance");
  gen->add_option("rows", rows, "Grid rows")->required();
  gen->add_option("cols", cols, "Grid cols")->required();
  gen->add_option("--seed", seed, "Demand seed");
  gen->add_option("--demand-values", demand_values, "Demand levels to draw from");
  gen->add_option("-o,--out", out_path, "Output network file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (tolerance > 0) set_validation_tolerance(tolerance);

    if (gen->parsed()) {
      NetworkSpec spec = generate_grid(rows, cols, seed, demand_values);
      save_network(spec, out_path);
      std::cout << "wrote " << out_path << "\n";
      return 0;
    }

    if (validate->parsed()) {
      RunRecord record = load_record(record_path);
      NetworkSpec spec = load_network(network_path);
      return print_validation(validate_record(record, spec));
    }

    const std::string text = read_file(network_path);
    const NetworkSpec spec = parse_network(text);
    const DerivedNetwork net = build_derived(spec);
    const std::string digest = fnv1a_hex(text);
    std::ostringstream command;
    for (int i = 0; i < argc; ++i) command << (i ? " " : "") << argv[i];

    if (solve->parsed() || endo->parsed()) {
      BilevelSolution sol;
      std::map<std::string, double> params;
      if (solve->parsed()) {
        sol = run_exogenous(spec, net, algorithm, M, N, seed, steps, max_iterations);
        params = {{"M", M}, {"N", N}};
      } else {
        sol = run_endogenous_alg(spec, net, algorithm, I, pool, seed, max_iterations);
        params = {{"I", I},
                  {"n_max", pool},
                  {"N_equilibrium", sol.cv.fleet_size}};
      }
      RunRecord record = make_record(command.str(), digest, params, seed, sol);
      std::cout << "algorithm " << sol.algorithm << " profit " << sol.total_profit
                << " evaluations " << sol.evaluations << "\n";
      if (!out_path.empty()) save_record(record, out_path);
      return 0;
    }

    if (sweep->parsed()) {
      const SweepRange r = parse_range(range_text);
      std::ofstream csv(out_path);
      if (!csv) throw NetworkError("cannot write CSV: " + out_path);
      csv << "value,profit,av_mass,cv_mass,algorithm,seed\n";
      csv.precision(12);
      for (double v = r.lo; v <= r.hi + 1e-12 * (1 + std::abs(r.hi)); v += r.step) {
        BilevelSolution sol;
        if (vary == "I")
          sol = run_endogenous_alg(spec, net, algorithm, v, pool, seed, max_iterations);
        else if (vary == "M")
          sol = run_exogenous(spec, net, algorithm, v, N, seed, steps, max_iterations);
        else
          sol = run_exogenous(spec, net, algorithm, M, v, seed, steps, max_iterations);
        csv << v << ',' << sol.total_profit << ',' << sol.av_active_mass << ','
            << sol.cv.active_mass << ',' << sol.algorithm << ',' << seed << "\n";
      }
      return 0;
    }
  } catch (const NetworkError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const EquilibriumError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fleetopt {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct NetworkError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A ride-hailing network: demand rates between regions, travel times, and
/// the price/cost/commission scalars. `trip_time` may have a positive
/// diagonal (within-region trip duration); `reposition_time` has a zero
/// diagonal and defaults to `trip_time` with the diagonal forced to zero.
struct NetworkSpec {
  int regions = 0;
  MatrixXd demand;
  MatrixXd trip_time;
  MatrixXd reposition_time;
  double price = 1.0;
  double cost = 0.0;
  double commission = 0.5;
};

/// Throws NetworkError naming the offending field if any invariant fails.
void validate_spec(const NetworkSpec& spec);

/// All per-action quantities derived from a NetworkSpec: region demand
/// totals, customer routing probabilities, per-action driving times and the
/// three expected-profit matrices (platform-from-AV, driver, commission).
/// Row i / column a of an action matrix refers to taking action a (serve the
/// next customer in region a) from region i.
struct DerivedNetwork {
  int regions = 0;
  VectorXd region_demand;     // b_i, row sums of the demand matrix
  MatrixXd routing;           // q, rows with zero demand are zeroed
  MatrixXd drive_time;        // reposition leg plus expected service leg
  MatrixXd reward_av;         // platform profit per unit action rate, AV
  MatrixXd reward_cv;         // driver profit per unit action rate, CV
  MatrixXd reward_commission; // platform commission per unit action rate
  std::vector<bool> active;   // region has any demand to serve
  double price = 1.0;
  double cost = 0.0;
  double commission = 0.5;

  bool usable(int from, int action) const { return active[action]; (void)from; }
};

DerivedNetwork build_derived(const NetworkSpec& spec);

/// Grid instance on a rows x cols integer lattice. Travel times are
/// Manhattan distances, off-diagonal demand is drawn uniformly from
/// `demand_values` with the seeded generator, diagonal demand is zero.
/// Deterministic for fixed arguments.
NetworkSpec generate_grid(int rows, int cols, std::uint64_t seed,
                          const std::vector<double>& demand_values);

NetworkSpec load_network(const std::string& path);
void save_network(const NetworkSpec& spec, const std::string& path);

NetworkSpec parse_network(const std::string& text);
std::string format_network(const NetworkSpec& spec);

}  // namespace fleetopt

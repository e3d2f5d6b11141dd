#include "fleetopt/network.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace fleetopt {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw NetworkError(msg);
}

void check_dims(const MatrixXd& m, int L, const std::string& name) {
  require(m.rows() == L && m.cols() == L,
          name + ": expected " + std::to_string(L) + "x" + std::to_string(L) +
              " matrix, got " + std::to_string(m.rows()) + "x" +
              std::to_string(m.cols()));
}

// Portable uniform integer in [0, n); avoids the implementation-defined
// std::uniform_int_distribution so grid instances are stable across stdlibs.
std::uint64_t uniform_index(std::mt19937_64& gen, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do {
    v = gen();
  } while (v >= limit);
  return v % n;
}

}  // namespace

void validate_spec(const NetworkSpec& spec) {
  const int L = spec.regions;
  require(L >= 1, "regions: must be a positive integer");
  check_dims(spec.demand, L, "demand");
  check_dims(spec.trip_time, L, "trip_time");
  check_dims(spec.reposition_time, L, "reposition_time");
  require((spec.demand.array() >= 0).all(), "demand: entries must be nonnegative");
  require(spec.demand.sum() > 0, "demand: at least one entry must be positive");
  require((spec.trip_time.array() >= 0).all(), "trip_time: entries must be nonnegative");
  for (int i = 0; i < L; ++i) {
    require(spec.reposition_time(i, i) == 0.0,
            "reposition_time: diagonal entry (" + std::to_string(i) + "," +
                std::to_string(i) + ") must be zero");
    for (int j = 0; j < L; ++j) {
      if (i != j)
        require(spec.reposition_time(i, j) > 0.0,
                "reposition_time: off-diagonal entry (" + std::to_string(i) +
                    "," + std::to_string(j) + ") must be positive");
    }
  }
  require(spec.price > 0, "price: must be positive");
  require(spec.cost >= 0, "cost: must be nonnegative");
  require(spec.commission > 0 && spec.commission < 1,
          "commission: must lie strictly between 0 and 1");
}

DerivedNetwork build_derived(const NetworkSpec& spec) {
  validate_spec(spec);
  const int L = spec.regions;
  DerivedNetwork net;
  net.regions = L;
  net.price = spec.price;
  net.cost = spec.cost;
  net.commission = spec.commission;
  net.region_demand = spec.demand.rowwise().sum();
  net.active.resize(L);
  net.routing = MatrixXd::Zero(L, L);
  for (int i = 0; i < L; ++i) {
    net.active[i] = net.region_demand(i) > 0;
    if (net.active[i]) net.routing.row(i) = spec.demand.row(i) / net.region_demand(i);
  }
  // Expected service time of one trip that starts in region a.
  VectorXd service(L);
  for (int a = 0; a < L; ++a)
    service(a) = net.routing.row(a).dot(spec.trip_time.row(a));

  net.drive_time = MatrixXd::Zero(L, L);
  net.reward_av = MatrixXd::Zero(L, L);
  net.reward_cv = MatrixXd::Zero(L, L);
  net.reward_commission = MatrixXd::Zero(L, L);
  const double p = spec.price, c = spec.cost, R = spec.commission;
  for (int i = 0; i < L; ++i) {
    for (int a = 0; a < L; ++a) {
      if (!net.active[a]) continue;
      net.drive_time(i, a) = spec.reposition_time(i, a) + service(a);
      net.reward_av(i, a) = p * service(a) - c * net.drive_time(i, a);
      net.reward_cv(i, a) = p * (1 - R) * service(a) - c * net.drive_time(i, a);
      net.reward_commission(i, a) = p * R * service(a);
    }
  }
  return net;
}

NetworkSpec generate_grid(int rows, int cols, std::uint64_t seed,
                          const std::vector<double>& demand_values) {
  require(rows >= 1 && cols >= 1 && rows * cols >= 2,
          "grid: rows*cols must be at least 2");
  require(!demand_values.empty(), "grid: demand_values must be nonempty");
  std::vector<double> values = demand_values;
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  const int L = rows * cols;
  NetworkSpec spec;
  spec.regions = L;
  spec.trip_time = MatrixXd::Zero(L, L);
  for (int a = 0; a < L; ++a) {
    for (int b = 0; b < L; ++b) {
      const int dr = std::abs(a / cols - b / cols);
      const int dc = std::abs(a % cols - b % cols);
      spec.trip_time(a, b) = dr + dc;
    }
  }
  spec.reposition_time = spec.trip_time;

  std::mt19937_64 gen(seed);
  spec.demand = MatrixXd::Zero(L, L);
  do {
    for (int i = 0; i < L; ++i)
      for (int j = 0; j < L; ++j)
        if (i != j) spec.demand(i, j) = values[uniform_index(gen, values.size())];
  } while (spec.demand.sum() == 0);
  spec.price = 1.0;
  spec.cost = 0.1;
  spec.commission = 0.7;
  validate_spec(spec);
  return spec;
}

namespace {

using nlohmann::json;

MatrixXd matrix_from_json(const json& j, const std::string& name) {
  if (!j.is_array() || j.empty())
    throw NetworkError(name + ": expected a nonempty array of rows");
  const int rows = static_cast<int>(j.size());
  int cols = -1;
  MatrixXd m;
  for (int i = 0; i < rows; ++i) {
    const json& row = j[i];
    if (!row.is_array())
      throw NetworkError(name + ": row " + std::to_string(i) + " is not an array");
    if (cols < 0) {
      cols = static_cast<int>(row.size());
      m.resize(rows, cols);
    }
    if (static_cast<int>(row.size()) != cols)
      throw NetworkError(name + ": row " + std::to_string(i) +
                         " has inconsistent length");
    for (int k = 0; k < cols; ++k) {
      if (!row[k].is_number())
        throw NetworkError(name + ": entry (" + std::to_string(i) + "," +
                           std::to_string(k) + ") is not a number");
      m(i, k) = row[k].get<double>();
    }
  }
  return m;
}

json matrix_to_json(const MatrixXd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

const json& field(const json& j, const std::string& name) {
  auto it = j.find(name);
  if (it == j.end()) throw NetworkError("missing field \"" + name + "\"");
  return *it;
}

}  // namespace

NetworkSpec parse_network(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw NetworkError(std::string("network file parse error: ") + e.what());
  }
  if (!j.is_object()) throw NetworkError("network file: expected a JSON object");
  NetworkSpec spec;
  const json& jr = field(j, "regions");
  if (!jr.is_number_integer() || jr.get<int>() < 1)
    throw NetworkError("regions: must be a positive integer");
  spec.regions = jr.get<int>();
  spec.demand = matrix_from_json(field(j, "demand"), "demand");
  spec.trip_time = matrix_from_json(field(j, "trip_time"), "trip_time");
  if (j.contains("reposition_time")) {
    spec.reposition_time = matrix_from_json(j["reposition_time"], "reposition_time");
  } else {
    spec.reposition_time = spec.trip_time;
    spec.reposition_time.diagonal().setZero();
  }
  for (const char* name : {"price", "cost", "commission"}) {
    if (!field(j, name).is_number())
      throw NetworkError(std::string(name) + ": must be a number");
  }
  spec.price = j["price"].get<double>();
  spec.cost = j["cost"].get<double>();
  spec.commission = j["commission"].get<double>();
  validate_spec(spec);
  return spec;
}

std::string format_network(const NetworkSpec& spec) {
  json j;
  j["regions"] = spec.regions;
  j["demand"] = matrix_to_json(spec.demand);
  j["trip_time"] = matrix_to_json(spec.trip_time);
  j["reposition_time"] = matrix_to_json(spec.reposition_time);
  j["price"] = spec.price;
  j["cost"] = spec.cost;
  j["commission"] = spec.commission;
  return j.dump(2) + "\n";
}

NetworkSpec load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NetworkError("cannot open network file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_network(ss.str());
}

void save_network(const NetworkSpec& spec, const std::string& path) {
  validate_spec(spec);
  std::ofstream out(path);
  if (!out) throw NetworkError("cannot write network file: " + path);
  out << format_network(spec);
}

}  // namespace fleetopt

#include "fleetopt/record.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace fleetopt {

namespace {

using nlohmann::json;

json matrix_to_json(const MatrixXd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

MatrixXd matrix_from_json(const json& j) {
  const int rows = static_cast<int>(j.size());
  const int cols = rows ? static_cast<int>(j[0].size()) : 0;
  MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  return m;
}

json vector_to_json(const VectorXd& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

VectorXd vector_from_json(const json& j) {
  VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunRecord make_record(const std::string& command, const std::string& network_digest,
                      const std::map<std::string, double>& parameters, std::uint64_t seed,
                      const BilevelSolution& solution) {
  RunRecord r;
  r.command = command;
  r.network_digest = network_digest;
  r.parameters = parameters;
  r.algorithm = solution.algorithm;
  r.seed = seed;
  r.total_profit = solution.total_profit;
  r.av_profit = solution.av_profit;
  r.cv_platform_profit = solution.cv.platform_profit;
  r.revealed = solution.revealed;
  r.av_rates = solution.av_rates;
  r.cv_rates = solution.cv.rates;
  r.waiting = solution.cv.waiting;
  r.av_active_mass = solution.av_active_mass;
  r.cv_active_mass = solution.cv.active_mass;
  r.iterations = solution.iterations;
  r.evaluations = solution.evaluations;
  r.wall_time = solution.wall_time;
  return r;
}

std::string format_record(const RunRecord& r) {
  json j;
  j["command"] = r.command;
  j["network_digest"] = r.network_digest;
  j["parameters"] = r.parameters;
  j["algorithm"] = r.algorithm;
  j["seed"] = r.seed;
  j["total_profit"] = r.total_profit;
  j["av_profit"] = r.av_profit;
  j["cv_platform_profit"] = r.cv_platform_profit;
  j["revealed_demand"] = vector_to_json(r.revealed);
  j["av_rates"] = matrix_to_json(r.av_rates);
  j["cv_rates"] = matrix_to_json(r.cv_rates);
  j["waiting"] = vector_to_json(r.waiting);
  j["av_active_mass"] = r.av_active_mass;
  j["cv_active_mass"] = r.cv_active_mass;
  j["iterations"] = r.iterations;
  j["evaluations"] = r.evaluations;
  j["wall_time"] = r.wall_time;
  return j.dump(2) + "\n";
}

RunRecord parse_record(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw NetworkError(std::string("record parse error: ") + e.what());
  }
  RunRecord r;
  try {
    r.command = j.at("command").get<std::string>();
    r.network_digest = j.at("network_digest").get<std::string>();
    r.parameters = j.at("parameters").get<std::map<std::string, double>>();
    r.algorithm = j.at("algorithm").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.total_profit = j.at("total_profit").get<double>();
    r.av_profit = j.at("av_profit").get<double>();
    r.cv_platform_profit = j.at("cv_platform_profit").get<double>();
    r.revealed = vector_from_json(j.at("revealed_demand"));
    r.av_rates = matrix_from_json(j.at("av_rates"));
    r.cv_rates = matrix_from_json(j.at("cv_rates"));
    r.waiting = vector_from_json(j.at("waiting"));
    r.av_active_mass = j.at("av_active_mass").get<double>();
    r.cv_active_mass = j.at("cv_active_mass").get<double>();
    r.iterations = j.at("iterations").get<int>();
    r.evaluations = j.at("evaluations").get<long>();
    r.wall_time = j.at("wall_time").get<double>();
  } catch (const json::exception& e) {
    throw NetworkError(std::string("record field error: ") + e.what());
  }
  return r;
}

void save_record(const RunRecord& record, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw NetworkError("cannot write record file: " + path);
  out << format_record(record);
}

RunRecord load_record(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NetworkError("cannot open record file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_record(ss.str());
}

ValidationReport validate_record(const RunRecord& record, const NetworkSpec& spec) {
  const DerivedNetwork net = build_derived(spec);
  const double tol = validation_tolerance();

  double fleet = 0.0, av_mass = std::numeric_limits<double>::infinity();
  double purchase_cost = 0.0;
  if (auto it = record.parameters.find("N_equilibrium"); it != record.parameters.end())
    fleet = it->second;
  else if (auto it2 = record.parameters.find("N"); it2 != record.parameters.end())
    fleet = it2->second;
  if (auto it = record.parameters.find("M"); it != record.parameters.end())
    av_mass = it->second;
  if (auto it = record.parameters.find("I"); it != record.parameters.end())
    purchase_cost = it->second;

  CvEquilibrium eq;
  eq.rates = record.cv_rates;
  eq.waiting = record.waiting;
  eq.revealed_demand = record.revealed;
  eq.fleet_size = fleet;
  eq.driver_profit = net.reward_cv.cwiseProduct(record.cv_rates).sum();
  eq.active_mass = net.drive_time.cwiseProduct(record.cv_rates).sum();
  eq.platform_profit = net.reward_commission.cwiseProduct(record.cv_rates).sum();

  ValidationReport report = verify_equilibrium(net, eq, record.revealed, fleet);

  BilevelSolution sol;
  sol.revealed = record.revealed;
  sol.av_rates = record.av_rates;
  sol.cv = eq;
  sol.av_profit =
      (net.reward_av - purchase_cost * net.drive_time).cwiseProduct(record.av_rates).sum();
  sol.total_profit = record.total_profit;
  ValidationReport bi = verify_bilevel(net, sol, av_mass, fleet);
  for (auto& c : bi.conditions) report.conditions.push_back(c);

  auto add = [&](const std::string& name, double residual) {
    report.conditions.push_back({name, residual, residual <= tol});
  };
  add("stored_av_profit",
      std::abs(sol.av_profit - record.av_profit) / (1 + std::abs(record.av_profit)));
  add("stored_cv_profit", std::abs(eq.platform_profit - record.cv_platform_profit) /
                              (1 + std::abs(record.cv_platform_profit)));
  add("stored_masses", std::abs(eq.active_mass - record.cv_active_mass) +
                           std::abs(net.drive_time.cwiseProduct(record.av_rates).sum() -
                                    record.av_active_mass));
  return report;
}

}  // namespace fleetopt

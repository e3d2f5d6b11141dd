#include "fleetopt/two_region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace fleetopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Candidate {
  double av_stay = 0, av_rep = 0, cv_stay = 0, cv_rep = 0;  // active masses
  std::string label;
};

double candidate_profit(const TwoRegionAnalysis& a, const Candidate& c,
                        double av_stay_rate, double av_rep_rate) {
  const double p = a.price, R = a.commission;
  const double g1 = a.service_fraction;
  return c.av_stay * av_stay_rate + c.av_rep * av_rep_rate + c.cv_stay * R * p +
         c.cv_rep * g1 * R * p;
}

TwoRegionOptimum realize(const TwoRegionAnalysis& a, const Candidate& c, double profit) {
  TwoRegionOptimum out;
  out.profit = profit;
  out.case_label = c.label;
  out.av_rates = c.av_stay / a.stay_unit_mass * a.stay_rates +
                 c.av_rep / a.reposition_unit_mass * a.reposition_rates;
  out.cv_rates = c.cv_stay / a.stay_unit_mass * a.stay_rates +
                 c.cv_rep / a.reposition_unit_mass * a.reposition_rates;
  return out;
}

}  // namespace

TwoRegionAnalysis analyze_two_region(const NetworkSpec& spec) {
  validate_spec(spec);
  if (spec.regions != 2)
    throw NetworkError("two-region analysis requires exactly 2 regions");
  TwoRegionAnalysis a;
  a.b11 = spec.demand(0, 0);
  a.b12 = spec.demand(0, 1);
  a.b21 = spec.demand(1, 0);
  a.b22 = spec.demand(1, 1);
  if (a.b21 < a.b12)
    throw NetworkError("two-region analysis expects b21 >= b12; relabel the regions");
  if (a.b21 <= 0)
    throw NetworkError("two-region analysis requires positive cross demand b21");
  const double b1 = a.b11 + a.b12;
  if (b1 <= 0)
    throw NetworkError("two-region analysis requires positive region-1 demand");

  const double q11 = a.b11 / b1, q12 = a.b12 / b1;
  const double b2 = a.b21 + a.b22;
  const double q21 = a.b21 / b2, q22 = a.b22 / b2;
  const auto& t = spec.trip_time;
  const auto& rt = spec.reposition_time;

  a.price = spec.price;
  a.cost = spec.cost;
  a.commission = spec.commission;
  a.stay_rates.resize(2, 2);
  a.stay_rates << 1, 0, 0, q12 / q21;
  a.reposition_rates.resize(2, 2);
  a.reposition_rates << 0, 1, 0, q22 / q21;

  a.stay_unit_mass = q11 * t(0, 0) + q12 * t(0, 1) + q12 * t(1, 0) +
                     q12 * (q22 / q21) * t(1, 1);
  const double rep_serving = t(1, 0) + (q22 / q21) * t(1, 1);
  a.reposition_unit_mass = rt(0, 1) + rep_serving;
  a.service_fraction = rep_serving / a.reposition_unit_mass;

  const double p = a.price, c = a.cost, R = a.commission, g1 = a.service_fraction;
  a.commission_stay_limit = 1 - c / p;
  a.commission_reposition_limit = 1 - c / (g1 * p);
  const double stay_earning = (1 - R) * p - c;
  const double rep_earning = g1 * (1 - R) * p - c;
  a.earning_ratio = stay_earning > 0 ? rep_earning / stay_earning : 0.0;

  a.stay_mass = b1 * a.stay_unit_mass;
  a.reposition_mass = (a.b21 - a.b12) * a.reposition_unit_mass;
  a.queue_threshold_mass = a.earning_ratio > 0 ? a.stay_mass / a.earning_ratio : kInf;
  a.waiting_threshold =
      std::isfinite(a.queue_threshold_mass) ? (a.queue_threshold_mass - a.stay_mass) / b1 : kInf;

  a.purchase_threshold1 = rep_earning;
  a.purchase_threshold2 = g1 * p - c;
  a.purchase_threshold3 = stay_earning;
  a.purchase_threshold4 = stay_earning + g1 * R * p;
  a.purchase_max = p - c;
  return a;
}

TwoRegionOptimum closed_form_optimum(const NetworkSpec& spec, double av_mass,
                                     double cv_mass) {
  const TwoRegionAnalysis a = analyze_two_region(spec);
  const double p = a.price, c = a.cost, R = a.commission, g1 = a.service_fraction;
  const double M = std::max(av_mass, 0.0), N = std::max(cv_mass, 0.0);
  const double S1 = a.stay_mass, S2 = a.reposition_mass, g2 = a.earning_ratio;
  const double av_stay_rate = p - c, av_rep_rate = g1 * p - c;
  const double cv_stay_earn = (1 - R) * p - c;
  const double cv_rep_earn = g1 * (1 - R) * p - c;

  std::vector<Candidate> cands;

  // Drivers priced out of repositioning (or out entirely): only the stay
  // cycle can interest them, so enumerate the AV share of the stay cycle.
  {
    const double cv_weight = cv_stay_earn >= 0 ? N : 0.0;
    std::vector<double> shares = {0.0, std::min(M, S1)};
    shares.push_back(std::clamp(M - S2, 0.0, std::min(M, S1)));
    shares.push_back(std::clamp(S1 - cv_weight, 0.0, std::min(M, S1)));
    for (double an : shares) {
      Candidate c0;
      c0.av_stay = av_stay_rate > 0 ? an : 0.0;
      c0.av_rep = av_rep_rate > 0 ? std::min(std::max(M - an, 0.0), S2) : 0.0;
      c0.cv_stay = std::min(cv_weight, S1 - an);
      c0.label = "drivers_stay_only";
      cands.push_back(c0);
    }
  }

  if (cv_rep_earn >= 0) {  // main regime: drivers can be induced to reposition
    if (M + N <= S1) {
      Candidate c0;
      c0.av_stay = M;
      c0.cv_stay = N;
      c0.label = "stay_only";
      cands.push_back(c0);
    }
    if (M >= S1) {
      Candidate c0;
      c0.av_stay = S1;
      c0.av_rep = std::min(M - S1, S2);
      c0.cv_rep = std::min(N, std::max(S1 + S2 - M, 0.0));
      c0.label = "av_covers_stay";
      cands.push_back(c0);
    }
    if (M <= S1) {
      Candidate c0;  // av-first: AVs on stay, drivers fill, long queue reroutes
      c0.av_stay = M;
      c0.cv_stay = std::min(N, S1 - M);
      const double queue_mass = g2 > 0 ? (S1 - M) / g2 : kInf;
      c0.cv_rep = std::min(std::max(N - queue_mass, 0.0), S2);
      c0.label = "av_first";
      cands.push_back(c0);
    }
    {
      Candidate c0;  // cv-first: drivers keep the stay cycle, AVs reposition
      const double an =
          std::clamp(std::max(M - S2, S1 - N), 0.0, std::min(M, S1));
      c0.av_stay = an;
      c0.av_rep = std::clamp(std::min(M - an, M + N - S1), 0.0, S2);
      c0.cv_stay = std::min(S1 - an, N);
      c0.label = "cv_first";
      cands.push_back(c0);
    }
    if (M <= S1 && g2 > 0) {
      // Hide part of the stay demand: every AV serves the stay cycle, the
      // queue sits at the reposition threshold, surplus drivers reroute.
      const double hidden_cap = (a.b21 - (M / S1) * a.b12) * a.reposition_unit_mass;
      const double absorb = S1 / g2 - a.b12 * a.reposition_unit_mass;
      if (absorb > 0) {
        const double theta =
            std::min(std::max(N - hidden_cap, 0.0) / absorb, 1.0 - M / S1);
        const double rep_units = std::max(
            0.0, std::min(hidden_cap, N) / a.reposition_unit_mass - theta * a.b12);
        Candidate c0;
        c0.av_stay = M;
        c0.cv_stay = theta * S1;
        c0.cv_rep = rep_units * a.reposition_unit_mass;
        c0.label = "hide";
        cands.push_back(c0);
      }
    }
  }

  {
    Candidate c0;  // reveal nothing
    c0.av_stay = av_stay_rate > 0 ? std::min(M, S1) : 0.0;
    c0.av_rep = av_rep_rate > 0 ? std::min(std::max(M - c0.av_stay, 0.0), S2) : 0.0;
    c0.label = "av_only";
    cands.push_back(c0);
  }

  TwoRegionOptimum best;
  double best_profit = -kInf;
  for (const Candidate& c0 : cands) {
    const double v = candidate_profit(a, c0, av_stay_rate, av_rep_rate);
    if (v > best_profit) {
      best_profit = v;
      best = realize(a, c0, v);
    }
  }
  return best;
}

TwoRegionOptimum closed_form_endogenous(const NetworkSpec& spec, double purchase_cost,
                                        double pool) {
  const TwoRegionAnalysis a = analyze_two_region(spec);
  const double p = a.price, c = a.cost, R = a.commission, g1 = a.service_fraction;
  const double I = std::max(purchase_cost, 0.0);
  const double S1 = a.stay_mass, S2 = a.reposition_mass, g2 = a.earning_ratio;
  const double av_stay_rate = p - c - I, av_rep_rate = g1 * p - c - I;
  const double stay_earning = (1 - R) * p - c;   // full driver earning per mass
  const double rep_earning = g1 * (1 - R) * p - c;

  std::vector<Candidate> cands;

  // Stay-cycle drivers at full earning: the whole pool participates.
  {
    Candidate c0;
    c0.cv_stay = stay_earning > 0 ? std::min(S1, std::max(pool, 0.0)) : 0.0;
    c0.av_stay = av_stay_rate > 0 ? S1 - c0.cv_stay : 0.0;
    c0.av_rep = av_rep_rate > 0 ? S2 : 0.0;
    c0.label = "cv_stay";
    cands.push_back(c0);
  }
  {
    Candidate c0;
    c0.av_stay = av_stay_rate > 0 ? S1 : 0.0;
    c0.av_rep = av_rep_rate > 0 ? S2 : 0.0;
    c0.label = "av_all";
    cands.push_back(c0);
  }

  // Reposition-earning participation with part of the stay demand hidden.
  if (rep_earning > 0 && stay_earning > 0 && g2 > 0 && pool > 0) {
    const double entering = pool * rep_earning / stay_earning;
    std::vector<double> hides = {S1};
    const double h_zero = S1 - g2 * entering;                // rerouting starts
    const double h_full = S1 - g2 * (entering - S2);         // rep cycle saturated
    for (double h : {h_zero, h_full, 0.0})
      if (h >= std::max(0.0, h_zero) - 1e-12 && h <= S1) hides.push_back(std::clamp(h, 0.0, S1));
    for (double h : hides) {
      double z = h >= S1 - 1e-12 ? std::min(entering, S2)
                                 : std::clamp(entering - (S1 - h) / g2, 0.0, S2);
      if (h < S1 - 1e-12 && entering - (S1 - h) / g2 < -1e-9) continue;
      Candidate c0;
      c0.cv_stay = S1 - h;
      c0.cv_rep = z;
      c0.av_stay = av_stay_rate > 0 ? h : 0.0;
      c0.av_rep = av_rep_rate > 0 ? S2 - z : 0.0;
      c0.label = "cv_reposition";
      cands.push_back(c0);
    }
  }

  TwoRegionOptimum best;
  double best_profit = -kInf;
  for (const Candidate& c0 : cands) {
    const double v = candidate_profit(a, c0, av_stay_rate, av_rep_rate);
    if (v > best_profit) {
      best_profit = v;
      best = realize(a, c0, v);
    }
  }
  return best;
}

double cv_only_profit(const TwoRegionAnalysis& a, double fleet) {
  const double p = a.price, c = a.cost, R = a.commission, g1 = a.service_fraction;
  const double N = std::max(fleet, 0.0);
  const double stay_earning = (1 - R) * p - c;
  const double rep_earning = g1 * (1 - R) * p - c;
  if (stay_earning <= 0) return 0.0;
  if (rep_earning < 0) return R * p * std::min(N, a.stay_mass);
  const double q = a.queue_threshold_mass;
  if (N <= a.stay_mass) return R * p * N;
  if (N <= q) return R * p * a.stay_mass;
  const double rep = std::min(N - q, a.reposition_mass);
  return R * p * a.stay_mass + g1 * R * p * rep;
}

SingleDestinationState single_destination_regimes(double demand_rate, double trip_time,
                                                  double mass) {
  if (demand_rate <= 0 || trip_time <= 0)
    throw NetworkError("single-destination regimes need positive demand and trip time");
  const double b = demand_rate, tau = trip_time, m = std::max(mass, 0.0);
  SingleDestinationState s;
  if (m <= b * tau) {
    s.regime = 1;
    s.served1 = m / tau;
  } else if (m <= 2 * b * tau) {
    s.regime = 2;
    s.w1 = m / b - tau;
    s.served1 = b;
  } else if (m <= 4 * b * tau) {
    s.regime = 3;
    s.w1 = tau;
    s.served1 = b;
    s.served2 = (m - 2 * b * tau) / (2 * tau);
  } else {
    s.regime = 4;
    s.w2 = (m - 4 * b * tau) / (2 * b);
    s.w1 = s.w2 + tau;
    s.served1 = b;
    s.served2 = b;
  }
  return s;
}

SingleDestinationState single_destination_regimes(const NetworkSpec& spec, double mass) {
  validate_spec(spec);
  if (spec.regions != 2 || spec.demand(0, 1) != 0 || spec.demand(1, 1) != 0 ||
      spec.demand(0, 0) <= 0 || spec.demand(0, 0) != spec.demand(1, 0))
    throw NetworkError("not a single-destination instance: demand must be b11 = b21 > 0");
  const double tau = spec.trip_time(0, 0);
  if (spec.trip_time(1, 0) != tau || spec.reposition_time(0, 1) != tau)
    throw NetworkError("not a single-destination instance: legs must share one trip time");
  return single_destination_regimes(spec.demand(0, 0), tau, mass);
}

NetworkSpec swap_two_region(const NetworkSpec& spec) {
  NetworkSpec out = spec;
  Eigen::PermutationMatrix<2> perm;
  perm.indices() << 1, 0;
  out.demand = perm * spec.demand * perm;
  out.trip_time = perm * spec.trip_time * perm;
  out.reposition_time = perm * spec.reposition_time * perm;
  return out;
}

double two_region_optimum_profit(const NetworkSpec& spec, double av_mass, double cv_mass) {
  const NetworkSpec s =
      spec.demand(1, 0) >= spec.demand(0, 1) ? spec : swap_two_region(spec);
  return closed_form_optimum(s, av_mass, cv_mass).profit;
}

double two_region_endogenous_profit(const NetworkSpec& spec, double purchase_cost,
                                    double pool) {
  const NetworkSpec s =
      spec.demand(1, 0) >= spec.demand(0, 1) ? spec : swap_two_region(spec);
  return closed_form_endogenous(s, purchase_cost, pool).profit;
}

}  // namespace fleetopt

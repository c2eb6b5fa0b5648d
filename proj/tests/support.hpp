#pragma once

// Test-side oracles. Nothing here calls into the model code under test
// except for plain data types, so agreement is meaningful.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ecd/model.hpp"

namespace oracle {

#ifndef ECD_FIXTURE_DIR
#error "ECD_FIXTURE_DIR must be defined"
#endif

// quantity,index,value rows of a fixture CSV.
inline std::map<std::pair<std::string, int>, double> read_fixture(const std::string& name) {
  std::ifstream in(std::string(ECD_FIXTURE_DIR) + "/" + name);
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::map<std::pair<std::string, int>, double> out;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::stringstream ss(line);
    std::string q, i, v;
    std::getline(ss, q, ',');
    std::getline(ss, i, ',');
    std::getline(ss, v, ',');
    out[{q, std::stoi(i)}] = std::stod(v);
  }
  return out;
}

inline double lse(const std::vector<double>& v) {
  double m = -INFINITY;
  for (double x : v) m = std::max(m, x);
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

inline double fee(const ecd::DeliveryOption& o, double ov) {
  for (const auto& b : o.fees.brackets())
    if (ov >= b.lower && ov < b.upper) return b.fee;
  throw std::logic_error("fee schedule does not cover order value");
}

inline double part_worths(const ecd::DeliveryOption& o, const ecd::ChoiceModelParams& p) {
  static const char* speed[] = {"beta_speed_2_5_days", "beta_speed_one_day", "beta_speed_same_day"};
  static const char* slot[] = {"beta_slot_none", "beta_slot_2hr", "beta_slot_4hr"};
  static const char* time[] = {"beta_time_daytime", "beta_time_daytime_evening"};
  static const char* date[] = {"beta_date_weekday", "beta_date_weekday_saturday", "beta_date_all_days"};
  return p.get(speed[static_cast<int>(o.speed)]) + p.get(slot[static_cast<int>(o.slot)]) +
         p.get(time[static_cast<int>(o.time)]) + p.get(date[static_cast<int>(o.date)]);
}

inline std::vector<double> option_utils(const ecd::Scenario& s, double ov, const ecd::ChoiceModelParams& p) {
  std::vector<double> u;
  for (const auto& o : s.options) u.push_back(part_worths(o, p) + p.beta_fee * std::log(fee(o, ov) + 1.0));
  return u;
}

struct Expectation {
  std::vector<double> p_tv;
  double tv = 0.0, frequency = 0.0, ov = 0.0;
  std::vector<double> shares;
};

// Triple enumeration over (tv, ov, option); every option utility is
// recomputed for every (tv, ov) pair.
inline Expectation enumerate(int household_size, const ecd::Scenario& s, const ecd::ChoiceModelParams& p) {
  const int hhs = std::min(household_size, 20);
  const std::size_t k = s.options.size();
  std::vector<double> v_tv;
  std::vector<std::vector<double>> p_ov_given_tv;
  std::vector<std::vector<std::vector<double>>> p_do;  // [tv][ov][do]
  for (int tv = s.tv_grid.min; tv <= s.tv_grid.max; ++tv) {
    std::vector<double> v_ov;
    std::vector<std::vector<double>> pd;
    for (int ov = s.ov_grid.min; ov <= s.ov_grid.max; ++ov) {
      const auto u = option_utils(s, ov, p);
      const double l = lse(u);
      std::vector<double> pr;
      for (double x : u) pr.push_back(std::exp(x - l));
      pd.push_back(pr);
      const double r = static_cast<double>(ov) / tv;
      v_ov.push_back(p.beta_logsumdo * (static_cast<double>(tv) / ov) * l + p.beta_interval * r * r +
                     p.beta_storage * ov);
    }
    const double l_ov = lse(v_ov);
    std::vector<double> pov;
    for (double x : v_ov) pov.push_back(std::exp(x - l_ov));
    p_ov_given_tv.push_back(pov);
    p_do.push_back(pd);
    const double gap = p.alpha * hhs - tv;
    v_tv.push_back(p.beta_logsumov * l_ov + p.beta_hhs * gap * gap);
  }
  Expectation e;
  const double l_tv = lse(v_tv);
  for (double x : v_tv) e.p_tv.push_back(std::exp(x - l_tv));
  e.shares.assign(k, 0.0);
  for (std::size_t t = 0; t < e.p_tv.size(); ++t) {
    const double tv = s.tv_grid.min + static_cast<double>(t);
    e.tv += e.p_tv[t] * tv;
    for (std::size_t o = 0; o < p_ov_given_tv[t].size(); ++o) {
      const double ov = s.ov_grid.min + static_cast<double>(o);
      const double w = e.p_tv[t] * p_ov_given_tv[t][o];
      e.frequency += w * tv / ov;
      e.ov += w * ov;
      for (std::size_t d = 0; d < k; ++d) e.shares[d] += w * (tv / ov) * p_do[t][o][d];
    }
  }
  for (double& x : e.shares) x /= e.frequency;
  return e;
}

struct Instance {
  int household_size = 1;
  ecd::Scenario scenario;
  ecd::ChoiceModelParams params;
};

// Random option sets, fee schedules, coefficients (defaults scaled by
// 0.5..1.5) and household sizes up to 25 so the size cap is exercised.
inline Instance random_instance(std::mt19937_64& g, ecd::IntGrid ov_grid = {10, 300},
                                ecd::IntGrid tv_grid = {1, 600}) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto pick = [&](int n) { return static_cast<int>(g() % static_cast<std::uint64_t>(n)); };
  Instance in;
  in.household_size = 1 + pick(25);
  for (std::size_t i = 0; i < ecd::ChoiceModelParams::kCount; ++i) in.params.at(i) *= 0.5 + unit(g);
  in.scenario.name = "random";
  in.scenario.ov_grid = ov_grid;
  in.scenario.tv_grid = tv_grid;
  const int k = 2 + pick(4);
  for (int i = 0; i < k; ++i) {
    ecd::DeliveryOption o;
    o.id = "o" + std::to_string(i);
    o.speed = static_cast<ecd::Speed>(pick(3));
    o.slot = static_cast<ecd::Slot>(pick(3));
    o.time = static_cast<ecd::TimeOfDay>(pick(2));
    o.date = static_cast<ecd::DateSpan>(pick(3));
    std::vector<double> cuts;
    const int n_cuts = pick(4);
    for (int c = 0; c < n_cuts; ++c) cuts.push_back(5.0 + pick(200));
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::vector<ecd::FeeBracket> br;
    double lo = 0.0;
    for (double c : cuts) {
      br.push_back({lo, c, std::round(unit(g) * 60.0) / 2.0});
      lo = c;
    }
    br.push_back({lo, ecd::kOpenUpper, std::round(unit(g) * 60.0) / 2.0});
    o.fees = ecd::FeeSchedule(br);
    in.scenario.options.push_back(o);
  }
  return in;
}

}  // namespace oracle

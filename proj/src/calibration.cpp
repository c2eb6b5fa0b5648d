#include "ecd/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "ecd/error.hpp"
#include "ecd/model_io.hpp"
#include "ecd/scenario_engine.hpp"

namespace ecd {

void CalibrationTargets::validate() const {
  const std::string where = "target " + std::string(to_string(category));
  if (!std::isfinite(deliveries_per_person_month) || deliveries_per_person_month <= 0.0)
    throw ConfigError(where + ": deliveries_per_person_month must be positive");
  if (!std::isfinite(purchase_value_per_household_month) || purchase_value_per_household_month <= 0.0)
    throw ConfigError(where + ": purchase_value_per_household_month must be positive");
  if (!std::isfinite(tolerance) || tolerance <= 0.0)
    throw ConfigError(where + ": tolerance must be positive");
}

std::vector<CalibrationTargets> default_targets() {
  return {{Category::Groceries, 0.6, 11.0, 0.05},
          {Category::HouseholdGoodsAndMedicines, 1.2, 38.0, 0.05},
          {Category::OtherPackages, 3.1, 62.0, 0.05}};
}

nlohmann::json to_json(const std::vector<CalibrationTargets>& targets) {
  json arr = json::array();
  for (const auto& t : targets)
    arr.push_back({{"category", std::string(to_string(t.category))},
                   {"deliveries_per_person_month", t.deliveries_per_person_month},
                   {"purchase_value_per_household_month", t.purchase_value_per_household_month},
                   {"tolerance", t.tolerance}});
  return {{"targets", arr}};
}

std::vector<CalibrationTargets> targets_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("targets") || !j.at("targets").is_array())
    throw ConfigError("targets: missing array field 'targets'");
  const double default_tol = j.value("tolerance", 0.05);
  std::vector<CalibrationTargets> out;
  const auto& arr = j.at("targets");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& jt = arr[i];
    const std::string where = "targets[" + std::to_string(i) + "]";
    if (!jt.is_object() || !jt.contains("category") || !jt.at("category").is_string())
      throw ConfigError(where + ": missing string field 'category'");
    CalibrationTargets t;
    t.category = parse_category(jt.at("category").get<std::string>());
    for (const char* key : {"deliveries_per_person_month", "purchase_value_per_household_month"})
      if (!jt.contains(key) || !jt.at(key).is_number())
        throw ConfigError(where + ": missing numeric field '" + key + "'");
    t.deliveries_per_person_month = jt.at("deliveries_per_person_month").get<double>();
    t.purchase_value_per_household_month = jt.at("purchase_value_per_household_month").get<double>();
    t.tolerance = jt.value("tolerance", default_tol);
    try {
      t.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(where + ", " + e.what());
    }
    out.push_back(t);
  }
  if (out.empty()) throw ConfigError("targets: no targets given");
  return out;
}

std::vector<FreeParameter> default_free_parameters() {
  return {{"alpha", 1.0, 100.0}, {"beta_interval", -5.0, 0.0}, {"beta_storage", -5.0, 0.0}};
}

void validate_free_parameters(const std::vector<FreeParameter>& free) {
  if (free.empty()) throw ConfigError("calibration needs at least one free parameter");
  ChoiceModelParams probe;
  for (const auto& p : free) {
    try {
      probe.get(p.name);
    } catch (const InvalidInput& e) {
      throw ConfigError(e.what());
    }
    if (!std::isfinite(p.lower) || !std::isfinite(p.upper) || !(p.lower < p.upper))
      throw ConfigError("free parameter " + p.name + " needs finite bounds with lower < upper");
  }
}

double deliveries_per_person_month(double orders_per_week, double persons) {
  if (!(persons > 0.0)) throw InvalidInput("persons must be positive");
  return orders_per_week * kWeeksPerMonth / persons;
}

double value_per_household_month(double value_per_week) { return value_per_week * kWeeksPerMonth; }

Aggregates simulate_aggregates(const Population& population, const Scenario& scenario,
                               const ChoiceModelParams& params, const CategoryConfig& category,
                               unsigned workers) {
  category.validate();
  RunOptions opt;
  opt.workers = workers;
  const auto run = run_scenario(population, scenario, params, opt);
  double orders = 0.0, value = 0.0, adults = 0.0;
  for (std::size_t i = 0; i < run.households.size(); ++i) {
    orders += run.households[i].expected_frequency;
    value += run.households[i].expected_tv;
    adults += category.adult_share * population.households[i].size;
  }
  return {deliveries_per_person_month(orders, adults),
          value_per_household_month(value / static_cast<double>(population.size()))};
}

CalibrationReport calibrate(const CalibrationTargets& targets, const std::vector<FreeParameter>& free,
                            const Population& population, const Scenario& scenario,
                            const ChoiceModelParams& start, const CategoryConfig& category,
                            const CalibrationOptions& options) {
  targets.validate();
  validate_free_parameters(free);
  population.validate();
  // Scenario overrides are folded into the start so free values are not overwritten.
  const ChoiceModelParams base = apply_overrides(start, scenario.overrides);
  Scenario plain = scenario;
  plain.overrides.clear();

  CalibrationReport rep;
  rep.targets = targets;
  rep.free = free;
  std::vector<double> x0, lo, hi;
  for (const auto& p : free) {
    x0.push_back(std::clamp(base.get(p.name), p.lower, p.upper));
    lo.push_back(p.lower);
    hi.push_back(p.upper);
  }
  rep.start = x0;

  auto with = [&](std::span<const double> x) {
    ChoiceModelParams p = base;
    for (std::size_t i = 0; i < free.size(); ++i) p.set(free[i].name, x[i]);
    return p;
  };
  auto residuals = [&](const Aggregates& a) {
    return std::pair{(a.deliveries_per_person_month - targets.deliveries_per_person_month) /
                         targets.deliveries_per_person_month,
                     (a.purchase_value_per_household_month - targets.purchase_value_per_household_month) /
                         targets.purchase_value_per_household_month};
  };
  std::map<std::vector<double>, std::pair<double, double>> seen;
  auto residuals_at = [&](std::span<const double> x) {
    std::vector<double> key(x.begin(), x.end());
    if (auto it = seen.find(key); it != seen.end()) return it->second;
    const auto r = residuals(simulate_aggregates(population, plain, with(x), category, options.workers));
    seen.emplace(std::move(key), r);
    return r;
  };
  auto objective = [&](std::span<const double> x) {
    const auto [r1, r2] = residuals_at(x);
    return r1 * r1 + r2 * r2;
  };

  NelderMeadOptions nm;
  nm.max_iterations = options.max_iterations;
  nm.diameter_tolerance = options.simplex_tolerance;
  nm.initial_step = options.initial_step;
  nm.good_enough = [&](std::span<const double> x, double) {
    const auto [r1, r2] = residuals_at(x);
    return std::abs(r1) <= targets.tolerance && std::abs(r2) <= targets.tolerance;
  };
  const auto res = nelder_mead_box(objective, x0, lo, hi, nm);

  rep.fitted = res.x;
  rep.fitted_params = with(res.x);
  rep.achieved = simulate_aggregates(population, plain, rep.fitted_params, category, options.workers);
  std::tie(rep.residual_deliveries, rep.residual_value) = residuals(rep.achieved);
  rep.objective = rep.residual_deliveries * rep.residual_deliveries +
                  rep.residual_value * rep.residual_value;
  rep.iterations = res.iterations;
  rep.evaluations = res.evaluations;
  rep.converged = std::abs(rep.residual_deliveries) <= targets.tolerance &&
                  std::abs(rep.residual_value) <= targets.tolerance;
  switch (res.status) {
    case NelderMeadResult::Status::GoodEnough: rep.status = "residuals within tolerance"; break;
    case NelderMeadResult::Status::SimplexCollapsed:
      rep.status = rep.converged ? "residuals within tolerance"
                                 : "infeasible: residual floor above tolerance (simplex collapsed)";
      break;
    case NelderMeadResult::Status::IterationLimit:
      rep.status = rep.converged ? "residuals within tolerance" : "iteration limit reached";
      break;
  }
  return rep;
}

nlohmann::json to_json(const CalibrationReport& r) {
  json fitted = json::object(), start = json::object(), bounds = json::object();
  for (std::size_t i = 0; i < r.free.size(); ++i) {
    fitted[r.free[i].name] = r.fitted[i];
    start[r.free[i].name] = r.start[i];
    bounds[r.free[i].name] = {r.free[i].lower, r.free[i].upper};
  }
  return {{"category", std::string(to_string(r.targets.category))},
          {"targets",
           {{"deliveries_per_person_month", r.targets.deliveries_per_person_month},
            {"purchase_value_per_household_month", r.targets.purchase_value_per_household_month},
            {"tolerance", r.targets.tolerance}}},
          {"start", start},
          {"bounds", bounds},
          {"fitted", fitted},
          {"achieved",
           {{"deliveries_per_person_month", r.achieved.deliveries_per_person_month},
            {"purchase_value_per_household_month", r.achieved.purchase_value_per_household_month}}},
          {"relative_residuals",
           {{"deliveries_per_person_month", r.residual_deliveries},
            {"purchase_value_per_household_month", r.residual_value}}},
          {"objective", r.objective},
          {"iterations", r.iterations},
          {"evaluations", r.evaluations},
          {"converged", r.converged},
          {"status", r.status},
          {"params", to_json(r.fitted_params)}};
}

}  // namespace ecd

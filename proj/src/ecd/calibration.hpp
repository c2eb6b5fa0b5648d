#pragma once

// Fitting demand parameters to aggregate monthly targets per item category.

#include <string>
#include <vector>

#include <json.hpp>

#include "ecd/category.hpp"
#include "ecd/model.hpp"
#include "ecd/nelder_mead.hpp"
#include "ecd/population.hpp"

namespace ecd {

inline constexpr double kWeeksPerMonth = 52.0 / 12.0;

struct CalibrationTargets {
  Category category = Category::OtherPackages;
  double deliveries_per_person_month = 0.0;  // persons aged 15+
  double purchase_value_per_household_month = 0.0;  // US$
  double tolerance = 0.05;  // on each relative residual

  void validate() const;
};

// Deliveries 0.6 / 1.2 / 3.1 per person-month and 11 / 38 / 62 US$ per
// household-month for groceries / household goods / other packages.
std::vector<CalibrationTargets> default_targets();

nlohmann::json to_json(const std::vector<CalibrationTargets>& targets);
std::vector<CalibrationTargets> targets_from_json(const nlohmann::json& j);

struct FreeParameter {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
};

// alpha in [1, 100], beta_interval in [-5, 0], beta_storage in [-5, 0].
std::vector<FreeParameter> default_free_parameters();
void validate_free_parameters(const std::vector<FreeParameter>& free);

// Weekly model outputs in monthly units.
double deliveries_per_person_month(double orders_per_week, double persons);
double value_per_household_month(double value_per_week);

struct Aggregates {
  double deliveries_per_person_month = 0.0;
  double purchase_value_per_household_month = 0.0;
};

// Expectation-mode population totals converted to monthly units: orders per
// month over persons aged 15+, and purchase value per household per month.
Aggregates simulate_aggregates(const Population& population, const Scenario& scenario,
                               const ChoiceModelParams& params, const CategoryConfig& category,
                               unsigned workers = 1);

struct CalibrationOptions {
  unsigned max_iterations = 500;
  double simplex_tolerance = 1e-6;
  double initial_step = 0.1;
  unsigned workers = 1;
};

struct CalibrationReport {
  CalibrationTargets targets;
  std::vector<FreeParameter> free;
  std::vector<double> start;
  std::vector<double> fitted;
  ChoiceModelParams fitted_params;
  Aggregates achieved;
  double residual_deliveries = 0.0;  // relative
  double residual_value = 0.0;  // relative
  double objective = 0.0;
  unsigned iterations = 0;
  unsigned evaluations = 0;
  bool converged = false;
  std::string status;
};

// Minimizes the sum of squared relative residuals with a box-constrained
// Nelder-Mead search. Never throws for infeasible targets: the best point is
// returned with converged == false.
CalibrationReport calibrate(const CalibrationTargets& targets, const std::vector<FreeParameter>& free,
                            const Population& population, const Scenario& scenario,
                            const ChoiceModelParams& start, const CategoryConfig& category,
                            const CalibrationOptions& options = {});

nlohmann::json to_json(const CalibrationReport& report);

}  // namespace ecd

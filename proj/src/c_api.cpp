#include "ecomdemand/ecomdemand.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "ecd/calibration.hpp"
#include "ecd/category.hpp"
#include "ecd/error.hpp"
#include "ecd/estimation.hpp"
#include "ecd/model.hpp"
#include "ecd/model_io.hpp"
#include "ecd/pipeline.hpp"
#include "ecd/population.hpp"
#include "ecd/rng.hpp"
#include "ecd/scenario_engine.hpp"

struct ecd_params {
  ecd::ChoiceModelParams p;
};
struct ecd_scenario {
  ecd::Scenario s;
};
struct ecd_population {
  ecd::Population p;
};
struct ecd_analysis {
  ecd::Comparison c;  // deltas filled only for two or more scenarios
};
struct ecd_categories {
  std::vector<ecd::CategoryConfig> c;
};
struct ecd_targets {
  std::vector<ecd::CalibrationTargets> t;
};
struct ecd_calibration {
  ecd::CalibrationReport r;
  std::string category;
};
struct ecd_dataset {
  ecd::ChoiceDataset d;
};
struct ecd_fit {
  ecd::SequentialFit f;
  std::vector<ecd::CoefficientEstimate> table;
};
struct ecd_synthesis {
  ecd::SynthesisResult r;
};

namespace {

thread_local std::string g_error;

ecd_status fail(ecd_status code, std::string message) {
  g_error = std::move(message);
  return code;
}

// Runs fn and maps exceptions to status codes.
template <class F>
ecd_status guard(F&& fn) noexcept {
  try {
    fn();
    g_error.clear();
    return ECD_OK;
  } catch (const ecd::LoadError& e) {
    return fail(ECD_ERR_IO, e.what());
  } catch (const ecd::ConfigError& e) {
    return fail(ECD_ERR_CONFIG, e.what());
  } catch (const ecd::ScenarioError& e) {
    return fail(ECD_ERR_CONFIG, e.what());
  } catch (const ecd::InvalidInput& e) {
    return fail(ECD_ERR_INVALID_ARGUMENT, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(ECD_ERR_CONFIG, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(ECD_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::out_of_range& e) {
    return fail(ECD_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(ECD_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(ECD_ERR_INTERNAL, "unknown error");
  }
}

struct NullArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

template <class T>
void need(const T* p, const char* what) {
  if (p == nullptr) throw NullArgument(std::string("null argument: ") + what);
}

std::ofstream open_out(const char* path) {
  need(path, "path");
  std::ofstream out(path);
  if (!out) throw ecd::LoadError(std::string("cannot open for writing: ") + path);
  return out;
}

void finish(std::ofstream& out, const char* path) {
  out.flush();
  if (!out) throw ecd::LoadError(std::string("write failed: ") + path);
}

std::string str(const char* s) { return s ? std::string(s) : std::string(); }

// JSON outputs carry the provenance header under "_meta".
void write_json(const char* path, nlohmann::json j, const char* header) {
  need(path, "path");
  if (header && *header) j["_meta"] = {{"header", header}};
  ecd::write_json_file(path, j);
}

ecd::CategoryConfig find_category(const ecd_categories* cats, ecd::Category c) {
  const auto list = cats ? cats->c : ecd::default_categories();
  for (const auto& cfg : list)
    if (cfg.category == c) return cfg;
  throw ecd::ConfigError("categories: no entry for category '" + std::string(ecd::to_string(c)) + "'");
}

}  // namespace

extern "C" {

const char* ecd_last_error(void) { return g_error.c_str(); }
const char* ecd_version(void) { return "0.1.0"; }

uint64_t ecd_hash_bytes(const void* data, size_t size, uint64_t basis) {
  if (data == nullptr || size == 0) return basis;
  return ecd::fnv1a64(std::string_view(static_cast<const char*>(data), size), basis);
}

// ---- parameters

ecd_status ecd_params_default(ecd_params** out) {
  return guard([&] {
    need(out, "out");
    *out = new ecd_params{};
  });
}

ecd_status ecd_params_load(const char* path, ecd_params** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    auto p = ecd::params_from_json(ecd::read_json_file(path));
    p.validate();
    *out = new ecd_params{p};
  });
}

ecd_status ecd_params_write(const ecd_params* params, const char* path, const char* header) {
  return guard([&] {
    need(params, "params");
    write_json(path, ecd::to_json(params->p), header);
  });
}

ecd_status ecd_params_clone(const ecd_params* params, ecd_params** out) {
  return guard([&] {
    need(params, "params");
    need(out, "out");
    *out = new ecd_params{params->p};
  });
}

size_t ecd_params_count(void) { return ecd::ChoiceModelParams::kCount; }

const char* ecd_params_name(size_t index) {
  if (index >= ecd::ChoiceModelParams::kCount) return nullptr;
  return ecd::ChoiceModelParams::names()[index].data();
}

ecd_status ecd_params_get(const ecd_params* params, const char* name, double* value) {
  return guard([&] {
    need(params, "params");
    need(name, "name");
    need(value, "value");
    *value = params->p.get(name);
  });
}

ecd_status ecd_params_set(ecd_params* params, const char* name, double value) {
  return guard([&] {
    need(params, "params");
    need(name, "name");
    auto p = params->p;
    p.set(name, value);
    p.validate();
    params->p = p;
  });
}

void ecd_params_free(ecd_params* params) { delete params; }

// ---- scenarios

size_t ecd_builtin_scenario_count(void) { return ecd::builtin_scenario_names().size(); }

const char* ecd_builtin_scenario_name(size_t index) {
  const auto& names = ecd::builtin_scenario_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

ecd_status ecd_scenario_builtin(const char* name, ecd_scenario** out) {
  return guard([&] {
    need(name, "name");
    need(out, "out");
    *out = new ecd_scenario{ecd::builtin_scenario(name)};
  });
}

ecd_status ecd_scenario_load(const char* path, ecd_scenario** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    auto s = ecd::scenario_from_json(ecd::read_json_file(path));
    s.validate();
    *out = new ecd_scenario{std::move(s)};
  });
}

ecd_status ecd_scenario_write(const ecd_scenario* scenario, const char* path, const char* header) {
  return guard([&] {
    need(scenario, "scenario");
    write_json(path, ecd::to_json(scenario->s), header);
  });
}

const char* ecd_scenario_name(const ecd_scenario* scenario) {
  return scenario ? scenario->s.name.c_str() : nullptr;
}

size_t ecd_scenario_option_count(const ecd_scenario* scenario) {
  return scenario ? scenario->s.options.size() : 0;
}

void ecd_scenario_free(ecd_scenario* scenario) { delete scenario; }

namespace {
ecd::ChoiceModelParams effective(const ecd_scenario* scenario, const ecd_params* params) {
  need(scenario, "scenario");
  const ecd::ChoiceModelParams base = params ? params->p : ecd::ChoiceModelParams{};
  return ecd::apply_overrides(base, scenario->s.overrides);
}
}  // namespace

ecd_status ecd_option_choice(const ecd_scenario* scenario, const ecd_params* params,
                             double order_value, double* utilities, double* probabilities,
                             size_t option_count, double* logsum) {
  return guard([&] {
    const auto p = effective(scenario, params);
    if ((utilities || probabilities) && option_count != scenario->s.options.size())
      throw ecd::InvalidInput("option_count does not match the scenario");
    const auto oc = ecd::option_choice(scenario->s, order_value, p);
    for (size_t k = 0; k < oc.utilities.size(); ++k) {
      if (utilities) utilities[k] = oc.utilities[k];
      if (probabilities) probabilities[k] = oc.probabilities[k];
    }
    if (logsum) *logsum = oc.logsum;
  });
}

ecd_status ecd_order_value_utility(const ecd_scenario* scenario, const ecd_params* params,
                                   double order_value, double total_value, double* out) {
  return guard([&] {
    need(out, "out");
    *out = ecd::order_value_utility(order_value, total_value, scenario->s, effective(scenario, params));
  });
}

ecd_status ecd_total_value_utility(const ecd_scenario* scenario, const ecd_params* params,
                                   double total_value, int household_size, double* out) {
  return guard([&] {
    need(out, "out");
    if (household_size < 1) throw ecd::InvalidInput("household_size must be >= 1");
    const auto p = effective(scenario, params);
    *out = ecd::total_value_utility(total_value, ecd::Household{"h", household_size}, scenario->s, p);
  });
}

ecd_status ecd_evaluate_household(const ecd_scenario* scenario, const ecd_params* params,
                                  int household_size, ecd_household_result* out,
                                  double* option_shares, size_t option_count) {
  return guard([&] {
    need(out, "out");
    if (household_size < 1) throw ecd::InvalidInput("household_size must be >= 1");
    const auto p = effective(scenario, params);
    if (option_shares && option_count != scenario->s.options.size())
      throw ecd::InvalidInput("option_count does not match the scenario");
    const auto r = ecd::evaluate_household(ecd::Household{"h", household_size}, scenario->s, p);
    *out = {r.expected_tv, r.expected_frequency, r.expected_ov};
    if (option_shares)
      for (size_t k = 0; k < option_count; ++k) option_shares[k] = r.option_shares[k];
  });
}

// ---- populations

ecd_status ecd_population_load(const char* path, ecd_population** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new ecd_population{ecd::load_population_file(path)};
  });
}

ecd_status ecd_population_synthetic(size_t count, const double* masses, size_t sizes, uint64_t seed,
                                    ecd_population** out) {
  return guard([&] {
    need(masses, "masses");
    need(out, "out");
    ecd::SyntheticSpec spec;
    spec.sizes.masses.assign(masses, masses + sizes);
    spec.count = count;
    spec.seed = seed;
    *out = new ecd_population{ecd::synthetic_population(spec)};
  });
}

ecd_status ecd_population_default(ecd_population** out) {
  return guard([&] {
    need(out, "out");
    *out = new ecd_population{ecd::synthetic_population(ecd::default_population_spec())};
  });
}

size_t ecd_population_size(const ecd_population* population) {
  return population ? population->p.size() : 0;
}

ecd_status ecd_population_household(const ecd_population* population, size_t index, const char** id,
                                    int* size) {
  return guard([&] {
    need(population, "population");
    const auto& h = population->p.households.at(index);
    if (id) *id = h.id.c_str();
    if (size) *size = h.size;
  });
}

ecd_status ecd_population_write(const ecd_population* population, const char* path,
                                const char* header) {
  return guard([&] {
    need(population, "population");
    auto out = open_out(path);
    ecd::write_population(out, population->p, str(header));
    finish(out, path);
  });
}

void ecd_population_free(ecd_population* population) { delete population; }

// ---- scenario runs

void ecd_run_options_init(ecd_run_options* options) {
  if (!options) return;
  options->mode = ECD_MODE_EXPECTATION;
  options->seed = 0;
  options->replications = 1;
  options->workers = 1;
}

ecd_status ecd_analyze(const ecd_population* population, const ecd_scenario* const* scenarios,
                       size_t scenario_count, const ecd_params* params,
                       const ecd_run_options* options, ecd_analysis** out) {
  return guard([&] {
    need(population, "population");
    need(scenarios, "scenarios");
    need(out, "out");
    if (scenario_count == 0) throw ecd::InvalidInput("at least one scenario is required");
    ecd::RunOptions ro;
    if (options) {
      if (options->mode != ECD_MODE_EXPECTATION && options->mode != ECD_MODE_SAMPLED)
        throw ecd::InvalidInput("mode: unknown value");
      ro.mode = options->mode == ECD_MODE_SAMPLED ? ecd::EvalMode::Sampled : ecd::EvalMode::Expectation;
      ro.seed = options->seed;
      ro.replications = options->replications;
      ro.workers = options->workers;
    }
    if (ro.replications == 0) throw ecd::InvalidInput("replications must be >= 1");
    const ecd::ChoiceModelParams base = params ? params->p : ecd::ChoiceModelParams{};
    std::vector<ecd::Scenario> list;
    for (size_t i = 0; i < scenario_count; ++i) {
      need(scenarios[i], "scenario");
      list.push_back(scenarios[i]->s);
    }
    auto a = std::make_unique<ecd_analysis>();
    if (list.size() == 1)
      a->c.runs.push_back(ecd::run_scenario(population->p, list[0], base, ro));
    else
      a->c = ecd::compare_scenarios(population->p, list, base, ro);
    *out = a.release();
  });
}

size_t ecd_analysis_scenario_count(const ecd_analysis* analysis) {
  return analysis ? analysis->c.runs.size() : 0;
}

ecd_status ecd_analysis_summary(const ecd_analysis* analysis, size_t scenario, ecd_summary* out) {
  return guard([&] {
    need(analysis, "analysis");
    need(out, "out");
    const auto& run = analysis->c.runs.at(scenario);
    const auto& s = run.summary;
    *out = {s.scenario.c_str(),       run.households.size(), s.mean_total_value,
            s.mean_frequency,         s.mean_order_value,     s.speed_share_pct[0],
            s.speed_share_pct[1],     s.speed_share_pct[2],   s.size_capped,
            s.grid_saturated};
  });
}

ecd_status ecd_analysis_delta(const ecd_analysis* analysis, size_t base, size_t other,
                              double* total_value_pct, double* frequency_pct) {
  return guard([&] {
    need(analysis, "analysis");
    for (const auto& d : analysis->c.deltas) {
      if (d.base == base && d.other == other) {
        if (total_value_pct) *total_value_pct = d.total_value_pct;
        if (frequency_pct) *frequency_pct = d.frequency_pct;
        return;
      }
    }
    throw std::out_of_range("no delta for that scenario pair (base must precede other)");
  });
}

ecd_status ecd_analysis_household(const ecd_analysis* analysis, size_t scenario, size_t household,
                                  ecd_household_result* out) {
  return guard([&] {
    need(analysis, "analysis");
    need(out, "out");
    const auto& r = analysis->c.runs.at(scenario).households.at(household);
    *out = {r.expected_tv, r.expected_frequency, r.expected_ov};
  });
}

ecd_status ecd_analysis_write(const ecd_analysis* analysis, ecd_output kind, const char* path,
                              const char* header) {
  return guard([&] {
    need(analysis, "analysis");
    auto out = open_out(path);
    switch (kind) {
      case ECD_OUTPUT_SUMMARY:
        ecd::write_summary_csv(out, analysis->c.runs, str(header));
        break;
      case ECD_OUTPUT_CDF_TOTAL_VALUE:
        ecd::write_cdf_csv(out, analysis->c.runs, ecd::CdfKind::TotalValue, str(header));
        break;
      case ECD_OUTPUT_CDF_FREQUENCY:
        ecd::write_cdf_csv(out, analysis->c.runs, ecd::CdfKind::Frequency, str(header));
        break;
      case ECD_OUTPUT_DELTAS:
        ecd::write_deltas_csv(out, analysis->c, str(header));
        break;
      default:
        throw ecd::InvalidInput("unknown output kind");
    }
    finish(out, path);
  });
}

ecd_status ecd_analysis_write_households(const ecd_analysis* analysis, size_t scenario,
                                         const char* path, const char* header) {
  return guard([&] {
    need(analysis, "analysis");
    const auto& run = analysis->c.runs.at(scenario);
    auto out = open_out(path);
    ecd::write_households_csv(out, run, str(header));
    finish(out, path);
  });
}

void ecd_analysis_free(ecd_analysis* analysis) { delete analysis; }

// ---- categories and targets

ecd_status ecd_categories_default(ecd_categories** out) {
  return guard([&] {
    need(out, "out");
    *out = new ecd_categories{ecd::default_categories()};
  });
}

ecd_status ecd_categories_load(const char* path, ecd_categories** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new ecd_categories{ecd::categories_from_json(ecd::read_json_file(path))};
  });
}

ecd_status ecd_categories_write(const ecd_categories* categories, const char* path,
                                const char* header) {
  return guard([&] {
    need(categories, "categories");
    write_json(path, ecd::to_json(categories->c), header);
  });
}

size_t ecd_categories_count(const ecd_categories* categories) {
  return categories ? categories->c.size() : 0;
}

ecd_status ecd_categories_get(const ecd_categories* categories, size_t index, const char** name,
                              double* adoption_rate, double* packages_per_order,
                              double* adult_share) {
  return guard([&] {
    need(categories, "categories");
    const auto& c = categories->c.at(index);
    if (name) *name = ecd::to_string(c.category).data();
    if (adoption_rate) *adoption_rate = c.adoption_rate;
    if (packages_per_order) *packages_per_order = c.packages_per_order;
    if (adult_share) *adult_share = c.adult_share;
  });
}

void ecd_categories_free(ecd_categories* categories) { delete categories; }

ecd_status ecd_targets_default(ecd_targets** out) {
  return guard([&] {
    need(out, "out");
    *out = new ecd_targets{ecd::default_targets()};
  });
}

ecd_status ecd_targets_load(const char* path, ecd_targets** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new ecd_targets{ecd::targets_from_json(ecd::read_json_file(path))};
  });
}

ecd_status ecd_targets_write(const ecd_targets* targets, const char* path, const char* header) {
  return guard([&] {
    need(targets, "targets");
    write_json(path, ecd::to_json(targets->t), header);
  });
}

size_t ecd_targets_count(const ecd_targets* targets) { return targets ? targets->t.size() : 0; }

ecd_status ecd_targets_get(const ecd_targets* targets, size_t index, const char** category,
                           double* deliveries_per_person_month,
                           double* purchase_value_per_household_month, double* tolerance) {
  return guard([&] {
    need(targets, "targets");
    const auto& t = targets->t.at(index);
    if (category) *category = ecd::to_string(t.category).data();
    if (deliveries_per_person_month) *deliveries_per_person_month = t.deliveries_per_person_month;
    if (purchase_value_per_household_month)
      *purchase_value_per_household_month = t.purchase_value_per_household_month;
    if (tolerance) *tolerance = t.tolerance;
  });
}

ecd_status ecd_targets_set_tolerance(ecd_targets* targets, double tolerance) {
  return guard([&] {
    need(targets, "targets");
    if (!(tolerance > 0.0) || !std::isfinite(tolerance))
      throw ecd::ConfigError("tolerance must be positive");
    for (auto& t : targets->t) t.tolerance = tolerance;
  });
}

void ecd_targets_free(ecd_targets* targets) { delete targets; }

ecd_status ecd_simulate_aggregates(const ecd_population* population, const ecd_scenario* scenario,
                                   const ecd_params* params, const ecd_categories* categories,
                                   const char* category, unsigned workers,
                                   double* deliveries_per_person_month,
                                   double* purchase_value_per_household_month) {
  return guard([&] {
    need(population, "population");
    need(scenario, "scenario");
    need(category, "category");
    const auto cfg = find_category(categories, ecd::parse_category(category));
    const ecd::ChoiceModelParams base = params ? params->p : ecd::ChoiceModelParams{};
    const auto p = ecd::apply_overrides(ecd::apply_overrides(base, scenario->s.overrides), cfg.overrides);
    ecd::Scenario plain = scenario->s;
    plain.overrides.clear();
    const auto a = ecd::simulate_aggregates(population->p, plain, p, cfg, workers);
    if (deliveries_per_person_month) *deliveries_per_person_month = a.deliveries_per_person_month;
    if (purchase_value_per_household_month)
      *purchase_value_per_household_month = a.purchase_value_per_household_month;
  });
}

ecd_status ecd_calibrate(const ecd_targets* targets, size_t target_index,
                         const ecd_categories* categories, const ecd_free_parameter* free,
                         size_t free_count, const ecd_population* population,
                         const ecd_scenario* scenario, const ecd_params* start,
                         unsigned max_iterations, unsigned workers, ecd_calibration** out) {
  return guard([&] {
    need(targets, "targets");
    need(population, "population");
    need(scenario, "scenario");
    need(out, "out");
    const auto& t = targets->t.at(target_index);
    const auto cfg = find_category(categories, t.category);
    std::vector<ecd::FreeParameter> fp;
    if (free == nullptr) {
      fp = ecd::default_free_parameters();
    } else {
      for (size_t i = 0; i < free_count; ++i) {
        need(free[i].name, "free parameter name");
        fp.push_back({free[i].name, free[i].lower, free[i].upper});
      }
    }
    // Base, then scenario, then category overrides, as in synthesis.
    const ecd::ChoiceModelParams base = start ? start->p : ecd::ChoiceModelParams{};
    const auto p0 = ecd::apply_overrides(ecd::apply_overrides(base, scenario->s.overrides), cfg.overrides);
    ecd::Scenario plain = scenario->s;
    plain.overrides.clear();
    ecd::CalibrationOptions opt;
    if (max_iterations > 0) opt.max_iterations = max_iterations;
    opt.workers = workers;
    auto c = std::make_unique<ecd_calibration>();
    c->r = ecd::calibrate(t, fp, population->p, plain, p0, cfg, opt);
    c->category = std::string(ecd::to_string(t.category));
    *out = c.release();
  });
}

ecd_status ecd_calibration_summary_get(const ecd_calibration* calibration,
                                       ecd_calibration_summary* out) {
  return guard([&] {
    need(calibration, "calibration");
    need(out, "out");
    const auto& r = calibration->r;
    *out = {calibration->category.c_str(),
            r.converged ? 1 : 0,
            r.iterations,
            r.evaluations,
            r.achieved.deliveries_per_person_month,
            r.achieved.purchase_value_per_household_month,
            r.residual_deliveries,
            r.residual_value,
            r.status.c_str()};
  });
}

ecd_status ecd_calibration_fitted(const ecd_calibration* calibration, const char* name,
                                  double* value) {
  return guard([&] {
    need(calibration, "calibration");
    need(name, "name");
    need(value, "value");
    *value = calibration->r.fitted_params.get(name);
  });
}

ecd_status ecd_calibration_params(const ecd_calibration* calibration, ecd_params** out) {
  return guard([&] {
    need(calibration, "calibration");
    need(out, "out");
    *out = new ecd_params{calibration->r.fitted_params};
  });
}

ecd_status ecd_calibration_write(const ecd_calibration* const* calibrations, size_t count,
                                 const char* path, const char* header) {
  return guard([&] {
    need(calibrations, "calibrations");
    nlohmann::json reports = nlohmann::json::array();
    for (size_t i = 0; i < count; ++i) {
      need(calibrations[i], "calibration");
      reports.push_back(ecd::to_json(calibrations[i]->r));
    }
    write_json(path, {{"calibrations", reports}}, header);
  });
}

void ecd_calibration_free(ecd_calibration* calibration) { delete calibration; }

// ---- estimation

ecd_status ecd_dataset_load(const char* path, ecd_dataset** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new ecd_dataset{ecd::read_choice_csv_file(path)};
  });
}

ecd_status ecd_dataset_simulate(ecd_level level, size_t n, const ecd_scenario* scenario,
                                const ecd_params* params, uint64_t seed, ecd_dataset** out) {
  return guard([&] {
    need(out, "out");
    if (n == 0) throw ecd::InvalidInput("observations must be >= 1");
    const ecd::ChoiceModelParams p = params ? params->p : ecd::ChoiceModelParams{};
    const auto sizes = ecd::default_population_spec().sizes;
    switch (level) {
      case ECD_LEVEL_DELIVERY_OPTION:
        *out = new ecd_dataset{ecd::simulate_option_choices(n, p, seed)};
        break;
      case ECD_LEVEL_ORDER_VALUE:
        need(scenario, "scenario");
        *out = new ecd_dataset{ecd::simulate_order_values(n, scenario->s, p, sizes, seed)};
        break;
      case ECD_LEVEL_TOTAL_VALUE:
        need(scenario, "scenario");
        *out = new ecd_dataset{ecd::simulate_total_values(n, scenario->s, p, sizes, seed)};
        break;
      default:
        throw ecd::InvalidInput("level must be 1, 2 or 3");
    }
  });
}

ecd_status ecd_dataset_write(const ecd_dataset* dataset, const char* path, const char* header) {
  return guard([&] {
    need(dataset, "dataset");
    auto out = open_out(path);
    ecd::write_choice_csv(out, dataset->d, str(header));
    finish(out, path);
  });
}

size_t ecd_dataset_observations(const ecd_dataset* dataset) {
  return dataset ? dataset->d.observations.size() : 0;
}

void ecd_dataset_free(ecd_dataset* dataset) { delete dataset; }

ecd_status ecd_fit_sequential(const ecd_dataset* delivery_options, const ecd_dataset* order_values,
                              const ecd_dataset* total_values, const ecd_scenario* scenario,
                              const ecd_params* start, unsigned workers, ecd_fit** out) {
  return guard([&] {
    need(delivery_options, "delivery option dataset");
    need(order_values, "order value dataset");
    need(total_values, "total value dataset");
    need(scenario, "scenario");
    need(out, "out");
    ecd::FitOptions opt;
    opt.workers = workers;
    const ecd::ChoiceModelParams p0 = start ? start->p : ecd::ChoiceModelParams{};
    auto f = std::make_unique<ecd_fit>();
    f->f = ecd::fit_sequential(delivery_options->d, order_values->d, total_values->d, scenario->s,
                               p0, opt);
    f->table = ecd::coefficient_table(f->f);
    *out = f.release();
  });
}

int ecd_fit_converged(const ecd_fit* fit) { return fit && fit->f.converged ? 1 : 0; }

size_t ecd_fit_coefficient_count(const ecd_fit* fit) { return fit ? fit->table.size() : 0; }

ecd_status ecd_fit_coefficient(const ecd_fit* fit, size_t index, ecd_coefficient* out) {
  return guard([&] {
    need(fit, "fit");
    need(out, "out");
    const auto& c = fit->table.at(index);
    *out = {c.name.c_str(), c.estimate,
            c.fixed ? std::numeric_limits<double>::quiet_NaN() : c.std_error, c.fixed ? 1 : 0};
  });
}

ecd_status ecd_fit_params(const ecd_fit* fit, ecd_params** out) {
  return guard([&] {
    need(fit, "fit");
    need(out, "out");
    *out = new ecd_params{fit->f.params};
  });
}

ecd_status ecd_fit_write(const ecd_fit* fit, const char* path, const char* header) {
  return guard([&] {
    need(fit, "fit");
    write_json(path, ecd::to_json(fit->f), header);
  });
}

void ecd_fit_free(ecd_fit* fit) { delete fit; }

// ---- synthesis

ecd_status ecd_synthesize(const ecd_population* population, const ecd_scenario* scenario,
                          const ecd_params* params, const ecd_categories* categories,
                          uint64_t weeks, uint64_t seed, unsigned workers, ecd_synthesis** out) {
  return guard([&] {
    need(population, "population");
    need(scenario, "scenario");
    need(out, "out");
    if (weeks == 0) throw ecd::InvalidInput("weeks must be >= 1");
    const ecd::ChoiceModelParams p = params ? params->p : ecd::ChoiceModelParams{};
    const auto cats = categories ? categories->c : ecd::default_categories();
    auto s = std::make_unique<ecd_synthesis>();
    s->r = ecd::synthesize(population->p, scenario->s, p, cats, weeks, seed, workers);
    *out = s.release();
  });
}

size_t ecd_synthesis_package_count(const ecd_synthesis* synthesis) {
  return synthesis ? synthesis->r.packages.size() : 0;
}

ecd_status ecd_synthesis_package(const ecd_synthesis* synthesis, size_t index, ecd_package* out) {
  return guard([&] {
    need(synthesis, "synthesis");
    need(out, "out");
    const auto& p = synthesis->r.packages.at(index);
    *out = {p.day,
            p.household_id.c_str(),
            ecd::to_string(p.category).data(),
            p.order_id,
            p.order_value,
            p.option_id.c_str(),
            ecd::to_string(p.speed).data(),
            ecd::to_string(p.date).data(),
            p.packages};
  });
}

size_t ecd_synthesis_category_count(const ecd_synthesis* synthesis) {
  return synthesis ? synthesis->r.categories.size() : 0;
}

ecd_status ecd_synthesis_category(const ecd_synthesis* synthesis, size_t index, const char** name,
                                  size_t* adopters, size_t* orders, size_t* package_records) {
  return guard([&] {
    need(synthesis, "synthesis");
    const auto& c = synthesis->r.categories.at(index);
    if (name) *name = ecd::to_string(c.category).data();
    if (adopters) *adopters = c.adopters;
    if (orders) *orders = c.orders;
    if (package_records) *package_records = c.packages;
  });
}

ecd_status ecd_synthesis_write(const ecd_synthesis* synthesis, const char* packages_path,
                               const char* summary_path, const char* header) {
  return guard([&] {
    need(synthesis, "synthesis");
    {
      auto out = open_out(packages_path);
      ecd::write_packages_csv(out, synthesis->r.packages, str(header));
      finish(out, packages_path);
    }
    if (summary_path) {
      auto out = open_out(summary_path);
      ecd::write_synthesis_summary_csv(out, synthesis->r, str(header));
      finish(out, summary_path);
    }
  });
}

void ecd_synthesis_free(ecd_synthesis* synthesis) { delete synthesis; }

}  // extern "C"

/*
 * ecomdemand: household e-commerce delivery demand simulation.
 *
 * C interface over the simulation core. All objects are opaque handles
 * created by ecd_*_load / ecd_*_default / ecd_* computations and released
 * with the matching ecd_*_free (NULL is accepted). Every fallible call
 * returns an ecd_status; on failure ecd_last_error() describes the problem
 * for the calling thread. Strings returned by accessors are owned by the
 * handle and stay valid until it is freed.
 */
#ifndef ECOMDEMAND_H
#define ECOMDEMAND_H

#include <stddef.h>
#include <stdint.h>

#if defined(ECD_BUILDING_LIBRARY)
#define ECD_API __attribute__((visibility("default")))
#else
#define ECD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ecd_status {
  ECD_OK = 0,
  ECD_ERR_INVALID_ARGUMENT = 1, /* null handle, bad index, invalid numeric input */
  ECD_ERR_CONFIG = 2,           /* scenario, parameter, target or category schema violation */
  ECD_ERR_IO = 3,               /* unreadable file or malformed row */
  ECD_ERR_INTERNAL = 4
} ecd_status;

ECD_API const char* ecd_last_error(void);
ECD_API const char* ecd_version(void);
ECD_API uint64_t ecd_hash_bytes(const void* data, size_t size, uint64_t basis);

/* ---- parameters ------------------------------------------------------- */

typedef struct ecd_params ecd_params;

ECD_API ecd_status ecd_params_default(ecd_params** out);
/* Values in the file override the defaults; unknown names are rejected. */
ECD_API ecd_status ecd_params_load(const char* path, ecd_params** out);
ECD_API ecd_status ecd_params_write(const ecd_params* params, const char* path, const char* header);
ECD_API ecd_status ecd_params_clone(const ecd_params* params, ecd_params** out);
ECD_API size_t ecd_params_count(void);
ECD_API const char* ecd_params_name(size_t index);
ECD_API ecd_status ecd_params_get(const ecd_params* params, const char* name, double* value);
ECD_API ecd_status ecd_params_set(ecd_params* params, const char* name, double value);
ECD_API void ecd_params_free(ecd_params* params);

/* ---- scenarios -------------------------------------------------------- */

typedef struct ecd_scenario ecd_scenario;

ECD_API size_t ecd_builtin_scenario_count(void);
ECD_API const char* ecd_builtin_scenario_name(size_t index);
ECD_API ecd_status ecd_scenario_builtin(const char* name, ecd_scenario** out);
ECD_API ecd_status ecd_scenario_load(const char* path, ecd_scenario** out);
ECD_API ecd_status ecd_scenario_write(const ecd_scenario* scenario, const char* path, const char* header);
ECD_API const char* ecd_scenario_name(const ecd_scenario* scenario);
ECD_API size_t ecd_scenario_option_count(const ecd_scenario* scenario);
ECD_API void ecd_scenario_free(ecd_scenario* scenario);

/* Delivery-option level at one order value. Buffers hold option_count
 * entries; any output pointer may be NULL. Scenario overrides are applied. */
ECD_API ecd_status ecd_option_choice(const ecd_scenario* scenario, const ecd_params* params,
                                     double order_value, double* utilities, double* probabilities,
                                     size_t option_count, double* logsum);
ECD_API ecd_status ecd_order_value_utility(const ecd_scenario* scenario, const ecd_params* params,
                                           double order_value, double total_value, double* out);
ECD_API ecd_status ecd_total_value_utility(const ecd_scenario* scenario, const ecd_params* params,
                                           double total_value, int household_size, double* out);

typedef struct ecd_household_result {
  double expected_total_value;
  double expected_frequency;
  double expected_order_value;
} ecd_household_result;

/* Exact expectation for one household; shares (option_count entries) may be NULL. */
ECD_API ecd_status ecd_evaluate_household(const ecd_scenario* scenario, const ecd_params* params,
                                          int household_size, ecd_household_result* out,
                                          double* option_shares, size_t option_count);

/* ---- populations ------------------------------------------------------ */

typedef struct ecd_population ecd_population;

ECD_API ecd_status ecd_population_load(const char* path, ecd_population** out);
/* masses[i] is the probability of household size i + 1. */
ECD_API ecd_status ecd_population_synthetic(size_t count, const double* masses, size_t sizes,
                                            uint64_t seed, ecd_population** out);
ECD_API ecd_status ecd_population_default(ecd_population** out);
ECD_API size_t ecd_population_size(const ecd_population* population);
ECD_API ecd_status ecd_population_household(const ecd_population* population, size_t index,
                                            const char** id, int* size);
ECD_API ecd_status ecd_population_write(const ecd_population* population, const char* path,
                                        const char* header);
ECD_API void ecd_population_free(ecd_population* population);

/* ---- scenario runs ---------------------------------------------------- */

typedef enum ecd_mode { ECD_MODE_EXPECTATION = 0, ECD_MODE_SAMPLED = 1 } ecd_mode;

typedef struct ecd_run_options {
  ecd_mode mode;
  uint64_t seed;
  uint64_t replications; /* weeks per household in sampled mode */
  unsigned workers;
} ecd_run_options;

ECD_API void ecd_run_options_init(ecd_run_options* options);

typedef struct ecd_analysis ecd_analysis;

typedef struct ecd_summary {
  const char* scenario;
  size_t households;
  double mean_total_value;
  double mean_frequency;
  double mean_order_value;
  double share_2_5_days_pct;
  double share_one_day_pct;
  double share_same_day_pct;
  size_t size_capped;
  size_t grid_saturated;
} ecd_summary;

typedef enum ecd_output {
  ECD_OUTPUT_SUMMARY = 0,
  ECD_OUTPUT_CDF_TOTAL_VALUE = 1,
  ECD_OUTPUT_CDF_FREQUENCY = 2,
  ECD_OUTPUT_DELTAS = 3
} ecd_output;

/* One scenario is a run; two or more also produce pairwise deltas. */
ECD_API ecd_status ecd_analyze(const ecd_population* population, const ecd_scenario* const* scenarios,
                               size_t scenario_count, const ecd_params* params,
                               const ecd_run_options* options, ecd_analysis** out);
ECD_API size_t ecd_analysis_scenario_count(const ecd_analysis* analysis);
ECD_API ecd_status ecd_analysis_summary(const ecd_analysis* analysis, size_t scenario, ecd_summary* out);
ECD_API ecd_status ecd_analysis_delta(const ecd_analysis* analysis, size_t base, size_t other,
                                      double* total_value_pct, double* frequency_pct);
ECD_API ecd_status ecd_analysis_household(const ecd_analysis* analysis, size_t scenario,
                                          size_t household, ecd_household_result* out);
ECD_API ecd_status ecd_analysis_write(const ecd_analysis* analysis, ecd_output kind, const char* path,
                                      const char* header);
ECD_API ecd_status ecd_analysis_write_households(const ecd_analysis* analysis, size_t scenario,
                                                 const char* path, const char* header);
ECD_API void ecd_analysis_free(ecd_analysis* analysis);

/* ---- categories and calibration targets ------------------------------- */

typedef struct ecd_categories ecd_categories;

ECD_API ecd_status ecd_categories_default(ecd_categories** out);
ECD_API ecd_status ecd_categories_load(const char* path, ecd_categories** out);
ECD_API ecd_status ecd_categories_write(const ecd_categories* categories, const char* path,
                                        const char* header);
ECD_API size_t ecd_categories_count(const ecd_categories* categories);
ECD_API ecd_status ecd_categories_get(const ecd_categories* categories, size_t index,
                                      const char** name, double* adoption_rate,
                                      double* packages_per_order, double* adult_share);
ECD_API void ecd_categories_free(ecd_categories* categories);

typedef struct ecd_targets ecd_targets;

ECD_API ecd_status ecd_targets_default(ecd_targets** out);
ECD_API ecd_status ecd_targets_load(const char* path, ecd_targets** out);
ECD_API ecd_status ecd_targets_write(const ecd_targets* targets, const char* path, const char* header);
ECD_API size_t ecd_targets_count(const ecd_targets* targets);
ECD_API ecd_status ecd_targets_get(const ecd_targets* targets, size_t index, const char** category,
                                   double* deliveries_per_person_month,
                                   double* purchase_value_per_household_month, double* tolerance);
ECD_API ecd_status ecd_targets_set_tolerance(ecd_targets* targets, double tolerance);
ECD_API void ecd_targets_free(ecd_targets* targets);

/* Monthly aggregates of a population for one category (adult share from categories). */
ECD_API ecd_status ecd_simulate_aggregates(const ecd_population* population,
                                           const ecd_scenario* scenario, const ecd_params* params,
                                           const ecd_categories* categories, const char* category,
                                           unsigned workers, double* deliveries_per_person_month,
                                           double* purchase_value_per_household_month);

typedef struct ecd_free_parameter {
  const char* name;
  double lower;
  double upper;
} ecd_free_parameter;

typedef struct ecd_calibration ecd_calibration;

typedef struct ecd_calibration_summary {
  const char* category;
  int converged;
  unsigned iterations;
  unsigned evaluations;
  double deliveries_per_person_month;
  double purchase_value_per_household_month;
  double residual_deliveries;
  double residual_value;
  const char* status;
} ecd_calibration_summary;

/* Calibrates the free parameters against targets[target_index]. The matching
 * category's overrides are applied to `start` first. free may be NULL to use
 * alpha, beta_interval and beta_storage with their default boxes. Infeasible
 * targets are not an error: the report says converged == 0. */
ECD_API ecd_status ecd_calibrate(const ecd_targets* targets, size_t target_index,
                                 const ecd_categories* categories, const ecd_free_parameter* free,
                                 size_t free_count, const ecd_population* population,
                                 const ecd_scenario* scenario, const ecd_params* start,
                                 unsigned max_iterations, unsigned workers, ecd_calibration** out);
ECD_API ecd_status ecd_calibration_summary_get(const ecd_calibration* calibration,
                                               ecd_calibration_summary* out);
ECD_API ecd_status ecd_calibration_fitted(const ecd_calibration* calibration, const char* name,
                                          double* value);
ECD_API ecd_status ecd_calibration_params(const ecd_calibration* calibration, ecd_params** out);
/* Writes a JSON report covering every calibration in the array. */
ECD_API ecd_status ecd_calibration_write(const ecd_calibration* const* calibrations, size_t count,
                                         const char* path, const char* header);
ECD_API void ecd_calibration_free(ecd_calibration* calibration);

/* ---- estimation ------------------------------------------------------- */

typedef enum ecd_level {
  ECD_LEVEL_DELIVERY_OPTION = 1,
  ECD_LEVEL_ORDER_VALUE = 2,
  ECD_LEVEL_TOTAL_VALUE = 3
} ecd_level;

typedef struct ecd_dataset ecd_dataset;

/* Long-format CSV: obs_id,alt_id,chosen,<covariates...>. */
ECD_API ecd_status ecd_dataset_load(const char* path, ecd_dataset** out);
/* Draws n choices from the model; household sizes follow the default profile. */
ECD_API ecd_status ecd_dataset_simulate(ecd_level level, size_t n, const ecd_scenario* scenario,
                                        const ecd_params* params, uint64_t seed, ecd_dataset** out);
ECD_API ecd_status ecd_dataset_write(const ecd_dataset* dataset, const char* path, const char* header);
ECD_API size_t ecd_dataset_observations(const ecd_dataset* dataset);
ECD_API void ecd_dataset_free(ecd_dataset* dataset);

typedef struct ecd_fit ecd_fit;

typedef struct ecd_coefficient {
  const char* name;
  double estimate;
  double std_error; /* NaN when held fixed */
  int fixed;
} ecd_coefficient;

ECD_API ecd_status ecd_fit_sequential(const ecd_dataset* delivery_options,
                                      const ecd_dataset* order_values,
                                      const ecd_dataset* total_values, const ecd_scenario* scenario,
                                      const ecd_params* start, unsigned workers, ecd_fit** out);
ECD_API int ecd_fit_converged(const ecd_fit* fit);
ECD_API size_t ecd_fit_coefficient_count(const ecd_fit* fit);
ECD_API ecd_status ecd_fit_coefficient(const ecd_fit* fit, size_t index, ecd_coefficient* out);
ECD_API ecd_status ecd_fit_params(const ecd_fit* fit, ecd_params** out);
ECD_API ecd_status ecd_fit_write(const ecd_fit* fit, const char* path, const char* header);
ECD_API void ecd_fit_free(ecd_fit* fit);

/* ---- package synthesis ------------------------------------------------ */

typedef struct ecd_synthesis ecd_synthesis;

typedef struct ecd_package {
  uint64_t day; /* 7 * week + weekday, 0 = Monday */
  const char* household_id;
  const char* category;
  uint64_t order_id;
  int order_value;
  const char* option_id;
  const char* speed;
  const char* date;
  uint64_t packages;
} ecd_package;

ECD_API ecd_status ecd_synthesize(const ecd_population* population, const ecd_scenario* scenario,
                                  const ecd_params* params, const ecd_categories* categories,
                                  uint64_t weeks, uint64_t seed, unsigned workers,
                                  ecd_synthesis** out);
ECD_API size_t ecd_synthesis_package_count(const ecd_synthesis* synthesis);
ECD_API ecd_status ecd_synthesis_package(const ecd_synthesis* synthesis, size_t index, ecd_package* out);
ECD_API size_t ecd_synthesis_category_count(const ecd_synthesis* synthesis);
ECD_API ecd_status ecd_synthesis_category(const ecd_synthesis* synthesis, size_t index,
                                          const char** name, size_t* adopters, size_t* orders,
                                          size_t* package_records);
ECD_API ecd_status ecd_synthesis_write(const ecd_synthesis* synthesis, const char* packages_path,
                                       const char* summary_path, const char* header);
ECD_API void ecd_synthesis_free(ecd_synthesis* synthesis);

#ifdef __cplusplus
}
#endif

#endif /* ECOMDEMAND_H */

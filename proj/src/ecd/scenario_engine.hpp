#pragma once

// Population-level scenario runs and scenario comparisons.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ecd/model.hpp"
#include "ecd/population.hpp"

namespace ecd {

struct CdfPoint {
  double value = 0.0;
  double cum_prob = 0.0;
};

// Non-decreasing empirical CDF over `values`; ties are merged.
std::vector<CdfPoint> empirical_cdf(std::vector<double> values);

struct SummaryStats {
  std::string scenario;
  double mean_total_value = 0.0;
  double mean_frequency = 0.0;
  double mean_order_value = 0.0;
  std::vector<std::string> option_ids;
  std::vector<double> option_share_pct;
  std::array<double, 3> speed_share_pct{};  // indexed by Speed
  std::vector<CdfPoint> tv_cdf;
  std::vector<CdfPoint> frequency_cdf;
  std::size_t size_capped = 0;
  std::size_t grid_saturated = 0;
};

struct RunOptions {
  EvalMode mode = EvalMode::Expectation;
  std::uint64_t seed = 0;
  std::uint64_t replications = 1;
  unsigned workers = 1;
};

struct ScenarioRun {
  SummaryStats summary;
  std::vector<DemandResult> households;
};

// Evaluates every household (in parallel) and reduces in population order.
// Parameters are `params` with the scenario's own overrides applied.
ScenarioRun run_scenario(const Population& population, const Scenario& scenario,
                         const ChoiceModelParams& params, const RunOptions& options = {});

SummaryStats summarize(const Scenario& scenario, const std::vector<DemandResult>& households);

struct ScenarioDelta {
  std::size_t base = 0;
  std::size_t other = 0;
  double total_value_pct = 0.0;
  double frequency_pct = 0.0;
};

struct Comparison {
  std::vector<ScenarioRun> runs;
  std::vector<ScenarioDelta> deltas;  // every ordered pair base < other
};

Comparison compare_scenarios(const Population& population, const std::vector<Scenario>& scenarios,
                             const ChoiceModelParams& params, const RunOptions& options = {});

void write_summary_csv(std::ostream& out, const std::vector<ScenarioRun>& runs,
                       const std::string& header = {});
enum class CdfKind { TotalValue, Frequency };
void write_cdf_csv(std::ostream& out, const std::vector<ScenarioRun>& runs, CdfKind kind,
                   const std::string& header = {});
void write_households_csv(std::ostream& out, const ScenarioRun& run, const std::string& header = {});
void write_deltas_csv(std::ostream& out, const Comparison& comparison,
                      const std::string& header = {});

}  // namespace ecd

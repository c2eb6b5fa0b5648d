#include "ecd/scenario_engine.hpp"

#include <algorithm>
#include <ostream>

#include "ecd/csv.hpp"
#include "ecd/error.hpp"
#include "ecd/parallel.hpp"

namespace ecd {

std::vector<CdfPoint> empirical_cdf(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::vector<CdfPoint> out;
  const double n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double cum = i + 1 == values.size() ? 1.0 : static_cast<double>(i + 1) / n;
    if (!out.empty() && out.back().value == values[i])
      out.back().cum_prob = cum;
    else
      out.push_back({values[i], cum});
  }
  return out;
}

SummaryStats summarize(const Scenario& scenario, const std::vector<DemandResult>& households) {
  SummaryStats s;
  s.scenario = scenario.name;
  const std::size_t k = scenario.options.size();
  for (const auto& o : scenario.options) s.option_ids.push_back(o.id);
  s.option_share_pct.assign(k, 0.0);
  if (households.empty()) return s;

  std::vector<double> weighted(k, 0.0);
  double weight_total = 0.0;
  std::vector<double> tvs, freqs;
  tvs.reserve(households.size());
  freqs.reserve(households.size());
  for (const auto& h : households) {
    s.mean_total_value += h.expected_tv;
    s.mean_frequency += h.expected_frequency;
    s.mean_order_value += h.expected_ov;
    for (std::size_t d = 0; d < k; ++d) weighted[d] += h.expected_frequency * h.option_shares[d];
    weight_total += h.expected_frequency;
    tvs.push_back(h.expected_tv);
    freqs.push_back(h.expected_frequency);
    s.size_capped += h.size_capped ? 1 : 0;
    s.grid_saturated += h.grid_saturated ? 1 : 0;
  }
  const double n = static_cast<double>(households.size());
  s.mean_total_value /= n;
  s.mean_frequency /= n;
  s.mean_order_value /= n;
  for (std::size_t d = 0; d < k; ++d) {
    s.option_share_pct[d] = weight_total > 0.0 ? 100.0 * weighted[d] / weight_total : 0.0;
    s.speed_share_pct[static_cast<std::size_t>(scenario.options[d].speed)] += s.option_share_pct[d];
  }
  s.tv_cdf = empirical_cdf(std::move(tvs));
  s.frequency_cdf = empirical_cdf(std::move(freqs));
  return s;
}

ScenarioRun run_scenario(const Population& population, const Scenario& scenario,
                         const ChoiceModelParams& params, const RunOptions& options) {
  population.validate();
  if (options.mode == EvalMode::Sampled && options.replications == 0)
    throw ConfigError("sampled mode needs at least one replication");
  const DemandTables tables(scenario, apply_overrides(params, scenario.overrides));
  ScenarioRun run;
  run.households.resize(population.size());
  parallel_for(population.size(), options.workers, [&](std::size_t i) {
    const auto& h = population.households[i];
    run.households[i] = options.mode == EvalMode::Expectation
                            ? evaluate_household(h, tables)
                            : sample_household(h, tables, options.seed, options.replications);
  });
  run.summary = summarize(scenario, run.households);
  return run;
}

Comparison compare_scenarios(const Population& population, const std::vector<Scenario>& scenarios,
                             const ChoiceModelParams& params, const RunOptions& options) {
  if (scenarios.size() < 2) throw ConfigError("comparison needs at least two scenarios");
  Comparison c;
  for (const auto& s : scenarios) c.runs.push_back(run_scenario(population, s, params, options));
  auto pct = [](double base, double other) { return 100.0 * (other - base) / base; };
  for (std::size_t i = 0; i < c.runs.size(); ++i)
    for (std::size_t j = i + 1; j < c.runs.size(); ++j) {
      const auto& a = c.runs[i].summary;
      const auto& b = c.runs[j].summary;
      c.deltas.push_back({i, j, pct(a.mean_total_value, b.mean_total_value),
                          pct(a.mean_frequency, b.mean_frequency)});
    }
  return c;
}

void write_summary_csv(std::ostream& out, const std::vector<ScenarioRun>& runs,
                       const std::string& header) {
  csv::write_header_comment(out, header);
  out << "scenario,mean_total_value,mean_order_frequency,share_2_5_days_pct,share_one_day_pct,"
         "share_same_day_pct\n";
  for (const auto& r : runs) {
    const auto& s = r.summary;
    out << s.scenario << ',' << csv::num(s.mean_total_value) << ',' << csv::num(s.mean_frequency)
        << ',' << csv::num(s.speed_share_pct[0]) << ',' << csv::num(s.speed_share_pct[1]) << ','
        << csv::num(s.speed_share_pct[2]) << '\n';
  }
}

void write_cdf_csv(std::ostream& out, const std::vector<ScenarioRun>& runs, CdfKind kind,
                   const std::string& header) {
  csv::write_header_comment(out, header);
  out << "value,cum_prob,scenario\n";
  for (const auto& r : runs) {
    const auto& cdf = kind == CdfKind::TotalValue ? r.summary.tv_cdf : r.summary.frequency_cdf;
    for (const auto& p : cdf)
      out << csv::num(p.value) << ',' << csv::num(p.cum_prob) << ',' << r.summary.scenario << '\n';
  }
}

void write_households_csv(std::ostream& out, const ScenarioRun& run, const std::string& header) {
  csv::write_header_comment(out, header);
  out << "household_id,size,mode,expected_tv,expected_frequency,expected_ov";
  for (const auto& id : run.summary.option_ids) out << ",share_option_" << id;
  out << '\n';
  for (const auto& h : run.households) {
    out << h.household_id << ',' << h.household_size << ','
        << (h.mode == EvalMode::Expectation ? "expectation" : "sampled") << ','
        << csv::num(h.expected_tv) << ',' << csv::num(h.expected_frequency) << ','
        << csv::num(h.expected_ov);
    for (double s : h.option_shares) out << ',' << csv::num(s);
    out << '\n';
  }
}

void write_deltas_csv(std::ostream& out, const Comparison& c, const std::string& header) {
  csv::write_header_comment(out, header);
  out << "base,other,total_value_delta_pct,frequency_delta_pct\n";
  for (const auto& d : c.deltas)
    out << c.runs[d.base].summary.scenario << ',' << c.runs[d.other].summary.scenario << ','
        << csv::num(d.total_value_pct) << ',' << csv::num(d.frequency_pct) << '\n';
}

}  // namespace ecd

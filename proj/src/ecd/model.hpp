#pragma once

// Three-level household demand model: delivery option | order value,
// order value | total value, and weekly total value, linked by logsums.

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ecd/choice.hpp"

namespace ecd {

class RngStream;

enum class Speed { Days2To5 = 0, OneDay = 1, SameDay = 2 };
enum class Slot { None = 0, TwoHour = 1, FourHour = 2 };
enum class TimeOfDay { Daytime = 0, DaytimeAndEvening = 1 };
enum class DateSpan { Weekday = 0, WeekdayAndSaturday = 1, AllDays = 2 };

std::string_view to_string(Speed);
std::string_view to_string(Slot);
std::string_view to_string(TimeOfDay);
std::string_view to_string(DateSpan);
Speed parse_speed(std::string_view);
Slot parse_slot(std::string_view);
TimeOfDay parse_time(std::string_view);
DateSpan parse_date(std::string_view);

// Days of week 0 = Monday .. 6 = Sunday on which an option can deliver.
std::span<const int> admissible_days(DateSpan date);

inline constexpr double kOpenUpper = std::numeric_limits<double>::infinity();

struct FeeBracket {
  double lower = 0.0;  // inclusive
  double upper = kOpenUpper;  // exclusive
  double fee = 0.0;
};

// Piecewise-constant fee over order value. Brackets partition [0, inf).
class FeeSchedule {
 public:
  FeeSchedule() : FeeSchedule(std::vector<FeeBracket>{FeeBracket{}}) {}
  explicit FeeSchedule(std::vector<FeeBracket> brackets);

  // Convenience for the common 4-tier layout [0,25) [25,50) [50,100) [100,inf).
  static FeeSchedule tiers(std::span<const double> lower_bounds, std::span<const double> fees);

  std::size_t bracket_index(double order_value) const;
  double fee_at(double order_value) const { return brackets_[bracket_index(order_value)].fee; }
  const std::vector<FeeBracket>& brackets() const { return brackets_; }

 private:
  std::vector<FeeBracket> brackets_;
};

struct DeliveryOption {
  std::string id;
  Speed speed = Speed::Days2To5;
  Slot slot = Slot::None;
  TimeOfDay time = TimeOfDay::Daytime;
  DateSpan date = DateSpan::AllDays;
  FeeSchedule fees;
};

struct ChoiceModelParams {
  // Delivery option part-worths.
  double speed_2_5_days = -0.259;
  double speed_one_day = 0.082;
  double speed_same_day = 0.177;
  double slot_none = -0.157;
  double slot_2hr = 0.113;
  double slot_4hr = 0.040;
  double time_daytime = -0.090;
  double time_daytime_evening = 0.090;
  double date_weekday = -0.063;
  double date_weekday_saturday = 0.054;
  double date_all_days = 0.009;
  double beta_fee = -1.377;  // per ln(US$ + 1)
  // Order value level.
  double beta_logsumdo = 1.05;
  double beta_interval = -0.111;  // per (weeks between orders)^2
  double beta_storage = -0.0183;  // per US$
  // Total value level.
  double beta_logsumov = 0.0597;
  double beta_hhs = -0.000175;  // per US$^2
  double alpha = 12.3;  // US$ per week per household member

  double speed(Speed s) const;
  double slot(Slot s) const;
  double time(TimeOfDay t) const;
  double date(DateSpan d) const;

  static constexpr std::size_t kCount = 18;
  static const std::array<std::string_view, kCount>& names();
  double get(std::string_view name) const;
  void set(std::string_view name, double value);
  double at(std::size_t index) const;
  double& at(std::size_t index);

  void validate() const;
  bool operator==(const ChoiceModelParams&) const = default;
};

// Named parameter overrides applied on top of a base parameter set.
using ParamOverrides = std::vector<std::pair<std::string, double>>;
ChoiceModelParams apply_overrides(ChoiceModelParams base, const ParamOverrides& overrides);

struct Household {
  std::string id;
  int size = 1;
};

// Integer US$ grid [min, max] with unit step.
struct IntGrid {
  int min = 1;
  int max = 1;
  std::size_t size() const { return static_cast<std::size_t>(max - min + 1); }
  int value(std::size_t i) const { return min + static_cast<int>(i); }
  bool operator==(const IntGrid&) const = default;
};

struct Scenario {
  std::string name;
  std::vector<DeliveryOption> options;
  ParamOverrides overrides;
  IntGrid ov_grid{10, 300};
  IntGrid tv_grid{1, 600};

  void validate() const;
};

inline constexpr int kMaxHouseholdSize = 20;

double fee_for(const DeliveryOption& option, double order_value);

double option_utility(const DeliveryOption& option, double order_value,
                      const ChoiceModelParams& params);

struct OptionChoice {
  std::vector<double> utilities;
  ChoiceDistribution probabilities;
  double logsum = 0.0;
};

OptionChoice option_choice(const Scenario& scenario, double order_value,
                           const ChoiceModelParams& params);

// Uncached evaluations of the order-value and total-value utilities.
double order_value_utility(double order_value, double total_value, const Scenario& scenario,
                           const ChoiceModelParams& params);
double household_size_term(double total_value, int household_size, const ChoiceModelParams& params);
double order_value_logsum(double total_value, const Scenario& scenario,
                          const ChoiceModelParams& params);
double total_value_utility(double total_value, const Household& household,
                           const Scenario& scenario, const ChoiceModelParams& params);

// Household-independent quantities of one (scenario, params) pair: option
// choices cached per combination of fee brackets, the order-value
// distribution for every total value, and per-total-value moments.
class DemandTables {
 public:
  DemandTables(Scenario scenario, const ChoiceModelParams& params);

  const Scenario& scenario() const { return scenario_; }
  const ChoiceModelParams& params() const { return params_; }
  std::size_t option_count() const { return scenario_.options.size(); }
  std::size_t ov_count() const { return scenario_.ov_grid.size(); }
  std::size_t tv_count() const { return scenario_.tv_grid.size(); }

  const OptionChoice& options_at(std::size_t ov_index) const {
    return bracket_choices_[ov_bracket_[ov_index]];
  }
  std::size_t distinct_bracket_sets() const { return bracket_choices_.size(); }
  double ov_utility_static(std::size_t ov_index) const { return ov_static_[ov_index]; }

  std::span<const double> ov_given_tv(std::size_t tv_index) const;
  double ov_logsum(std::size_t tv_index) const { return ov_logsum_[tv_index]; }
  double frequency_given_tv(std::size_t tv_index) const { return frequency_[tv_index]; }
  double ov_mean_given_tv(std::size_t tv_index) const { return ov_mean_[tv_index]; }
  std::span<const double> share_weight_given_tv(std::size_t tv_index) const;

  // Fills the order-value utilities for one total value.
  void ov_utilities(std::size_t tv_index, std::span<double> out) const;

 private:
  Scenario scenario_;
  ChoiceModelParams params_;
  std::vector<OptionChoice> bracket_choices_;
  std::vector<std::size_t> ov_bracket_;
  std::vector<double> ov_static_;  // interval-free part: storage term
  std::vector<double> ov_given_tv_;  // tv_count x ov_count
  std::vector<double> ov_logsum_;
  std::vector<double> frequency_;
  std::vector<double> ov_mean_;
  std::vector<double> share_weight_;  // tv_count x option_count
};

enum class EvalMode { Expectation, Sampled };

struct DemandResult {
  std::string household_id;
  int household_size = 1;
  EvalMode mode = EvalMode::Expectation;
  ChoiceDistribution tv_distribution;
  double expected_tv = 0.0;
  double expected_frequency = 0.0;
  double expected_ov = 0.0;
  std::vector<double> option_shares;
  // Sampled mode only: realized order counts by option over all replications.
  std::vector<std::uint64_t> realized_orders;
  std::uint64_t replications = 0;
  bool size_capped = false;
  bool grid_saturated = false;
};

std::vector<double> tv_utilities(const Household& household, const DemandTables& tables);

DemandResult evaluate_household(const Household& household, const DemandTables& tables);
DemandResult evaluate_household(const Household& household, const Scenario& scenario,
                                const ChoiceModelParams& params);

struct OrderDraw {
  std::size_t option_index = 0;
};

struct WeekSample {
  int total_value = 0;
  int order_value = 0;
  double rate = 0.0;  // tv / ov
  std::vector<OrderDraw> orders;
};

// Draws tv ~ P(tv), ov ~ P(ov|tv), N ~ Poisson(tv/ov), then N option choices.
// Reuses a precomputed P(tv) when the caller supplies one.
WeekSample sample_household_week(const Household& household, const DemandTables& tables,
                                 RngStream& rng,
                                 std::span<const double> tv_distribution = {});

// Monte Carlo counterpart of evaluate_household over `replications` weeks,
// each on its own stream keyed by (seed, household id, replication).
DemandResult sample_household(const Household& household, const DemandTables& tables,
                              std::uint64_t seed, std::uint64_t replications);

}  // namespace ecd

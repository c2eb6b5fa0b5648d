#include "ecd/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "ecd/error.hpp"
#include "ecd/rng.hpp"

namespace ecd {

namespace {

template <class Enum, std::size_t N>
Enum parse_enum(std::string_view text, const std::array<std::string_view, N>& labels,
                std::string_view what) {
  for (std::size_t i = 0; i < N; ++i)
    if (labels[i] == text) return static_cast<Enum>(i);
  std::string allowed;
  for (auto l : labels) allowed += (allowed.empty() ? "" : ", ") + std::string(l);
  throw InvalidInput("unknown " + std::string(what) + " '" + std::string(text) +
                     "' (expected one of: " + allowed + ")");
}

constexpr std::array<std::string_view, 3> kSpeedLabels{"days-2-to-5", "one-day", "same-day"};
constexpr std::array<std::string_view, 3> kSlotLabels{"none", "2hr", "4hr"};
constexpr std::array<std::string_view, 2> kTimeLabels{"daytime", "daytime-and-evening"};
constexpr std::array<std::string_view, 3> kDateLabels{"weekday", "weekday-and-saturday",
                                                      "all-days"};

constexpr std::array<int, 5> kWeekdays{0, 1, 2, 3, 4};
constexpr std::array<int, 6> kWeekdaysSaturday{0, 1, 2, 3, 4, 5};
constexpr std::array<int, 7> kAllDays{0, 1, 2, 3, 4, 5, 6};

using Member = double ChoiceModelParams::*;
constexpr std::array<Member, ChoiceModelParams::kCount> kMembers{
    &ChoiceModelParams::speed_2_5_days,  &ChoiceModelParams::speed_one_day,
    &ChoiceModelParams::speed_same_day,  &ChoiceModelParams::slot_none,
    &ChoiceModelParams::slot_2hr,        &ChoiceModelParams::slot_4hr,
    &ChoiceModelParams::time_daytime,    &ChoiceModelParams::time_daytime_evening,
    &ChoiceModelParams::date_weekday,    &ChoiceModelParams::date_weekday_saturday,
    &ChoiceModelParams::date_all_days,   &ChoiceModelParams::beta_fee,
    &ChoiceModelParams::beta_logsumdo,   &ChoiceModelParams::beta_interval,
    &ChoiceModelParams::beta_storage,    &ChoiceModelParams::beta_logsumov,
    &ChoiceModelParams::beta_hhs,        &ChoiceModelParams::alpha,
};

const std::array<std::string_view, ChoiceModelParams::kCount> kParamNames{
    "beta_speed_2_5_days", "beta_speed_one_day",   "beta_speed_same_day",
    "beta_slot_none",      "beta_slot_2hr",        "beta_slot_4hr",
    "beta_time_daytime",   "beta_time_daytime_evening",
    "beta_date_weekday",   "beta_date_weekday_saturday",
    "beta_date_all_days",  "beta_fee",
    "beta_logsumdo",       "beta_interval",        "beta_storage",
    "beta_logsumov",       "beta_hhs",             "alpha",
};

std::size_t param_index(std::string_view name) {
  for (std::size_t i = 0; i < kParamNames.size(); ++i)
    if (kParamNames[i] == name) return i;
  throw InvalidInput("unknown parameter '" + std::string(name) + "'");
}

int effective_size(int size) { return std::min(size, kMaxHouseholdSize); }

}  // namespace

std::string_view to_string(Speed s) { return kSpeedLabels[static_cast<std::size_t>(s)]; }
std::string_view to_string(Slot s) { return kSlotLabels[static_cast<std::size_t>(s)]; }
std::string_view to_string(TimeOfDay t) { return kTimeLabels[static_cast<std::size_t>(t)]; }
std::string_view to_string(DateSpan d) { return kDateLabels[static_cast<std::size_t>(d)]; }
Speed parse_speed(std::string_view s) { return parse_enum<Speed>(s, kSpeedLabels, "speed"); }
Slot parse_slot(std::string_view s) { return parse_enum<Slot>(s, kSlotLabels, "slot"); }
TimeOfDay parse_time(std::string_view s) { return parse_enum<TimeOfDay>(s, kTimeLabels, "time"); }
DateSpan parse_date(std::string_view s) { return parse_enum<DateSpan>(s, kDateLabels, "date"); }

std::span<const int> admissible_days(DateSpan date) {
  switch (date) {
    case DateSpan::Weekday: return kWeekdays;
    case DateSpan::WeekdayAndSaturday: return kWeekdaysSaturday;
    case DateSpan::AllDays: return kAllDays;
  }
  return kAllDays;
}

// ---------------------------------------------------------------------------
// FeeSchedule

FeeSchedule::FeeSchedule(std::vector<FeeBracket> brackets) : brackets_(std::move(brackets)) {
  if (brackets_.empty()) throw ScenarioError("fee schedule has no brackets");
  if (brackets_.front().lower != 0.0) throw ScenarioError("first fee bracket must start at 0");
  for (std::size_t i = 0; i < brackets_.size(); ++i) {
    const auto& b = brackets_[i];
    if (!std::isfinite(b.fee) || b.fee < 0.0)
      throw ScenarioError("fee bracket " + std::to_string(i) + " has an invalid fee");
    if (!(b.upper > b.lower))
      throw ScenarioError("fee bracket " + std::to_string(i) + " is empty or inverted");
    const bool last = i + 1 == brackets_.size();
    if (last && b.upper != kOpenUpper)
      throw ScenarioError("last fee bracket must be open-ended");
    if (!last && brackets_[i + 1].lower != b.upper)
      throw ScenarioError("fee brackets " + std::to_string(i) + " and " + std::to_string(i + 1) +
                          " leave a gap or overlap");
  }
}

FeeSchedule FeeSchedule::tiers(std::span<const double> lower_bounds, std::span<const double> fees) {
  if (lower_bounds.size() != fees.size()) throw ScenarioError("tier bounds and fees differ in length");
  std::vector<FeeBracket> b;
  for (std::size_t i = 0; i < fees.size(); ++i) {
    const double upper = i + 1 < fees.size() ? lower_bounds[i + 1] : kOpenUpper;
    b.push_back({lower_bounds[i], upper, fees[i]});
  }
  return FeeSchedule(std::move(b));
}

std::size_t FeeSchedule::bracket_index(double ov) const {
  if (!(ov >= 0.0)) throw InvalidInput("order value must be non-negative");
  for (std::size_t i = 0; i < brackets_.size(); ++i)
    if (ov < brackets_[i].upper) return i;
  return brackets_.size() - 1;
}

// ---------------------------------------------------------------------------
// Parameters

double ChoiceModelParams::speed(Speed s) const {
  switch (s) {
    case Speed::Days2To5: return speed_2_5_days;
    case Speed::OneDay: return speed_one_day;
    case Speed::SameDay: return speed_same_day;
  }
  return 0.0;
}

double ChoiceModelParams::slot(Slot s) const {
  switch (s) {
    case Slot::None: return slot_none;
    case Slot::TwoHour: return slot_2hr;
    case Slot::FourHour: return slot_4hr;
  }
  return 0.0;
}

double ChoiceModelParams::time(TimeOfDay t) const {
  return t == TimeOfDay::Daytime ? time_daytime : time_daytime_evening;
}

double ChoiceModelParams::date(DateSpan d) const {
  switch (d) {
    case DateSpan::Weekday: return date_weekday;
    case DateSpan::WeekdayAndSaturday: return date_weekday_saturday;
    case DateSpan::AllDays: return date_all_days;
  }
  return 0.0;
}

const std::array<std::string_view, ChoiceModelParams::kCount>& ChoiceModelParams::names() {
  return kParamNames;
}

double ChoiceModelParams::get(std::string_view name) const { return this->*kMembers[param_index(name)]; }
void ChoiceModelParams::set(std::string_view name, double value) {
  this->*kMembers[param_index(name)] = value;
}
double ChoiceModelParams::at(std::size_t i) const { return this->*kMembers.at(i); }
double& ChoiceModelParams::at(std::size_t i) { return this->*kMembers.at(i); }

void ChoiceModelParams::validate() const {
  for (std::size_t i = 0; i < kCount; ++i)
    if (!std::isfinite(at(i)))
      throw ScenarioError("parameter " + std::string(kParamNames[i]) + " is not finite");
}

ChoiceModelParams apply_overrides(ChoiceModelParams base, const ParamOverrides& overrides) {
  for (const auto& [name, value] : overrides) base.set(name, value);
  return base;
}

// ---------------------------------------------------------------------------
// Scenario

void Scenario::validate() const {
  if (options.empty()) throw ScenarioError("scenario '" + name + "' has no delivery options");
  for (std::size_t i = 0; i < options.size(); ++i)
    for (std::size_t j = i + 1; j < options.size(); ++j)
      if (options[i].id == options[j].id)
        throw ScenarioError("scenario '" + name + "' repeats option id '" + options[i].id + "'");
  if (ov_grid.min <= 0 || ov_grid.max < ov_grid.min)
    throw ScenarioError("scenario '" + name + "' has an invalid order-value grid");
  if (tv_grid.min <= 0 || tv_grid.max < tv_grid.min)
    throw ScenarioError("scenario '" + name + "' has an invalid total-value grid");
  for (const auto& [key, value] : overrides) {
    ChoiceModelParams probe;
    probe.set(key, value);
    if (!std::isfinite(value)) throw ScenarioError("override " + key + " is not finite");
  }
}

// ---------------------------------------------------------------------------
// Utilities

double fee_for(const DeliveryOption& option, double ov) { return option.fees.fee_at(ov); }

double option_utility(const DeliveryOption& option, double ov, const ChoiceModelParams& p) {
  return p.speed(option.speed) + p.slot(option.slot) + p.time(option.time) + p.date(option.date) +
         p.beta_fee * std::log(fee_for(option, ov) + 1.0);
}

OptionChoice option_choice(const Scenario& scenario, double ov, const ChoiceModelParams& params) {
  if (scenario.options.empty())
    throw ScenarioError("scenario '" + scenario.name + "' has no delivery options");
  OptionChoice out;
  out.utilities.reserve(scenario.options.size());
  for (const auto& o : scenario.options) out.utilities.push_back(option_utility(o, ov, params));
  out.probabilities.resize(out.utilities.size());
  out.logsum = probabilities_into(out.utilities, out.probabilities);
  return out;
}

namespace {

inline double ov_utility_terms(double option_logsum, double ov, double tv,
                               const ChoiceModelParams& p) {
  const double interval = ov / tv;
  return p.beta_logsumdo * (tv / ov) * option_logsum + p.beta_interval * interval * interval +
         p.beta_storage * ov;
}

}  // namespace

double order_value_utility(double ov, double tv, const Scenario& scenario,
                           const ChoiceModelParams& params) {
  if (!(ov > 0.0) || !(tv > 0.0)) throw InvalidInput("order and total values must be positive");
  const double ls = option_choice(scenario, ov, params).logsum;
  return ov_utility_terms(ls, ov, tv, params);
}

double household_size_term(double tv, int size, const ChoiceModelParams& p) {
  const double gap = p.alpha * effective_size(size) - tv;
  return p.beta_hhs * gap * gap;
}

double order_value_logsum(double tv, const Scenario& scenario, const ChoiceModelParams& params) {
  std::vector<double> u(scenario.ov_grid.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    u[i] = order_value_utility(scenario.ov_grid.value(i), tv, scenario, params);
  return logsum(u);
}

double total_value_utility(double tv, const Household& household, const Scenario& scenario,
                           const ChoiceModelParams& params) {
  return params.beta_logsumov * order_value_logsum(tv, scenario, params) +
         household_size_term(tv, household.size, params);
}

// ---------------------------------------------------------------------------
// DemandTables

DemandTables::DemandTables(Scenario scenario, const ChoiceModelParams& params)
    : scenario_(std::move(scenario)), params_(params) {
  scenario_.validate();
  params_.validate();
  const std::size_t n_ov = ov_count();
  const std::size_t n_tv = tv_count();
  const std::size_t k = option_count();

  std::map<std::vector<std::size_t>, std::size_t> seen;
  ov_bracket_.resize(n_ov);
  ov_static_.resize(n_ov);
  for (std::size_t o = 0; o < n_ov; ++o) {
    const double ov = scenario_.ov_grid.value(o);
    std::vector<std::size_t> key;
    key.reserve(k);
    for (const auto& opt : scenario_.options) key.push_back(opt.fees.bracket_index(ov));
    auto [it, inserted] = seen.emplace(std::move(key), bracket_choices_.size());
    if (inserted) bracket_choices_.push_back(option_choice(scenario_, ov, params_));
    ov_bracket_[o] = it->second;
    ov_static_[o] = params_.beta_storage * ov;
  }

  ov_given_tv_.resize(n_tv * n_ov);
  ov_logsum_.resize(n_tv);
  frequency_.resize(n_tv);
  ov_mean_.resize(n_tv);
  share_weight_.assign(n_tv * k, 0.0);
  std::vector<double> u(n_ov);
  for (std::size_t t = 0; t < n_tv; ++t) {
    const double tv = scenario_.tv_grid.value(t);
    ov_utilities(t, u);
    std::span<double> p(&ov_given_tv_[t * n_ov], n_ov);
    ov_logsum_[t] = probabilities_into(u, p);
    double freq = 0.0, mean = 0.0;
    double* share = &share_weight_[t * k];
    for (std::size_t o = 0; o < n_ov; ++o) {
      const double ov = scenario_.ov_grid.value(o);
      const double w = p[o] * (tv / ov);
      freq += w;
      mean += p[o] * ov;
      const auto& oc = options_at(o);
      for (std::size_t d = 0; d < k; ++d) share[d] += w * oc.probabilities[d];
    }
    frequency_[t] = freq;
    ov_mean_[t] = mean;
  }
}

void DemandTables::ov_utilities(std::size_t t, std::span<double> out) const {
  const double tv = scenario_.tv_grid.value(t);
  for (std::size_t o = 0; o < out.size(); ++o) {
    const double ov = scenario_.ov_grid.value(o);
    out[o] = ov_utility_terms(options_at(o).logsum, ov, tv, params_);
  }
}

std::span<const double> DemandTables::ov_given_tv(std::size_t t) const {
  return {&ov_given_tv_[t * ov_count()], ov_count()};
}

std::span<const double> DemandTables::share_weight_given_tv(std::size_t t) const {
  return {&share_weight_[t * option_count()], option_count()};
}

// ---------------------------------------------------------------------------
// Household evaluation

std::vector<double> tv_utilities(const Household& household, const DemandTables& tables) {
  if (household.size < 1) throw InvalidInput("household '" + household.id + "' has size < 1");
  const auto& p = tables.params();
  std::vector<double> u(tables.tv_count());
  for (std::size_t t = 0; t < u.size(); ++t)
    u[t] = p.beta_logsumov * tables.ov_logsum(t) +
           household_size_term(tables.scenario().tv_grid.value(t), household.size, p);
  return u;
}

namespace {

constexpr double kSaturationMass = 1e-3;

DemandResult blank_result(const Household& h, const DemandTables& tables, EvalMode mode) {
  DemandResult r;
  r.household_id = h.id;
  r.household_size = h.size;
  r.mode = mode;
  r.size_capped = h.size > kMaxHouseholdSize;
  r.option_shares.assign(tables.option_count(), 0.0);
  return r;
}

}  // namespace

DemandResult evaluate_household(const Household& household, const DemandTables& tables) {
  DemandResult r = blank_result(household, tables, EvalMode::Expectation);
  r.tv_distribution = probabilities(tv_utilities(household, tables));
  const std::size_t k = tables.option_count();
  for (std::size_t t = 0; t < r.tv_distribution.size(); ++t) {
    const double pt = r.tv_distribution[t];
    r.expected_tv += pt * tables.scenario().tv_grid.value(t);
    r.expected_frequency += pt * tables.frequency_given_tv(t);
    r.expected_ov += pt * tables.ov_mean_given_tv(t);
    const auto w = tables.share_weight_given_tv(t);
    for (std::size_t d = 0; d < k; ++d) r.option_shares[d] += pt * w[d];
  }
  double total = 0.0;
  for (double s : r.option_shares) total += s;
  for (double& s : r.option_shares) s /= total;
  r.grid_saturated = r.tv_distribution.back() > kSaturationMass;
  return r;
}

DemandResult evaluate_household(const Household& household, const Scenario& scenario,
                                const ChoiceModelParams& params) {
  return evaluate_household(household, DemandTables(scenario, params));
}

WeekSample sample_household_week(const Household& household, const DemandTables& tables,
                                 RngStream& rng, std::span<const double> tv_distribution) {
  ChoiceDistribution own;
  if (tv_distribution.empty()) {
    own = probabilities(tv_utilities(household, tables));
    tv_distribution = own;
  }
  WeekSample w;
  const std::size_t t = choose_by_draw(tv_distribution, rng.uniform());
  const std::size_t o = choose_by_draw(tables.ov_given_tv(t), rng.uniform());
  w.total_value = tables.scenario().tv_grid.value(t);
  w.order_value = tables.scenario().ov_grid.value(o);
  w.rate = static_cast<double>(w.total_value) / w.order_value;
  const std::uint64_t n = rng.poisson(w.rate);
  const auto& probs = tables.options_at(o).probabilities;
  w.orders.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) w.orders.push_back({choose_by_draw(probs, rng.uniform())});
  return w;
}

DemandResult sample_household(const Household& household, const DemandTables& tables,
                              std::uint64_t seed, std::uint64_t replications) {
  if (replications == 0) throw InvalidInput("replications must be at least 1");
  DemandResult r = blank_result(household, tables, EvalMode::Sampled);
  r.replications = replications;
  r.realized_orders.assign(tables.option_count(), 0);
  const auto ptv = probabilities(tv_utilities(household, tables));
  std::vector<double> hist(tables.tv_count(), 0.0);
  double rate_total = 0.0;
  for (std::uint64_t rep = 0; rep < replications; ++rep) {
    auto rng = household_stream(seed, household.id, StreamPurpose::Replication, 0, rep);
    const auto w = sample_household_week(household, tables, rng, ptv);
    hist[static_cast<std::size_t>(w.total_value - tables.scenario().tv_grid.min)] += 1.0;
    r.expected_tv += w.total_value;
    r.expected_ov += w.order_value;
    r.expected_frequency += w.rate;
    rate_total += w.rate;
    const auto o = static_cast<std::size_t>(w.order_value - tables.scenario().ov_grid.min);
    const auto& probs = tables.options_at(o).probabilities;
    for (std::size_t d = 0; d < probs.size(); ++d) r.option_shares[d] += w.rate * probs[d];
    for (const auto& order : w.orders) ++r.realized_orders[order.option_index];
  }
  const double n = static_cast<double>(replications);
  r.expected_tv /= n;
  r.expected_ov /= n;
  r.expected_frequency /= n;
  for (double& s : r.option_shares) s /= rate_total;
  for (double& h : hist) h /= n;
  r.tv_distribution = std::move(hist);
  r.grid_saturated = r.tv_distribution.back() > kSaturationMass;
  return r;
}

}  // namespace ecd

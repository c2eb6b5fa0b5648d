#pragma once

// Demand-side synthesis: adopters per item category, weekly orders from the
// demand model, and the package stream handed to freight planning.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ecd/category.hpp"
#include "ecd/model.hpp"
#include "ecd/population.hpp"

namespace ecd {

class RngStream;

// Indices into population.households, in population order. Each household
// is an independent Bernoulli(adoption_rate) draw on its own stream.
std::vector<std::size_t> sample_adopters(const Population& population, const CategoryConfig& config,
                                         std::uint64_t seed);

struct OrderEvent {
  std::string household_id;
  Category category = Category::OtherPackages;
  std::uint64_t order_id = 0;  // unique within (household, category)
  std::uint64_t week = 0;
  std::uint64_t day = 0;  // 7 * week + day of week (0 = Monday)
  int order_value = 0;
  std::size_t option_index = 0;
  std::string option_id;
  Speed speed = Speed::Days2To5;
  DateSpan date = DateSpan::AllDays;
};

// For every adopter and week: one sampled week from the demand model, each
// order placed on a day drawn uniformly from its option's delivery days.
std::vector<OrderEvent> synthesize_orders(const Population& population,
                                          const std::vector<std::size_t>& adopters,
                                          const Scenario& scenario, const ChoiceModelParams& params,
                                          Category category, std::uint64_t weeks, std::uint64_t seed,
                                          unsigned workers = 1);

struct PackageEvent {
  std::uint64_t day = 0;
  std::string household_id;
  Category category = Category::OtherPackages;
  std::uint64_t order_id = 0;
  int order_value = 0;
  std::string option_id;
  Speed speed = Speed::Days2To5;
  DateSpan date = DateSpan::AllDays;
  std::uint64_t packages = 1;
  std::string facility_id;  // assigned downstream; always empty here
};

// 1 + Poisson(mean - 1) packages per order.
std::uint64_t draw_packages(double mean, RngStream& rng);

// Converts orders with a single stream, in order; result sorted by
// (day, household id, order id).
std::vector<PackageEvent> orders_to_packages(const std::vector<OrderEvent>& orders,
                                             const CategoryConfig& config, RngStream& rng);
// Same, with one stream per order keyed by (seed, household, category, order id).
std::vector<PackageEvent> orders_to_packages(const std::vector<OrderEvent>& orders,
                                             const CategoryConfig& config, std::uint64_t seed);

void sort_packages(std::vector<PackageEvent>& packages);

struct CategoryOutcome {
  Category category = Category::OtherPackages;
  std::size_t adopters = 0;
  std::size_t orders = 0;
  std::size_t packages = 0;
};

struct SynthesisResult {
  std::vector<CategoryOutcome> categories;
  std::vector<PackageEvent> packages;  // all categories, sorted
};

// Effective parameters per category: base, then scenario overrides, then
// the category's own overrides.
SynthesisResult synthesize(const Population& population, const Scenario& scenario,
                           const ChoiceModelParams& params,
                           const std::vector<CategoryConfig>& categories, std::uint64_t weeks,
                           std::uint64_t seed, unsigned workers = 1);

void write_packages_csv(std::ostream& out, const std::vector<PackageEvent>& packages,
                        const std::string& header = {});
void write_synthesis_summary_csv(std::ostream& out, const SynthesisResult& result,
                                 const std::string& header = {});

}  // namespace ecd

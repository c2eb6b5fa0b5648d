#include "ecd/pipeline.hpp"

#include <algorithm>
#include <ostream>
#include <tuple>

#include "ecd/csv.hpp"
#include "ecd/error.hpp"
#include "ecd/parallel.hpp"
#include "ecd/rng.hpp"

namespace ecd {

namespace {

constexpr std::uint64_t kOrdersPerWeekSlot = 100000;

std::uint64_t category_key(Category c) { return static_cast<std::uint64_t>(c) + 1; }

}  // namespace

std::vector<std::size_t> sample_adopters(const Population& population, const CategoryConfig& config,
                                         std::uint64_t seed) {
  config.validate();
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < population.households.size(); ++i) {
    auto rng = household_stream(seed, population.households[i].id, StreamPurpose::Adoption,
                                category_key(config.category));
    if (rng.bernoulli(config.adoption_rate)) out.push_back(i);
  }
  return out;
}

std::vector<OrderEvent> synthesize_orders(const Population& population,
                                          const std::vector<std::size_t>& adopters,
                                          const Scenario& scenario, const ChoiceModelParams& params,
                                          Category category, std::uint64_t weeks, std::uint64_t seed,
                                          unsigned workers) {
  if (weeks < 1) throw ConfigError("weeks must be at least 1");
  if (adopters.empty()) return {};
  const DemandTables tables(scenario, params);
  std::vector<std::vector<OrderEvent>> per_household(adopters.size());
  parallel_for(adopters.size(), workers, [&](std::size_t a) {
    const auto& h = population.households.at(adopters[a]);
    const auto ptv = probabilities(tv_utilities(h, tables));
    auto& events = per_household[a];
    for (std::uint64_t week = 0; week < weeks; ++week) {
      auto rng = household_stream(seed, h.id, StreamPurpose::Orders, category_key(category), week);
      const auto w = sample_household_week(h, tables, rng, ptv);
      std::uint64_t k = 0;
      for (const auto& draw : w.orders) {
        const auto& opt = scenario.options[draw.option_index];
        const auto days = admissible_days(opt.date);
        OrderEvent e;
        e.household_id = h.id;
        e.category = category;
        e.order_id = week * kOrdersPerWeekSlot + k++;
        e.week = week;
        e.day = 7 * week + static_cast<std::uint64_t>(days[rng.uniform_index(days.size())]);
        e.order_value = w.order_value;
        e.option_index = draw.option_index;
        e.option_id = opt.id;
        e.speed = opt.speed;
        e.date = opt.date;
        events.push_back(std::move(e));
      }
    }
  });
  std::vector<OrderEvent> out;
  for (auto& v : per_household)
    for (auto& e : v) out.push_back(std::move(e));
  return out;
}

std::uint64_t draw_packages(double mean, RngStream& rng) { return 1 + rng.poisson(mean - 1.0); }

namespace {

PackageEvent package_for(const OrderEvent& o, std::uint64_t count) {
  PackageEvent p;
  p.day = o.day;
  p.household_id = o.household_id;
  p.category = o.category;
  p.order_id = o.order_id;
  p.order_value = o.order_value;
  p.option_id = o.option_id;
  p.speed = o.speed;
  p.date = o.date;
  p.packages = count;
  return p;
}

}  // namespace

void sort_packages(std::vector<PackageEvent>& packages) {
  std::stable_sort(packages.begin(), packages.end(), [](const PackageEvent& a, const PackageEvent& b) {
    return std::tie(a.day, a.household_id, a.category, a.order_id) <
           std::tie(b.day, b.household_id, b.category, b.order_id);
  });
}

std::vector<PackageEvent> orders_to_packages(const std::vector<OrderEvent>& orders,
                                             const CategoryConfig& config, RngStream& rng) {
  config.validate();
  std::vector<PackageEvent> out;
  out.reserve(orders.size());
  for (const auto& o : orders) out.push_back(package_for(o, draw_packages(config.packages_per_order, rng)));
  sort_packages(out);
  return out;
}

std::vector<PackageEvent> orders_to_packages(const std::vector<OrderEvent>& orders,
                                             const CategoryConfig& config, std::uint64_t seed) {
  config.validate();
  std::vector<PackageEvent> out;
  out.reserve(orders.size());
  for (const auto& o : orders) {
    auto rng = household_stream(seed, o.household_id, StreamPurpose::Packages,
                                category_key(o.category), o.order_id);
    out.push_back(package_for(o, draw_packages(config.packages_per_order, rng)));
  }
  sort_packages(out);
  return out;
}

SynthesisResult synthesize(const Population& population, const Scenario& scenario,
                           const ChoiceModelParams& params,
                           const std::vector<CategoryConfig>& categories, std::uint64_t weeks,
                           std::uint64_t seed, unsigned workers) {
  population.validate();
  scenario.validate();
  SynthesisResult result;
  const auto base = apply_overrides(params, scenario.overrides);
  for (const auto& cfg : categories) {
    cfg.validate();
    const auto effective = apply_overrides(base, cfg.overrides);
    const auto adopters = sample_adopters(population, cfg, seed);
    const auto orders = synthesize_orders(population, adopters, scenario, effective, cfg.category,
                                          weeks, seed, workers);
    auto packages = orders_to_packages(orders, cfg, seed);
    result.categories.push_back({cfg.category, adopters.size(), orders.size(), packages.size()});
    for (auto& p : packages) result.packages.push_back(std::move(p));
  }
  sort_packages(result.packages);
  return result;
}

void write_packages_csv(std::ostream& out, const std::vector<PackageEvent>& packages,
                        const std::string& header) {
  csv::write_header_comment(out, header);
  out << "day,household_id,category,order_id,order_value_usd,option_id,speed,packages\n";
  for (const auto& p : packages)
    out << p.day << ',' << p.household_id << ',' << to_string(p.category) << ',' << p.order_id
        << ',' << p.order_value << ',' << p.option_id << ',' << to_string(p.speed) << ','
        << p.packages << '\n';
}

void write_synthesis_summary_csv(std::ostream& out, const SynthesisResult& result,
                                 const std::string& header) {
  csv::write_header_comment(out, header);
  out << "category,adopters,orders,package_records,packages\n";
  for (const auto& c : result.categories) {
    std::uint64_t total = 0;
    for (const auto& p : result.packages)
      if (p.category == c.category) total += p.packages;
    out << to_string(c.category) << ',' << c.adopters << ',' << c.orders << ',' << c.packages << ','
        << total << '\n';
  }
}

}  // namespace ecd

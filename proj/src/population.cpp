#include "ecd/population.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <unordered_set>

#include <fmt/format.h>

#include "ecd/choice.hpp"
#include "ecd/csv.hpp"
#include "ecd/error.hpp"
#include "ecd/rng.hpp"

namespace ecd {

void SizeDistribution::validate() const {
  if (masses.empty()) throw ConfigError("size distribution is empty");
  double total = 0.0;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    if (!std::isfinite(masses[i]) || masses[i] < 0.0)
      throw ConfigError(fmt::format("size distribution mass for size {} is invalid", i + 1));
    total += masses[i];
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ConfigError(fmt::format("size distribution masses sum to {}, expected 1", total));
}

double SizeDistribution::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < masses.size(); ++i) m += masses[i] * static_cast<double>(i + 1);
  return m;
}

SyntheticSpec default_population_spec() {
  return {SizeDistribution{{0.28, 0.34, 0.16, 0.14, 0.05, 0.03}}, 933, 7};
}

void Population::validate() const {
  if (households.empty()) throw ConfigError("population is empty");
  std::unordered_set<std::string> ids;
  for (const auto& h : households) {
    if (h.size < 1) throw ConfigError("household '" + h.id + "' has size < 1");
    if (!ids.insert(h.id).second) throw ConfigError("duplicate household id '" + h.id + "'");
  }
}

Population load_population(std::istream& in, const std::string& origin) {
  Population pop;
  pop.source = Population::Source::File;
  pop.provenance = origin;
  std::unordered_set<std::string> ids;
  bool header = false;
  csv::for_each_row(in, [&](long line, const std::vector<std::string>& f) {
    if (!header) {
      if (f.size() != 2 || f[0] != "household_id" || f[1] != "size")
        throw LoadError("expected header 'household_id,size'", line);
      header = true;
      return;
    }
    if (f.size() != 2) throw LoadError("expected 2 fields", line);
    if (f[0].empty()) throw LoadError("empty household_id", line);
    const auto size = csv::parse_int(f[1], line, "size");
    if (size < 1) throw LoadError("household '" + f[0] + "' has size " + f[1] + " (< 1)", line);
    if (!ids.insert(f[0]).second) throw LoadError("duplicate household id '" + f[0] + "'", line);
    pop.households.push_back({f[0], static_cast<int>(size)});
  });
  if (!header) throw LoadError("population file " + origin + " is empty");
  if (pop.households.empty()) throw LoadError("population file " + origin + " has no households");
  return pop;
}

Population load_population_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open population file '" + path + "'");
  return load_population(in, path);
}

Population synthetic_population(const SyntheticSpec& spec) {
  spec.sizes.validate();
  if (spec.count == 0) throw ConfigError("synthetic population count must be positive");
  Population pop;
  pop.source = Population::Source::Synthetic;
  std::string masses;
  for (std::size_t i = 0; i < spec.sizes.masses.size(); ++i)
    masses += fmt::format("{}{}:{}", i ? " " : "", i + 1, spec.sizes.masses[i]);
  pop.provenance = fmt::format("synthetic count={} seed={} masses={}", spec.count, spec.seed, masses);
  RngStream rng(derive_seed(spec.seed, {static_cast<std::uint64_t>(StreamPurpose::Population)}));
  const int width = static_cast<int>(std::to_string(spec.count).size());
  pop.households.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) {
    const auto size = choose_by_draw(spec.sizes.masses, rng.uniform()) + 1;
    pop.households.push_back({fmt::format("h{:0{}}", i + 1, width), static_cast<int>(size)});
  }
  return pop;
}

void write_population(std::ostream& out, const Population& population, const std::string& header) {
  csv::write_header_comment(out, header);
  out << "household_id,size\n";
  for (const auto& h : population.households) out << h.id << ',' << h.size << '\n';
}

}  // namespace ecd

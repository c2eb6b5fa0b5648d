#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ecd/model.hpp"

namespace ecd {

// Probability masses over household sizes 1..masses.size().
struct SizeDistribution {
  std::vector<double> masses;

  void validate() const;
  double mean() const;
};

struct SyntheticSpec {
  SizeDistribution sizes;
  std::size_t count = 0;
  std::uint64_t seed = 0;
};

// 933 households drawn from a fixed urban size profile (mean 2.43 persons).
SyntheticSpec default_population_spec();

struct Population {
  enum class Source { File, Synthetic };

  std::vector<Household> households;
  Source source = Source::File;
  std::string provenance;  // file path, or a description of the synthetic spec

  void validate() const;
  std::size_t size() const { return households.size(); }
};

Population load_population(std::istream& in, const std::string& origin = "<stream>");
Population load_population_file(const std::string& path);
Population synthetic_population(const SyntheticSpec& spec);
void write_population(std::ostream& out, const Population& population,
                      const std::string& header = {});

}  // namespace ecd

#pragma once

// Nelder-Mead direct search inside a box. The simplex lives in unit
// coordinates (each axis scaled to its box width) and trial points are
// clamped to the box.

#include <functional>
#include <span>
#include <vector>

namespace ecd {

struct NelderMeadOptions {
  unsigned max_iterations = 500;
  // Stop once every vertex is within this fraction of the box width of the best one.
  double diameter_tolerance = 1e-6;
  double initial_step = 0.1;
  // Optional early stop, evaluated on the best point (also before iterating).
  std::function<bool(std::span<const double> x, double value)> good_enough;
};

struct NelderMeadResult {
  enum class Status { GoodEnough, SimplexCollapsed, IterationLimit };

  std::vector<double> x;
  double value = 0.0;
  unsigned iterations = 0;
  unsigned evaluations = 0;
  Status status = Status::IterationLimit;
  std::vector<double> best_trace;  // best value after each iteration
};

NelderMeadResult nelder_mead_box(const std::function<double(std::span<const double>)>& f,
                                 std::vector<double> start, const std::vector<double>& lower,
                                 const std::vector<double>& upper,
                                 const NelderMeadOptions& options = {});

}  // namespace ecd

#include "ecd/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ecd/error.hpp"

namespace ecd {

namespace {

struct Vertex {
  std::vector<double> z;
  double value;
};

}  // namespace

NelderMeadResult nelder_mead_box(const std::function<double(std::span<const double>)>& f,
                                 std::vector<double> start, const std::vector<double>& lower,
                                 const std::vector<double>& upper,
                                 const NelderMeadOptions& options) {
  const std::size_t n = start.size();
  if (n == 0) throw ConfigError("nelder_mead_box needs at least one variable");
  if (lower.size() != n || upper.size() != n) throw ConfigError("box bounds do not match start");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i]))
      throw ConfigError("box bound " + std::to_string(i) + " is not a finite interval");
  }

  NelderMeadResult result;
  auto to_x = [&](const std::vector<double>& z) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = lower[i] + z[i] * (upper[i] - lower[i]);
    return x;
  };
  auto eval = [&](std::vector<double>& z) {
    for (double& c : z) c = std::clamp(c, 0.0, 1.0);
    ++result.evaluations;
    const auto x = to_x(z);
    const double v = f(x);
    return std::isfinite(v) ? v : HUGE_VAL;
  };

  std::vector<double> z0(n);
  for (std::size_t i = 0; i < n; ++i) z0[i] = (start[i] - lower[i]) / (upper[i] - lower[i]);
  for (double& c : z0) c = std::clamp(c, 0.0, 1.0);
  std::vector<Vertex> simplex;
  const double f0 = eval(z0);
  simplex.push_back({z0, f0});

  auto finish = [&](NelderMeadResult::Status status) {
    result.status = status;
    result.x = to_x(simplex.front().z);
    result.value = simplex.front().value;
    return result;
  };
  auto good = [&](const Vertex& v) {
    return options.good_enough && options.good_enough(to_x(v.z), v.value);
  };

  if (good(simplex.front())) return finish(NelderMeadResult::Status::GoodEnough);

  for (std::size_t i = 0; i < n; ++i) {
    auto z = simplex.front().z;
    z[i] += z[i] + options.initial_step <= 1.0 ? options.initial_step : -options.initial_step;
    const double v = eval(z);
    simplex.push_back({std::move(z), v});
  }

  constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;
  auto order = [&] {
    std::stable_sort(simplex.begin(), simplex.end(),
                     [](const Vertex& a, const Vertex& b) { return a.value < b.value; });
  };
  auto along = [&](const std::vector<double>& c, const std::vector<double>& w, double t) {
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = c[i] + t * (c[i] - w[i]);
    return z;
  };

  order();
  while (result.iterations < options.max_iterations) {
    ++result.iterations;
    std::vector<double> centroid(n, 0.0);
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[v].z[i] / static_cast<double>(n);
    Vertex& worst = simplex.back();

    auto zr = along(centroid, worst.z, kReflect);
    const double fr = eval(zr);
    if (fr < simplex.front().value) {
      auto ze = along(centroid, worst.z, kExpand);
      const double fe = eval(ze);
      worst = fe < fr ? Vertex{ze, fe} : Vertex{zr, fr};
    } else if (fr < simplex[n - 1].value) {
      worst = {zr, fr};
    } else {
      const bool outside = fr < worst.value;
      auto zc = along(centroid, worst.z, outside ? kContract : -kContract);
      const double fc = eval(zc);
      if (fc < std::min(fr, worst.value)) {
        worst = {zc, fc};
      } else {
        for (std::size_t v = 1; v <= n; ++v) {
          for (std::size_t i = 0; i < n; ++i)
            simplex[v].z[i] = simplex[0].z[i] + kShrink * (simplex[v].z[i] - simplex[0].z[i]);
          simplex[v].value = eval(simplex[v].z);
        }
      }
    }
    order();
    result.best_trace.push_back(simplex.front().value);

    if (good(simplex.front())) return finish(NelderMeadResult::Status::GoodEnough);
    double diameter = 0.0;
    for (std::size_t v = 1; v <= n; ++v)
      for (std::size_t i = 0; i < n; ++i)
        diameter = std::max(diameter, std::abs(simplex[v].z[i] - simplex[0].z[i]));
    if (diameter < options.diameter_tolerance)
      return finish(NelderMeadResult::Status::SimplexCollapsed);
  }
  return finish(NelderMeadResult::Status::IterationLimit);
}

}  // namespace ecd

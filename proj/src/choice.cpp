#include "ecd/choice.hpp"

#include <algorithm>
#include <cmath>

#include "ecd/error.hpp"
#include "ecd/rng.hpp"

namespace ecd {

namespace {

double checked_max(std::span<const double> u) {
  if (u.empty()) throw InvalidInput("utility vector is empty");
  double m = u[0];
  for (double v : u) {
    if (!std::isfinite(v)) throw InvalidInput("utility vector has a non-finite entry");
    m = std::max(m, v);
  }
  return m;
}

}  // namespace

double logsum(std::span<const double> utilities) {
  const double m = checked_max(utilities);
  double acc = 0.0;
  for (double v : utilities) acc += std::exp(v - m);
  return m + std::log(acc);
}

double probabilities_into(std::span<const double> utilities, std::span<double> out) {
  if (out.size() != utilities.size()) throw InvalidInput("output size does not match utilities");
  const double m = checked_max(utilities);
  double acc = 0.0;
  for (std::size_t i = 0; i < utilities.size(); ++i) {
    out[i] = std::exp(utilities[i] - m);
    acc += out[i];
  }
  for (double& p : out) p /= acc;
  return m + std::log(acc);
}

ChoiceDistribution probabilities(std::span<const double> utilities) {
  ChoiceDistribution p(utilities.size());
  probabilities_into(utilities, p);
  return p;
}

std::size_t choose_by_draw(std::span<const double> probs, double draw) {
  if (probs.empty()) throw InvalidInput("distribution is empty");
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) last_positive = i;
    cum += probs[i];
    if (draw < cum) return i;
  }
  return last_positive;
}

std::size_t sample_choice(std::span<const double> utilities, double draw) {
  const auto p = probabilities(utilities);
  return choose_by_draw(p, draw);
}

std::size_t sample_choice(std::span<const double> utilities, RngStream& rng) {
  return sample_choice(utilities, rng.uniform());
}

double expectation(std::span<const double> utilities, std::span<const double> values) {
  if (values.size() != utilities.size())
    throw InvalidInput("expectation: values and utilities differ in length");
  const auto p = probabilities(utilities);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += p[i] * values[i];
  return acc;
}

}  // namespace ecd

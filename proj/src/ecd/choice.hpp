#pragma once

// Multinomial-logit kernel over finite, ordered alternative sets.
//
// Utilities are passed as spans; alternative identity is the position in the
// span, which is preserved through probabilities and sampling.

#include <cstddef>
#include <span>
#include <vector>

namespace ecd {

class RngStream;

using ChoiceDistribution = std::vector<double>;

// ln sum exp(u_i) via the max-shift form. Throws InvalidInput on empty or
// non-finite input.
double logsum(std::span<const double> utilities);

ChoiceDistribution probabilities(std::span<const double> utilities);

// Same as above, writes into `out` (size must match) and returns the logsum.
double probabilities_into(std::span<const double> utilities, std::span<double> out);

// Inverse-CDF lookup of a uniform draw in [0,1) against a distribution,
// scanning alternatives in order. Falls back to the last alternative with
// positive mass when rounding leaves the cumulative sum below the draw.
std::size_t choose_by_draw(std::span<const double> probs, double draw);

std::size_t sample_choice(std::span<const double> utilities, double draw);
std::size_t sample_choice(std::span<const double> utilities, RngStream& rng);

// sum_i p_i * f_i with p = probabilities(utilities).
double expectation(std::span<const double> utilities, std::span<const double> values);

}  // namespace ecd

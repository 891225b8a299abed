#pragma once

#include "vcrown/solver.hpp"

#include <span>
#include <vector>

namespace vcrown {

/// Per-coordinate bounds on softmax(s) over a score box.
struct SoftmaxOutputBox {
    std::vector<double> lower;
    std::vector<double> upper;
};

/// Classical interval softmax: coordinate j is smallest when its own score
/// is low and every other score is high, and largest in the opposite corner.
SoftmaxOutputBox softmax_output_box(const ScoreBox& box);

/// Contracts the output box with c coordinate by coordinate. Sound, but
/// ignores that softmax outputs sum to one.
double baseline_directional_min(std::span<const double> c, const ScoreBox& box);

} // namespace vcrown

#pragma once

#include "vcrown/bounds.hpp"
#include "vcrown/model.hpp"

#include <cstddef>

namespace vcrown {

/// Affine lower bound on one target margin in terms of the post-attention
/// state: m_t(x) >= beta + sum_i gamma.row(i)^T H+_i(x) over the input box.
struct SuffixAffineBound {
    std::size_t target = 0;
    double beta = 0.0;
    Matrix gamma; // tokens x model_dim
};

/// Bounds on the hidden pre-activations of an Mlp1 suffix.
struct PreActBox {
    std::vector<double> lower;
    std::vector<double> upper;
};

/// Exact margin of a linear classifier over the flattened state; the
/// inequality holds with equality.
SuffixAffineBound linear_suffix_bound(const LinearLayer& classifier, std::size_t tokens,
                                      std::size_t y, std::size_t t);

/// Same, reading the classifier from `model`. Throws InvalidInputError when
/// the model's suffix is not linear.
SuffixAffineBound linear_suffix_bound(const AttentionModel& model, std::size_t y, std::size_t t);

/// Single backward pass through affine -> ReLU -> affine.
///
/// Each hidden neuron with pre-activation bounds [l, u] is replaced by a
/// line: zero when u <= 0, identity when l >= 0, and otherwise the chord
/// u (z - l) / (u - l) when the margin weight on the neuron is negative, or
/// alpha z with alpha = (u >= -l ? 1 : 0) when it is non-negative.
SuffixAffineBound relu_suffix_bound(const LinearLayer& hidden, const LinearLayer& output,
                                    const PreActBox& preact, std::size_t tokens, std::size_t y,
                                    std::size_t t);

SuffixAffineBound relu_suffix_bound(const AttentionModel& model, const PreActBox& preact,
                                    std::size_t y, std::size_t t);

/// Elementwise bounds on H+ over the input box. Each attention output
/// coordinate is bounded by solving the score-box problem with the value
/// bounds of that coordinate as the direction.
IntervalMatrix post_attention_bounds(const AttentionModel& model, const InputBox& box);

/// Interval propagation to the Mlp1 hidden pre-activations.
PreActBox interval_forward(const AttentionModel& model, const InputBox& box);

/// Dispatches on the model's suffix kind.
SuffixAffineBound suffix_bound(const AttentionModel& model, const InputBox& box, std::size_t y,
                               std::size_t t);

} // namespace vcrown

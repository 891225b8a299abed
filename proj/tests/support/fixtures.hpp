#pragma once

#include "vcrown/model.hpp"
#include "vcrown/rng.hpp"

#include <vector>

namespace fixtures {

/// Independent loop-by-loop forward pass used to cross-check vcrown::forward.
std::vector<double> reference_forward(const vcrown::AttentionModel& model,
                                      const std::vector<double>& x);

/// Two-class model on a 2x2 single-channel image with one token, d = 2,
/// zero attention and a residual path. Class prototypes are orthogonal:
/// logit_0 - logit_1 = x[0] - x[1].
vcrown::AttentionModel prototype_model();

/// Random tiny model: 2-4 tokens, 1-2 heads, d <= 8. Even indices get a
/// linear suffix, odd indices an mlp1 suffix.
vcrown::AttentionModel tiny_model(std::uint64_t seed, std::size_t index);

/// Uniform image in [0, 1].
std::vector<double> random_image(std::size_t n, vcrown::Rng& rng);

} // namespace fixtures

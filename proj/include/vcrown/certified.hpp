#pragma once

#include "vcrown/solver.hpp"

#include <span>

namespace vcrown {

struct CertifiedBound {
    /// Proof-grade lower bound on min_{s in box} c^T softmax(s).
    double lower = 0.0;
    /// directional_min value for the same instance.
    double float_value = 0.0;
    /// Some enclosure overflowed; `lower` must not be used as a certificate.
    bool saturated = false;
};

/// Threshold sweep evaluated in outward-rounded interval arithmetic.
///
/// The shifted exponentials, every threshold numerator and denominator, and
/// each quotient are enclosed; the result is the minimum lower endpoint over
/// all K+1 thresholds. A threshold whose denominator enclosure reaches zero
/// (all shifted exponentials underflowed) falls back to [min c, max c],
/// which always contains the true ratio.
CertifiedBound certified_directional_min(std::span<const double> c, const ScoreBox& box);

} // namespace vcrown

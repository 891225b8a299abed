#pragma once

#include <span>
#include <stdexcept>

namespace vcrown {

/// Closed real interval [lo, hi] with outward-rounded endpoints.
///
/// Every operation returns an enclosure of the exact real result set. A
/// result whose endpoint overflowed is clamped to the largest finite value
/// and marked `saturated`; saturation propagates through all operations and
/// a saturated enclosure must never be used as a certificate.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool saturated = false;

    static Interval point(double v);
    static Interval make(double lo, double hi);

    double width() const { return hi - lo; }
    bool contains(double v) const { return lo <= v && v <= hi; }
};

/// Raised when an operand violates a documented precondition
/// (non-finite input, divisor interval not strictly positive).
class IntervalDomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

Interval iv_add(const Interval& a, const Interval& b);
Interval iv_sub(const Interval& a, const Interval& b);
Interval iv_mul(const Interval& a, const Interval& b);

/// Requires b.lo > 0.
Interval iv_div(const Interval& a, const Interval& b);

/// Enclosure of {e^t : t in x}, padded two ulps beyond the platform exp.
Interval iv_exp(const Interval& x);

/// Enclosure of the minimum of the enclosed reals. Requires a non-empty list.
Interval iv_min(std::span<const Interval> xs);

} // namespace vcrown

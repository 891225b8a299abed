#include "vcrown/interval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vcrown {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMax = std::numeric_limits<double>::max();

double down(double v, int ulps = 1)
{
    for (int k = 0; k < ulps; ++k)
        v = std::nextafter(v, -kInf);
    return v;
}

double up(double v, int ulps = 1)
{
    for (int k = 0; k < ulps; ++k)
        v = std::nextafter(v, kInf);
    return v;
}

void require_finite(const Interval& x, const char* op)
{
    if (!std::isfinite(x.lo) || !std::isfinite(x.hi) || x.lo > x.hi)
        throw IntervalDomainError(std::string(op) + ": operand is not a finite interval");
}

// Clamps overflowed endpoints to the finite range and records saturation.
Interval finish(double lo, double hi, bool saturated)
{
    if (std::isnan(lo) || std::isnan(hi))
        return {-kMax, kMax, true};
    if (lo == -kInf || lo == kInf) {
        saturated = true;
        lo = lo < 0 ? -kMax : kMax;
    }
    if (hi == kInf || hi == -kInf) {
        saturated = true;
        hi = hi > 0 ? kMax : -kMax;
    }
    return {lo, hi, saturated};
}

} // namespace

Interval Interval::point(double v)
{
    if (!std::isfinite(v))
        throw IntervalDomainError("Interval::point: non-finite value");
    return {v, v, false};
}

Interval Interval::make(double lo, double hi)
{
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi)
        throw IntervalDomainError("Interval::make: require finite lo <= hi");
    return {lo, hi, false};
}

Interval iv_add(const Interval& a, const Interval& b)
{
    require_finite(a, "iv_add");
    require_finite(b, "iv_add");
    return finish(down(a.lo + b.lo), up(a.hi + b.hi), a.saturated || b.saturated);
}

Interval iv_sub(const Interval& a, const Interval& b)
{
    require_finite(a, "iv_sub");
    require_finite(b, "iv_sub");
    return finish(down(a.lo - b.hi), up(a.hi - b.lo), a.saturated || b.saturated);
}

Interval iv_mul(const Interval& a, const Interval& b)
{
    require_finite(a, "iv_mul");
    require_finite(b, "iv_mul");
    const double p[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    const auto [mn, mx] = std::minmax_element(std::begin(p), std::end(p));
    return finish(down(*mn), up(*mx), a.saturated || b.saturated);
}

Interval iv_div(const Interval& a, const Interval& b)
{
    require_finite(a, "iv_div");
    require_finite(b, "iv_div");
    if (!(b.lo > 0.0))
        throw IntervalDomainError("iv_div: divisor interval must be strictly positive");
    const double q[4] = {a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi};
    const auto [mn, mx] = std::minmax_element(std::begin(q), std::end(q));
    return finish(down(*mn), up(*mx), a.saturated || b.saturated);
}

Interval iv_exp(const Interval& x)
{
    require_finite(x, "iv_exp");
    // exp > 0 everywhere, so the lower endpoint never needs to go negative.
    const double lo = std::max(0.0, down(std::exp(x.lo), 2));
    const double hi_raw = std::exp(x.hi);
    if (!std::isfinite(hi_raw))
        return {std::min(lo, kMax), kMax, true};
    const double hi = up(hi_raw, 2);
    return finish(lo, hi, x.saturated);
}

Interval iv_min(std::span<const Interval> xs)
{
    if (xs.empty())
        throw IntervalDomainError("iv_min: empty list");
    Interval out = xs.front();
    for (const auto& x : xs.subspan(1)) {
        out.lo = std::min(out.lo, x.lo);
        out.hi = std::min(out.hi, x.hi);
        out.saturated = out.saturated || x.saturated;
    }
    return out;
}

} // namespace vcrown

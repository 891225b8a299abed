#include "vcrown/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vcrown {

namespace {

// Sum over r != j, built from prefix and suffix sums so no cancellation occurs.
std::vector<double> sums_excluding_self(const std::vector<double>& v)
{
    const std::size_t k = v.size();
    std::vector<double> prefix(k + 1, 0.0), suffix(k + 1, 0.0), out(k);
    for (std::size_t j = 0; j < k; ++j)
        prefix[j + 1] = prefix[j] + v[j];
    for (std::size_t j = k; j-- > 0;)
        suffix[j] = suffix[j + 1] + v[j];
    for (std::size_t j = 0; j < k; ++j)
        out[j] = prefix[j] + suffix[j + 1];
    return out;
}

} // namespace

SoftmaxOutputBox softmax_output_box(const ScoreBox& box)
{
    const std::size_t k = box.size();
    const auto upper = box.upper();
    const double shift = *std::max_element(upper.begin(), upper.end());

    std::vector<double> lo_exp(k), hi_exp(k);
    for (std::size_t j = 0; j < k; ++j) {
        lo_exp[j] = std::exp(box.lower(j) - shift);
        hi_exp[j] = std::exp(box.upper(j) - shift);
    }
    const auto others_hi = sums_excluding_self(hi_exp);
    const auto others_lo = sums_excluding_self(lo_exp);

    SoftmaxOutputBox out{std::vector<double>(k, 1.0), std::vector<double>(k, 1.0)};
    if (k == 1)
        return out;
    for (std::size_t j = 0; j < k; ++j) {
        // A zero denominator means every term underflowed; fall back to [0, 1].
        const double den_lo = lo_exp[j] + others_hi[j];
        const double den_hi = hi_exp[j] + others_lo[j];
        out.lower[j] = den_lo > 0.0 ? std::clamp(lo_exp[j] / den_lo, 0.0, 1.0) : 0.0;
        out.upper[j] = den_hi > 0.0 ? std::clamp(hi_exp[j] / den_hi, 0.0, 1.0) : 1.0;
        out.upper[j] = std::max(out.upper[j], out.lower[j]);
    }
    return out;
}

double baseline_directional_min(std::span<const double> c, const ScoreBox& box)
{
    if (c.size() != box.size())
        throw InvalidInputError("baseline_directional_min: direction has " +
                                std::to_string(c.size()) + " entries but score box has " +
                                std::to_string(box.size()));
    const SoftmaxOutputBox weights = softmax_output_box(box);
    double total = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
        if (!std::isfinite(c[j]))
            throw InvalidInputError("direction entry " + std::to_string(j) + " is not finite");
        total += c[j] >= 0.0 ? c[j] * weights.lower[j] : c[j] * weights.upper[j];
    }
    return total;
}

} // namespace vcrown

#include "vcrown/solver.hpp"

#include "vcrown/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

namespace vcrown {

namespace {

void check_direction(std::span<const double> c, const ScoreBox& box)
{
    if (c.size() != box.size())
        throw InvalidInputError("direction has " + std::to_string(c.size()) +
                                " entries but score box has " + std::to_string(box.size()));
    for (std::size_t j = 0; j < c.size(); ++j) {
        if (!std::isfinite(c[j]))
            throw InvalidInputError("direction entry " + std::to_string(j) + " is not finite");
    }
}

std::vector<std::size_t> order_by_coefficient(std::span<const double> c)
{
    std::vector<std::size_t> order(c.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return c[a] < c[b]; });
    return order;
}

} // namespace

ScoreBox::ScoreBox(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper))
{
    if (lower_.empty())
        throw InvalidInputError("score box must have at least one coordinate");
    if (lower_.size() != upper_.size())
        throw InvalidInputError("score box lower/upper lengths differ");
    for (std::size_t j = 0; j < lower_.size(); ++j) {
        if (!std::isfinite(lower_[j]) || !std::isfinite(upper_[j]))
            throw InvalidInputError("score box coordinate " + std::to_string(j) + " is not finite");
        if (lower_[j] > upper_[j])
            throw InvalidInputError("score box coordinate " + std::to_string(j) +
                                    " has lower > upper");
    }
}

ScoreBox ScoreBox::point(std::vector<double> s)
{
    std::vector<double> copy = s;
    return ScoreBox(std::move(s), std::move(copy));
}

bool ScoreBox::contains(std::span<const double> s) const
{
    if (s.size() != size())
        return false;
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (s[j] < lower_[j] || s[j] > upper_[j])
            return false;
    }
    return true;
}

double softmax_objective(std::span<const double> c, std::span<const double> s)
{
    if (c.size() != s.size() || c.empty())
        throw InvalidInputError("softmax_objective: length mismatch");
    const double shift = *std::max_element(s.begin(), s.end());
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
        const double y = std::exp(s[j] - shift);
        num += c[j] * y;
        den += y;
    }
    const double value = num / den;
    // Rounding may push a convex combination a hair outside its hull.
    const auto [cmin, cmax] = std::minmax_element(c.begin(), c.end());
    return std::clamp(value, *cmin, *cmax);
}

ThresholdResult directional_min(std::span<const double> c, const ScoreBox& box)
{
    check_direction(c, box);
    const std::size_t k = c.size();
    const auto order = order_by_coefficient(c);
    const auto upper = box.upper();
    const double shift = *std::max_element(upper.begin(), upper.end());

    // prefix_*[m]: sums over the m cheapest coordinates at their upper score.
    // suffix_*[m]: sums over the remaining coordinates at their lower score.
    std::vector<double> prefix_mass(k + 1, 0.0), prefix_weighted(k + 1, 0.0);
    std::vector<double> suffix_mass(k + 1, 0.0), suffix_weighted(k + 1, 0.0);
    for (std::size_t m = 0; m < k; ++m) {
        const std::size_t j = order[m];
        const double u = std::exp(box.upper(j) - shift);
        prefix_mass[m + 1] = prefix_mass[m] + u;
        prefix_weighted[m + 1] = prefix_weighted[m] + c[j] * u;
    }
    for (std::size_t m = k; m-- > 0;) {
        const std::size_t j = order[m];
        const double l = std::exp(box.lower(j) - shift);
        suffix_mass[m] = suffix_mass[m + 1] + l;
        suffix_weighted[m] = suffix_weighted[m + 1] + c[j] * l;
    }

    std::size_t best = 0;
    double best_tau = 0.0;
    for (std::size_t m = 0; m <= k; ++m) {
        const double tau = (prefix_weighted[m] + suffix_weighted[m]) /
                           (prefix_mass[m] + suffix_mass[m]);
        if (m == 0 || tau < best_tau) {
            best_tau = tau;
            best = m;
        }
    }

    ThresholdResult result;
    result.threshold = best;
    result.sense = Sense::Min;
    result.vertex.resize(k);
    for (std::size_t m = 0; m < k; ++m) {
        const std::size_t j = order[m];
        result.vertex[j] = m < best ? box.upper(j) : box.lower(j);
    }
    result.value = softmax_objective(c, result.vertex);
    return result;
}

ThresholdResult directional_max(std::span<const double> c, const ScoreBox& box)
{
    check_direction(c, box);
    std::vector<double> negated(c.size());
    std::transform(c.begin(), c.end(), negated.begin(), [](double v) { return -v; });
    ThresholdResult result = directional_min(negated, box);
    result.value = -result.value;
    result.sense = Sense::Max;
    return result;
}

ThresholdResult exhaustive_vertex_min(std::span<const double> c, const ScoreBox& box)
{
    check_direction(c, box);
    const std::size_t k = c.size();
    if (k > kExhaustiveMaxK)
        throw InvalidInputError("exhaustive_vertex_min: K=" + std::to_string(k) +
                                " exceeds limit " + std::to_string(kExhaustiveMaxK));

    // Bit (k-1-j) of the pattern selects the upper endpoint of coordinate j,
    // so increasing patterns enumerate lower/upper strings lexicographically.
    // Exponentials are shifted by max_j u_j and computed once per endpoint.
    const double shift = *std::max_element(box.upper().begin(), box.upper().end());
    std::vector<double> el(k), eu(k);
    for (std::size_t j = 0; j < k; ++j) {
        el[j] = std::exp(box.lower(j) - shift);
        eu[j] = std::exp(box.upper(j) - shift);
    }

    const std::uint64_t count = std::uint64_t{1} << k;
    std::vector<double> vertex(k);
    ThresholdResult best;
    best.sense = Sense::Min;
    bool found = false;
    for (std::uint64_t pattern = 0; pattern < count; ++pattern) {
        bool duplicate = false;
        std::size_t uppers = 0;
        double num = 0.0, den = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const bool take_upper = (pattern >> (k - 1 - j)) & 1U;
            if (take_upper && box.lower(j) == box.upper(j)) {
                duplicate = true;
                break;
            }
            vertex[j] = take_upper ? box.upper(j) : box.lower(j);
            const double e = take_upper ? eu[j] : el[j];
            num += c[j] * e;
            den += e;
            uppers += take_upper ? 1 : 0;
        }
        if (duplicate)
            continue;
        // Tiny denominators lose precision to underflow; evaluate directly.
        const double value = den > 1e-200 ? num / den : softmax_objective(c, vertex);
        if (!found || value < best.value) {
            found = true;
            best.value = value;
            best.vertex = vertex;
            best.threshold = uppers;
        }
    }
    best.value = softmax_objective(c, best.vertex);
    return best;
}

std::vector<ThresholdResult> directional_min_batch(std::span<const RowProblem> rows,
                                                   unsigned threads)
{
    std::vector<ThresholdResult> out(rows.size());
    parallel_for(rows.size(), threads, [&](std::size_t i) {
        if (rows[i].box == nullptr)
            throw InvalidInputError("directional_min_batch: row without a score box");
        out[i] = directional_min(rows[i].c, *rows[i].box);
    });
    return out;
}

} // namespace vcrown

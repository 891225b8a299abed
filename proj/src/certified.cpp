#include "vcrown/certified.hpp"

#include "vcrown/interval.hpp"

#include <algorithm>
#include <numeric>

namespace vcrown {

CertifiedBound certified_directional_min(std::span<const double> c, const ScoreBox& box)
{
    const ThresholdResult fast = directional_min(c, box); // validates inputs
    const std::size_t k = c.size();

    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return c[a] < c[b]; });

    const auto upper = box.upper();
    const Interval shift = Interval::point(*std::max_element(upper.begin(), upper.end()));
    const auto [cmin, cmax] = std::minmax_element(c.begin(), c.end());

    std::vector<Interval> prefix_mass(k + 1, Interval::point(0.0));
    std::vector<Interval> prefix_weighted(k + 1, Interval::point(0.0));
    std::vector<Interval> suffix_mass(k + 1, Interval::point(0.0));
    std::vector<Interval> suffix_weighted(k + 1, Interval::point(0.0));
    for (std::size_t m = 0; m < k; ++m) {
        const std::size_t j = order[m];
        const Interval u = iv_exp(iv_sub(Interval::point(box.upper(j)), shift));
        prefix_mass[m + 1] = iv_add(prefix_mass[m], u);
        prefix_weighted[m + 1] = iv_add(prefix_weighted[m], iv_mul(Interval::point(c[j]), u));
    }
    for (std::size_t m = k; m-- > 0;) {
        const std::size_t j = order[m];
        const Interval l = iv_exp(iv_sub(Interval::point(box.lower(j)), shift));
        suffix_mass[m] = iv_add(suffix_mass[m + 1], l);
        suffix_weighted[m] = iv_add(suffix_weighted[m + 1], iv_mul(Interval::point(c[j]), l));
    }

    std::vector<Interval> taus;
    taus.reserve(k + 1);
    for (std::size_t m = 0; m <= k; ++m) {
        const Interval numerator = iv_add(prefix_weighted[m], suffix_weighted[m]);
        const Interval denominator = iv_add(prefix_mass[m], suffix_mass[m]);
        if (denominator.lo > 0.0) {
            taus.push_back(iv_div(numerator, denominator));
        } else {
            Interval hull = Interval::make(*cmin, *cmax);
            hull.saturated = numerator.saturated || denominator.saturated;
            taus.push_back(hull);
        }
    }

    const Interval best = iv_min(taus);
    return {best.lo, fast.value, best.saturated};
}

} // namespace vcrown

#include "vcrown/harness.hpp"

#include "vcrown/baseline.hpp"
#include "vcrown/certified.hpp"
#include "vcrown/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>

namespace vcrown {

Instance synth_instance(std::size_t k, std::uint64_t seed, std::uint64_t trial,
                        const GeneratorConfig& config)
{
    if (k == 0)
        throw InvalidInputError("synth_instance: K must be at least 1");
    Rng rng = Rng::stream(seed, k, trial);
    std::vector<double> center(k), c(k);
    for (auto& v : center)
        v = rng.normal();
    for (auto& v : c)
        v = config.coeff_scale * rng.normal();
    const double half = 0.5 * config.width_scale;
    std::vector<double> lower(k), upper(k);
    for (std::size_t j = 0; j < k; ++j) {
        lower[j] = center[j] - half;
        upper[j] = center[j] + half;
    }
    return {std::move(c), std::move(center), ScoreBox(std::move(lower), std::move(upper))};
}

double attack_min_objective(std::span<const double> c, const ScoreBox& box, std::size_t budget,
                            Rng& rng)
{
    if (budget == 0)
        throw InvalidInputError("attack budget must be at least 1");
    const std::size_t k = box.size();
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> s(k);

    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return c[a] < c[b]; });
    for (int flip = 0; flip < 2; ++flip) {
        for (std::size_t m = 0; m <= k; ++m) {
            for (std::size_t pos = 0; pos < k; ++pos) {
                const std::size_t j = flip ? order[k - 1 - pos] : order[pos];
                s[j] = pos < m ? box.upper(j) : box.lower(j);
            }
            best = std::min(best, softmax_objective(c, s));
        }
    }

    std::vector<double> incumbent(k);
    double incumbent_value = std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < budget; ++n) {
        for (std::size_t j = 0; j < k; ++j)
            s[j] = rng.uniform(box.lower(j), box.upper(j));
        const double v = softmax_objective(c, s);
        if (v < incumbent_value) {
            incumbent_value = v;
            incumbent = s;
        }
    }

    // Along one coordinate the objective is monotone, so an endpoint is optimal.
    for (int sweep = 0; sweep < 8; ++sweep) {
        bool improved = false;
        for (std::size_t j = 0; j < k; ++j) {
            for (double candidate : {box.lower(j), box.upper(j)}) {
                if (candidate == incumbent[j])
                    continue;
                const double previous = incumbent[j];
                incumbent[j] = candidate;
                const double v = softmax_objective(c, incumbent);
                if (v < incumbent_value) {
                    incumbent_value = v;
                    improved = true;
                } else {
                    incumbent[j] = previous;
                }
            }
        }
        if (!improved)
            break;
    }
    return std::min(best, incumbent_value);
}

double attack_min_margin(const AttentionModel& model, const InputBox& box, std::size_t label,
                         std::size_t target, std::size_t budget, Rng& rng)
{
    if (budget == 0)
        throw InvalidInputError("attack budget must be at least 1");
    const std::size_t n = box.size();
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k)
        x[k] = 0.5 * (box.lower[k] + box.upper[k]);

    std::vector<double> incumbent = x;
    double incumbent_value = margin(model, x, label, target);
    auto consider = [&](const std::vector<double>& candidate) {
        const double v = margin(model, candidate, label, target);
        if (v < incumbent_value) {
            incumbent_value = v;
            incumbent = candidate;
        }
    };

    for (std::size_t s = 0; s < budget; ++s) {
        for (std::size_t k = 0; k < n; ++k)
            x[k] = rng.uniform(box.lower[k], box.upper[k]);
        consider(x);
        for (std::size_t k = 0; k < n; ++k)
            x[k] = rng.uniform() < 0.5 ? box.lower[k] : box.upper[k];
        consider(x);
    }

    for (int sweep = 0; sweep < 3; ++sweep) {
        bool improved = false;
        for (std::size_t k = 0; k < n; ++k) {
            if (box.lower[k] == box.upper[k])
                continue;
            for (double candidate : {box.lower[k], box.upper[k]}) {
                if (candidate == incumbent[k])
                    continue;
                x = incumbent;
                x[k] = candidate;
                const double v = margin(model, x, label, target);
                if (v < incumbent_value) {
                    incumbent_value = v;
                    incumbent = x;
                    improved = true;
                }
            }
        }
        if (!improved)
            break;
    }
    return incumbent_value;
}

std::vector<TrialRecord> run_sweep(const SweepConfig& config)
{
    if (config.trials == 0)
        throw InvalidInputError("sweep needs at least one trial per K");
    using clock = std::chrono::steady_clock;
    auto micros = [](clock::duration d) {
        return std::chrono::duration<double, std::micro>(d).count();
    };

    const std::size_t per_k = config.trials;
    const std::size_t methods = kSweepMethods.size();
    std::vector<TrialRecord> records(config.ks.size() * per_k * methods);
    parallel_for(config.ks.size() * per_k, config.threads, [&](std::size_t n) {
        const std::size_t k = config.ks[n / per_k];
        const std::size_t trial = n % per_k;
        const Instance inst = synth_instance(k, config.seed, trial, config.generator);
        Rng attack_rng = Rng::stream(config.seed ^ 0xA77AC4ULL, k, trial);
        const double attack = attack_min_objective(inst.c, inst.box, config.attack_budget, attack_rng);

        auto t0 = clock::now();
        const double vertex = directional_min(inst.c, inst.box).value;
        auto t1 = clock::now();
        const double baseline = baseline_directional_min(inst.c, inst.box);
        auto t2 = clock::now();
        const double certified = certified_directional_min(inst.c, inst.box).lower;
        auto t3 = clock::now();

        const double lowers[] = {vertex, baseline, certified};
        const double times[] = {micros(t1 - t0), micros(t2 - t1), micros(t3 - t2)};
        for (std::size_t m = 0; m < methods; ++m) {
            TrialRecord& rec = records[n * methods + m];
            rec.k = k;
            rec.trial = trial;
            rec.method = kSweepMethods[m];
            rec.lower = lowers[m];
            rec.attack = attack;
            rec.gap = attack - lowers[m];
            rec.time_us = times[m];
        }
    });
    return records;
}

std::vector<AggregateRow> aggregate(const std::vector<TrialRecord>& records)
{
    std::vector<AggregateRow> rows;
    std::map<std::pair<std::size_t, std::string>, std::size_t> index;
    std::vector<std::size_t> counts;
    for (const auto& rec : records) {
        auto [it, inserted] = index.try_emplace({rec.k, rec.method}, rows.size());
        if (inserted) {
            rows.push_back({rec.k, rec.method, 0.0, 0.0, 0.0, 0.0});
            counts.push_back(0);
        }
        AggregateRow& row = rows[it->second];
        ++counts[it->second];
        row.cert_rate += rec.lower > 0.0 ? 1.0 : 0.0;
        row.mean_lower += rec.lower;
        row.mean_gap += rec.gap;
        row.total_time_s += rec.time_us * 1e-6;
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const double n = static_cast<double>(counts[r]);
        rows[r].cert_rate /= n;
        rows[r].mean_lower /= n;
        rows[r].mean_gap /= n;
    }
    return rows;
}

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records)
{
    out << "K,trial,method,lower,attack,gap,time_us\n";
    out << std::setprecision(17);
    for (const auto& r : records) {
        out << r.k << ',' << r.trial << ',' << r.method << ',' << r.lower << ',' << r.attack << ','
            << r.gap << ',' << std::fixed << std::setprecision(3) << r.time_us
            << std::defaultfloat << std::setprecision(17) << '\n';
    }
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows)
{
    out << "K,method,cert_rate,mean_lower,mean_gap,total_time_s\n";
    out << std::setprecision(10);
    for (const auto& r : rows) {
        out << r.k << ',' << r.method << ',' << r.cert_rate << ',' << r.mean_lower << ','
            << r.mean_gap << ',' << r.total_time_s << '\n';
    }
}

} // namespace vcrown

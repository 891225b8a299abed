#include "vcrown/selfcheck.hpp"

#include "vcrown/attention.hpp"
#include "vcrown/baseline.hpp"
#include "vcrown/certified.hpp"
#include "vcrown/harness.hpp"
#include "vcrown/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace vcrown {

namespace {

using Check = std::function<bool(std::uint64_t trial)>;

SuiteResult run_suite(std::string name, std::size_t trials, unsigned threads, const Check& check)
{
    std::vector<char> ok(trials, 1);
    parallel_for(trials, threads, [&](std::size_t t) { ok[t] = check(t) ? 1 : 0; });
    SuiteResult result;
    result.name = std::move(name);
    result.checked = trials;
    for (std::size_t t = 0; t < trials; ++t) {
        if (!ok[t]) {
            ++result.violations;
            if (!result.first_failure)
                result.first_failure = t;
        }
    }
    return result;
}

std::vector<double> sample_in(const ScoreBox& box, Rng& rng)
{
    std::vector<double> s(box.size());
    for (std::size_t j = 0; j < s.size(); ++j)
        s[j] = rng.uniform(box.lower(j), box.upper(j));
    return s;
}

} // namespace

std::vector<SuiteResult> run_selfcheck(const SelfcheckOptions& options)
{
    const std::size_t n = std::max<std::size_t>(options.trials, 1);
    const std::uint64_t seed = options.seed;
    const bool fault = options.inject_fault;

    auto solve = [fault](std::span<const double> c, const ScoreBox& box) {
        if (!fault)
            return directional_min(c, box);
        std::vector<double> flipped(c.begin(), c.end());
        for (double& v : flipped)
            v = -v;
        return directional_min(flipped, box);
    };
    auto instance = [seed](std::size_t k, std::uint64_t trial) {
        return synth_instance(k, seed, trial, {1.0 + 0.25 * static_cast<double>(trial % 8), 1.0});
    };

    std::vector<SuiteResult> out;

    out.push_back(run_suite("oracle_equivalence", n, options.threads, [&](std::uint64_t t) {
        const Instance inst = instance(1 + t % 12, t);
        const double fast = solve(inst.c, inst.box).value;
        return std::abs(fast - exhaustive_vertex_min(inst.c, inst.box).value) <= 1e-6;
    }));

    out.push_back(run_suite("soundness_sampling", n, options.threads, [&](std::uint64_t t) {
        const Instance inst = instance(2 + t % 15, t);
        const double fast = solve(inst.c, inst.box).value;
        const double cert = certified_directional_min(inst.c, inst.box).lower;
        Rng rng = Rng::stream(seed, 0x5A3D, t);
        for (int s = 0; s < 200; ++s) {
            const double f = softmax_objective(inst.c, sample_in(inst.box, rng));
            if (f < fast - 1e-9 || f < cert)
                return false;
        }
        return true;
    }));

    out.push_back(run_suite("dominance", n, options.threads, [&](std::uint64_t t) {
        const Instance inst = instance(2 + t % 31, t);
        return solve(inst.c, inst.box).value >= baseline_directional_min(inst.c, inst.box) - 1e-12;
    }));

    out.push_back(run_suite("stationarity", n, options.threads, [&](std::uint64_t t) {
        const Instance inst = instance(1 + t % 32, t);
        const ThresholdResult r = solve(inst.c, inst.box);
        const double shift = *std::max_element(r.vertex.begin(), r.vertex.end());
        double residual = 0.0, mass = 0.0;
        for (std::size_t j = 0; j < r.vertex.size(); ++j) {
            const double y = std::exp(r.vertex[j] - shift);
            residual += (inst.c[j] - r.value) * y;
            mass += y;
        }
        return std::abs(residual) / mass <= 1e-9;
    }));

    out.push_back(run_suite("invariances", n, options.threads, [&](std::uint64_t t) {
        const Instance inst = instance(1 + t % 24, t);
        const double value = solve(inst.c, inst.box).value;
        const auto [cmin, cmax] = std::minmax_element(inst.c.begin(), inst.c.end());
        if (value < *cmin || value > *cmax)
            return false;
        std::vector<double> neg(inst.c);
        for (double& v : neg)
            v = -v;
        if (directional_max(inst.c, inst.box).value != -directional_min(neg, inst.box).value)
            return false;
        std::vector<double> lo(inst.box.lower().begin(), inst.box.lower().end());
        std::vector<double> hi(inst.box.upper().begin(), inst.box.upper().end());
        const double delta = 3.0 * (static_cast<double>(t % 5) - 2.0);
        for (std::size_t j = 0; j < lo.size(); ++j) {
            lo[j] += delta;
            hi[j] += delta;
        }
        if (std::abs(solve(inst.c, ScoreBox(lo, hi)).value - value) > 1e-9)
            return false;
        std::vector<double> scaled(inst.c);
        for (double& v : scaled)
            v = 2.5 * v - 0.75;
        return std::abs(solve(scaled, inst.box).value - (2.5 * value - 0.75)) <= 1e-9;
    }));

    const std::size_t models = std::max<std::size_t>(2, n / 50);
    out.push_back(run_suite("end_to_end_soundness", models, options.threads, [&](std::uint64_t t) {
        RandomModelConfig cfg;
        cfg.image = {2, 4, 1};
        cfg.patch = 2;
        cfg.model_dim = 4;
        cfg.heads = 1 + t % 2;
        cfg.classes = 3;
        cfg.hidden = t % 2 ? 5 : 0;
        const AttentionModel model = random_model(cfg, seed * 1000 + t);
        Rng rng = Rng::stream(seed, 0xE2E, t);
        std::vector<double> x(model.input_size());
        for (double& v : x)
            v = rng.uniform();
        const std::size_t label = argmax(forward(model, x));
        for (double eps : {0.0, 0.01, 0.05}) {
            const InputBox box = InputBox::clipped_linf(x, eps);
            const CertificationResult cert = target_hybrid_certify(model, box, label);
            for (int s = 0; s < 200; ++s) {
                std::vector<double> xs(x.size());
                for (std::size_t k = 0; k < xs.size(); ++k)
                    xs[k] = rng.uniform(box.lower[k], box.upper[k]);
                const auto logits = forward(model, xs);
                for (const auto& m : cert.margins) {
                    if (logits[label] - logits[m.target] < m.l_hybrid - 1e-9)
                        return false;
                }
            }
        }
        return true;
    }));

    return out;
}

} // namespace vcrown

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "decimal_oracle.hpp"
#include "fixtures.hpp"
#include "vcrown/attention.hpp"
#include "vcrown/baseline.hpp"
#include "vcrown/certified.hpp"
#include "vcrown/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace vcrown;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass;
    std::string detail;
};

// Random score-box instance with mixed widths, offsets and occasional
// degenerate coordinates.
struct Problem {
    std::vector<double> c;
    ScoreBox box;
};

Problem random_problem(Rng& rng, std::size_t k, bool mixed_sign = false)
{
    std::vector<double> c(k), lo(k), hi(k);
    const double spread = rng.uniform(0.1, 4.0);
    for (std::size_t j = 0; j < k; ++j) {
        c[j] = rng.normal();
        const double center = spread * rng.normal();
        lo[j] = center - rng.uniform(0, spread);
        hi[j] = center + rng.uniform(0, spread);
        if (rng.uniform() < 0.05)
            hi[j] = lo[j];
    }
    if (mixed_sign && k >= 2) {
        c[0] = std::abs(c[0]);
        c[1] = -std::abs(c[1]);
    }
    return {c, ScoreBox(lo, hi)};
}

std::vector<double> sample_scores(const ScoreBox& box, Rng& rng)
{
    std::vector<double> s(box.size());
    for (std::size_t j = 0; j < s.size(); ++j)
        s[j] = rng.uniform(box.lower(j), box.upper(j));
    return s;
}

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...)
{
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

Outcome oracle_equivalence()
{
    const auto t0 = Clock::now();
    double worst = 0.0;
    std::size_t worst_k = 0;
    for (std::size_t k : {2u, 4u, 8u, 12u, 16u}) {
        Rng rng = Rng::stream(101, k);
        for (int n = 0; n < 1000; ++n) {
            const Problem p = random_problem(rng, k);
            const double diff = std::abs(directional_min(p.c, p.box).value -
                                         exhaustive_vertex_min(p.c, p.box).value);
            if (diff > worst) {
                worst = diff;
                worst_k = k;
            }
        }
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-6 && secs < 30.0,
            fmt("5000 instances, max |threshold - exhaustive| = %.3g (K=%zu), %.2f s", worst,
                worst_k, secs)};
}

Outcome sampling_soundness()
{
    const auto t0 = Clock::now();
    std::size_t fast_violations = 0, cert_violations = 0, samples = 0;
    for (int n = 0; n < 2000; ++n) {
        Rng rng = Rng::stream(102, n);
        const Problem p = random_problem(rng, 2 + n % 15);
        const double fast = directional_min(p.c, p.box).value;
        const double cert = certified_directional_min(p.c, p.box).lower;
        for (int m = 0; m < 10000; ++m) {
            const double f = softmax_objective(p.c, sample_scores(p.box, rng));
            fast_violations += f < fast - 1e-9;
            cert_violations += f < cert;
            ++samples;
        }
    }
    const double secs = seconds_since(t0);
    return {fast_violations == 0 && cert_violations == 0 && secs < 120.0,
            fmt("%zu samples, fast violations %zu, certified violations %zu, %.2f s", samples,
                fast_violations, cert_violations, secs)};
}

Outcome dominance()
{
    std::size_t below = 0, strict = 0;
    const int trials = 10000;
    for (int n = 0; n < trials; ++n) {
        Rng rng = Rng::stream(103, n);
        const Problem p = random_problem(rng, 2 + n % 31, true);
        const double v = directional_min(p.c, p.box).value;
        const double b = baseline_directional_min(p.c, p.box);
        below += v < b - 1e-12;
        strict += v > b;
    }
    const std::vector<double> c3{-1, 0, 1};
    const ScoreBox box3({-1, -1, -1}, {1, 1, 1});
    const double v3 = directional_min(c3, box3).value;
    const double b3 = baseline_directional_min(c3, box3);
    const double rate = static_cast<double>(strict) / trials;
    return {below == 0 && rate >= 0.30 && v3 > b3,
            fmt("%d mixed-sign instances, %zu below baseline, strict on %.1f%%; K=3 fixture %.6f vs %.6f",
                trials, below, 100.0 * rate, v3, b3)};
}

Outcome stationarity()
{
    double worst = 0.0;
    for (int n = 0; n < 10000; ++n) {
        Rng rng = Rng::stream(104, n);
        const Problem p = random_problem(rng, 1 + n % 64);
        const ThresholdResult r = directional_min(p.c, p.box);
        const double a = *std::max_element(r.vertex.begin(), r.vertex.end());
        double residual = 0.0, mass = 0.0;
        for (std::size_t j = 0; j < r.vertex.size(); ++j) {
            const double y = std::exp(r.vertex[j] - a);
            residual += (p.c[j] - r.value) * y;
            mass += y;
        }
        worst = std::max(worst, std::abs(residual) / mass);
    }
    return {worst <= 1e-9, fmt("10000 optima, max |sum (c_j - rho) y_j| / sum y_j = %.3g", worst)};
}

Outcome duality_and_invariances()
{
    std::size_t dual_fail = 0, range_fail = 0;
    double shift_err = 0.0, affine_err = 0.0;
    for (int n = 0; n < 10000; ++n) {
        Rng rng = Rng::stream(105, n);
        const Problem p = random_problem(rng, 1 + n % 40);
        const double v = directional_min(p.c, p.box).value;

        std::vector<double> neg(p.c);
        for (double& x : neg)
            x = -x;
        dual_fail += directional_max(p.c, p.box).value != -directional_min(neg, p.box).value;

        const auto [cmin, cmax] = std::minmax_element(p.c.begin(), p.c.end());
        range_fail += v < *cmin || v > *cmax;

        const double delta = rng.uniform(-100, 100);
        std::vector<double> lo(p.box.lower().begin(), p.box.lower().end());
        std::vector<double> hi(p.box.upper().begin(), p.box.upper().end());
        for (std::size_t j = 0; j < lo.size(); ++j) {
            lo[j] += delta;
            hi[j] += delta;
        }
        shift_err = std::max(shift_err, std::abs(directional_min(p.c, ScoreBox(lo, hi)).value - v));

        const double alpha = rng.uniform(0.01, 10.0), beta = rng.uniform(-10, 10);
        std::vector<double> affine(p.c);
        for (double& x : affine)
            x = alpha * x + beta;
        affine_err = std::max(affine_err,
                              std::abs(directional_min(affine, p.box).value - (alpha * v + beta)));
    }
    return {dual_fail == 0 && range_fail == 0 && shift_err <= 1e-9 && affine_err <= 1e-9,
            fmt("10000 instances, duality mismatches %zu, range violations %zu, shift err %.3g, "
                "affine err %.3g",
                dual_fail, range_fail, shift_err, affine_err)};
}

Outcome complexity_scaling()
{
    const std::size_t ks[] = {256, 512, 1024, 2048};
    const int reps = 301;
    double medians[4];
    for (std::size_t a = 0; a < 4; ++a) {
        const std::size_t k = ks[a];
        std::vector<Problem> pool;
        Rng rng = Rng::stream(106, k);
        for (int n = 0; n < 16; ++n)
            pool.push_back(random_problem(rng, k));
        for (const auto& p : pool)
            directional_min(p.c, p.box);
        std::vector<double> times(reps);
        volatile double sink = 0.0;
        for (int r = 0; r < reps; ++r) {
            const Problem& p = pool[r % pool.size()];
            const auto t0 = Clock::now();
            sink = sink + directional_min(p.c, p.box).value;
            times[r] = std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
        }
        std::nth_element(times.begin(), times.begin() + reps / 2, times.end());
        medians[a] = times[reps / 2];
    }
    double worst_ratio = 0.0;
    for (std::size_t a = 1; a < 4; ++a)
        worst_ratio = std::max(worst_ratio, medians[a] / medians[a - 1]);
    return {worst_ratio <= 3.0 && medians[1] < 1000.0,
            fmt("median us: K=256 %.1f, 512 %.1f, 1024 %.1f, 2048 %.1f; max t(2K)/t(K) %.2f; "
                "K=512 median solve %.1f us",
                medians[0], medians[1], medians[2], medians[3], worst_ratio, medians[1])};
}

Outcome end_to_end()
{
    const auto t0 = Clock::now();
    std::size_t margin_violations = 0, attack_violations = 0, hybrid_mismatch = 0, clean_mismatch = 0,
                shape_violations = 0, samples = 0, linear = 0, mlp = 0;
    double worst_clean = 0.0;
    for (std::size_t n = 0; n < 20; ++n) {
        const AttentionModel m = fixtures::tiny_model(107, n);
        if (m.tokens() < 2 || m.tokens() > 4 || m.head_count() > 2 || m.model_dim > 8)
            ++shape_violations;
        (m.suffix_kind == SuffixKind::Linear ? linear : mlp) += 1;
        Rng rng = Rng::stream(107, n, 1);
        const auto x = fixtures::random_image(m.input_size(), rng);
        const auto clean = forward(m, x);
        const std::size_t y = argmax(clean);
        for (double eps : {0.0, 0.01, 0.05}) {
            const InputBox box = InputBox::clipped_linf(x, eps);
            const CertificationResult r = target_hybrid_certify(m, box, y);
            for (const MarginBound& b : r.margins) {
                hybrid_mismatch += b.l_hybrid != std::max(b.l_vertex, b.l_baseline);
                Rng attack_rng = Rng::stream(107, n, 100 + b.target);
                attack_violations +=
                    attack_min_margin(m, box, y, b.target, 64, attack_rng) < b.l_hybrid - 1e-9;
                if (eps == 0.0) {
                    const double err = std::abs(b.l_hybrid - (clean[y] - clean[b.target]));
                    worst_clean = std::max(worst_clean, err);
                    clean_mismatch += err > 1e-6;
                }
            }
            std::vector<double> xs(x.size());
            for (int s = 0; s < 10000; ++s) {
                for (std::size_t k = 0; k < xs.size(); ++k)
                    xs[k] = rng.uniform(box.lower[k], box.upper[k]);
                const auto logits = forward(m, xs);
                for (const MarginBound& b : r.margins)
                    margin_violations += logits[y] - logits[b.target] < b.l_hybrid - 1e-9;
                ++samples;
            }
        }
    }
    const double secs = seconds_since(t0);
    const bool ok = margin_violations == 0 && attack_violations == 0 && hybrid_mismatch == 0 &&
                    clean_mismatch == 0 && shape_violations == 0 && linear > 0 && mlp > 0 &&
                    secs < 300.0;
    return {ok, fmt("20 models (%zu linear, %zu mlp1), %zu inputs; margin violations %zu, attack "
                    "violations %zu, eps=0 max |L_hyb - margin| %.3g, %.1f s",
                    linear, mlp, samples, margin_violations, attack_violations, worst_clean, secs)};
}

Outcome sweep_ordering()
{
    SweepConfig cfg;
    cfg.ks = {4, 8, 16, 32, 64, 128};
    cfg.trials = 100;
    const auto rows = aggregate(run_sweep(cfg));
    bool ok = true;
    std::ostringstream detail;
    for (std::size_t k = 0; k < cfg.ks.size(); ++k) {
        const AggregateRow* vertex = nullptr;
        const AggregateRow* base = nullptr;
        for (const auto& row : rows) {
            if (row.k != cfg.ks[k])
                continue;
            if (row.method == "vertex")
                vertex = &row;
            if (row.method == "baseline")
                base = &row;
        }
        const bool row_ok = vertex && base && vertex->mean_lower > base->mean_lower &&
                            vertex->mean_gap < base->mean_gap;
        ok = ok && row_ok;
        if (vertex && base)
            detail << (k ? "; " : "") << "K=" << cfg.ks[k] << " lower " << fmt("%.4f", vertex->mean_lower)
                   << "/" << fmt("%.4f", base->mean_lower) << " gap " << fmt("%.2g", vertex->mean_gap)
                   << "/" << fmt("%.4f", base->mean_gap);
    }
    return {ok, "vertex/baseline " + detail.str()};
}

Outcome certified_regression()
{
    std::size_t violations = 0, boxes = 0;
    for (int n = 0; n < 360; ++n) {
        Rng rng = Rng::stream(109, n);
        const std::size_t k = 1 + n % 8;
        const double scale = n % 3 == 0 ? 1.0 : (n % 3 == 1 ? 30.0 : 400.0);
        std::vector<double> c(k), lo(k), hi(k);
        for (std::size_t j = 0; j < k; ++j) {
            c[j] = rng.normal();
            const double a = rng.uniform(-scale, scale), b = rng.uniform(-scale, scale);
            lo[j] = std::min(a, b);
            hi[j] = std::max(a, b);
        }
        const CertifiedBound cb = certified_directional_min(c, ScoreBox(lo, hi));
        const oracle::Enclosure truth = oracle::enclose(oracle::vertex_min(c, lo, hi));
        violations += cb.saturated || cb.lower > truth.hi;
        ++boxes;
    }
    const std::vector<double> c{1, 0}, lo{-700, 0}, hi{-690, 0};
    const CertifiedBound wide = certified_directional_min(c, ScoreBox(lo, hi));
    const oracle::Enclosure truth = oracle::enclose(oracle::vertex_min(c, lo, hi));
    violations += wide.saturated || wide.lower > truth.hi || wide.lower < 0.0;
    ++boxes;
    return {violations == 0,
            fmt("%zu boxes, %zu violations; wide-range lower %.6g <= oracle [%.6g, %.6g]", boxes,
                violations, wide.lower, truth.lo, truth.hi)};
}

} // namespace

int main()
{
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"oracle equivalence", oracle_equivalence},
        {"soundness by sampling", sampling_soundness},
        {"dominance over baseline", dominance},
        {"stationarity identity", stationarity},
        {"duality and invariances", duality_and_invariances},
        {"complexity scaling", complexity_scaling},
        {"end-to-end soundness", end_to_end},
        {"sweep ordering", sweep_ordering},
        {"certified path regression", certified_regression},
    };
    int failed = 0;
    int index = 1;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", index, name,
                    o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
        ++index;
    }
    std::printf("%d/9 criteria passed\n", 9 - failed);
    return failed == 0 ? 0 : 1;
}

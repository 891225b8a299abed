#include "vcrown/attention.hpp"

#include "vcrown/baseline.hpp"
#include "vcrown/certified.hpp"
#include "vcrown/parallel.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace vcrown {

ValueCoeffs::ValueCoeffs(std::size_t targets, std::size_t heads, std::size_t rows,
                         std::size_t keys)
    : b_prime(targets, 0.0), targets_(targets), heads_(heads), rows_(rows), keys_(keys),
      c_(targets * heads * rows * keys, 0.0)
{
}

ValueCoeffs value_coefficients(std::span<const SuffixAffineBound> suffix,
                               const AttentionModel& model, const InputBox& box)
{
    const std::size_t r = model.tokens();
    const std::size_t d = model.model_dim;
    const std::size_t dh = model.head_dim();
    const IntervalMatrix patches = patch_bounds(model, box);

    ValueCoeffs out(suffix.size(), model.head_count(), r, r);
    std::vector<double> eta(dh), direction(d);
    for (std::size_t t = 0; t < suffix.size(); ++t) {
        const Matrix& gamma = suffix[t].gamma;
        if (gamma.rows != r || gamma.cols != d)
            throw InvalidInputError("value_coefficients: gamma for target " + std::to_string(t) +
                                    " does not match tokens x model_dim");

        // b'_t: suffix offset, output bias and (if present) the residual path.
        // Tokens read disjoint pixels, so the box minimum of the sum is the
        // sum of per-token minima.
        double b_prime = suffix[t].beta;
        for (std::size_t i = 0; i < r; ++i) {
            const auto g = gamma.row(i);
            for (std::size_t k = 0; k < d; ++k)
                b_prime += g[k] * model.output_bias[k];
            if (model.residual) {
                const PatchAffine f = compose_with_embedding(model, g, 0.0);
                b_prime += affine_lower_over_box(f.weight, f.bias, patches.lower.row(i),
                                                 patches.upper.row(i));
            }
        }
        out.b_prime[t] = b_prime;

        for (std::size_t h = 0; h < model.head_count(); ++h) {
            const HeadWeights& head = model.heads[h];
            for (std::size_t i = 0; i < r; ++i) {
                const auto g = gamma.row(i);
                for (std::size_t c = 0; c < dh; ++c) {
                    double acc = 0.0;
                    for (std::size_t k = 0; k < d; ++k)
                        acc += head.output(k, c) * g[k];
                    eta[c] = acc;
                }
                // eta^T (W_V H_j + b_V) as a map of token j's patch pixels.
                double extra = 0.0;
                std::fill(direction.begin(), direction.end(), 0.0);
                for (std::size_t c = 0; c < dh; ++c) {
                    if (eta[c] == 0.0)
                        continue;
                    extra += eta[c] * head.value.bias[c];
                    const auto w = head.value.weight.row(c);
                    for (std::size_t k = 0; k < d; ++k)
                        direction[k] += eta[c] * w[k];
                }
                const PatchAffine f = compose_with_embedding(model, direction, extra);
                auto row = out.row(t, h, i);
                for (std::size_t j = 0; j < r; ++j)
                    row[j] = affine_lower_over_box(f.weight, f.bias, patches.lower.row(j),
                                                   patches.upper.row(j));
            }
        }
    }
    return out;
}

namespace {

void check_alignment(const ValueCoeffs& coeffs, const ScoreBoxTensor& scores, std::size_t target)
{
    if (target >= coeffs.targets())
        throw InvalidInputError("target slot " + std::to_string(target) + " out of range");
    if (coeffs.heads() != scores.heads() || coeffs.rows() != scores.rows() ||
        coeffs.keys() != scores.keys())
        throw InvalidInputError("value coefficients and score boxes are misaligned");
}

// Evaluates row_bound for every (h, i) and sums in (h, i) order.
template <typename RowBound>
double sum_rows(const ValueCoeffs& coeffs, const ScoreBoxTensor& scores, std::size_t target,
                unsigned threads, RowBound&& row_bound)
{
    check_alignment(coeffs, scores, target);
    const std::size_t rows = coeffs.rows();
    std::vector<double> parts(coeffs.heads() * rows);
    parallel_for(parts.size(), threads, [&](std::size_t n) {
        const std::size_t h = n / rows;
        const std::size_t i = n % rows;
        parts[n] = row_bound(coeffs.row(target, h, i), scores.row(h, i));
    });
    double total = coeffs.b_prime[target];
    for (double p : parts)
        total += p;
    return total;
}

} // namespace

double vertex_crown_bound(const ValueCoeffs& coeffs, const ScoreBoxTensor& scores,
                          std::size_t target, unsigned threads)
{
    return sum_rows(coeffs, scores, target, threads,
                    [](std::span<const double> c, const ScoreBox& box) {
                        return directional_min(c, box).value;
                    });
}

double baseline_crown_bound(const ValueCoeffs& coeffs, const ScoreBoxTensor& scores,
                            std::size_t target, unsigned threads)
{
    return sum_rows(coeffs, scores, target, threads,
                    [](std::span<const double> c, const ScoreBox& box) {
                        return baseline_directional_min(c, box);
                    });
}

CertifiedRowSum certified_vertex_crown_bound(const ValueCoeffs& coeffs, const ScoreBoxTensor& scores,
                                             std::size_t target, unsigned threads)
{
    check_alignment(coeffs, scores, target);
    const std::size_t rows = coeffs.rows();
    std::vector<CertifiedBound> parts(coeffs.heads() * rows);
    parallel_for(parts.size(), threads, [&](std::size_t n) {
        parts[n] = certified_directional_min(coeffs.row(target, n / rows, n % rows),
                                             scores.row(n / rows, n % rows));
    });
    CertifiedRowSum out{coeffs.b_prime[target], false};
    for (const auto& p : parts) {
        out.value += p.lower;
        out.saturated = out.saturated || p.saturated;
    }
    return out;
}

CertificationResult target_hybrid_certify(const AttentionModel& model, const InputBox& box,
                                          std::size_t label, const CertifyOptions& options)
{
    model.validate();
    if (box.lower.size() != model.input_size() || box.upper.size() != model.input_size())
        throw ModelError("input", "input box has " + std::to_string(box.size()) +
                                      " pixels, model expects " +
                                      std::to_string(model.input_size()));
    if (label >= model.classes)
        throw InvalidInputError("label " + std::to_string(label) + " out of range");

    const ProjectionBounds proj = projection_bounds(model, box);
    const ScoreBoxTensor scores = model_score_boxes(model, proj);

    PreActBox preact;
    if (model.suffix_kind == SuffixKind::Mlp1)
        preact = interval_forward(model, box);

    std::vector<SuffixAffineBound> suffix;
    for (std::size_t t = 0; t < model.classes; ++t) {
        if (t == label)
            continue;
        suffix.push_back(model.suffix_kind == SuffixKind::Linear
                             ? linear_suffix_bound(model, label, t)
                             : relu_suffix_bound(model, preact, label, t));
    }
    const ValueCoeffs coeffs = value_coefficients(suffix, model, box);

    CertificationResult result;
    result.label = label;
    result.min_hybrid = std::numeric_limits<double>::infinity();
    for (std::size_t slot = 0; slot < suffix.size(); ++slot) {
        MarginBound bound;
        bound.target = suffix[slot].target;
        if (options.certified) {
            const CertifiedRowSum cert =
                certified_vertex_crown_bound(coeffs, scores, slot, options.threads);
            if (cert.saturated)
                throw SaturationError("interval-certified row bound saturated for target " +
                                      std::to_string(bound.target));
            bound.l_vertex = cert.value;
        } else {
            bound.l_vertex = vertex_crown_bound(coeffs, scores, slot, options.threads);
        }
        bound.l_baseline = baseline_crown_bound(coeffs, scores, slot, options.threads);
        bound.l_hybrid = std::max(bound.l_vertex, bound.l_baseline);
        result.min_hybrid = std::min(result.min_hybrid, bound.l_hybrid);
        result.margins.push_back(bound);
    }
    result.certified = result.min_hybrid > 0.0;
    return result;
}

} // namespace vcrown

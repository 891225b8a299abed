#include "vcrown/suffix.hpp"

#include <algorithm>
#include <string>

namespace vcrown {

namespace {

void check_classes(const LinearLayer& output, std::size_t y, std::size_t t)
{
    if (y >= output.weight.rows || t >= output.weight.rows)
        throw InvalidInputError("class index out of range (classes=" +
                                std::to_string(output.weight.rows) + ")");
}

Matrix reshape_rows(const std::vector<double>& flat, std::size_t tokens)
{
    if (tokens == 0 || flat.size() % tokens != 0)
        throw InvalidInputError("suffix input width is not a multiple of the token count");
    Matrix out(tokens, flat.size() / tokens);
    out.data = flat;
    return out;
}

} // namespace

SuffixAffineBound linear_suffix_bound(const LinearLayer& classifier, std::size_t tokens,
                                      std::size_t y, std::size_t t)
{
    check_classes(classifier, y, t);
    const auto wy = classifier.weight.row(y);
    const auto wt = classifier.weight.row(t);
    std::vector<double> diff(classifier.weight.cols);
    for (std::size_t k = 0; k < diff.size(); ++k)
        diff[k] = wy[k] - wt[k];
    return {t, classifier.bias[y] - classifier.bias[t], reshape_rows(diff, tokens)};
}

SuffixAffineBound linear_suffix_bound(const AttentionModel& model, std::size_t y, std::size_t t)
{
    if (model.suffix_kind != SuffixKind::Linear)
        throw InvalidInputError("linear_suffix_bound: model suffix is not affine");
    return linear_suffix_bound(model.classifier, model.tokens(), y, t);
}

SuffixAffineBound relu_suffix_bound(const LinearLayer& hidden, const LinearLayer& output,
                                    const PreActBox& preact, std::size_t tokens, std::size_t y,
                                    std::size_t t)
{
    check_classes(output, y, t);
    const std::size_t width = hidden.weight.rows;
    if (output.weight.cols != width)
        throw InvalidInputError("relu_suffix_bound: output layer width mismatch");
    if (preact.lower.size() != width || preact.upper.size() != width)
        throw InvalidInputError("relu_suffix_bound: missing pre-activation bounds for " +
                                std::to_string(width) + " hidden neurons");

    double beta = output.bias[y] - output.bias[t];
    std::vector<double> gamma(hidden.weight.cols, 0.0);
    for (std::size_t k = 0; k < width; ++k) {
        const double lambda = output.weight(y, k) - output.weight(t, k);
        if (lambda == 0.0)
            continue;
        const double l = preact.lower[k];
        const double u = preact.upper[k];
        double slope = 0.0;
        double intercept = 0.0;
        if (u <= 0.0) {
            continue;
        } else if (l >= 0.0) {
            slope = 1.0;
        } else if (lambda < 0.0) {
            slope = u / (u - l);
            intercept = -slope * l;
        } else {
            slope = u >= -l ? 1.0 : 0.0;
        }
        const double coeff = lambda * slope;
        beta += lambda * intercept + coeff * hidden.bias[k];
        if (coeff == 0.0)
            continue;
        const auto row = hidden.weight.row(k);
        for (std::size_t c = 0; c < gamma.size(); ++c)
            gamma[c] += coeff * row[c];
    }
    return {t, beta, reshape_rows(gamma, tokens)};
}

SuffixAffineBound relu_suffix_bound(const AttentionModel& model, const PreActBox& preact,
                                    std::size_t y, std::size_t t)
{
    if (model.suffix_kind != SuffixKind::Mlp1 || !model.hidden)
        throw InvalidInputError("relu_suffix_bound: model suffix is not affine-ReLU-affine");
    return relu_suffix_bound(*model.hidden, model.classifier, preact, model.tokens(), y, t);
}

IntervalMatrix post_attention_bounds(const AttentionModel& model, const InputBox& box)
{
    const ProjectionBounds proj = projection_bounds(model, box);
    const ScoreBoxTensor scores = model_score_boxes(model, proj);
    const std::size_t r = model.tokens();
    const std::size_t d = model.model_dim;
    const std::size_t dh = model.head_dim();

    IntervalMatrix out{Matrix(r, d), Matrix(r, d)};
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t k = 0; k < d; ++k) {
            out.lower(i, k) = model.output_bias[k] + (model.residual ? proj.tokens.lower(i, k) : 0.0);
            out.upper(i, k) = model.output_bias[k] + (model.residual ? proj.tokens.upper(i, k) : 0.0);
        }
    }

    std::vector<double> column(r);
    for (std::size_t h = 0; h < model.head_count(); ++h) {
        const auto& values = proj.values[h];
        const auto& wo = model.heads[h].output;
        for (std::size_t i = 0; i < r; ++i) {
            const ScoreBox row = scores.row(h, i);
            std::vector<double> mixed_lo(dh), mixed_hi(dh);
            for (std::size_t c = 0; c < dh; ++c) {
                for (std::size_t j = 0; j < r; ++j)
                    column[j] = values.lower(j, c);
                mixed_lo[c] = directional_min(column, row).value;
                for (std::size_t j = 0; j < r; ++j)
                    column[j] = values.upper(j, c);
                mixed_hi[c] = directional_max(column, row).value;
            }
            for (std::size_t k = 0; k < d; ++k) {
                const auto w = wo.row(k);
                out.lower(i, k) += affine_lower_over_box(w, 0.0, mixed_lo, mixed_hi);
                out.upper(i, k) += affine_upper_over_box(w, 0.0, mixed_lo, mixed_hi);
            }
        }
    }
    return out;
}

PreActBox interval_forward(const AttentionModel& model, const InputBox& box)
{
    if (model.suffix_kind != SuffixKind::Mlp1 || !model.hidden)
        return {};
    const IntervalMatrix state = post_attention_bounds(model, box);
    const LinearLayer& hidden = *model.hidden;
    PreActBox out;
    out.lower.resize(hidden.weight.rows);
    out.upper.resize(hidden.weight.rows);
    for (std::size_t k = 0; k < hidden.weight.rows; ++k) {
        const auto w = hidden.weight.row(k);
        out.lower[k] = affine_lower_over_box(w, hidden.bias[k], state.lower.data, state.upper.data);
        out.upper[k] = affine_upper_over_box(w, hidden.bias[k], state.lower.data, state.upper.data);
    }
    return out;
}

SuffixAffineBound suffix_bound(const AttentionModel& model, const InputBox& box, std::size_t y,
                               std::size_t t)
{
    if (model.suffix_kind == SuffixKind::Linear)
        return linear_suffix_bound(model, y, t);
    return relu_suffix_bound(model, interval_forward(model, box), y, t);
}

} // namespace vcrown

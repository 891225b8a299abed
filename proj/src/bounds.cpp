#include "vcrown/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vcrown {

InputBox InputBox::clipped_linf(std::span<const double> x, double epsilon)
{
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
        throw InvalidInputError("epsilon must be finite and non-negative");
    InputBox box;
    box.lower.resize(x.size());
    box.upper.resize(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (!std::isfinite(x[k]) || x[k] < 0.0 || x[k] > 1.0)
            throw InvalidInputError("pixel " + std::to_string(k) + " is outside [0, 1]");
        box.lower[k] = std::max(0.0, x[k] - epsilon);
        box.upper[k] = std::min(1.0, x[k] + epsilon);
    }
    return box;
}

bool InputBox::contains(std::span<const double> x) const
{
    if (x.size() != size())
        return false;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (x[k] < lower[k] || x[k] > upper[k])
            return false;
    }
    return true;
}

double affine_lower_over_box(std::span<const double> w, double b, std::span<const double> lower,
                             std::span<const double> upper)
{
    if (w.size() != lower.size() || w.size() != upper.size())
        throw InvalidInputError("affine_lower_over_box: length mismatch");
    double acc = b;
    for (std::size_t k = 0; k < w.size(); ++k)
        acc += w[k] >= 0.0 ? w[k] * lower[k] : w[k] * upper[k];
    return acc;
}

double affine_upper_over_box(std::span<const double> w, double b, std::span<const double> lower,
                             std::span<const double> upper)
{
    if (w.size() != lower.size() || w.size() != upper.size())
        throw InvalidInputError("affine_upper_over_box: length mismatch");
    double acc = b;
    for (std::size_t k = 0; k < w.size(); ++k)
        acc += w[k] >= 0.0 ? w[k] * upper[k] : w[k] * lower[k];
    return acc;
}

ScoreBoxTensor::ScoreBoxTensor(std::size_t heads, std::size_t rows, std::size_t keys)
    : heads_(heads), rows_(rows), keys_(keys), lower_(heads * rows * keys, 0.0),
      upper_(heads * rows * keys, 0.0)
{
}

ScoreBox ScoreBoxTensor::row(std::size_t h, std::size_t i) const
{
    const auto begin = static_cast<std::ptrdiff_t>(at(h, i, 0));
    const auto end = begin + static_cast<std::ptrdiff_t>(keys_);
    return ScoreBox({lower_.begin() + begin, lower_.begin() + end},
                    {upper_.begin() + begin, upper_.begin() + end});
}

ScoreBoxTensor score_boxes_interval_product(std::span<const IntervalMatrix> queries,
                                            std::span<const IntervalMatrix> keys, double scale,
                                            std::span<const Matrix> masks)
{
    if (queries.size() != keys.size() || queries.size() != masks.size())
        throw InvalidInputError("score_boxes_interval_product: head counts differ");
    if (!(scale > 0.0))
        throw InvalidInputError("score_boxes_interval_product: scale must be positive");
    if (queries.empty())
        return ScoreBoxTensor(0, 0, 0);

    const std::size_t rows = queries.front().lower.rows;
    const std::size_t key_count = keys.front().lower.rows;
    const std::size_t dim = queries.front().lower.cols;
    ScoreBoxTensor out(queries.size(), rows, key_count);
    for (std::size_t h = 0; h < queries.size(); ++h) {
        const auto& q = queries[h];
        const auto& k = keys[h];
        if (q.lower.rows != rows || q.upper.rows != rows || q.lower.cols != dim ||
            q.upper.cols != dim || k.lower.rows != key_count || k.upper.rows != key_count ||
            k.lower.cols != dim || k.upper.cols != dim)
            throw InvalidInputError("score_boxes_interval_product: head " + std::to_string(h) +
                                    " has inconsistent query/key shapes");
        if (masks[h].rows != rows || masks[h].cols != key_count)
            throw InvalidInputError("score_boxes_interval_product: mask for head " +
                                    std::to_string(h) + " has the wrong shape");
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < key_count; ++j) {
                double lo = 0.0;
                double hi = 0.0;
                for (std::size_t r = 0; r < dim; ++r) {
                    const double a = q.lower(i, r), b = q.upper(i, r);
                    const double c = k.lower(j, r), d = k.upper(j, r);
                    const double p[4] = {a * c, a * d, b * c, b * d};
                    const auto [mn, mx] = std::minmax_element(std::begin(p), std::end(p));
                    lo += *mn;
                    hi += *mx;
                }
                out.lower(h, i, j) = masks[h](i, j) + scale * lo;
                out.upper(h, i, j) = masks[h](i, j) + scale * hi;
            }
        }
    }
    return out;
}

PatchAffine compose_with_embedding(const AttentionModel& model, std::span<const double> direction,
                                   double extra_bias)
{
    if (direction.size() != model.model_dim)
        throw InvalidInputError("compose_with_embedding: direction length mismatch");
    PatchAffine out;
    out.weight.assign(model.patch_dim(), 0.0);
    out.bias = extra_bias;
    for (std::size_t d = 0; d < model.model_dim; ++d) {
        if (direction[d] == 0.0)
            continue;
        const auto row = model.embed.weight.row(d);
        for (std::size_t k = 0; k < out.weight.size(); ++k)
            out.weight[k] += direction[d] * row[k];
        out.bias += direction[d] * model.embed.bias[d];
    }
    return out;
}

IntervalMatrix patch_bounds(const AttentionModel& model, const InputBox& box)
{
    if (box.lower.size() != model.input_size() || box.upper.size() != model.input_size())
        throw ModelError("input", "input box has " + std::to_string(box.size()) +
                                      " pixels, model expects " +
                                      std::to_string(model.input_size()));
    return {extract_patches(model, box.lower), extract_patches(model, box.upper)};
}

namespace {

// Bounds of (layer applied to the token embedding) for every token.
IntervalMatrix project_tokens(const AttentionModel& model, const IntervalMatrix& patches,
                              const LinearLayer& layer)
{
    const std::size_t rows = patches.lower.rows;
    IntervalMatrix out{Matrix(rows, layer.weight.rows), Matrix(rows, layer.weight.rows)};
    for (std::size_t r = 0; r < layer.weight.rows; ++r) {
        const PatchAffine f = compose_with_embedding(model, layer.weight.row(r), layer.bias[r]);
        for (std::size_t i = 0; i < rows; ++i) {
            out.lower(i, r) =
                affine_lower_over_box(f.weight, f.bias, patches.lower.row(i), patches.upper.row(i));
            out.upper(i, r) =
                affine_upper_over_box(f.weight, f.bias, patches.lower.row(i), patches.upper.row(i));
        }
    }
    return out;
}

} // namespace

ProjectionBounds projection_bounds(const AttentionModel& model, const InputBox& box)
{
    const IntervalMatrix patches = patch_bounds(model, box);
    ProjectionBounds out;
    out.tokens = IntervalMatrix{Matrix(model.tokens(), model.model_dim),
                                Matrix(model.tokens(), model.model_dim)};
    std::vector<double> unit(model.model_dim, 0.0);
    for (std::size_t d = 0; d < model.model_dim; ++d) {
        unit.assign(model.model_dim, 0.0);
        unit[d] = 1.0;
        const PatchAffine f = compose_with_embedding(model, unit, 0.0);
        for (std::size_t i = 0; i < model.tokens(); ++i) {
            out.tokens.lower(i, d) =
                affine_lower_over_box(f.weight, f.bias, patches.lower.row(i), patches.upper.row(i));
            out.tokens.upper(i, d) =
                affine_upper_over_box(f.weight, f.bias, patches.lower.row(i), patches.upper.row(i));
        }
    }
    for (const auto& head : model.heads) {
        out.queries.push_back(project_tokens(model, patches, head.query));
        out.keys.push_back(project_tokens(model, patches, head.key));
        out.values.push_back(project_tokens(model, patches, head.value));
    }
    return out;
}

ScoreBoxTensor model_score_boxes(const AttentionModel& model, const ProjectionBounds& projections)
{
    std::vector<Matrix> masks;
    masks.reserve(model.head_count());
    for (const auto& head : model.heads)
        masks.push_back(head.mask);
    const double scale = 1.0 / std::sqrt(static_cast<double>(model.head_dim()));
    return score_boxes_interval_product(projections.queries, projections.keys, scale, masks);
}

} // namespace vcrown

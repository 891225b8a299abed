#pragma once

#include "vcrown/model.hpp"
#include "vcrown/solver.hpp"

#include <span>
#include <vector>

namespace vcrown {

/// Axis-aligned box of input images.
struct InputBox {
    std::vector<double> lower;
    std::vector<double> upper;

    /// [x - eps, x + eps] intersected with [0, 1] per pixel.
    static InputBox clipped_linf(std::span<const double> x, double epsilon);

    std::size_t size() const { return lower.size(); }
    bool contains(std::span<const double> x) const;
};

/// Exact minimum of w^T x + b over lower <= x <= upper.
double affine_lower_over_box(std::span<const double> w, double b, std::span<const double> lower,
                             std::span<const double> upper);

/// Exact maximum of w^T x + b over lower <= x <= upper.
double affine_upper_over_box(std::span<const double> w, double b, std::span<const double> lower,
                             std::span<const double> upper);

/// Elementwise bounds on a matrix-valued quantity.
struct IntervalMatrix {
    Matrix lower;
    Matrix upper;
};

/// Score intervals for every head, query row and key, stored [h][i][j].
class ScoreBoxTensor {
public:
    ScoreBoxTensor(std::size_t heads, std::size_t rows, std::size_t keys);

    std::size_t heads() const { return heads_; }
    std::size_t rows() const { return rows_; }
    std::size_t keys() const { return keys_; }

    double& lower(std::size_t h, std::size_t i, std::size_t j) { return lower_[at(h, i, j)]; }
    double& upper(std::size_t h, std::size_t i, std::size_t j) { return upper_[at(h, i, j)]; }
    double lower(std::size_t h, std::size_t i, std::size_t j) const { return lower_[at(h, i, j)]; }
    double upper(std::size_t h, std::size_t i, std::size_t j) const { return upper_[at(h, i, j)]; }

    ScoreBox row(std::size_t h, std::size_t i) const;

private:
    std::size_t at(std::size_t h, std::size_t i, std::size_t j) const
    {
        return (h * rows_ + i) * keys_ + j;
    }

    std::size_t heads_, rows_, keys_;
    std::vector<double> lower_, upper_;
};

/// Sound score boxes from scalar query/key intervals (one IntervalMatrix of
/// shape rows x head_dim per head): each product q_ir k_jr is bounded by its
/// four endpoint products, summed over r, scaled, and shifted by the mask.
ScoreBoxTensor score_boxes_interval_product(std::span<const IntervalMatrix> queries,
                                            std::span<const IntervalMatrix> keys, double scale,
                                            std::span<const Matrix> masks);

/// An affine function of one token's patch pixels.
struct PatchAffine {
    std::vector<double> weight; // patch_dim
    double bias = 0.0;
};

/// Composes direction^T (E p + e_b) + extra into an affine map of the patch p.
PatchAffine compose_with_embedding(const AttentionModel& model, std::span<const double> direction,
                                   double extra_bias);

/// Patch-pixel bounds of every token, extracted from the input box.
IntervalMatrix patch_bounds(const AttentionModel& model, const InputBox& box);

/// Exact per-scalar bounds of the token embeddings and per-head Q/K/V.
struct ProjectionBounds {
    IntervalMatrix tokens;
    std::vector<IntervalMatrix> queries;
    std::vector<IntervalMatrix> keys;
    std::vector<IntervalMatrix> values;
};

ProjectionBounds projection_bounds(const AttentionModel& model, const InputBox& box);

/// Interval-product score boxes for the model's attention block.
ScoreBoxTensor model_score_boxes(const AttentionModel& model, const ProjectionBounds& projections);

} // namespace vcrown

#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace vcrown {

/// Raised for malformed solver inputs: empty or mismatched vectors,
/// non-finite entries, or lower > upper.
class InvalidInputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Independent per-coordinate bounds on the K pre-softmax scores of one
/// attention row. Degenerate coordinates (lower == upper) are allowed.
class ScoreBox {
public:
    ScoreBox(std::vector<double> lower, std::vector<double> upper);

    /// Degenerate box at a single score vector.
    static ScoreBox point(std::vector<double> s);

    std::size_t size() const { return lower_.size(); }
    std::span<const double> lower() const { return lower_; }
    std::span<const double> upper() const { return upper_; }
    double lower(std::size_t j) const { return lower_[j]; }
    double upper(std::size_t j) const { return upper_[j]; }

    bool contains(std::span<const double> s) const;

private:
    std::vector<double> lower_;
    std::vector<double> upper_;
};

enum class Sense { Min, Max };

struct ThresholdResult {
    double value = 0.0;
    /// For the sweep: number of smallest-coefficient coordinates placed at
    /// their upper endpoint. For exhaustive enumeration: count of coordinates
    /// at the upper endpoint in the witness.
    std::size_t threshold = 0;
    /// Witness vertex in original index order; vertex[j] is lower(j) or upper(j).
    std::vector<double> vertex;
    Sense sense = Sense::Min;
};

/// c^T softmax(s), evaluated after shifting by max_j s_j.
double softmax_objective(std::span<const double> c, std::span<const double> s);

/// Exact minimum of c^T softmax(s) over the box via the K+1 threshold sweep.
///
/// Coordinates are ordered by (c_j, j). Threshold m puts the m cheapest
/// coordinates at their upper score and the rest at their lower score; the
/// optimum is attained at one of these K+1 vertices. Sums run over
/// exponentials shifted by max_j u_j, so every term lies in (0, 1].
/// Ties among thresholds resolve to the smallest m. The reported value is
/// the objective re-evaluated at the witness vertex.
ThresholdResult directional_min(std::span<const double> c, const ScoreBox& box);

/// Maximum over the box, computed as -directional_min(-c).
ThresholdResult directional_max(std::span<const double> c, const ScoreBox& box);

/// Largest K accepted by exhaustive_vertex_min.
inline constexpr std::size_t kExhaustiveMaxK = 24;

/// Brute-force minimum over every vertex of the box. Degenerate coordinates
/// contribute a single choice. Ties keep the lexicographically smallest
/// lower(0)/upper(1) pattern.
ThresholdResult exhaustive_vertex_min(std::span<const double> c, const ScoreBox& box);

struct RowProblem {
    std::span<const double> c;
    const ScoreBox* box = nullptr;
};

/// Solves many rows; results are identical to sequential calls regardless
/// of `threads`.
std::vector<ThresholdResult> directional_min_batch(std::span<const RowProblem> rows,
                                                   unsigned threads = 1);

} // namespace vcrown

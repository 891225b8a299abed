#pragma once

#include "vcrown/bounds.hpp"
#include "vcrown/model.hpp"
#include "vcrown/suffix.hpp"

#include <span>
#include <stdexcept>
#include <vector>

namespace vcrown {

/// Lower bounds c[t][h][i][j] <= eta_tih^T V_j^h(x) over the input box,
/// with eta_tih = (W_O^h)^T gamma_ti, and the per-target constant b'_t that
/// collects the suffix offset, residual path and output bias.
class ValueCoeffs {
public:
    ValueCoeffs(std::size_t targets, std::size_t heads, std::size_t rows, std::size_t keys);

    std::size_t targets() const { return targets_; }
    std::size_t heads() const { return heads_; }
    std::size_t rows() const { return rows_; }
    std::size_t keys() const { return keys_; }

    std::span<double> row(std::size_t t, std::size_t h, std::size_t i)
    {
        return {c_.data() + offset(t, h, i), keys_};
    }
    std::span<const double> row(std::size_t t, std::size_t h, std::size_t i) const
    {
        return {c_.data() + offset(t, h, i), keys_};
    }

    std::vector<double> b_prime;

private:
    std::size_t offset(std::size_t t, std::size_t h, std::size_t i) const
    {
        return ((t * heads_ + h) * rows_ + i) * keys_;
    }

    std::size_t targets_, heads_, rows_, keys_;
    std::vector<double> c_;
};

ValueCoeffs value_coefficients(std::span<const SuffixAffineBound> suffix,
                               const AttentionModel& model, const InputBox& box);

/// b'_t + sum over heads and rows of the exact score-box minimum.
double vertex_crown_bound(const ValueCoeffs& coeffs, const ScoreBoxTensor& scores,
                          std::size_t target, unsigned threads = 1);

/// Same assembly with each row bounded by the interval-softmax baseline.
double baseline_crown_bound(const ValueCoeffs& coeffs, const ScoreBoxTensor& scores,
                            std::size_t target, unsigned threads = 1);

struct CertifiedRowSum {
    double value = 0.0;
    bool saturated = false;
};

/// Vertex-CROWN with each row minimum taken from the interval-certified sweep.
CertifiedRowSum certified_vertex_crown_bound(const ValueCoeffs& coeffs, const ScoreBoxTensor& scores,
                                             std::size_t target, unsigned threads = 1);

struct MarginBound {
    std::size_t target = 0;
    double l_vertex = 0.0;
    double l_baseline = 0.0;
    double l_hybrid = 0.0;
};

/// Raised when the interval-certified path saturates in certified mode.
class SaturationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CertifyOptions {
    /// Use interval-certified row minima on the vertex path.
    bool certified = false;
    unsigned threads = 1;
};

struct CertificationResult {
    std::size_t label = 0;
    std::vector<MarginBound> margins; // ascending target order, label excluded
    bool certified = false;
    double min_hybrid = 0.0;
};

/// Bounds every margin logit_y - logit_t over the box with both arms and
/// certifies iff every hybrid bound is strictly positive.
CertificationResult target_hybrid_certify(const AttentionModel& model, const InputBox& box,
                                          std::size_t label, const CertifyOptions& options = {});

} // namespace vcrown

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vcrown {

/// Shape or parse problem in a model, reported with the offending field path
/// (e.g. "weights.wq.weight").
class ModelError : public std::runtime_error {
public:
    ModelError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field))
    {
    }

    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// Dense row-major matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }

    bool operator==(const Matrix&) const = default;
};

struct LinearLayer {
    Matrix weight; // out x in
    std::vector<double> bias;

    std::vector<double> apply(std::span<const double> x) const;
    bool operator==(const LinearLayer&) const = default;
};

struct HeadWeights {
    LinearLayer query; // head_dim x model_dim
    LinearLayer key;   // head_dim x model_dim
    LinearLayer value; // head_dim x model_dim
    Matrix output;     // model_dim x head_dim, this head's block of W_O
    Matrix mask;       // tokens x tokens additive score term

    bool operator==(const HeadWeights&) const = default;
};

struct ImageDims {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 1;

    bool operator==(const ImageDims&) const = default;
};

enum class SuffixKind { Linear, Mlp1 };

/// One patch-attention block followed by a classifier suffix.
///
/// Images are flat channel-major vectors: pixel (c, row, col) sits at
/// (c * height + row) * width + col. Patches are taken in row-major order and
/// each is flattened channel-major, then row-major. Tokens are affinely
/// embedded with a shared weight; the attention block computes
///
///   s_ij^h = <Q_i^h, K_j^h> / sqrt(head_dim) + mask^h_ij
///   H+_i   = [H_i if residual] + b_O + sum_h W_O^h sum_j softmax(s_i^h)_j V_j^h
///
/// and the suffix reads the concatenation of all rows of H+.
struct AttentionModel {
    ImageDims image;
    std::size_t patch = 1;
    std::size_t model_dim = 0;
    std::size_t classes = 0;
    bool residual = true;
    SuffixKind suffix_kind = SuffixKind::Linear;

    LinearLayer embed; // model_dim x patch_dim
    std::vector<HeadWeights> heads;
    std::vector<double> output_bias; // b_O, model_dim

    /// Linear suffix: classes x (tokens * model_dim).
    /// Mlp1 suffix: output layer, classes x hidden.
    LinearLayer classifier;
    /// Mlp1 suffix only: hidden x (tokens * model_dim), followed by ReLU.
    std::optional<LinearLayer> hidden;

    std::size_t tokens() const;
    std::size_t patch_dim() const { return image.channels * patch * patch; }
    std::size_t head_count() const { return heads.size(); }
    std::size_t head_dim() const;
    std::size_t input_size() const { return image.height * image.width * image.channels; }
    std::size_t flat_state_size() const { return tokens() * model_dim; }
    std::size_t hidden_size() const { return hidden ? hidden->bias.size() : 0; }

    /// Throws ModelError naming the first inconsistent field.
    void validate() const;

    bool operator==(const AttentionModel&) const = default;
};

/// Index into the flat image of element `k` of patch `token`.
std::size_t patch_pixel_index(const AttentionModel& model, std::size_t token, std::size_t k);

/// Raw patches, tokens x patch_dim.
Matrix extract_patches(const AttentionModel& model, std::span<const double> x);

/// Embedded tokens H, tokens x model_dim.
Matrix patch_tokenize(std::span<const double> x, const AttentionModel& model);

/// Every intermediate of the reference forward pass.
struct ForwardTrace {
    Matrix tokens;                  // H
    std::vector<Matrix> queries;    // per head, tokens x head_dim
    std::vector<Matrix> keys;       // per head, tokens x head_dim
    std::vector<Matrix> values;     // per head, tokens x head_dim
    std::vector<Matrix> scores;     // per head, tokens x tokens
    std::vector<Matrix> attention;  // per head, softmax of each score row
    Matrix post_attention;          // H+, tokens x model_dim
    std::vector<double> hidden_pre; // Mlp1 only
    std::vector<double> logits;
};

ForwardTrace forward_trace(const AttentionModel& model, std::span<const double> x);
std::vector<double> forward(const AttentionModel& model, std::span<const double> x);

/// logit_y(x) - logit_t(x).
double margin(const AttentionModel& model, std::span<const double> x, std::size_t y, std::size_t t);

/// Logits produced by the suffix from a flattened post-attention state.
std::vector<double> suffix_logits(const AttentionModel& model, std::span<const double> flat_state);

std::size_t argmax(std::span<const double> v);

void save_model(const AttentionModel& model, const std::filesystem::path& path);
AttentionModel load_model(const std::filesystem::path& path);
std::string model_to_json(const AttentionModel& model);
AttentionModel model_from_json(const std::string& text);

struct RandomModelConfig {
    ImageDims image{4, 4, 1};
    std::size_t patch = 2;
    std::size_t model_dim = 4;
    std::size_t heads = 1;
    std::size_t classes = 2;
    std::size_t hidden = 0; // > 0 selects an Mlp1 suffix
    bool residual = true;
    double weight_scale = 0.5;
};

/// Weights and biases i.i.d. Normal(0, weight_scale^2) from Rng(seed),
/// drawn in declaration order; masks are zero.
AttentionModel random_model(const RandomModelConfig& config, std::uint64_t seed);

} // namespace vcrown

#include "vcrown/model.hpp"

#include "vcrown/rng.hpp"

#include <algorithm>
#include <cmath>

namespace vcrown {

namespace {

std::string shape_str(std::size_t r, std::size_t c)
{
    return "[" + std::to_string(r) + "," + std::to_string(c) + "]";
}

void expect_matrix(const Matrix& m, std::size_t rows, std::size_t cols, const std::string& field)
{
    if (m.rows != rows || m.cols != cols || m.data.size() != rows * cols)
        throw ModelError(field, "expected shape " + shape_str(rows, cols) + ", got " +
                                    shape_str(m.rows, m.cols));
    for (double v : m.data) {
        if (!std::isfinite(v))
            throw ModelError(field, "contains a non-finite value");
    }
}

void expect_vector(const std::vector<double>& v, std::size_t n, const std::string& field)
{
    if (v.size() != n)
        throw ModelError(field, "expected length " + std::to_string(n) + ", got " +
                                    std::to_string(v.size()));
    for (double e : v) {
        if (!std::isfinite(e))
            throw ModelError(field, "contains a non-finite value");
    }
}

void expect_layer(const LinearLayer& layer, std::size_t out, std::size_t in,
                  const std::string& weight_field, const std::string& bias_field)
{
    expect_matrix(layer.weight, out, in, weight_field);
    expect_vector(layer.bias, out, bias_field);
}

void softmax_in_place(std::span<double> row)
{
    const double shift = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double& v : row) {
        v = std::exp(v - shift);
        total += v;
    }
    for (double& v : row)
        v /= total;
}

} // namespace

std::vector<double> LinearLayer::apply(std::span<const double> x) const
{
    std::vector<double> out(weight.rows);
    for (std::size_t r = 0; r < weight.rows; ++r) {
        double acc = bias[r];
        const auto w = weight.row(r);
        for (std::size_t c = 0; c < weight.cols; ++c)
            acc += w[c] * x[c];
        out[r] = acc;
    }
    return out;
}

std::size_t AttentionModel::tokens() const
{
    if (patch == 0)
        return 0;
    return (image.height / patch) * (image.width / patch);
}

std::size_t AttentionModel::head_dim() const
{
    return heads.empty() ? 0 : model_dim / heads.size();
}

void AttentionModel::validate() const
{
    if (image.height == 0 || image.width == 0 || image.channels == 0)
        throw ModelError("dims", "image dimensions must be positive");
    if (patch == 0)
        throw ModelError("patch", "patch size must be positive");
    if (image.height % patch != 0 || image.width % patch != 0)
        throw ModelError("patch", "image " + std::to_string(image.height) + "x" +
                                      std::to_string(image.width) +
                                      " is not divisible by patch size " + std::to_string(patch));
    if (model_dim == 0)
        throw ModelError("arch.model_dim", "must be positive");
    if (heads.empty())
        throw ModelError("heads", "at least one head is required");
    if (model_dim % heads.size() != 0)
        throw ModelError("heads", "head count " + std::to_string(heads.size()) +
                                      " does not divide model_dim " + std::to_string(model_dim));
    if (classes < 2)
        throw ModelError("arch.classes", "at least two classes are required");

    const std::size_t r = tokens();
    const std::size_t dh = head_dim();
    expect_layer(embed, model_dim, patch_dim(), "weights.embed.weight", "weights.embed.bias");
    for (const auto& head : heads) {
        expect_layer(head.query, dh, model_dim, "weights.wq.weight", "weights.wq.bias");
        expect_layer(head.key, dh, model_dim, "weights.wk.weight", "weights.wk.bias");
        expect_layer(head.value, dh, model_dim, "weights.wv.weight", "weights.wv.bias");
        expect_matrix(head.output, model_dim, dh, "weights.wo.weight");
        expect_matrix(head.mask, r, r, "weights.mask");
    }
    expect_vector(output_bias, model_dim, "weights.wo.bias");

    const std::size_t flat = flat_state_size();
    if (suffix_kind == SuffixKind::Linear) {
        if (hidden)
            throw ModelError("weights.suffix", "linear suffix must not carry a hidden layer");
        expect_layer(classifier, classes, flat, "weights.suffix.weight", "weights.suffix.bias");
    } else {
        if (!hidden)
            throw ModelError("weights.suffix.hidden_weight", "mlp1 suffix requires a hidden layer");
        const std::size_t width = hidden->bias.size();
        if (width == 0)
            throw ModelError("weights.suffix.hidden_bias", "hidden layer must be non-empty");
        expect_layer(*hidden, width, flat, "weights.suffix.hidden_weight",
                     "weights.suffix.hidden_bias");
        expect_layer(classifier, classes, width, "weights.suffix.out_weight",
                     "weights.suffix.out_bias");
    }
}

std::size_t patch_pixel_index(const AttentionModel& model, std::size_t token, std::size_t k)
{
    const std::size_t p = model.patch;
    const std::size_t per_row = model.image.width / p;
    const std::size_t patch_row = token / per_row;
    const std::size_t patch_col = token % per_row;
    const std::size_t channel = k / (p * p);
    const std::size_t inner_row = (k / p) % p;
    const std::size_t inner_col = k % p;
    const std::size_t row = patch_row * p + inner_row;
    const std::size_t col = patch_col * p + inner_col;
    return (channel * model.image.height + row) * model.image.width + col;
}

Matrix extract_patches(const AttentionModel& model, std::span<const double> x)
{
    if (model.patch == 0 || model.image.height % model.patch != 0 ||
        model.image.width % model.patch != 0)
        throw ModelError("patch", "image dimensions are not divisible by the patch size");
    if (x.size() != model.input_size())
        throw ModelError("input", "expected " + std::to_string(model.input_size()) +
                                      " pixels, got " + std::to_string(x.size()));
    Matrix patches(model.tokens(), model.patch_dim());
    for (std::size_t t = 0; t < patches.rows; ++t) {
        for (std::size_t k = 0; k < patches.cols; ++k)
            patches(t, k) = x[patch_pixel_index(model, t, k)];
    }
    return patches;
}

Matrix patch_tokenize(std::span<const double> x, const AttentionModel& model)
{
    const Matrix patches = extract_patches(model, x);
    Matrix tokens(patches.rows, model.model_dim);
    for (std::size_t t = 0; t < patches.rows; ++t) {
        const auto h = model.embed.apply(patches.row(t));
        std::copy(h.begin(), h.end(), tokens.row(t).begin());
    }
    return tokens;
}

std::vector<double> suffix_logits(const AttentionModel& model, std::span<const double> flat_state)
{
    if (model.suffix_kind == SuffixKind::Linear)
        return model.classifier.apply(flat_state);
    auto z = model.hidden->apply(flat_state);
    for (double& v : z)
        v = std::max(v, 0.0);
    return model.classifier.apply(z);
}

ForwardTrace forward_trace(const AttentionModel& model, std::span<const double> x)
{
    ForwardTrace trace;
    trace.tokens = patch_tokenize(x, model);
    const std::size_t r = model.tokens();
    const std::size_t dh = model.head_dim();
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    trace.post_attention = Matrix(r, model.model_dim);
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t d = 0; d < model.model_dim; ++d) {
            trace.post_attention(i, d) =
                (model.residual ? trace.tokens(i, d) : 0.0) + model.output_bias[d];
        }
    }

    for (const auto& head : model.heads) {
        Matrix q(r, dh), k(r, dh), v(r, dh);
        for (std::size_t i = 0; i < r; ++i) {
            const auto qi = head.query.apply(trace.tokens.row(i));
            const auto ki = head.key.apply(trace.tokens.row(i));
            const auto vi = head.value.apply(trace.tokens.row(i));
            std::copy(qi.begin(), qi.end(), q.row(i).begin());
            std::copy(ki.begin(), ki.end(), k.row(i).begin());
            std::copy(vi.begin(), vi.end(), v.row(i).begin());
        }
        Matrix scores(r, r);
        for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < r; ++j) {
                double dot = 0.0;
                for (std::size_t c = 0; c < dh; ++c)
                    dot += q(i, c) * k(j, c);
                scores(i, j) = scale * dot + head.mask(i, j);
            }
        }
        Matrix attention = scores;
        for (std::size_t i = 0; i < r; ++i)
            softmax_in_place(attention.row(i));

        for (std::size_t i = 0; i < r; ++i) {
            std::vector<double> mixed(dh, 0.0);
            for (std::size_t j = 0; j < r; ++j) {
                for (std::size_t c = 0; c < dh; ++c)
                    mixed[c] += attention(i, j) * v(j, c);
            }
            for (std::size_t d = 0; d < model.model_dim; ++d) {
                double acc = 0.0;
                for (std::size_t c = 0; c < dh; ++c)
                    acc += head.output(d, c) * mixed[c];
                trace.post_attention(i, d) += acc;
            }
        }
        trace.queries.push_back(std::move(q));
        trace.keys.push_back(std::move(k));
        trace.values.push_back(std::move(v));
        trace.scores.push_back(std::move(scores));
        trace.attention.push_back(std::move(attention));
    }

    const std::span<const double> flat(trace.post_attention.data);
    if (model.suffix_kind == SuffixKind::Mlp1) {
        trace.hidden_pre = model.hidden->apply(flat);
        std::vector<double> activated(trace.hidden_pre.size());
        std::transform(trace.hidden_pre.begin(), trace.hidden_pre.end(), activated.begin(),
                       [](double v) { return std::max(v, 0.0); });
        trace.logits = model.classifier.apply(activated);
    } else {
        trace.logits = model.classifier.apply(flat);
    }
    return trace;
}

std::vector<double> forward(const AttentionModel& model, std::span<const double> x)
{
    return forward_trace(model, x).logits;
}

double margin(const AttentionModel& model, std::span<const double> x, std::size_t y, std::size_t t)
{
    const auto logits = forward(model, x);
    return logits.at(y) - logits.at(t);
}

std::size_t argmax(std::span<const double> v)
{
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

AttentionModel random_model(const RandomModelConfig& config, std::uint64_t seed)
{
    Rng rng(seed);
    auto fill_matrix = [&](std::size_t rows, std::size_t cols) {
        Matrix m(rows, cols);
        for (double& v : m.data)
            v = config.weight_scale * rng.normal();
        return m;
    };
    auto fill_vector = [&](std::size_t n) {
        std::vector<double> v(n);
        for (double& e : v)
            e = config.weight_scale * rng.normal();
        return v;
    };
    auto fill_layer = [&](std::size_t out, std::size_t in) {
        LinearLayer layer;
        layer.weight = fill_matrix(out, in);
        layer.bias = fill_vector(out);
        return layer;
    };

    AttentionModel model;
    model.image = config.image;
    model.patch = config.patch;
    model.model_dim = config.model_dim;
    model.classes = config.classes;
    model.residual = config.residual;
    model.suffix_kind = config.hidden > 0 ? SuffixKind::Mlp1 : SuffixKind::Linear;

    const std::size_t r = model.tokens();
    const std::size_t dh = config.heads == 0 ? 0 : config.model_dim / config.heads;
    model.embed = fill_layer(config.model_dim, model.patch_dim());
    for (std::size_t h = 0; h < config.heads; ++h) {
        HeadWeights head;
        head.query = fill_layer(dh, config.model_dim);
        head.key = fill_layer(dh, config.model_dim);
        head.value = fill_layer(dh, config.model_dim);
        head.output = fill_matrix(config.model_dim, dh);
        head.mask = Matrix(r, r, 0.0);
        model.heads.push_back(std::move(head));
    }
    model.output_bias = fill_vector(config.model_dim);
    if (config.hidden > 0) {
        model.hidden = fill_layer(config.hidden, model.flat_state_size());
        model.classifier = fill_layer(config.classes, config.hidden);
    } else {
        model.classifier = fill_layer(config.classes, model.flat_state_size());
    }
    model.validate();
    return model;
}

} // namespace vcrown

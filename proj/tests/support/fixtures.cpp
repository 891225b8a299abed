#include "fixtures.hpp"

#include <algorithm>
#include <cmath>

namespace fixtures {

using vcrown::AttentionModel;

std::vector<double> reference_forward(const AttentionModel& m, const std::vector<double>& x)
{
    const std::size_t hgt = m.image.height, wid = m.image.width, ch = m.image.channels;
    const std::size_t p = m.patch, d = m.model_dim;
    const std::size_t tiles_w = wid / p;
    const std::size_t r = (hgt / p) * tiles_w;
    const std::size_t dh = d / m.heads.size();

    std::vector<std::vector<double>> tok(r, std::vector<double>(d));
    for (std::size_t t = 0; t < r; ++t) {
        const std::size_t r0 = (t / tiles_w) * p, c0 = (t % tiles_w) * p;
        std::vector<double> patch;
        for (std::size_t c = 0; c < ch; ++c)
            for (std::size_t a = 0; a < p; ++a)
                for (std::size_t b = 0; b < p; ++b)
                    patch.push_back(x[(c * hgt + r0 + a) * wid + c0 + b]);
        for (std::size_t k = 0; k < d; ++k) {
            double acc = m.embed.bias[k];
            for (std::size_t q = 0; q < patch.size(); ++q)
                acc += m.embed.weight(k, q) * patch[q];
            tok[t][k] = acc;
        }
    }

    auto project = [&](const vcrown::LinearLayer& layer, std::size_t t) {
        std::vector<double> out(dh);
        for (std::size_t a = 0; a < dh; ++a) {
            out[a] = layer.bias[a];
            for (std::size_t k = 0; k < d; ++k)
                out[a] += layer.weight(a, k) * tok[t][k];
        }
        return out;
    };

    std::vector<std::vector<double>> post(r, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t k = 0; k < d; ++k)
            post[i][k] = (m.residual ? tok[i][k] : 0.0) + m.output_bias[k];

    for (const auto& head : m.heads) {
        for (std::size_t i = 0; i < r; ++i) {
            const auto q = project(head.query, i);
            std::vector<double> s(r);
            for (std::size_t j = 0; j < r; ++j) {
                const auto kj = project(head.key, j);
                double dot = 0.0;
                for (std::size_t a = 0; a < dh; ++a)
                    dot += q[a] * kj[a];
                s[j] = dot / std::sqrt(static_cast<double>(dh)) + head.mask(i, j);
            }
            const double mx = *std::max_element(s.begin(), s.end());
            double z = 0.0;
            for (double& v : s) {
                v = std::exp(v - mx);
                z += v;
            }
            std::vector<double> mixed(dh, 0.0);
            for (std::size_t j = 0; j < r; ++j) {
                const auto vj = project(head.value, j);
                for (std::size_t a = 0; a < dh; ++a)
                    mixed[a] += s[j] / z * vj[a];
            }
            for (std::size_t k = 0; k < d; ++k)
                for (std::size_t a = 0; a < dh; ++a)
                    post[i][k] += head.output(k, a) * mixed[a];
        }
    }

    std::vector<double> flat;
    for (const auto& row : post)
        flat.insert(flat.end(), row.begin(), row.end());

    auto affine = [](const vcrown::LinearLayer& layer, const std::vector<double>& in) {
        std::vector<double> out(layer.bias);
        for (std::size_t a = 0; a < out.size(); ++a)
            for (std::size_t b = 0; b < in.size(); ++b)
                out[a] += layer.weight(a, b) * in[b];
        return out;
    };
    if (m.suffix_kind == vcrown::SuffixKind::Linear)
        return affine(m.classifier, flat);
    auto hidden = affine(*m.hidden, flat);
    for (double& v : hidden)
        v = std::max(v, 0.0);
    return affine(m.classifier, hidden);
}

AttentionModel prototype_model()
{
    vcrown::RandomModelConfig cfg;
    cfg.image = {2, 2, 1};
    cfg.patch = 2;
    cfg.model_dim = 2;
    cfg.heads = 1;
    cfg.classes = 2;
    AttentionModel m = vcrown::random_model(cfg, 0);
    auto zero = [](auto& v) { std::fill(v.begin(), v.end(), 0.0); };
    zero(m.embed.weight.data);
    zero(m.embed.bias);
    m.embed.weight(0, 0) = 1.0;
    m.embed.weight(1, 1) = 1.0;
    for (auto& h : m.heads) {
        zero(h.query.weight.data);
        zero(h.query.bias);
        zero(h.key.weight.data);
        zero(h.key.bias);
        zero(h.value.weight.data);
        zero(h.value.bias);
        zero(h.output.data);
    }
    zero(m.output_bias);
    zero(m.classifier.weight.data);
    zero(m.classifier.bias);
    m.classifier.weight(0, 0) = 1.0;
    m.classifier.weight(1, 1) = 1.0;
    return m;
}

AttentionModel tiny_model(std::uint64_t seed, std::size_t index)
{
    vcrown::Rng rng = vcrown::Rng::stream(seed, 0x71A7, index);
    vcrown::RandomModelConfig cfg;
    const std::size_t tokens = 2 + rng.index(3);
    cfg.image = tokens == 4 ? vcrown::ImageDims{4, 4, 1}
                            : vcrown::ImageDims{2, 2 * tokens, 1 + rng.index(2)};
    cfg.patch = 2;
    cfg.heads = 1 + rng.index(2);
    cfg.model_dim = cfg.heads * (1 + rng.index(8 / cfg.heads));
    cfg.classes = 2 + rng.index(3);
    cfg.hidden = index % 2 ? 3 + rng.index(6) : 0;
    cfg.residual = rng.uniform() < 0.75;
    cfg.weight_scale = 0.3 + 0.5 * rng.uniform();
    vcrown::AttentionModel m = vcrown::random_model(cfg, rng.next());
    for (auto& head : m.heads)
        for (double& v : head.mask.data)
            v = rng.uniform() < 0.3 ? rng.normal() : 0.0;
    return m;
}

std::vector<double> random_image(std::size_t n, vcrown::Rng& rng)
{
    std::vector<double> x(n);
    for (double& v : x)
        v = rng.uniform();
    return x;
}

} // namespace fixtures

#include "vcrown/model.hpp"

#include <json.hpp>

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace vcrown {

namespace {

using nlohmann::json;

constexpr const char* kArchName = "patch-attention-1";

struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;
};

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const std::string& path)
{
    if (!obj.is_object())
        throw ModelError(path.empty() ? "<document>" : path, "expected an object");
    const std::set<std::string> known(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
        if (!known.contains(key))
            throw ModelError(path.empty() ? key : path + "." + key, "unknown field");
    }
}

const json& require(const json& obj, const std::string& key, const std::string& path)
{
    const std::string field = path.empty() ? key : path + "." + key;
    if (!obj.contains(key))
        throw ModelError(field, "missing required field");
    return obj.at(key);
}

std::size_t read_count(const json& obj, const std::string& key, const std::string& path)
{
    const json& v = require(obj, key, path);
    if (!v.is_number_unsigned())
        throw ModelError(path.empty() ? key : path + "." + key, "expected a non-negative integer");
    return v.get<std::size_t>();
}

std::string shape_str(const std::vector<std::size_t>& shape)
{
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i)
        s += (i ? "," : "") + std::to_string(shape[i]);
    return s + "]";
}

Tensor read_tensor(const json& node, const std::string& field,
                   const std::vector<std::size_t>& expected)
{
    reject_unknown(node, {"shape", "data"}, field);
    Tensor t;
    const json& shape = require(node, "shape", field);
    const json& data = require(node, "data", field);
    if (!shape.is_array())
        throw ModelError(field + ".shape", "expected an array");
    for (const auto& d : shape) {
        if (!d.is_number_unsigned())
            throw ModelError(field + ".shape", "expected non-negative integers");
        t.shape.push_back(d.get<std::size_t>());
    }
    if (t.shape != expected)
        throw ModelError(field, "expected shape " + shape_str(expected) + ", got " +
                                    shape_str(t.shape));
    if (!data.is_array())
        throw ModelError(field + ".data", "expected an array");
    for (const auto& v : data) {
        if (!v.is_number())
            throw ModelError(field + ".data", "expected numeric entries");
        t.data.push_back(v.get<double>());
    }
    std::size_t count = 1;
    for (auto d : t.shape)
        count *= d;
    if (t.data.size() != count)
        throw ModelError(field + ".data", "shape " + shape_str(t.shape) + " needs " +
                                              std::to_string(count) + " values, got " +
                                              std::to_string(t.data.size()));
    return t;
}

json write_tensor(std::vector<std::size_t> shape, const std::vector<double>& data)
{
    return json{{"shape", std::move(shape)}, {"data", data}};
}

Matrix slice_matrix(const Tensor& t, std::size_t index, std::size_t rows, std::size_t cols)
{
    Matrix m(rows, cols);
    std::copy_n(t.data.begin() + static_cast<std::ptrdiff_t>(index * rows * cols), rows * cols,
                m.data.begin());
    return m;
}

std::vector<double> slice_vector(const Tensor& t, std::size_t index, std::size_t n)
{
    const auto begin = t.data.begin() + static_cast<std::ptrdiff_t>(index * n);
    return {begin, begin + static_cast<std::ptrdiff_t>(n)};
}

Matrix as_matrix(const Tensor& t)
{
    return slice_matrix(t, 0, t.shape.at(0), t.shape.at(1));
}

} // namespace

std::string model_to_json(const AttentionModel& model)
{
    model.validate();
    const std::size_t h = model.head_count();
    const std::size_t dh = model.head_dim();
    const std::size_t d = model.model_dim;
    const std::size_t r = model.tokens();

    auto stack = [&](auto pick) {
        std::vector<double> out;
        for (const auto& head : model.heads) {
            const auto& part = pick(head);
            out.insert(out.end(), part.begin(), part.end());
        }
        return out;
    };

    json weights;
    weights["embed"] = {
        {"weight", write_tensor({d, model.patch_dim()}, model.embed.weight.data)},
        {"bias", write_tensor({d}, model.embed.bias)},
    };
    const std::pair<const char*, LinearLayer HeadWeights::*> projections[] = {
        {"wq", &HeadWeights::query}, {"wk", &HeadWeights::key}, {"wv", &HeadWeights::value}};
    for (const auto& [name, member] : projections) {
        weights[name] = {
            {"weight", write_tensor({h, dh, d}, stack([&](const HeadWeights& hw) -> const auto& {
                                        return (hw.*member).weight.data;
                                    }))},
            {"bias", write_tensor({h, dh}, stack([&](const HeadWeights& hw) -> const auto& {
                                      return (hw.*member).bias;
                                  }))},
        };
    }
    weights["wo"] = {
        {"weight", write_tensor({h, d, dh}, stack([](const HeadWeights& hw) -> const auto& {
                                    return hw.output.data;
                                }))},
        {"bias", write_tensor({d}, model.output_bias)},
    };
    weights["mask"] = write_tensor({h, r, r}, stack([](const HeadWeights& hw) -> const auto& {
                                       return hw.mask.data;
                                   }));

    const std::size_t flat = model.flat_state_size();
    if (model.suffix_kind == SuffixKind::Linear) {
        weights["suffix"] = {
            {"weight", write_tensor({model.classes, flat}, model.classifier.weight.data)},
            {"bias", write_tensor({model.classes}, model.classifier.bias)},
        };
    } else {
        const std::size_t width = model.hidden_size();
        weights["suffix"] = {
            {"hidden_weight", write_tensor({width, flat}, model.hidden->weight.data)},
            {"hidden_bias", write_tensor({width}, model.hidden->bias)},
            {"out_weight", write_tensor({model.classes, width}, model.classifier.weight.data)},
            {"out_bias", write_tensor({model.classes}, model.classifier.bias)},
        };
    }

    json doc;
    doc["arch"] = {
        {"name", kArchName},
        {"model_dim", d},
        {"classes", model.classes},
        {"residual", model.residual},
    };
    doc["dims"] = {{"height", model.image.height},
                   {"width", model.image.width},
                   {"channels", model.image.channels}};
    doc["patch"] = model.patch;
    doc["heads"] = h;
    doc["suffix_kind"] = model.suffix_kind == SuffixKind::Linear ? "linear" : "mlp1";
    doc["weights"] = std::move(weights);
    return doc.dump(1);
}

AttentionModel model_from_json(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ModelError("<document>", std::string("malformed JSON: ") + e.what());
    }
    reject_unknown(doc, {"arch", "dims", "patch", "heads", "suffix_kind", "weights"}, "");

    AttentionModel model;
    const json& arch = require(doc, "arch", "");
    reject_unknown(arch, {"name", "model_dim", "classes", "residual"}, "arch");
    if (arch.contains("name") && arch.at("name") != kArchName)
        throw ModelError("arch.name", std::string("unsupported architecture, expected ") + kArchName);
    model.model_dim = read_count(arch, "model_dim", "arch");
    model.classes = read_count(arch, "classes", "arch");
    if (arch.contains("residual")) {
        if (!arch.at("residual").is_boolean())
            throw ModelError("arch.residual", "expected a boolean");
        model.residual = arch.at("residual").get<bool>();
    }

    const json& dims = require(doc, "dims", "");
    reject_unknown(dims, {"height", "width", "channels"}, "dims");
    model.image.height = read_count(dims, "height", "dims");
    model.image.width = read_count(dims, "width", "dims");
    model.image.channels = dims.contains("channels") ? read_count(dims, "channels", "dims") : 1;
    model.patch = read_count(doc, "patch", "");
    const std::size_t h = read_count(doc, "heads", "");

    const json& kind = require(doc, "suffix_kind", "");
    if (kind == "linear")
        model.suffix_kind = SuffixKind::Linear;
    else if (kind == "mlp1")
        model.suffix_kind = SuffixKind::Mlp1;
    else
        throw ModelError("suffix_kind", "expected \"linear\" or \"mlp1\"");

    if (model.patch == 0 || model.image.height % model.patch != 0 ||
        model.image.width % model.patch != 0)
        throw ModelError("patch", "image dimensions are not divisible by the patch size");
    if (h == 0 || model.model_dim % h != 0)
        throw ModelError("heads", "head count must be positive and divide arch.model_dim");

    const std::size_t d = model.model_dim;
    const std::size_t dh = d / h;
    const std::size_t r = model.tokens();
    const std::size_t flat = r * d;

    const json& weights = require(doc, "weights", "");
    reject_unknown(weights, {"embed", "wq", "wk", "wv", "wo", "mask", "suffix"}, "weights");

    const json& embed = require(weights, "embed", "weights");
    reject_unknown(embed, {"weight", "bias"}, "weights.embed");
    model.embed.weight = as_matrix(
        read_tensor(require(embed, "weight", "weights.embed"), "weights.embed.weight",
                    {d, model.patch_dim()}));
    model.embed.bias =
        read_tensor(require(embed, "bias", "weights.embed"), "weights.embed.bias", {d}).data;

    model.heads.resize(h);
    const std::pair<const char*, LinearLayer HeadWeights::*> projections[] = {
        {"wq", &HeadWeights::query}, {"wk", &HeadWeights::key}, {"wv", &HeadWeights::value}};
    for (const auto& [name, member] : projections) {
        const std::string path = std::string("weights.") + name;
        const json& node = require(weights, name, "weights");
        reject_unknown(node, {"weight", "bias"}, path);
        const Tensor w = read_tensor(require(node, "weight", path), path + ".weight", {h, dh, d});
        const Tensor b = read_tensor(require(node, "bias", path), path + ".bias", {h, dh});
        for (std::size_t k = 0; k < h; ++k) {
            (model.heads[k].*member).weight = slice_matrix(w, k, dh, d);
            (model.heads[k].*member).bias = slice_vector(b, k, dh);
        }
    }

    const json& wo = require(weights, "wo", "weights");
    reject_unknown(wo, {"weight", "bias"}, "weights.wo");
    const Tensor wo_w = read_tensor(require(wo, "weight", "weights.wo"), "weights.wo.weight",
                                    {h, d, dh});
    for (std::size_t k = 0; k < h; ++k)
        model.heads[k].output = slice_matrix(wo_w, k, d, dh);
    model.output_bias =
        read_tensor(require(wo, "bias", "weights.wo"), "weights.wo.bias", {d}).data;

    if (weights.contains("mask")) {
        const Tensor mask = read_tensor(weights.at("mask"), "weights.mask", {h, r, r});
        for (std::size_t k = 0; k < h; ++k)
            model.heads[k].mask = slice_matrix(mask, k, r, r);
    } else {
        for (auto& head : model.heads)
            head.mask = Matrix(r, r, 0.0);
    }

    const json& suffix = require(weights, "suffix", "weights");
    if (model.suffix_kind == SuffixKind::Linear) {
        reject_unknown(suffix, {"weight", "bias"}, "weights.suffix");
        model.classifier.weight = as_matrix(read_tensor(
            require(suffix, "weight", "weights.suffix"), "weights.suffix.weight",
            {model.classes, flat}));
        model.classifier.bias = read_tensor(require(suffix, "bias", "weights.suffix"),
                                            "weights.suffix.bias", {model.classes})
                                    .data;
    } else {
        reject_unknown(suffix, {"hidden_weight", "hidden_bias", "out_weight", "out_bias"},
                       "weights.suffix");
        const json& hb = require(suffix, "hidden_bias", "weights.suffix");
        const std::size_t width =
            hb.is_object() && hb.contains("shape") && hb.at("shape").is_array() &&
                    hb.at("shape").size() == 1 && hb.at("shape")[0].is_number_unsigned()
                ? hb.at("shape")[0].get<std::size_t>()
                : 0;
        LinearLayer hidden;
        hidden.weight = as_matrix(read_tensor(require(suffix, "hidden_weight", "weights.suffix"),
                                              "weights.suffix.hidden_weight", {width, flat}));
        hidden.bias = read_tensor(hb, "weights.suffix.hidden_bias", {width}).data;
        model.hidden = std::move(hidden);
        model.classifier.weight = as_matrix(
            read_tensor(require(suffix, "out_weight", "weights.suffix"),
                        "weights.suffix.out_weight", {model.classes, width}));
        model.classifier.bias = read_tensor(require(suffix, "out_bias", "weights.suffix"),
                                            "weights.suffix.out_bias", {model.classes})
                                    .data;
    }

    model.validate();
    return model;
}

void save_model(const AttentionModel& model, const std::filesystem::path& path)
{
    const std::string text = model_to_json(model);
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text << '\n';
    if (!out)
        throw std::runtime_error("failed writing " + path.string());
}

AttentionModel load_model(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ModelError("<file>", "cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return model_from_json(buffer.str());
}

} // namespace vcrown

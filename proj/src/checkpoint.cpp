#include "checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "error.hpp"

namespace prunekit {

nlohmann::json layer_spec_to_json(const LayerSpec& spec) {
    nlohmann::json j;
    j["kind"] = layer_kind_name(spec.kind);
    switch (spec.kind) {
        case LayerKind::dense:
            j["in_units"] = spec.in_units;
            j["out_units"] = spec.out_units;
            break;
        case LayerKind::conv2d:
            j["in_channels"] = spec.in_channels;
            j["out_channels"] = spec.out_channels;
            j["kernel_h"] = spec.kernel_h;
            j["kernel_w"] = spec.kernel_w;
            j["stride"] = spec.stride;
            j["pad"] = spec.pad;
            break;
        case LayerKind::maxpool2d:
            j["window"] = spec.window;
            j["stride"] = spec.stride;
            break;
        default:
            break;
    }
    return j;
}

LayerSpec layer_spec_from_json(const nlohmann::json& j) {
    const LayerKind kind = layer_kind_from_name(j.at("kind").get<std::string>());
    switch (kind) {
        case LayerKind::dense:
            return LayerSpec::dense(j.at("in_units").get<std::size_t>(),
                                    j.at("out_units").get<std::size_t>());
        case LayerKind::conv2d:
            return LayerSpec::conv2d(
                j.at("in_channels").get<std::size_t>(), j.at("out_channels").get<std::size_t>(),
                j.at("kernel_h").get<std::size_t>(), j.at("kernel_w").get<std::size_t>(),
                j.at("stride").get<std::size_t>(), j.at("pad").get<std::size_t>());
        case LayerKind::maxpool2d:
            return LayerSpec::maxpool2d(j.at("window").get<std::size_t>(),
                                        j.at("stride").get<std::size_t>());
        case LayerKind::relu:
            return LayerSpec::relu();
        case LayerKind::flatten:
            return LayerSpec::flatten();
        case LayerKind::softmax_output:
            return LayerSpec::softmax_output();
    }
    throw config_error("unhandled layer kind");
}

namespace {

void append_f32_le(std::string& out, const std::vector<double>& values) {
    for (double v : values) {
        const float f = static_cast<float>(v);
        std::uint32_t bits;
        std::memcpy(&bits, &f, sizeof(bits));
        out.push_back(static_cast<char>(bits & 0xff));
        out.push_back(static_cast<char>((bits >> 8) & 0xff));
        out.push_back(static_cast<char>((bits >> 16) & 0xff));
        out.push_back(static_cast<char>((bits >> 24) & 0xff));
    }
}

std::vector<double> read_f32_le(const std::string& payload, std::size_t offset,
                                std::size_t count) {
    if (offset + count * 4 > payload.size()) {
        throw data_error("checkpoint payload truncated");
    }
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto* p = reinterpret_cast<const unsigned char*>(payload.data() + offset + i * 4);
        const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                                   (static_cast<std::uint32_t>(p[1]) << 8) |
                                   (static_cast<std::uint32_t>(p[2]) << 16) |
                                   (static_cast<std::uint32_t>(p[3]) << 24);
        float f;
        std::memcpy(&f, &bits, sizeof(f));
        values[i] = static_cast<double>(f);
    }
    return values;
}

}  // namespace

void save_checkpoint(const Network& net, const PruningMask& mask, const std::string& path) {
    nlohmann::json manifest;
    manifest["format"] = kCheckpointFormat;
    manifest["class_count"] = net.class_count;
    manifest["input_shape"] = net.input_shape;

    auto layers = nlohmann::json::array();
    for (const auto& layer : net.layers) layers.push_back(layer_spec_to_json(layer.spec));
    manifest["layers"] = layers;

    std::string payload;
    auto tensors = nlohmann::json::array();
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const Layer& layer = net.layers[i];
        if (!layer.spec.has_params()) continue;
        tensors.push_back({{"layer", i},
                           {"param", "weights"},
                           {"offset", payload.size()},
                           {"count", layer.weights.size()}});
        append_f32_le(payload, layer.weights.values());
        tensors.push_back({{"layer", i},
                           {"param", "bias"},
                           {"offset", payload.size()},
                           {"count", layer.bias.size()}});
        append_f32_le(payload, layer.bias.values());
    }
    manifest["tensors"] = tensors;

    if (!mask.empty()) {
        auto units = nlohmann::json::array();
        for (const auto& u : mask.units) units.push_back({u.layer, u.unit});
        manifest["mask"] = units;
    }
    manifest["metadata"] = net.metadata;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write checkpoint '" + path + "'");
    out << manifest.dump() << "\n" << payload;
    if (!out) throw data_error("failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open checkpoint '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw data_error("checkpoint '" + path + "' is empty");
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw data_error("checkpoint '" + path + "' has a corrupt manifest: " + e.what());
    }

    const std::string format = manifest.value("format", "");
    if (format != kCheckpointFormat) {
        throw version_error("checkpoint '" + path + "' has unsupported format '" + format +
                            "' (expected '" + kCheckpointFormat + "')");
    }

    std::string payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    try {
        std::vector<LayerSpec> specs;
        for (const auto& j : manifest.at("layers")) specs.push_back(layer_spec_from_json(j));
        Checkpoint ck;
        ck.network = Network::build(specs, manifest.at("input_shape").get<std::vector<std::size_t>>(),
                                    manifest.at("class_count").get<std::size_t>());

        for (const auto& t : manifest.at("tensors")) {
            const std::size_t layer_idx = t.at("layer").get<std::size_t>();
            const std::string param = t.at("param").get<std::string>();
            const std::size_t offset = t.at("offset").get<std::size_t>();
            const std::size_t count = t.at("count").get<std::size_t>();
            if (layer_idx >= ck.network.layers.size()) {
                throw data_error("checkpoint tensor names unknown layer " +
                                 std::to_string(layer_idx));
            }
            Layer& layer = ck.network.layers[layer_idx];
            Tensor& target = (param == "weights") ? layer.weights : layer.bias;
            if (target.size() != count) {
                throw data_error("checkpoint tensor size mismatch at layer " +
                                 std::to_string(layer_idx));
            }
            target.values() = read_f32_le(payload, offset, count);
        }

        if (manifest.contains("mask")) {
            for (const auto& e : manifest.at("mask")) {
                ck.mask.units.push_back({e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>()});
            }
            ck.mask.normalize();
        }
        if (manifest.contains("metadata")) {
            ck.network.metadata =
                manifest.at("metadata").get<std::map<std::string, std::string>>();
        }
        return ck;
    } catch (const nlohmann::json::exception& e) {
        throw data_error("checkpoint '" + path + "' has a corrupt manifest: " + e.what());
    }
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open '" + path + "' for digest");
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001b3ULL;
        }
        if (in.eof()) break;
    }
    std::ostringstream os;
    os << std::hex;
    for (int shift = 60; shift >= 0; shift -= 4) os << ((hash >> shift) & 0xf);
    return os.str();
}

}  // namespace prunekit

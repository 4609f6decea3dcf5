#include "network.hpp"

#include <cmath>

#include "error.hpp"
#include "rng.hpp"

namespace prunekit {

std::string layer_kind_name(LayerKind kind) {
    switch (kind) {
        case LayerKind::dense: return "dense";
        case LayerKind::conv2d: return "conv2d";
        case LayerKind::relu: return "relu";
        case LayerKind::maxpool2d: return "maxpool2d";
        case LayerKind::flatten: return "flatten";
        case LayerKind::softmax_output: return "softmax-output";
    }
    return "?";
}

LayerKind layer_kind_from_name(const std::string& name) {
    if (name == "dense") return LayerKind::dense;
    if (name == "conv2d") return LayerKind::conv2d;
    if (name == "relu") return LayerKind::relu;
    if (name == "maxpool2d") return LayerKind::maxpool2d;
    if (name == "flatten") return LayerKind::flatten;
    if (name == "softmax-output") return LayerKind::softmax_output;
    throw config_error("unknown layer kind '" + name + "'");
}

LayerSpec LayerSpec::dense(std::size_t in, std::size_t out) {
    LayerSpec s;
    s.kind = LayerKind::dense;
    s.in_units = in;
    s.out_units = out;
    return s;
}

LayerSpec LayerSpec::conv2d(std::size_t in_c, std::size_t out_c, std::size_t kh, std::size_t kw,
                            std::size_t stride, std::size_t pad) {
    LayerSpec s;
    s.kind = LayerKind::conv2d;
    s.in_channels = in_c;
    s.out_channels = out_c;
    s.kernel_h = kh;
    s.kernel_w = kw;
    s.stride = stride;
    s.pad = pad;
    return s;
}

LayerSpec LayerSpec::relu() {
    LayerSpec s;
    s.kind = LayerKind::relu;
    return s;
}

LayerSpec LayerSpec::maxpool2d(std::size_t window, std::size_t stride) {
    LayerSpec s;
    s.kind = LayerKind::maxpool2d;
    s.window = window;
    s.stride = stride;
    return s;
}

LayerSpec LayerSpec::flatten() {
    LayerSpec s;
    s.kind = LayerKind::flatten;
    return s;
}

LayerSpec LayerSpec::softmax_output() {
    LayerSpec s;
    s.kind = LayerKind::softmax_output;
    return s;
}

std::size_t LayerSpec::unit_count() const {
    if (kind == LayerKind::dense) return out_units;
    if (kind == LayerKind::conv2d) return out_channels;
    return 0;
}

namespace {

// floor((in + 2*pad - k) / stride) + 1, guarded against underflow.
std::size_t window_out(std::size_t in, std::size_t pad, std::size_t k, std::size_t stride,
                       std::size_t layer_index, const char* what) {
    const std::size_t padded = in + 2 * pad;
    if (stride == 0) throw config_error("layer " + std::to_string(layer_index) + ": stride must be >= 1");
    if (k == 0 || k > padded) {
        throw config_error("layer " + std::to_string(layer_index) + ": " + what + " window " +
                           std::to_string(k) + " exceeds padded input " + std::to_string(padded));
    }
    return (padded - k) / stride + 1;
}

std::vector<std::size_t> infer_out_shape(const LayerSpec& spec,
                                         const std::vector<std::size_t>& in_shape,
                                         std::size_t layer_index) {
    const std::string at = "layer " + std::to_string(layer_index) + " (" + layer_kind_name(spec.kind) + ")";
    switch (spec.kind) {
        case LayerKind::dense:
            if (in_shape.size() != 1 || in_shape[0] != spec.in_units) {
                throw config_error(at + ": expects input [" + std::to_string(spec.in_units) +
                                   "], got " + Tensor(in_shape).shape_string());
            }
            if (spec.out_units == 0) throw config_error(at + ": out_units must be positive");
            return {spec.out_units};
        case LayerKind::conv2d: {
            if (in_shape.size() != 3 || in_shape[0] != spec.in_channels) {
                throw config_error(at + ": expects input [" + std::to_string(spec.in_channels) +
                                   ", h, w], got " + Tensor(in_shape).shape_string());
            }
            if (spec.out_channels == 0) throw config_error(at + ": out_channels must be positive");
            const std::size_t oh =
                window_out(in_shape[1], spec.pad, spec.kernel_h, spec.stride, layer_index, "kernel");
            const std::size_t ow =
                window_out(in_shape[2], spec.pad, spec.kernel_w, spec.stride, layer_index, "kernel");
            return {spec.out_channels, oh, ow};
        }
        case LayerKind::relu:
            return in_shape;
        case LayerKind::maxpool2d: {
            if (in_shape.size() != 3) {
                throw config_error(at + ": expects input [c, h, w], got " +
                                   Tensor(in_shape).shape_string());
            }
            const std::size_t oh =
                window_out(in_shape[1], 0, spec.window, spec.stride, layer_index, "pool");
            const std::size_t ow =
                window_out(in_shape[2], 0, spec.window, spec.stride, layer_index, "pool");
            return {in_shape[0], oh, ow};
        }
        case LayerKind::flatten:
            return {Tensor::numel(in_shape)};
        case LayerKind::softmax_output:
            if (in_shape.size() != 1) {
                throw config_error(at + ": expects a flat logit vector, got " +
                                   Tensor(in_shape).shape_string());
            }
            return in_shape;
    }
    throw config_error(at + ": unhandled layer kind");
}

}  // namespace

Network Network::build(const std::vector<LayerSpec>& specs,
                       const std::vector<std::size_t>& input_shape, std::size_t class_count) {
    if (specs.empty()) throw config_error("network needs at least one layer");
    if (class_count == 0) throw config_error("class_count must be positive");
    for (std::size_t d : input_shape) {
        if (d == 0) throw config_error("input shape dimensions must be positive");
    }

    Network net;
    net.input_shape = input_shape;
    net.class_count = class_count;

    std::vector<std::size_t> shape = input_shape;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const LayerSpec& spec = specs[i];
        if (spec.kind == LayerKind::softmax_output && i + 1 != specs.size()) {
            throw config_error("layer " + std::to_string(i) +
                               ": softmax-output must be the last layer");
        }
        Layer layer;
        layer.spec = spec;
        layer.in_shape = shape;
        layer.out_shape = infer_out_shape(spec, shape, i);
        if (spec.kind == LayerKind::dense) {
            layer.weights = Tensor({spec.out_units, spec.in_units});
            layer.bias = Tensor({spec.out_units});
        } else if (spec.kind == LayerKind::conv2d) {
            layer.weights = Tensor({spec.out_channels, spec.in_channels, spec.kernel_h, spec.kernel_w});
            layer.bias = Tensor({spec.out_channels});
        }
        shape = layer.out_shape;
        net.layers.push_back(std::move(layer));
    }

    if (shape.size() != 1 || shape[0] != class_count) {
        throw config_error("final layer produces " + Tensor(shape).shape_string() +
                           ", expected a vector of length " + std::to_string(class_count));
    }
    return net;
}

void Network::init_params(std::uint64_t seed) {
    Rng rng(seed);
    for (auto& layer : layers) {
        if (!layer.spec.has_params()) continue;
        std::size_t fan_in = 0;
        if (layer.spec.kind == LayerKind::dense) {
            fan_in = layer.spec.in_units;
        } else {
            fan_in = layer.spec.in_channels * layer.spec.kernel_h * layer.spec.kernel_w;
        }
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
        for (auto& w : layer.weights.values()) w = rng.uniform(-bound, bound);
        layer.bias.fill(0.0);
    }
}

std::vector<UnitId> Network::prunable_units() const {
    std::vector<UnitId> units;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const std::size_t n = layers[i].spec.unit_count();
        for (std::size_t u = 0; u < n; ++u) units.push_back({i, u});
    }
    return units;
}

std::size_t Network::prunable_unit_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) n += layer.spec.unit_count();
    return n;
}

bool Network::is_prunable_layer(std::size_t layer_index) const {
    return layer_index < layers.size() && layers[layer_index].spec.unit_count() > 0;
}

std::size_t Network::classifier_layer() const {
    for (std::size_t i = layers.size(); i > 0; --i) {
        if (layers[i - 1].spec.has_params()) return i - 1;
    }
    throw config_error("network has no parameterized layer");
}

std::size_t Network::logit_layer() const {
    std::size_t last = layers.size() - 1;
    if (layers[last].spec.kind == LayerKind::softmax_output) {
        if (last == 0) throw config_error("network is only a softmax layer");
        return last - 1;
    }
    return last;
}

bool Network::params_equal(const Network& other) const {
    if (layers.size() != other.layers.size()) return false;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (!(layers[i].weights == other.layers[i].weights)) return false;
        if (!(layers[i].bias == other.layers[i].bias)) return false;
    }
    return true;
}

}  // namespace prunekit

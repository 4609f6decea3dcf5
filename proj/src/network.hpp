#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace prunekit {

enum class LayerKind { dense, conv2d, relu, maxpool2d, flatten, softmax_output };

std::string layer_kind_name(LayerKind kind);
LayerKind layer_kind_from_name(const std::string& name);

struct LayerSpec {
    LayerKind kind = LayerKind::relu;

    // dense
    std::size_t in_units = 0;
    std::size_t out_units = 0;

    // conv2d
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::size_t kernel_h = 0;
    std::size_t kernel_w = 0;
    std::size_t pad = 0;

    // conv2d and maxpool2d
    std::size_t stride = 1;

    // maxpool2d
    std::size_t window = 0;

    static LayerSpec dense(std::size_t in, std::size_t out);
    static LayerSpec conv2d(std::size_t in_c, std::size_t out_c, std::size_t kh, std::size_t kw,
                            std::size_t stride = 1, std::size_t pad = 0);
    static LayerSpec relu();
    static LayerSpec maxpool2d(std::size_t window, std::size_t stride);
    static LayerSpec flatten();
    static LayerSpec softmax_output();

    bool has_params() const { return kind == LayerKind::dense || kind == LayerKind::conv2d; }
    // Prunable units: dense output units and conv output channels.
    std::size_t unit_count() const;
};

struct Layer {
    LayerSpec spec;
    Tensor weights;  // dense: [out, in]; conv2d: [out_c, in_c, kh, kw]
    Tensor bias;     // dense: [out]; conv2d: [out_c]
    std::vector<std::size_t> in_shape;
    std::vector<std::size_t> out_shape;
};

// Identifies one prunable unit: a dense output unit or a conv output channel.
struct UnitId {
    std::size_t layer = 0;
    std::size_t unit = 0;

    auto operator<=>(const UnitId&) const = default;
};

struct Network {
    std::vector<Layer> layers;
    std::vector<std::size_t> input_shape;
    std::size_t class_count = 0;
    std::map<std::string, std::string> metadata;

    // Builds the network with zero parameters, validating layer-to-layer
    // shape compatibility. Throws config_error on an incompatible stack.
    static Network build(const std::vector<LayerSpec>& specs,
                         const std::vector<std::size_t>& input_shape, std::size_t class_count);

    // Fan-in scaled uniform initialization of all weights, seeded.
    void init_params(std::uint64_t seed);

    std::vector<UnitId> prunable_units() const;
    std::size_t prunable_unit_count() const;
    bool is_prunable_layer(std::size_t layer_index) const;

    // Index of the final classifier layer (the last parameterized layer).
    std::size_t classifier_layer() const;

    // Index of the layer producing the logits (last non-softmax layer).
    std::size_t logit_layer() const;

    bool params_equal(const Network& other) const;
};

}  // namespace prunekit

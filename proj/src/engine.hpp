#pragma once

#include "mask.hpp"
#include "network.hpp"
#include "tensor.hpp"

namespace prunekit {

// Per-layer activations of one forward pass. Recorded tensors share the
// invariant outputs[i] == inputs[i + 1].
struct ForwardTrace {
    std::vector<Tensor> inputs;
    std::vector<Tensor> outputs;
    Tensor logits;
    Tensor probs;
    bool recorded = false;
};

struct BackwardResult {
    std::vector<Tensor> weight_grads;
    std::vector<Tensor> bias_grads;
    // Gradient of the scalar objective with respect to each layer's output
    // activations (empty tensor for the softmax-output layer).
    std::vector<Tensor> output_grads;
    Tensor input_grad;
};

// Runs the network. When record is set, all intermediate activations are
// kept for backward/attribution passes.
ForwardTrace forward(const Network& net, const Tensor& input, bool record);

// Forward pass with the masked units' output activations forced to exactly
// zero. An empty mask reproduces forward bit for bit.
ForwardTrace masked_forward(const Network& net, const Tensor& input, const PruningMask& mask,
                            bool record = false);

// Gradient of (output_grad . logits) with respect to all parameters, all
// layer outputs, and the network input. Requires a recorded trace.
BackwardResult backward(const Network& net, const ForwardTrace& trace, const Tensor& output_grad);

Tensor softmax(const Tensor& logits);

}  // namespace prunekit

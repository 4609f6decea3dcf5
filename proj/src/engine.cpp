#include "engine.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace prunekit {

namespace {

void apply_dense(const Layer& layer, const Tensor& in, Tensor& out) {
    const std::size_t n_out = layer.spec.out_units;
    const std::size_t n_in = layer.spec.in_units;
    const double* w = layer.weights.data();
    for (std::size_t o = 0; o < n_out; ++o) {
        double acc = layer.bias[o];
        const double* row = w + o * n_in;
        for (std::size_t i = 0; i < n_in; ++i) acc += row[i] * in[i];
        out[o] = acc;
    }
}

void apply_conv2d(const Layer& layer, const Tensor& in, Tensor& out) {
    const auto& s = layer.spec;
    const std::size_t in_h = layer.in_shape[1], in_w = layer.in_shape[2];
    const std::size_t out_h = layer.out_shape[1], out_w = layer.out_shape[2];
    const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(s.pad);
    for (std::size_t oc = 0; oc < s.out_channels; ++oc) {
        for (std::size_t oy = 0; oy < out_h; ++oy) {
            for (std::size_t ox = 0; ox < out_w; ++ox) {
                double acc = layer.bias[oc];
                for (std::size_t ic = 0; ic < s.in_channels; ++ic) {
                    for (std::size_t ky = 0; ky < s.kernel_h; ++ky) {
                        const std::ptrdiff_t iy =
                            static_cast<std::ptrdiff_t>(oy * s.stride + ky) - pad;
                        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(in_h)) continue;
                        for (std::size_t kx = 0; kx < s.kernel_w; ++kx) {
                            const std::ptrdiff_t ix =
                                static_cast<std::ptrdiff_t>(ox * s.stride + kx) - pad;
                            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(in_w)) continue;
                            acc += layer.weights[((oc * s.in_channels + ic) * s.kernel_h + ky) *
                                                     s.kernel_w +
                                                 kx] *
                                   in.at(ic, static_cast<std::size_t>(iy),
                                         static_cast<std::size_t>(ix));
                        }
                    }
                }
                out.at(oc, oy, ox) = acc;
            }
        }
    }
}

void apply_maxpool(const Layer& layer, const Tensor& in, Tensor& out) {
    const auto& s = layer.spec;
    const std::size_t channels = layer.in_shape[0];
    const std::size_t out_h = layer.out_shape[1], out_w = layer.out_shape[2];
    for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t oy = 0; oy < out_h; ++oy) {
            for (std::size_t ox = 0; ox < out_w; ++ox) {
                double best = -std::numeric_limits<double>::infinity();
                for (std::size_t ky = 0; ky < s.window; ++ky) {
                    for (std::size_t kx = 0; kx < s.window; ++kx) {
                        best = std::max(best, in.at(c, oy * s.stride + ky, ox * s.stride + kx));
                    }
                }
                out.at(c, oy, ox) = best;
            }
        }
    }
}

}  // namespace

Tensor softmax(const Tensor& logits) {
    Tensor probs(logits.shape());
    double maxv = logits[0];
    for (std::size_t i = 1; i < logits.size(); ++i) maxv = std::max(maxv, logits[i]);
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        probs[i] = std::exp(logits[i] - maxv);
        total += probs[i];
    }
    for (std::size_t i = 0; i < probs.size(); ++i) probs[i] /= total;
    return probs;
}

ForwardTrace masked_forward(const Network& net, const Tensor& input, const PruningMask& mask,
                            bool record) {
    if (input.shape() != net.input_shape) {
        throw data_error("layer 0: input shape " + input.shape_string() +
                         " does not match expected " + Tensor(net.input_shape).shape_string());
    }
    const auto flags = mask_layer_flags(net, mask);

    ForwardTrace trace;
    trace.recorded = record;
    Tensor act = input;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const Layer& layer = net.layers[i];
        Tensor out(layer.out_shape);
        switch (layer.spec.kind) {
            case LayerKind::dense:
                apply_dense(layer, act, out);
                break;
            case LayerKind::conv2d:
                apply_conv2d(layer, act, out);
                break;
            case LayerKind::relu:
                for (std::size_t k = 0; k < act.size(); ++k) out[k] = act[k] > 0.0 ? act[k] : 0.0;
                break;
            case LayerKind::maxpool2d:
                apply_maxpool(layer, act, out);
                break;
            case LayerKind::flatten:
                out = act.reshaped(layer.out_shape);
                break;
            case LayerKind::softmax_output:
                out = softmax(act);
                break;
        }

        if (!mask.empty() && layer.spec.unit_count() > 0) {
            const auto& layer_flags = flags[i];
            if (layer.spec.kind == LayerKind::dense) {
                for (std::size_t u = 0; u < layer_flags.size(); ++u) {
                    if (layer_flags[u]) out[u] = 0.0;
                }
            } else {
                const std::size_t plane = layer.out_shape[1] * layer.out_shape[2];
                for (std::size_t u = 0; u < layer_flags.size(); ++u) {
                    if (!layer_flags[u]) continue;
                    for (std::size_t k = 0; k < plane; ++k) out[u * plane + k] = 0.0;
                }
            }
        }

        if (layer.spec.kind == LayerKind::softmax_output) {
            trace.probs = out;
        }
        if (i == net.logit_layer()) trace.logits = out;
        if (record) {
            trace.inputs.push_back(act);
            trace.outputs.push_back(out);
        }
        act = std::move(out);
    }
    if (trace.probs.empty()) trace.probs = softmax(trace.logits);
    if (!trace.logits.all_finite()) throw runtime_error("forward produced non-finite logits");
    return trace;
}

ForwardTrace forward(const Network& net, const Tensor& input, bool record) {
    return masked_forward(net, input, PruningMask{}, record);
}

BackwardResult backward(const Network& net, const ForwardTrace& trace, const Tensor& output_grad) {
    if (!trace.recorded || trace.inputs.size() != net.layers.size()) {
        throw data_error("backward requires a trace recorded with activations");
    }
    if (output_grad.shape() != std::vector<std::size_t>{net.class_count}) {
        throw data_error("output_grad must have length class_count");
    }

    BackwardResult result;
    result.weight_grads.resize(net.layers.size());
    result.bias_grads.resize(net.layers.size());
    result.output_grads.resize(net.layers.size());

    const std::size_t logit_idx = net.logit_layer();
    Tensor grad = output_grad;

    for (std::size_t i = logit_idx + 1; i-- > 0;) {
        const Layer& layer = net.layers[i];
        const Tensor& in = trace.inputs[i];
        result.output_grads[i] = grad;
        Tensor gin(layer.in_shape);
        switch (layer.spec.kind) {
            case LayerKind::dense: {
                const auto& s = layer.spec;
                Tensor wg(layer.weights.shape());
                Tensor bg(layer.bias.shape());
                for (std::size_t o = 0; o < s.out_units; ++o) {
                    const double g = grad[o];
                    bg[o] = g;
                    const double* row = layer.weights.data() + o * s.in_units;
                    double* wrow = wg.data() + o * s.in_units;
                    for (std::size_t k = 0; k < s.in_units; ++k) {
                        wrow[k] = g * in[k];
                        gin[k] += g * row[k];
                    }
                }
                result.weight_grads[i] = std::move(wg);
                result.bias_grads[i] = std::move(bg);
                break;
            }
            case LayerKind::conv2d: {
                const auto& s = layer.spec;
                Tensor wg(layer.weights.shape());
                Tensor bg(layer.bias.shape());
                const std::size_t in_h = layer.in_shape[1], in_w = layer.in_shape[2];
                const std::size_t out_h = layer.out_shape[1], out_w = layer.out_shape[2];
                const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(s.pad);
                for (std::size_t oc = 0; oc < s.out_channels; ++oc) {
                    for (std::size_t oy = 0; oy < out_h; ++oy) {
                        for (std::size_t ox = 0; ox < out_w; ++ox) {
                            const double g = grad.at(oc, oy, ox);
                            bg[oc] += g;
                            for (std::size_t ic = 0; ic < s.in_channels; ++ic) {
                                for (std::size_t ky = 0; ky < s.kernel_h; ++ky) {
                                    const std::ptrdiff_t iy =
                                        static_cast<std::ptrdiff_t>(oy * s.stride + ky) - pad;
                                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(in_h)) continue;
                                    for (std::size_t kx = 0; kx < s.kernel_w; ++kx) {
                                        const std::ptrdiff_t ix =
                                            static_cast<std::ptrdiff_t>(ox * s.stride + kx) - pad;
                                        if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(in_w))
                                            continue;
                                        const std::size_t widx =
                                            ((oc * s.in_channels + ic) * s.kernel_h + ky) *
                                                s.kernel_w +
                                            kx;
                                        wg[widx] += g * in.at(ic, static_cast<std::size_t>(iy),
                                                              static_cast<std::size_t>(ix));
                                        gin.at(ic, static_cast<std::size_t>(iy),
                                               static_cast<std::size_t>(ix)) +=
                                            g * layer.weights[widx];
                                    }
                                }
                            }
                        }
                    }
                }
                result.weight_grads[i] = std::move(wg);
                result.bias_grads[i] = std::move(bg);
                break;
            }
            case LayerKind::relu:
                for (std::size_t k = 0; k < in.size(); ++k) {
                    gin[k] = in[k] > 0.0 ? grad[k] : 0.0;
                }
                break;
            case LayerKind::maxpool2d: {
                const auto& s = layer.spec;
                const std::size_t channels = layer.in_shape[0];
                const std::size_t out_h = layer.out_shape[1], out_w = layer.out_shape[2];
                for (std::size_t c = 0; c < channels; ++c) {
                    for (std::size_t oy = 0; oy < out_h; ++oy) {
                        for (std::size_t ox = 0; ox < out_w; ++ox) {
                            double best = -std::numeric_limits<double>::infinity();
                            std::size_t by = 0, bx = 0;
                            for (std::size_t ky = 0; ky < s.window; ++ky) {
                                for (std::size_t kx = 0; kx < s.window; ++kx) {
                                    const double v =
                                        in.at(c, oy * s.stride + ky, ox * s.stride + kx);
                                    if (v > best) {
                                        best = v;
                                        by = oy * s.stride + ky;
                                        bx = ox * s.stride + kx;
                                    }
                                }
                            }
                            gin.at(c, by, bx) += grad.at(c, oy, ox);
                        }
                    }
                }
                break;
            }
            case LayerKind::flatten:
                gin = grad.reshaped(layer.in_shape);
                break;
            case LayerKind::softmax_output:
                throw runtime_error("softmax-output cannot appear below the logit layer");
        }
        grad = std::move(gin);
    }

    result.input_grad = std::move(grad);
    return result;
}

}  // namespace prunekit

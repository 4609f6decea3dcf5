#include "trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "engine.hpp"
#include "error.hpp"

namespace prunekit {

namespace {

constexpr std::uint64_t kShuffleTag = 0x51;
constexpr std::uint64_t kAugmentTag = 0xa9;

constexpr double kPi = 3.141592653589793238462643383279;

}  // namespace

void AugmentConfig::validate() const {
    if (rotation_max_deg < 0.0 || rotation_max_deg > 30.0) {
        throw config_error("rotation_max_deg must be in [0, 30]");
    }
    if (crop_scale_min > crop_scale_max || crop_scale_min <= 0.0) {
        throw config_error("crop scale range is invalid");
    }
    if (crop_aspect_min > crop_aspect_max || crop_aspect_min <= 0.0) {
        throw config_error("crop aspect range is invalid");
    }
}

void TrainConfig::validate() const {
    if (batch_size == 0) throw config_error("batch_size must be positive");
    if (learning_rate <= 0.0) throw config_error("learning_rate must be positive");
    if (lr_decay_factor <= 0.0 || lr_decay_factor > 1.0) {
        throw config_error("lr_decay_factor must be in (0, 1]");
    }
    if (lr_decay_every == 0) throw config_error("lr_decay_every must be positive");
    augmentation.validate();
}

ClassWeights compute_class_weights(const std::vector<std::size_t>& labels,
                                   std::size_t class_count) {
    std::vector<std::size_t> counts(class_count, 0);
    for (std::size_t l : labels) {
        if (l >= class_count) throw data_error("label " + std::to_string(l) + " out of range");
        ++counts[l];
    }
    ClassWeights w;
    w.weights.resize(class_count);
    const double n = static_cast<double>(labels.size());
    for (std::size_t c = 0; c < class_count; ++c) {
        if (counts[c] == 0) {
            throw data_error("class " + std::to_string(c) + " has no samples");
        }
        w.weights[c] = n / (static_cast<double>(class_count) * static_cast<double>(counts[c]));
    }
    return w;
}

double weighted_cross_entropy(const Tensor& probs, std::size_t target, const ClassWeights& w) {
    if (target >= probs.size()) throw runtime_error("target class out of range");
    double total = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] < 0.0) throw runtime_error("probabilities must be non-negative");
        total += probs[i];
    }
    if (std::abs(total - 1.0) > 1e-6) throw runtime_error("probabilities must sum to 1");
    return -w[target] * std::log(std::max(probs[target], 1e-12));
}

Tensor wce_logit_gradient(const Tensor& probs, std::size_t target, const ClassWeights& w) {
    Tensor grad = probs;
    grad[target] -= 1.0;
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= w[target];
    return grad;
}

double lr_at_epoch(const TrainConfig& config, std::size_t epoch) {
    const std::size_t steps = epoch / config.lr_decay_every;
    return config.learning_rate * std::pow(config.lr_decay_factor, static_cast<double>(steps));
}

namespace {

double bilinear(const Tensor& img, std::size_t c, double fy, double fx) {
    const auto h = static_cast<std::ptrdiff_t>(img.dim(1));
    const auto w = static_cast<std::ptrdiff_t>(img.dim(2));
    const std::ptrdiff_t y0 = static_cast<std::ptrdiff_t>(std::floor(fy));
    const std::ptrdiff_t x0 = static_cast<std::ptrdiff_t>(std::floor(fx));
    const double wy = fy - static_cast<double>(y0);
    const double wx = fx - static_cast<double>(x0);

    auto pixel = [&](std::ptrdiff_t y, std::ptrdiff_t x) -> double {
        if (y < 0 || y >= h || x < 0 || x >= w) return 0.0;  // zero fill
        return img.at(c, static_cast<std::size_t>(y), static_cast<std::size_t>(x));
    };
    return (1.0 - wy) * ((1.0 - wx) * pixel(y0, x0) + wx * pixel(y0, x0 + 1)) +
           wy * ((1.0 - wx) * pixel(y0 + 1, x0) + wx * pixel(y0 + 1, x0 + 1));
}

}  // namespace

Tensor augment_sample(const Tensor& sample, const AugmentConfig& config, Rng& rng) {
    if (sample.rank() != 3 || sample.dim(1) < 2 || sample.dim(2) < 2) return sample;
    const std::size_t channels = sample.dim(0);
    const std::size_t height = sample.dim(1);
    const std::size_t width = sample.dim(2);

    // Random resized crop.
    const double scale = rng.uniform(config.crop_scale_min, config.crop_scale_max);
    const double aspect = rng.uniform(config.crop_aspect_min, config.crop_aspect_max);
    const double area = scale * static_cast<double>(height) * static_cast<double>(width);
    std::size_t crop_h = static_cast<std::size_t>(std::lround(std::sqrt(area / aspect)));
    std::size_t crop_w = static_cast<std::size_t>(std::lround(std::sqrt(area * aspect)));
    crop_h = std::clamp<std::size_t>(crop_h, 1, height);
    crop_w = std::clamp<std::size_t>(crop_w, 1, width);
    const std::size_t top = static_cast<std::size_t>(rng.below(height - crop_h + 1));
    const std::size_t left = static_cast<std::size_t>(rng.below(width - crop_w + 1));

    Tensor cropped({channels, height, width});
    for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t y = 0; y < height; ++y) {
            for (std::size_t x = 0; x < width; ++x) {
                const double fy = static_cast<double>(top) +
                                  (static_cast<double>(y) + 0.5) *
                                      (static_cast<double>(crop_h) / static_cast<double>(height)) -
                                  0.5;
                const double fx = static_cast<double>(left) +
                                  (static_cast<double>(x) + 0.5) *
                                      (static_cast<double>(crop_w) / static_cast<double>(width)) -
                                  0.5;
                cropped.at(c, y, x) = bilinear(sample, c, fy, fx);
            }
        }
    }

    const bool hflip = config.enable_hflip && rng.uniform() < 0.5;
    const bool vflip = config.enable_vflip && rng.uniform() < 0.5;
    if (hflip || vflip) {
        Tensor flipped({channels, height, width});
        for (std::size_t c = 0; c < channels; ++c) {
            for (std::size_t y = 0; y < height; ++y) {
                for (std::size_t x = 0; x < width; ++x) {
                    const std::size_t sy = vflip ? height - 1 - y : y;
                    const std::size_t sx = hflip ? width - 1 - x : x;
                    flipped.at(c, y, x) = cropped.at(c, sy, sx);
                }
            }
        }
        cropped = std::move(flipped);
    }

    if (config.rotation_max_deg > 0.0) {
        const double angle =
            rng.uniform(-config.rotation_max_deg, config.rotation_max_deg) * kPi / 180.0;
        const double cos_a = std::cos(angle);
        const double sin_a = std::sin(angle);
        const double cy = (static_cast<double>(height) - 1.0) / 2.0;
        const double cx = (static_cast<double>(width) - 1.0) / 2.0;
        Tensor rotated({channels, height, width});
        for (std::size_t c = 0; c < channels; ++c) {
            for (std::size_t y = 0; y < height; ++y) {
                for (std::size_t x = 0; x < width; ++x) {
                    const double dy = static_cast<double>(y) - cy;
                    const double dx = static_cast<double>(x) - cx;
                    // inverse rotation of the output grid
                    const double fy = cy + cos_a * dy + sin_a * dx;
                    const double fx = cx - sin_a * dy + cos_a * dx;
                    rotated.at(c, y, x) = bilinear(cropped, c, fy, fx);
                }
            }
        }
        cropped = std::move(rotated);
    }
    return cropped;
}

namespace {

struct AdamState {
    std::vector<Tensor> m_w, v_w, m_b, v_b;
    std::size_t step = 0;

    explicit AdamState(const Network& net) {
        for (const auto& layer : net.layers) {
            m_w.push_back(zeros_like(layer.weights));
            v_w.push_back(zeros_like(layer.weights));
            m_b.push_back(zeros_like(layer.bias));
            v_b.push_back(zeros_like(layer.bias));
        }
    }

    void update(Network& net, const std::vector<Tensor>& wg, const std::vector<Tensor>& bg,
                double lr) {
        ++step;
        const double bc1 = 1.0 - std::pow(TrainConfig::kBeta1, static_cast<double>(step));
        const double bc2 = 1.0 - std::pow(TrainConfig::kBeta2, static_cast<double>(step));
        for (std::size_t i = 0; i < net.layers.size(); ++i) {
            if (!net.layers[i].spec.has_params()) continue;
            apply(net.layers[i].weights, wg[i], m_w[i], v_w[i], lr, bc1, bc2);
            apply(net.layers[i].bias, bg[i], m_b[i], v_b[i], lr, bc1, bc2);
        }
    }

private:
    static void apply(Tensor& param, const Tensor& grad, Tensor& m, Tensor& v, double lr,
                      double bc1, double bc2) {
        for (std::size_t k = 0; k < param.size(); ++k) {
            m[k] = TrainConfig::kBeta1 * m[k] + (1.0 - TrainConfig::kBeta1) * grad[k];
            v[k] = TrainConfig::kBeta2 * v[k] + (1.0 - TrainConfig::kBeta2) * grad[k] * grad[k];
            const double m_hat = m[k] / bc1;
            const double v_hat = v[k] / bc2;
            param[k] -= lr * m_hat / (std::sqrt(v_hat) + TrainConfig::kEpsilon);
        }
    }
};

double split_accuracy(const Network& net, const Dataset& dataset, const Normalization& norm,
                      Split split) {
    std::size_t correct = 0, total = 0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (dataset.splits[i] != split) continue;
        const ForwardTrace trace = forward(net, norm.apply(dataset.samples[i]), false);
        std::size_t best = 0;
        for (std::size_t k = 1; k < trace.logits.size(); ++k) {
            if (trace.logits[k] > trace.logits[best]) best = k;
        }
        correct += (best == dataset.labels[i]) ? 1 : 0;
        ++total;
    }
    return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace

TrainResult train(Network network, const Dataset& dataset, const TrainConfig& config) {
    config.validate();
    dataset.validate();
    if (dataset.sample_shape() != network.input_shape) {
        throw data_error("dataset sample shape " + Tensor(dataset.sample_shape()).shape_string() +
                         " does not match network input " +
                         Tensor(network.input_shape).shape_string());
    }

    TrainResult result;
    if (config.epochs == 0) {
        result.network = std::move(network);
        return result;
    }

    const std::vector<std::size_t> train_ids = dataset.indices_of(Split::train);
    if (train_ids.empty()) throw data_error("dataset has no training samples");
    std::vector<std::size_t> train_labels;
    for (std::size_t i : train_ids) train_labels.push_back(dataset.labels[i]);
    const ClassWeights class_weights = compute_class_weights(train_labels, network.class_count);
    const Normalization norm = dataset.fit_normalization();

    AdamState adam(network);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const double lr = lr_at_epoch(config, epoch);
        std::vector<std::size_t> order = train_ids;
        Rng shuffle_rng = Rng::derive(config.seed, kShuffleTag, epoch);
        shuffle_rng.shuffle(order);

        double epoch_loss = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            const double batch_n = static_cast<double>(end - start);

            std::vector<Tensor> wg, bg;
            for (const auto& layer : network.layers) {
                wg.push_back(zeros_like(layer.weights));
                bg.push_back(zeros_like(layer.bias));
            }

            double batch_loss = 0.0;
            for (std::size_t k = start; k < end; ++k) {
                const std::size_t id = order[k];
                Tensor sample = dataset.samples[id];
                if (config.augment) {
                    Rng aug_rng = Rng::derive(config.seed, kAugmentTag, epoch, id);
                    sample = augment_sample(sample, config.augmentation, aug_rng);
                }
                sample = norm.apply(sample);

                const ForwardTrace trace = forward(network, sample, true);
                batch_loss +=
                    weighted_cross_entropy(trace.probs, dataset.labels[id], class_weights);

                Tensor dlogits = wce_logit_gradient(trace.probs, dataset.labels[id], class_weights);
                for (auto& g : dlogits.values()) g /= batch_n;
                const BackwardResult grads = backward(network, trace, dlogits);
                for (std::size_t li = 0; li < network.layers.size(); ++li) {
                    if (!network.layers[li].spec.has_params()) continue;
                    for (std::size_t p = 0; p < wg[li].size(); ++p) {
                        wg[li][p] += grads.weight_grads[li][p];
                    }
                    for (std::size_t p = 0; p < bg[li].size(); ++p) {
                        bg[li][p] += grads.bias_grads[li][p];
                    }
                }
            }
            batch_loss /= batch_n;
            if (!std::isfinite(batch_loss)) {
                throw runtime_error("training diverged: non-finite loss at epoch " +
                                    std::to_string(epoch) + ", batch " +
                                    std::to_string(batch_index));
            }
            epoch_loss += batch_loss * batch_n;
            adam.update(network, wg, bg, lr);
            ++batch_index;
        }

        EpochMetrics m;
        m.epoch = epoch;
        m.lr = lr;
        m.train_loss = epoch_loss / static_cast<double>(order.size());
        m.val_accuracy = split_accuracy(network, dataset, norm, Split::val);
        result.metrics.push_back(m);
    }

    result.network = std::move(network);
    return result;
}

void write_metrics_csv(const std::vector<EpochMetrics>& metrics, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write metrics '" + path + "'");
    out << "epoch,lr,train_loss,val_accuracy\n";
    char buf[160];
    for (const auto& m : metrics) {
        std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g,%.12g\n", m.epoch, m.lr, m.train_loss,
                      m.val_accuracy);
        out << buf;
    }
}

}  // namespace prunekit

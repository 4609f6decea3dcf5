#pragma once

#include <cstdint>
#include <vector>

#include "dataset.hpp"
#include "network.hpp"
#include "rng.hpp"

namespace prunekit {

struct AugmentConfig {
    bool enable_hflip = true;
    bool enable_vflip = true;
    double rotation_max_deg = 30.0;
    double crop_scale_min = 0.7;
    double crop_scale_max = 1.0;
    double crop_aspect_min = 0.75;
    double crop_aspect_max = 1.33;

    void validate() const;
};

struct TrainConfig {
    std::size_t epochs = 30;
    std::size_t batch_size = 32;
    double learning_rate = 0.001;
    double lr_decay_factor = 0.1;
    std::size_t lr_decay_every = 10;
    std::uint64_t seed = 0;
    bool augment = true;
    AugmentConfig augmentation;

    // Adam moments are fixed, not configurable.
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEpsilon = 1e-8;

    void validate() const;
};

struct ClassWeights {
    std::vector<double> weights;

    double operator[](std::size_t c) const { return weights[c]; }
    std::size_t size() const { return weights.size(); }
};

struct EpochMetrics {
    std::size_t epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    double val_accuracy = 0.0;
};

struct TrainResult {
    Network network;
    std::vector<EpochMetrics> metrics;
};

// Inverse-frequency weights: w_c = N / (class_count * n_c).
ClassWeights compute_class_weights(const std::vector<std::size_t>& labels,
                                   std::size_t class_count);

// loss = -weights[target] * ln(max(probs[target], 1e-12))
double weighted_cross_entropy(const Tensor& probs, std::size_t target, const ClassWeights& w);

// Gradient of the loss above with respect to the logits feeding softmax.
Tensor wce_logit_gradient(const Tensor& probs, std::size_t target, const ClassWeights& w);

double lr_at_epoch(const TrainConfig& config, std::size_t epoch);

// Augments one (c, h, w) sample: resized crop, flips, rotation, all bilinear
// with zero fill. Flat samples pass through untouched. Draws come only from
// the supplied stream, so results are indexable by (epoch, sample).
Tensor augment_sample(const Tensor& sample, const AugmentConfig& config, Rng& rng);

// Adam on weighted cross-entropy over the training split. Fully
// deterministic given (network, dataset, config).
TrainResult train(Network network, const Dataset& dataset, const TrainConfig& config);

void write_metrics_csv(const std::vector<EpochMetrics>& metrics, const std::string& path);

}  // namespace prunekit

#pragma once

#include <cstdint>

#include "dataset.hpp"

namespace prunekit {

struct SyntheticConfig {
    std::size_t class_count = 4;
    std::size_t per_class = 100;
    std::size_t image_size = 16;
    std::size_t channels = 1;
    double noise = 0.1;
    std::uint64_t seed = 0;
};

// Renders one geometric pattern family per class (bars, disk, diagonals,
// ring) with small seeded position jitter plus Gaussian pixel noise.
// Deterministic per seed; split tags are 80/10/10 per class.
Dataset generate_synthetic(const SyntheticConfig& config);

}  // namespace prunekit

#include "synthetic.hpp"

#include <cmath>

#include "error.hpp"
#include "rng.hpp"

namespace prunekit {

namespace {

double pattern_value(std::size_t pattern, std::size_t y, std::size_t x, std::size_t size,
                     int jitter_y, int jitter_x) {
    const double cy = static_cast<double>(size - 1) / 2.0 + jitter_y;
    const double cx = static_cast<double>(size - 1) / 2.0 + jitter_x;
    const double band = std::max<double>(1.0, static_cast<double>(size) / 8.0);
    const double dy = static_cast<double>(y) - cy;
    const double dx = static_cast<double>(x) - cx;
    switch (pattern % 6) {
        case 0:  // horizontal bar
            return std::abs(dy) <= band ? 1.0 : 0.0;
        case 1:  // vertical bar
            return std::abs(dx) <= band ? 1.0 : 0.0;
        case 2:  // filled disk
            return std::sqrt(dy * dy + dx * dx) <= static_cast<double>(size) / 4.0 ? 1.0 : 0.0;
        case 3:  // main diagonal band
            return std::abs(dy - dx) <= band ? 1.0 : 0.0;
        case 4:  // anti-diagonal band
            return std::abs(dy + dx) <= band ? 1.0 : 0.0;
        default: {  // ring
            const double r = std::sqrt(dy * dy + dx * dx);
            const double target = static_cast<double>(size) / 3.0;
            return std::abs(r - target) <= band ? 1.0 : 0.0;
        }
    }
}

}  // namespace

Dataset generate_synthetic(const SyntheticConfig& config) {
    if (config.class_count == 0 || config.per_class == 0 || config.image_size == 0 ||
        config.channels == 0) {
        throw config_error("synthetic dataset counts must be positive");
    }
    if (config.noise < 0.0) throw config_error("synthetic noise must be >= 0");

    const std::size_t size = config.image_size;
    Dataset ds;
    for (std::size_t c = 0; c < config.class_count; ++c) {
        ds.class_names.push_back("pattern" + std::to_string(c));
    }

    for (std::size_t c = 0; c < config.class_count; ++c) {
        const std::size_t n = config.per_class;
        const std::size_t n_train = n * 8 / 10;
        const std::size_t n_val = n * 9 / 10 - n_train;
        for (std::size_t k = 0; k < n; ++k) {
            Rng rng = Rng::derive(config.seed, c, k);
            const int jy = static_cast<int>(rng.below(3)) - 1;
            const int jx = static_cast<int>(rng.below(3)) - 1;

            Tensor img({config.channels, size, size});
            for (std::size_t ch = 0; ch < config.channels; ++ch) {
                for (std::size_t y = 0; y < size; ++y) {
                    for (std::size_t x = 0; x < size; ++x) {
                        double v = pattern_value(c, y, x, size, jy, jx);
                        if (config.noise > 0.0) v += config.noise * rng.normal();
                        img.at(ch, y, x) = v;
                    }
                }
            }
            ds.samples.push_back(std::move(img));
            ds.labels.push_back(c);
            if (k < n_train) {
                ds.splits.push_back(Split::train);
            } else if (k < n_train + n_val) {
                ds.splits.push_back(Split::val);
            } else {
                ds.splits.push_back(Split::test);
            }
        }
    }
    ds.validate();
    return ds;
}

}  // namespace prunekit

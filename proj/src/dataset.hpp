#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace prunekit {

enum class Split { train = 0, val = 1, test = 2 };

// Per-channel affine normalization fitted on the training split.
struct Normalization {
    std::vector<double> mean;
    std::vector<double> stddev;

    Tensor apply(const Tensor& sample) const;
};

struct Dataset {
    std::vector<Tensor> samples;  // each [c, h, w] or flat [d]
    std::vector<std::size_t> labels;
    std::vector<Split> splits;
    std::vector<std::string> class_names;

    std::size_t size() const { return samples.size(); }
    std::size_t class_count() const { return class_names.size(); }
    const std::vector<std::size_t>& sample_shape() const;

    std::vector<std::size_t> indices_of(Split split) const;
    std::size_t count_of(Split split) const;

    // Mean/std per channel over the training split (flat samples are treated
    // as one channel per dimension). Zero variance falls back to std 1.
    Normalization fit_normalization() const;

    // Assigns 80/10/10 split tags per class by seeded shuffle. Used when a
    // container carries no explicit splits.
    void assign_splits(std::uint64_t seed);

    void validate() const;
};

inline constexpr const char* kDatasetFormat = "nds/1";

void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

// Loads a directory holding train.csv / val.csv / test.csv (rows of
// "label, v0, v1, ...") and an optional classes.txt with one name per line.
Dataset load_csv_dir(const std::string& dir);

}  // namespace prunekit

#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace prunekit {

// Dense row-major tensor of 64-bit floats.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape);
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t i) const { return shape_[i]; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // 3-D accessors for (channel, row, col) layouts.
    double& at(std::size_t c, std::size_t y, std::size_t x) {
        return data_[(c * shape_[1] + y) * shape_[2] + x];
    }
    double at(std::size_t c, std::size_t y, std::size_t x) const {
        return data_[(c * shape_[1] + y) * shape_[2] + x];
    }

    Tensor reshaped(std::vector<std::size_t> new_shape) const;

    void fill(double v);
    double sum() const;
    bool all_finite() const;

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool operator==(const Tensor& other) const {
        return shape_ == other.shape_ && data_ == other.data_;
    }

    std::string shape_string() const;

    static std::size_t numel(const std::vector<std::size_t>& shape);

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

Tensor zeros_like(const Tensor& t);

}  // namespace prunekit

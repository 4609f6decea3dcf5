#include "tensor.hpp"

#include <cmath>
#include <sstream>

#include "error.hpp"

namespace prunekit {

std::size_t Tensor::numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return shape.empty() ? 0 : n;
}

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(numel(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (numel(shape_) != data_.size()) {
        throw runtime_error("tensor shape " + shape_string() + " does not match " +
                            std::to_string(data_.size()) + " elements");
    }
}

Tensor Tensor::reshaped(std::vector<std::size_t> new_shape) const {
    if (numel(new_shape) != data_.size()) {
        throw runtime_error("cannot reshape tensor of " + std::to_string(data_.size()) +
                            " elements");
    }
    return Tensor(std::move(new_shape), data_);
}

void Tensor::fill(double v) {
    for (auto& x : data_) x = v;
}

double Tensor::sum() const {
    double s = 0.0;
    for (double x : data_) s += x;
    return s;
}

bool Tensor::all_finite() const {
    for (double x : data_) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

std::string Tensor::shape_string() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) os << ", ";
        os << shape_[i];
    }
    os << "]";
    return os.str();
}

Tensor zeros_like(const Tensor& t) { return Tensor(t.shape()); }

}  // namespace prunekit

#include "pathmamba/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace pathmamba::nd {

Tensor::Tensor(int64_t rows, int64_t cols)
    : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows * cols), 0.0) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Tensor: negative extent");
}

Tensor::Tensor(int64_t rows, int64_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Tensor: negative extent");
    if (static_cast<int64_t>(data_.size()) != rows * cols) {
        throw std::invalid_argument("Tensor: value count " + std::to_string(data_.size()) +
                                    " does not match shape " + shape_str());
    }
}

Tensor Tensor::zeros(int64_t rows, int64_t cols) { return Tensor(rows, cols); }

Tensor Tensor::full(int64_t rows, int64_t cols, double value) {
    Tensor t(rows, cols);
    t.fill(value);
    return t;
}

Tensor Tensor::scalar(double value) { return Tensor(1, 1, {value}); }

std::string Tensor::shape_str() const {
    return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void Tensor::fill(double value) {
    for (double& v : data_) v = value;
}

}  // namespace pathmamba::nd

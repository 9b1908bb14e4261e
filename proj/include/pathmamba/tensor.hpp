#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pathmamba::nd {

// Dense row-major matrix of doubles. Everything in this project is rank 2;
// scalars are 1x1 and vectors are Nx1 or 1xN.
class Tensor {
public:
    Tensor() = default;
    Tensor(int64_t rows, int64_t cols);
    Tensor(int64_t rows, int64_t cols, std::vector<double> values);

    static Tensor zeros(int64_t rows, int64_t cols);
    static Tensor full(int64_t rows, int64_t cols, double value);
    static Tensor scalar(double value);

    int64_t rows() const { return rows_; }
    int64_t cols() const { return cols_; }
    int64_t numel() const { return rows_ * cols_; }
    bool empty() const { return numel() == 0; }
    bool same_shape(const Tensor& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_;
    }
    std::string shape_str() const;

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
    double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }
    double& at(int64_t r, int64_t c) { return data_[static_cast<size_t>(r * cols_ + c)]; }
    double at(int64_t r, int64_t c) const { return data_[static_cast<size_t>(r * cols_ + c)]; }

    const std::vector<double>& values() const { return data_; }

    bool all_finite() const;
    void fill(double value);

private:
    int64_t rows_ = 0;
    int64_t cols_ = 0;
    std::vector<double> data_;
};

}  // namespace pathmamba::nd

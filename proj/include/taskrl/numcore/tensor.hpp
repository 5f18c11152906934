#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "taskrl/errors.hpp"

namespace taskrl {

/// Dense row-major matrix of 64-bit floats. Vectors are 1xN.
/// Graph values are treated as immutable once written by their producing op.
class Tensor {
public:
    Tensor() = default;

    Tensor(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
        if (rows == 0 || cols == 0) throw DimensionError("Tensor: extents must be positive");
    }

    static Tensor full(std::size_t rows, std::size_t cols, double v) {
        Tensor t(rows, cols);
        for (auto& x : t.data_) x = v;
        return t;
    }

    static Tensor of(std::size_t rows, std::size_t cols, std::initializer_list<double> vals) {
        Tensor t(rows, cols);
        if (vals.size() != t.size())
            throw DimensionError("Tensor::of: " + std::to_string(vals.size()) + " values for " +
                                 t.shape_str());
        std::size_t i = 0;
        for (double v : vals) t.data_[i++] = v;
        return t;
    }

    static Tensor row(std::span<const double> vals) {
        Tensor t(1, vals.size());
        for (std::size_t i = 0; i < vals.size(); ++i) t.data_[i] = vals[i];
        return t;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool is_scalar() const { return rows_ == 1 && cols_ == 1; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::span<const double> flat() const { return {data_.data(), data_.size()}; }

    bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    std::string shape_str() const {
        return std::to_string(rows_) + "x" + std::to_string(cols_);
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

}  // namespace taskrl

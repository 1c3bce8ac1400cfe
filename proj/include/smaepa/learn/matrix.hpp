#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "smaepa/error.hpp"
#include "smaepa/labeling.hpp"

namespace smaepa::learn {

// Dense row-major design matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) throw DimensionError("matrix data does not match its shape");
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }

    void push_row(std::span<const double> r) {
        if (rows_ == 0 && cols_ == 0) cols_ = r.size();
        if (r.size() != cols_) throw DimensionError("row width does not match matrix");
        data_.insert(data_.end(), r.begin(), r.end());
        ++rows_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct TrainingSet {
    Matrix x;
    std::vector<int> y;
};

inline TrainingSet to_training_set(const std::vector<labeling::LabeledExample>& examples) {
    TrainingSet t;
    for (const auto& ex : examples) {
        t.x.push_row(ex.features.values());
        t.y.push_back(ex.label);
    }
    return t;
}

// Common preconditions of every trainer.
inline void check_training_input(const Matrix& x, const std::vector<int>& y, int q) {
    if (x.rows() == 0) throw InsufficientData("no training rows");
    if (x.rows() != y.size()) throw DimensionError("feature rows and labels differ in length");
    if (q < 2) throw ConfigError("need at least 2 classes");
    if (x.rows() < static_cast<std::size_t>(q)) throw InsufficientData("fewer training rows than classes");
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (double v : x.row(i))
            if (!std::isfinite(v)) throw DimensionError("non-finite feature value in row " + std::to_string(i));
    for (int label : y)
        if (label < 0 || label >= q) throw DimensionError("label " + std::to_string(label) + " outside 0.." + std::to_string(q - 1));
}

} // namespace smaepa::learn

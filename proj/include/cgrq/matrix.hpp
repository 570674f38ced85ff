#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cgrq {

/// Dense row-major matrix of doubles. Rows are samples throughout the library.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::vector<double> column(std::size_t j) const;
    const std::vector<double>& data() const { return data_; }

    Matrix select_rows(std::span<const std::size_t> indices) const;
    void append_row(std::span<const double> values);

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

double l2_norm(std::span<const double> v);
double euclidean_distance(std::span<const double> a, std::span<const double> b);

}  // namespace cgrq

#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace toolplan {

// Minimal dense row-major matrix. The policies in this project are small
// (tens of rows by tens of columns), so no BLAS backing is needed.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    void add_scaled(const Matrix& other, double s) {
        for (std::size_t i = 0; i < data.size(); ++i) data[i] += s * other.data[i];
    }

    void scale(double s) {
        for (double& x : data) x *= s;
    }

    bool all_finite() const {
        for (double x : data) {
            if (!std::isfinite(x)) return false;
        }
        return true;
    }

    double frobenius_norm() const {
        double acc = 0.0;
        for (double x : data) acc += x * x;
        return std::sqrt(acc);
    }

    bool same_shape(const Matrix& other) const {
        return rows == other.rows && cols == other.cols;
    }
};

}  // namespace toolplan

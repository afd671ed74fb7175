#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace anchored {

/// Dense row-major matrix of doubles. Rows are word types, columns dimensions.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c), data(static_cast<size_t>(r) * static_cast<size_t>(c), fill) {}

    double& operator()(int r, int c) {
        return data[static_cast<size_t>(r) * static_cast<size_t>(cols) + static_cast<size_t>(c)];
    }
    double operator()(int r, int c) const {
        return data[static_cast<size_t>(r) * static_cast<size_t>(cols) + static_cast<size_t>(c)];
    }
    double* row(int r) { return data.data() + static_cast<size_t>(r) * static_cast<size_t>(cols); }
    const double* row(int r) const {
        return data.data() + static_cast<size_t>(r) * static_cast<size_t>(cols);
    }
};

inline double dot(const double* a, const double* b, int n) {
    double s = 0.0;
    for (int i = 0; i < n; i++) s += a[i] * b[i];
    return s;
}

}  // namespace anchored

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "anchored/matrix.hpp"
#include "anchored/model.hpp"

namespace anchored {

struct AdamConfig {
    double learning_rate = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// First/second-moment state for one parameter matrix, with a per-row step
/// counter so sparse updates stay correctly bias-corrected.
struct AdamState {
    Matrix m;
    Matrix v;
    std::vector<int64_t> step;

    AdamState() = default;
    explicit AdamState(int rows, int cols)
        : m(rows, cols), v(rows, cols), step(static_cast<size_t>(rows), 0) {}
};

namespace detail {

// Ascent update of one row.
inline void adam_row(double* param, const double* grad, double* m, double* v, int64_t t,
                     int K, const AdamConfig& cfg) {
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    for (int k = 0; k < K; k++) {
        m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * grad[k];
        v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
        double m_hat = m[k] / bc1;
        double v_hat = v[k] / bc2;
        param[k] += cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
}

}  // namespace detail

/// Sparse Adam ascent step: only rows present in `grads` update their
/// moments, counters and values.
inline void adam_step(Matrix& params, const SparseGrad& grads, AdamState& state,
                      const AdamConfig& cfg) {
    const int K = params.cols;
    for (const auto& [row, g] : grads) {
        int64_t t = ++state.step[static_cast<size_t>(row)];
        detail::adam_row(params.row(row), g.data(), state.m.row(row), state.v.row(row), t, K, cfg);
    }
}

/// Dense Adam ascent step over every row.
inline void adam_step_dense(Matrix& params, const Matrix& grads, AdamState& state,
                            const AdamConfig& cfg) {
    const int K = params.cols;
    for (int r = 0; r < params.rows; r++) {
        int64_t t = ++state.step[static_cast<size_t>(r)];
        detail::adam_row(params.row(r), grads.row(r), state.m.row(r), state.v.row(r), t, K, cfg);
    }
}

}  // namespace anchored

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "anchored/anchors.hpp"
#include "anchored/matrix.hpp"

namespace anchored {

inline double gaussian_log_density(double x, double mean, double variance) {
    double d = x - mean;
    return -0.5 * std::log(2.0 * std::numbers::pi * variance) - d * d / (2.0 * variance);
}

enum class Role : unsigned char { Plain, Positive, Negative, Neutral };

/// Per-row role lookup compiled from an AnchorSpec.
inline std::vector<Role> compile_roles(const AnchorSpec& spec, int vocab_size) {
    std::vector<Role> roles(static_cast<size_t>(vocab_size), Role::Plain);
    if (spec.kind != PriorKind::None) {
        for (int v : spec.positive_ids) roles[static_cast<size_t>(v)] = Role::Positive;
        for (int v : spec.negative_ids) roles[static_cast<size_t>(v)] = Role::Negative;
    }
    if (spec.use_neutral)
        for (int v : spec.neutral_ids) roles[static_cast<size_t>(v)] = Role::Neutral;
    return roles;
}

/// Log prior density of one V x K parameter matrix (applies identically to
/// the embedding and the context matrix). Dimension K-1 is the interpretable
/// one. Truncated anchors must already satisfy the sign constraint.
inline double log_prior(const Matrix& theta, const AnchorSpec& spec) {
    const int K = theta.cols;
    const auto roles = compile_roles(spec, theta.rows);
    const double log2 = std::log(2.0);
    double total = 0.0;
    for (int v = 0; v < theta.rows; v++) {
        const double* row = theta.row(v);
        Role role = roles[static_cast<size_t>(v)];
        switch (role) {
            case Role::Plain:
                for (int k = 0; k < K; k++) total += gaussian_log_density(row[k], 0.0, spec.sigma);
                break;
            case Role::Neutral:
                for (int k = 0; k < K - 1; k++)
                    total += gaussian_log_density(row[k], 0.0, spec.sigma);
                total += gaussian_log_density(row[K - 1], 0.0, spec.psi);
                break;
            case Role::Positive:
            case Role::Negative: {
                for (int k = 0; k < K - 1; k++)
                    total += gaussian_log_density(row[k], 0.0, spec.omega);
                double x = row[K - 1];
                if (spec.kind == PriorKind::StandardBasis) {
                    double mean = role == Role::Positive ? 1.0 : -1.0;
                    total += gaussian_log_density(x, mean, spec.gamma);
                } else {  // truncated half-normal
                    bool ok = role == Role::Positive ? x > 0.0 : x < 0.0;
                    if (!ok)
                        throw std::domain_error("truncated prior support violated at row " +
                                                std::to_string(v));
                    total += gaussian_log_density(x, 0.0, spec.gamma) + log2;
                }
                break;
            }
        }
    }
    return total;
}

/// Entrywise gradient of log_prior. Truncated terms use the interior
/// Gaussian gradient.
inline Matrix grad_log_prior(const Matrix& theta, const AnchorSpec& spec) {
    const int K = theta.cols;
    const auto roles = compile_roles(spec, theta.rows);
    Matrix grad(theta.rows, K);
    for (int v = 0; v < theta.rows; v++) {
        const double* row = theta.row(v);
        double* g = grad.row(v);
        Role role = roles[static_cast<size_t>(v)];
        switch (role) {
            case Role::Plain:
                for (int k = 0; k < K; k++) g[k] = -row[k] / spec.sigma;
                break;
            case Role::Neutral:
                for (int k = 0; k < K - 1; k++) g[k] = -row[k] / spec.sigma;
                g[K - 1] = -row[K - 1] / spec.psi;
                break;
            case Role::Positive:
            case Role::Negative: {
                for (int k = 0; k < K - 1; k++) g[k] = -row[k] / spec.omega;
                double x = row[K - 1];
                if (spec.kind == PriorKind::StandardBasis) {
                    double mean = role == Role::Positive ? 1.0 : -1.0;
                    g[K - 1] = -(x - mean) / spec.gamma;
                } else {
                    bool ok = role == Role::Positive ? x > 0.0 : x < 0.0;
                    if (!ok)
                        throw std::domain_error("truncated prior support violated at row " +
                                                std::to_string(v));
                    g[K - 1] = -x / spec.gamma;
                }
                break;
            }
        }
    }
    return grad;
}

/// Clamps truncated anchors' dimension-K values strictly inside their sign
/// support; identity for other prior kinds. Idempotent.
inline void project_support(Matrix& theta, const AnchorSpec& spec, double epsilon = 1e-8) {
    if (spec.kind != PriorKind::Truncated) return;
    const int K = theta.cols;
    for (int v : spec.positive_ids) {
        double& x = theta(v, K - 1);
        if (x < epsilon) x = epsilon;
    }
    for (int v : spec.negative_ids) {
        double& x = theta(v, K - 1);
        if (x > -epsilon) x = -epsilon;
    }
}

}  // namespace anchored

#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "monosurv/errors.hpp"

namespace monosurv {

// A network quantity together with its derivative with respect to the
// (scaled) time input t. Quantities that do not depend on t carry tangent 0;
// the time input itself is seeded with tangent 1.
struct Dual {
    double value = 0.0;
    double tangent = 0.0;
};

enum class Activation { Tanh, Sigmoid, Softplus };

// Stable sigmoid: branch on sign so exp never overflows.
inline double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// softplus(x) = log(1 + exp(x)), computed as max(x,0) + log1p(exp(-|x|)).
inline double softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

inline double activate(Activation kind, double x) {
    switch (kind) {
        case Activation::Tanh: return std::tanh(x);
        case Activation::Sigmoid: return sigmoid(x);
        case Activation::Softplus: return softplus(x);
    }
    throw ConfigError("unknown activation kind");
}

// First derivative g'(x).
inline double activate_slope(Activation kind, double x) {
    switch (kind) {
        case Activation::Tanh: {
            const double th = std::tanh(x);
            return 1.0 - th * th;
        }
        case Activation::Sigmoid: {
            const double s = sigmoid(x);
            return s * (1.0 - s);
        }
        case Activation::Softplus: return sigmoid(x);
    }
    throw ConfigError("unknown activation kind");
}

// Second derivative g''(x), needed when backpropagating through tangents.
inline double activate_curvature(Activation kind, double x) {
    switch (kind) {
        case Activation::Tanh: {
            const double th = std::tanh(x);
            return -2.0 * th * (1.0 - th * th);
        }
        case Activation::Sigmoid: {
            const double s = sigmoid(x);
            return s * (1.0 - s) * (1.0 - 2.0 * s);
        }
        case Activation::Softplus: {
            const double s = sigmoid(x);
            return s * (1.0 - s);
        }
    }
    throw ConfigError("unknown activation kind");
}

inline Dual dual_activation(Activation kind, Dual x) {
    return {activate(kind, x.value), activate_slope(kind, x.value) * x.tangent};
}

// out = W in + b on dual vectors. W is row-major (out.size() x in.size());
// the bias carries zero tangent. Accumulation order is bias first, then the
// input entries in ascending index order; the tape replays the same order so
// both paths produce bit-identical streams.
inline void dual_affine(std::span<const double> weights, std::span<const double> bias,
                        std::span<const Dual> in, std::span<Dual> out) {
    const std::size_t rows = out.size();
    const std::size_t cols = in.size();
    if (weights.size() != rows * cols || bias.size() != rows) {
        throw ConfigError("dual_affine: weight matrix does not match input/output sizes");
    }
    for (std::size_t r = 0; r < rows; ++r) {
        const double* w = weights.data() + r * cols;
        double v = bias[r];
        double t = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            v += w[c] * in[c].value;
            t += w[c] * in[c].tangent;
        }
        out[r] = {v, t};
    }
}

inline std::vector<Dual> dual_affine(const std::vector<double>& weights, const std::vector<double>& bias,
                                     const std::vector<Dual>& in) {
    std::vector<Dual> out(bias.size());
    dual_affine(std::span<const double>(weights), std::span<const double>(bias),
                std::span<const Dual>(in), std::span<Dual>(out));
    return out;
}

}  // namespace monosurv

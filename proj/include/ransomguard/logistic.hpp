#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ransomguard/error.hpp"
#include "ransomguard/matrix.hpp"

namespace ransomguard {

inline double sigmoid(double z) {
    if (z >= 0.0) {
        double e = std::exp(-z);
        return 1.0 / (1.0 + e);
    }
    double e = std::exp(z);
    return e / (1.0 + e);
}

inline double bce_term(double p, int y) {
    const double eps = 1e-12;
    double q = p < eps ? eps : (p > 1.0 - eps ? 1.0 - eps : p);
    return y == 1 ? -std::log(q) : -std::log(1.0 - q);
}

struct logistic_params {
    double learning_rate = 0.1;
    std::size_t max_epochs = 2000;
    double tolerance = 1e-8; // stop when loss improvement falls below this
    double l2 = 0.0;
};

struct logistic_model {
    std::vector<double> weights;
    double bias = 0.0;
    std::size_t epochs_run = 0;
    std::string stopping_reason;

    double decision(const double* row) const {
        double z = bias;
        for (std::size_t j = 0; j < weights.size(); ++j) z += weights[j] * row[j];
        return z;
    }
    double score_row(const double* row) const { return sigmoid(decision(row)); }
};

// mean binary cross-entropy and its gradient at the given parameters
inline double logistic_loss_gradient(const matrix& x, const std::vector<int>& y,
                                     const std::vector<double>& w, double b, double l2,
                                     std::vector<double>& grad_w, double& grad_b) {
    std::size_t n = x.rows(), d = x.cols();
    grad_w.assign(d, 0.0);
    grad_b = 0.0;
    double loss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const double* row = x.row_ptr(r);
        double z = b;
        for (std::size_t j = 0; j < d; ++j) z += w[j] * row[j];
        double p = sigmoid(z);
        loss += bce_term(p, y[r]);
        double e = p - static_cast<double>(y[r]);
        for (std::size_t j = 0; j < d; ++j) grad_w[j] += e * row[j];
        grad_b += e;
    }
    double nd = static_cast<double>(n);
    loss /= nd;
    for (std::size_t j = 0; j < d; ++j) {
        grad_w[j] = grad_w[j] / nd + l2 * w[j];
        loss += 0.5 * l2 * w[j] * w[j];
    }
    grad_b /= nd;
    return loss;
}

// full-batch gradient descent on binary cross-entropy
inline logistic_model train_logistic(const matrix& x, const std::vector<int>& y,
                                     const logistic_params& params = {}) {
    std::size_t d = x.cols();
    logistic_model model;
    model.weights.assign(d, 0.0);
    model.bias = 0.0;

    std::vector<double> grad_w;
    double grad_b = 0.0;
    double prev_loss = std::numeric_limits<double>::infinity();
    model.stopping_reason = "max_epochs";
    for (std::size_t epoch = 0; epoch < params.max_epochs; ++epoch) {
        double loss = logistic_loss_gradient(x, y, model.weights, model.bias,
                                             params.l2, grad_w, grad_b);
        if (!std::isfinite(loss))
            throw numeric_error("train_logistic: loss diverged at epoch " +
                                std::to_string(epoch));
        for (std::size_t j = 0; j < d; ++j)
            model.weights[j] -= params.learning_rate * grad_w[j];
        model.bias -= params.learning_rate * grad_b;
        model.epochs_run = epoch + 1;
        if (prev_loss - loss < params.tolerance) {
            model.stopping_reason = "converged";
            break;
        }
        prev_loss = loss;
    }
    return model;
}

} // namespace ransomguard

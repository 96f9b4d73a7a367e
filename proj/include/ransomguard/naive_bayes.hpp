#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "ransomguard/error.hpp"
#include "ransomguard/matrix.hpp"

namespace ransomguard {

// gaussian naive bayes with variance smoothing relative to the largest
// feature variance, mirroring the common library convention
struct naive_bayes_model {
    double log_prior[2] = {0.0, 0.0};
    std::vector<double> mean[2];
    std::vector<double> variance[2]; // smoothed
    double epsilon = 0.0;

    double score_row(const double* row) const {
        double logp[2];
        std::size_t d = mean[0].size();
        for (int c = 0; c < 2; ++c) {
            double acc = log_prior[c];
            for (std::size_t j = 0; j < d; ++j) {
                double v = variance[c][j];
                double diff = row[j] - mean[c][j];
                acc += -0.5 * (std::log(2.0 * M_PI * v) + diff * diff / v);
            }
            logp[c] = acc;
        }
        // posterior for class 1 via log-sum-exp
        double m = std::max(logp[0], logp[1]);
        double denom = std::exp(logp[0] - m) + std::exp(logp[1] - m);
        return std::exp(logp[1] - m) / denom;
    }
};

inline naive_bayes_model train_naive_bayes(const matrix& x, const std::vector<int>& y,
                                           double var_smoothing = 1e-9) {
    std::size_t n = x.rows(), d = x.cols();
    std::size_t count[2] = {0, 0};
    for (int label : y) ++count[label];
    if (count[0] == 0 || count[1] == 0)
        throw data_error("train_naive_bayes: both classes required");

    naive_bayes_model model;
    for (int c = 0; c < 2; ++c) {
        model.mean[c].assign(d, 0.0);
        model.variance[c].assign(d, 0.0);
        model.log_prior[c] = std::log(static_cast<double>(count[c]) /
                                      static_cast<double>(n));
    }
    for (std::size_t r = 0; r < n; ++r) {
        const double* row = x.row_ptr(r);
        std::vector<double>& mu = model.mean[y[r]];
        for (std::size_t j = 0; j < d; ++j) mu[j] += row[j];
    }
    for (int c = 0; c < 2; ++c)
        for (std::size_t j = 0; j < d; ++j)
            model.mean[c][j] /= static_cast<double>(count[c]);
    for (std::size_t r = 0; r < n; ++r) {
        const double* row = x.row_ptr(r);
        int c = y[r];
        for (std::size_t j = 0; j < d; ++j) {
            double diff = row[j] - model.mean[c][j];
            model.variance[c][j] += diff * diff;
        }
    }
    for (int c = 0; c < 2; ++c)
        for (std::size_t j = 0; j < d; ++j)
            model.variance[c][j] /= static_cast<double>(count[c]);

    column_stats pooled = column_mean_variance(x);
    double max_var = 0.0;
    for (double v : pooled.variances) max_var = std::max(max_var, v);
    model.epsilon = var_smoothing * max_var;
    if (model.epsilon == 0.0) model.epsilon = var_smoothing;
    for (int c = 0; c < 2; ++c)
        for (std::size_t j = 0; j < d; ++j) model.variance[c][j] += model.epsilon;
    return model;
}

} // namespace ransomguard

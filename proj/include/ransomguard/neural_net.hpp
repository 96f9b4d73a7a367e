#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ransomguard/error.hpp"
#include "ransomguard/logistic.hpp"
#include "ransomguard/matrix.hpp"
#include "ransomguard/random.hpp"

namespace ransomguard {

// stops after `patience` consecutive epochs without an improvement of at
// least `min_delta` over the best monitored loss
class early_stopping {
  public:
    early_stopping(double min_delta, std::size_t patience)
        : min_delta_(min_delta), patience_(patience) {}

    bool observe(double loss) {
        if (best_ - loss >= min_delta_) {
            best_ = loss;
            stale_ = 0;
        } else {
            ++stale_;
        }
        return stale_ >= patience_;
    }

    double best() const { return best_; }
    std::size_t epochs_since_improvement() const { return stale_; }

  private:
    double min_delta_;
    std::size_t patience_;
    double best_ = std::numeric_limits<double>::infinity();
    std::size_t stale_ = 0;
};

struct nn_params {
    std::size_t hidden1 = 64;
    std::size_t hidden2 = 32;
    double learning_rate = 0.01; // adam alpha
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::size_t batch_size = 256;
    std::size_t max_epochs = 100;
    double min_delta = 1e-3;
    std::size_t patience = 5;
    double validation_fraction = 0.1;
};

struct nn_model {
    std::size_t d = 0, h1 = 0, h2 = 0;
    std::vector<double> w1; // h1 x d
    std::vector<double> b1; // h1
    std::vector<double> w2; // h2 x h1
    std::vector<double> b2; // h2
    std::vector<double> w3; // h2
    double b3 = 0.0;
    std::size_t epochs_run = 0;
    std::string stopping_reason;

    double score_row(const double* row) const {
        std::vector<double> a1(h1), a2(h2);
        forward(row, a1, a2);
        double z3 = b3;
        for (std::size_t j = 0; j < h2; ++j) z3 += w3[j] * a2[j];
        return sigmoid(z3);
    }

    void forward(const double* row, std::vector<double>& a1, std::vector<double>& a2) const {
        for (std::size_t i = 0; i < h1; ++i) {
            double z = b1[i];
            const double* wrow = w1.data() + i * d;
            for (std::size_t j = 0; j < d; ++j) z += wrow[j] * row[j];
            a1[i] = z > 0.0 ? z : 0.0;
        }
        for (std::size_t i = 0; i < h2; ++i) {
            double z = b2[i];
            const double* wrow = w2.data() + i * h1;
            for (std::size_t j = 0; j < h1; ++j) z += wrow[j] * a1[j];
            a2[i] = z > 0.0 ? z : 0.0;
        }
    }
};

struct nn_gradients {
    std::vector<double> w1, b1, w2, b2, w3;
    double b3 = 0.0;

    void resize_like(const nn_model& m) {
        w1.assign(m.w1.size(), 0.0);
        b1.assign(m.b1.size(), 0.0);
        w2.assign(m.w2.size(), 0.0);
        b2.assign(m.b2.size(), 0.0);
        w3.assign(m.w3.size(), 0.0);
        b3 = 0.0;
    }
};

// mean binary cross-entropy over the given rows plus analytic gradients
inline double nn_loss_gradient(const nn_model& m, const matrix& x,
                               const std::vector<int>& y,
                               const std::vector<std::size_t>& rows,
                               nn_gradients& g) {
    g.resize_like(m);
    std::vector<double> a1(m.h1), a2(m.h2), dz2(m.h2), dz1(m.h1);
    double loss = 0.0;
    double scale = 1.0 / static_cast<double>(rows.size());
    for (std::size_t r : rows) {
        const double* row = x.row_ptr(r);
        m.forward(row, a1, a2);
        double z3 = m.b3;
        for (std::size_t j = 0; j < m.h2; ++j) z3 += m.w3[j] * a2[j];
        double p = sigmoid(z3);
        loss += bce_term(p, y[r]);

        double dz3 = (p - static_cast<double>(y[r])) * scale;
        for (std::size_t j = 0; j < m.h2; ++j) {
            g.w3[j] += dz3 * a2[j];
            dz2[j] = a2[j] > 0.0 ? dz3 * m.w3[j] : 0.0;
        }
        g.b3 += dz3;
        for (std::size_t i = 0; i < m.h2; ++i) {
            if (dz2[i] == 0.0) continue;
            double* grow = g.w2.data() + i * m.h1;
            for (std::size_t j = 0; j < m.h1; ++j) grow[j] += dz2[i] * a1[j];
            g.b2[i] += dz2[i];
        }
        for (std::size_t j = 0; j < m.h1; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < m.h2; ++i)
                acc += dz2[i] * m.w2[i * m.h1 + j];
            dz1[j] = a1[j] > 0.0 ? acc : 0.0;
        }
        for (std::size_t i = 0; i < m.h1; ++i) {
            if (dz1[i] == 0.0) continue;
            double* grow = g.w1.data() + i * m.d;
            for (std::size_t j = 0; j < m.d; ++j) grow[j] += dz1[i] * row[j];
            g.b1[i] += dz1[i];
        }
    }
    return loss * scale;
}

inline double nn_loss(const nn_model& m, const matrix& x, const std::vector<int>& y,
                      const std::vector<std::size_t>& rows) {
    double loss = 0.0;
    for (std::size_t r : rows) loss += bce_term(m.score_row(x.row_ptr(r)), y[r]);
    return loss / static_cast<double>(rows.size());
}

// seeded uniform init scaled by 1/sqrt(fan_in)
inline nn_model init_nn(std::size_t d, const nn_params& params, random_source& rng) {
    nn_model m;
    m.d = d;
    m.h1 = params.hidden1;
    m.h2 = params.hidden2;
    double s1 = 1.0 / std::sqrt(static_cast<double>(d));
    double s2 = 1.0 / std::sqrt(static_cast<double>(m.h1));
    double s3 = 1.0 / std::sqrt(static_cast<double>(m.h2));
    m.w1.resize(m.h1 * d);
    m.w2.resize(m.h2 * m.h1);
    m.w3.resize(m.h2);
    m.b1.assign(m.h1, 0.0);
    m.b2.assign(m.h2, 0.0);
    for (double& w : m.w1) w = rng.uniform(-s1, s1);
    for (double& w : m.w2) w = rng.uniform(-s2, s2);
    for (double& w : m.w3) w = rng.uniform(-s3, s3);
    m.b3 = 0.0;
    return m;
}

namespace detail {

struct adam_state {
    std::vector<double> m, v;
    void init(std::size_t n) {
        m.assign(n, 0.0);
        v.assign(n, 0.0);
    }
};

inline void adam_step(double* theta, const double* grad, adam_state& st, std::size_t n,
                      double alpha, double beta1, double beta2, double eps,
                      double bias1, double bias2) {
    for (std::size_t i = 0; i < n; ++i) {
        st.m[i] = beta1 * st.m[i] + (1.0 - beta1) * grad[i];
        st.v[i] = beta2 * st.v[i] + (1.0 - beta2) * grad[i] * grad[i];
        double mhat = st.m[i] / bias1;
        double vhat = st.v[i] / bias2;
        theta[i] -= alpha * mhat / (std::sqrt(vhat) + eps);
    }
}

// deterministic stratified carve-out for the monitored validation split
inline void split_validation(const std::vector<int>& y, double fraction,
                             random_source& rng, std::vector<std::size_t>& train,
                             std::vector<std::size_t>& val) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < y.size(); ++i) (y[i] == 1 ? pos : neg).push_back(i);
    rng.shuffle(pos.data(), pos.size());
    rng.shuffle(neg.data(), neg.size());
    std::size_t pos_val = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(pos.size())));
    std::size_t neg_val = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(neg.size())));
    if (pos_val >= pos.size()) pos_val = pos.size() - 1;
    if (neg_val >= neg.size()) neg_val = neg.size() - 1;
    train.clear();
    val.clear();
    for (std::size_t i = 0; i < pos.size(); ++i)
        (i < pos_val ? val : train).push_back(pos[i]);
    for (std::size_t i = 0; i < neg.size(); ++i)
        (i < neg_val ? val : train).push_back(neg[i]);
    std::sort(train.begin(), train.end());
    std::sort(val.begin(), val.end());
}

} // namespace detail

// Adam minibatch training. The monitored series defaults to a stratified
// validation carve-out; passing monitor rows overrides it (reproduction mode
// where the held-out fold is monitored directly).
inline nn_model train_nn(const matrix& x, const std::vector<int>& y,
                         const nn_params& params, std::uint64_t seed,
                         const matrix* monitor_x = nullptr,
                         const std::vector<int>* monitor_y = nullptr) {
    random_source root(seed);
    random_source init_rng = root.substream(0);
    random_source split_rng = root.substream(1);
    random_source shuffle_rng = root.substream(2);

    nn_model model = init_nn(x.cols(), params, init_rng);

    std::vector<std::size_t> train_rows, val_rows;
    bool external_monitor = monitor_x != nullptr && monitor_y != nullptr;
    if (external_monitor) {
        train_rows.resize(x.rows());
        for (std::size_t i = 0; i < train_rows.size(); ++i) train_rows[i] = i;
    } else {
        detail::split_validation(y, params.validation_fraction, split_rng, train_rows,
                                 val_rows);
    }

    detail::adam_state s_w1, s_b1, s_w2, s_b2, s_w3, s_b3;
    s_w1.init(model.w1.size());
    s_b1.init(model.b1.size());
    s_w2.init(model.w2.size());
    s_b2.init(model.b2.size());
    s_w3.init(model.w3.size());
    s_b3.init(1);

    early_stopping stopper(params.min_delta, params.patience);
    nn_gradients g;
    std::vector<std::size_t> order = train_rows;
    std::vector<std::size_t> batch;
    std::size_t t = 0;
    model.stopping_reason = "max_epochs";

    std::vector<std::size_t> monitor_rows;
    if (external_monitor) {
        monitor_rows.resize(monitor_x->rows());
        for (std::size_t i = 0; i < monitor_rows.size(); ++i) monitor_rows[i] = i;
    }

    for (std::size_t epoch = 0; epoch < params.max_epochs; ++epoch) {
        shuffle_rng.shuffle(order.data(), order.size());
        for (std::size_t start = 0; start < order.size(); start += params.batch_size) {
            std::size_t end = std::min(order.size(), start + params.batch_size);
            batch.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
            double loss = nn_loss_gradient(model, x, y, batch, g);
            if (!std::isfinite(loss))
                throw numeric_error("train_nn: loss diverged at epoch " +
                                    std::to_string(epoch));
            ++t;
            double bias1 = 1.0 - std::pow(params.beta1, static_cast<double>(t));
            double bias2 = 1.0 - std::pow(params.beta2, static_cast<double>(t));
            detail::adam_step(model.w1.data(), g.w1.data(), s_w1, model.w1.size(),
                              params.learning_rate, params.beta1, params.beta2,
                              params.adam_epsilon, bias1, bias2);
            detail::adam_step(model.b1.data(), g.b1.data(), s_b1, model.b1.size(),
                              params.learning_rate, params.beta1, params.beta2,
                              params.adam_epsilon, bias1, bias2);
            detail::adam_step(model.w2.data(), g.w2.data(), s_w2, model.w2.size(),
                              params.learning_rate, params.beta1, params.beta2,
                              params.adam_epsilon, bias1, bias2);
            detail::adam_step(model.b2.data(), g.b2.data(), s_b2, model.b2.size(),
                              params.learning_rate, params.beta1, params.beta2,
                              params.adam_epsilon, bias1, bias2);
            detail::adam_step(model.w3.data(), g.w3.data(), s_w3, model.w3.size(),
                              params.learning_rate, params.beta1, params.beta2,
                              params.adam_epsilon, bias1, bias2);
            double gb3 = g.b3;
            detail::adam_step(&model.b3, &gb3, s_b3, 1, params.learning_rate,
                              params.beta1, params.beta2, params.adam_epsilon, bias1,
                              bias2);
        }
        model.epochs_run = epoch + 1;

        double monitored = external_monitor
                               ? nn_loss(model, *monitor_x, *monitor_y, monitor_rows)
                               : nn_loss(model, x, y, val_rows);
        if (!std::isfinite(monitored))
            throw numeric_error("train_nn: monitored loss diverged at epoch " +
                                std::to_string(epoch));
        if (stopper.observe(monitored)) {
            model.stopping_reason = "early_stop";
            break;
        }
    }
    return model;
}

namespace detail {

// smallest |z| over both hidden layers and all samples
inline double min_abs_preactivation(const nn_model& m, const matrix& x) {
    double lo = std::numeric_limits<double>::infinity();
    std::vector<double> a1(m.h1);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const double* row = x.row_ptr(r);
        for (std::size_t i = 0; i < m.h1; ++i) {
            double z = m.b1[i];
            const double* wrow = m.w1.data() + i * m.d;
            for (std::size_t j = 0; j < m.d; ++j) z += wrow[j] * row[j];
            lo = std::min(lo, std::fabs(z));
            a1[i] = z > 0.0 ? z : 0.0;
        }
        for (std::size_t i = 0; i < m.h2; ++i) {
            double z = m.b2[i];
            const double* wrow = m.w2.data() + i * m.h1;
            for (std::size_t j = 0; j < m.h1; ++j) z += wrow[j] * a1[j];
            lo = std::min(lo, std::fabs(z));
        }
    }
    return lo;
}

} // namespace detail

// max relative discrepancy between analytic and central finite-difference
// gradients at a seeded random parameter point
inline double nn_gradient_check(const matrix& x, const std::vector<int>& y,
                                const nn_params& params, std::uint64_t seed,
                                double step = 1e-5) {
    random_source rng(seed);
    nn_model m = init_nn(x.cols(), params, rng);
    // a central difference that steps across a relu kink compares slopes of
    // two different linear pieces, so resample the biases until every
    // pre-activation clears a safety margin around zero
    double max_abs_x = 1.0;
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c)
            max_abs_x = std::max(max_abs_x, std::fabs(x.at(r, c)));
    const double margin = 100.0 * step * max_abs_x;
    for (int attempt = 0; attempt < 500; ++attempt) {
        for (double& b : m.b1) b = rng.uniform(-0.1, 0.1);
        for (double& b : m.b2) b = rng.uniform(-0.1, 0.1);
        m.b3 = rng.uniform(-0.1, 0.1);
        if (detail::min_abs_preactivation(m, x) > margin) break;
    }

    std::vector<std::size_t> rows(x.rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    nn_gradients g;
    nn_loss_gradient(m, x, y, rows, g);

    std::vector<double*> params_flat;
    std::vector<double> grads_flat;
    for (std::size_t i = 0; i < m.w1.size(); ++i) {
        params_flat.push_back(&m.w1[i]);
        grads_flat.push_back(g.w1[i]);
    }
    for (std::size_t i = 0; i < m.b1.size(); ++i) {
        params_flat.push_back(&m.b1[i]);
        grads_flat.push_back(g.b1[i]);
    }
    for (std::size_t i = 0; i < m.w2.size(); ++i) {
        params_flat.push_back(&m.w2[i]);
        grads_flat.push_back(g.w2[i]);
    }
    for (std::size_t i = 0; i < m.b2.size(); ++i) {
        params_flat.push_back(&m.b2[i]);
        grads_flat.push_back(g.b2[i]);
    }
    for (std::size_t i = 0; i < m.w3.size(); ++i) {
        params_flat.push_back(&m.w3[i]);
        grads_flat.push_back(g.w3[i]);
    }
    params_flat.push_back(&m.b3);
    grads_flat.push_back(g.b3);

    double worst = 0.0;
    for (std::size_t i = 0; i < params_flat.size(); ++i) {
        double* p = params_flat[i];
        double orig = *p;
        *p = orig + step;
        double up = nn_loss(m, x, y, rows);
        *p = orig - step;
        double down = nn_loss(m, x, y, rows);
        *p = orig;
        double numeric = (up - down) / (2.0 * step);
        double denom = std::max({1e-8, std::fabs(numeric), std::fabs(grads_flat[i])});
        worst = std::max(worst, std::fabs(numeric - grads_flat[i]) / denom);
    }
    return worst;
}

// same central-difference check for the logistic gradient
inline double logistic_gradient_check(const matrix& x, const std::vector<int>& y,
                                      std::uint64_t seed, double step = 1e-5) {
    random_source rng(seed);
    std::size_t d = x.cols();
    std::vector<double> w(d);
    for (double& v : w) v = rng.uniform(-1.0, 1.0);
    double b = rng.uniform(-1.0, 1.0);

    std::vector<double> grad_w;
    double grad_b = 0.0;
    logistic_loss_gradient(x, y, w, b, 0.0, grad_w, grad_b);

    auto loss_at = [&](const std::vector<double>& wv, double bv) {
        double loss = 0.0;
        for (std::size_t r = 0; r < x.rows(); ++r) {
            const double* row = x.row_ptr(r);
            double z = bv;
            for (std::size_t j = 0; j < d; ++j) z += wv[j] * row[j];
            loss += bce_term(sigmoid(z), y[r]);
        }
        return loss / static_cast<double>(x.rows());
    };

    double worst = 0.0;
    for (std::size_t j = 0; j <= d; ++j) {
        double analytic;
        double up, down;
        if (j < d) {
            analytic = grad_w[j];
            double orig = w[j];
            w[j] = orig + step;
            up = loss_at(w, b);
            w[j] = orig - step;
            down = loss_at(w, b);
            w[j] = orig;
        } else {
            analytic = grad_b;
            up = loss_at(w, b + step);
            down = loss_at(w, b - step);
        }
        double numeric = (up - down) / (2.0 * step);
        double denom = std::max({1e-8, std::fabs(numeric), std::fabs(analytic)});
        worst = std::max(worst, std::fabs(numeric - analytic) / denom);
    }
    return worst;
}

} // namespace ransomguard

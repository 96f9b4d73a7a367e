#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ransomguard/error.hpp"

namespace ransomguard {

// dense row-major matrix of doubles
class matrix {
  public:
    matrix() : rows_(0), cols_(0) {}
    matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* row_ptr(std::size_t r) { return data_.data() + r * cols_; }
    const double* row_ptr(std::size_t r) const { return data_.data() + r * cols_; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    std::vector<double> column(std::size_t c) const {
        std::vector<double> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) out[r] = at(r, c);
        return out;
    }

    matrix select_columns(const std::vector<std::size_t>& idx) const {
        matrix out(rows_, idx.size());
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t j = 0; j < idx.size(); ++j)
                out.at(r, j) = at(r, idx[j]);
        return out;
    }

    matrix select_rows(const std::vector<std::size_t>& idx) const {
        matrix out(idx.size(), cols_);
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t c = 0; c < cols_; ++c)
                out.at(i, c) = at(idx[i], c);
        return out;
    }

  private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

struct column_stats {
    std::vector<double> means;
    std::vector<double> variances; // population variance, divide by n
};

inline column_stats column_mean_variance(const matrix& m) {
    if (m.rows() == 0) throw numeric_error("column_mean_variance: empty matrix");
    column_stats s;
    s.means.assign(m.cols(), 0.0);
    s.variances.assign(m.cols(), 0.0);
    double n = static_cast<double>(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double* row = m.row_ptr(r);
        for (std::size_t c = 0; c < m.cols(); ++c) s.means[c] += row[c];
    }
    for (std::size_t c = 0; c < m.cols(); ++c) s.means[c] /= n;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double* row = m.row_ptr(r);
        for (std::size_t c = 0; c < m.cols(); ++c) {
            double d = row[c] - s.means[c];
            s.variances[c] += d * d;
        }
    }
    for (std::size_t c = 0; c < m.cols(); ++c) s.variances[c] /= n;
    return s;
}

// symmetric with exact unit diagonal; entries clamped to [-1, 1]
inline matrix correlation_matrix(const matrix& m) {
    column_stats s = column_mean_variance(m);
    std::size_t d = m.cols();
    for (std::size_t c = 0; c < d; ++c)
        if (s.variances[c] == 0.0)
            throw numeric_error("correlation_matrix: zero-variance column " + std::to_string(c));
    std::vector<double> inv_sd(d);
    for (std::size_t c = 0; c < d; ++c) inv_sd[c] = 1.0 / std::sqrt(s.variances[c]);
    matrix out(d, d, 0.0);
    double n = static_cast<double>(m.rows());
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            double acc = 0.0;
            for (std::size_t r = 0; r < m.rows(); ++r)
                acc += (m.at(r, i) - s.means[i]) * (m.at(r, j) - s.means[j]);
            double c = acc / n * inv_sd[i] * inv_sd[j];
            if (c > 1.0) c = 1.0;
            if (c < -1.0) c = -1.0;
            out.at(i, j) = c;
            out.at(j, i) = c;
        }
        out.at(i, i) = 1.0;
    }
    return out;
}

// Gaussian elimination with partial pivoting; pivots below 1e-12 are treated
// as rank deficiency.
inline std::vector<double> solve_linear(matrix a, std::vector<double> b) {
    std::size_t n = a.rows();
    if (n == 0 || a.cols() != n || b.size() != n)
        throw numeric_error("solve_linear: dimension mismatch");
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        double best = std::fabs(a.at(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            double v = std::fabs(a.at(r, col));
            if (v > best) {
                best = v;
                pivot = r;
            }
        }
        if (best < 1e-12)
            throw numeric_error("solve_linear: rank-deficient at column " + std::to_string(col));
        if (pivot != col) {
            for (std::size_t c = col; c < n; ++c) std::swap(a.at(col, c), a.at(pivot, c));
            std::swap(b[col], b[pivot]);
        }
        double diag = a.at(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = a.at(r, col) / diag;
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a.at(r, c) -= f * a.at(col, c);
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t ri = n; ri-- > 0;) {
        double acc = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c) acc -= a.at(ri, c) * x[c];
        x[ri] = acc / a.at(ri, ri);
    }
    return x;
}

// inverse via column-wise solves; used on small (<= 54 wide) correlation matrices
inline matrix invert_matrix(const matrix& a) {
    std::size_t n = a.rows();
    matrix out(n, n, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
        std::vector<double> e(n, 0.0);
        e[c] = 1.0;
        std::vector<double> x = solve_linear(a, std::move(e));
        for (std::size_t r = 0; r < n; ++r) out.at(r, c) = x[r];
    }
    return out;
}

} // namespace ransomguard

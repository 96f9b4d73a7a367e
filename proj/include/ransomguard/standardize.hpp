#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ransomguard/error.hpp"
#include "ransomguard/matrix.hpp"

namespace ransomguard {

struct standardizer {
    std::vector<std::string> columns;
    std::vector<double> mean;
    std::vector<double> sd; // 0 marks a constant column; such columns map to 0

    bool is_identity() const {
        for (double m : mean)
            if (m != 0.0) return false;
        for (double s : sd)
            if (s != 1.0) return false;
        return true;
    }
};

inline standardizer identity_standardizer(const std::vector<std::string>& columns) {
    standardizer s;
    s.columns = columns;
    s.mean.assign(columns.size(), 0.0);
    s.sd.assign(columns.size(), 1.0);
    return s;
}

inline standardizer identity_standardizer(std::size_t width) {
    standardizer s;
    s.mean.assign(width, 0.0);
    s.sd.assign(width, 1.0);
    return s;
}

inline standardizer fit_standardizer(const matrix& m,
                                     const std::vector<std::string>& columns = {}) {
    if (m.rows() < 2) throw data_error("fit_standardizer: need at least 2 rows");
    column_stats stats = column_mean_variance(m);
    standardizer s;
    s.columns = columns;
    s.mean = stats.means;
    s.sd.resize(m.cols());
    for (std::size_t c = 0; c < m.cols(); ++c) s.sd[c] = std::sqrt(stats.variances[c]);
    return s;
}

inline void apply_standardizer_row(const standardizer& s, double* row, std::size_t n) {
    for (std::size_t c = 0; c < n; ++c)
        row[c] = s.sd[c] == 0.0 ? 0.0 : (row[c] - s.mean[c]) / s.sd[c];
}

inline matrix apply_standardizer(const standardizer& s, const matrix& m) {
    if (m.cols() != s.mean.size())
        throw data_error("apply_standardizer: column count mismatch");
    matrix out = m;
    for (std::size_t r = 0; r < out.rows(); ++r)
        apply_standardizer_row(s, out.row_ptr(r), out.cols());
    return out;
}

} // namespace ransomguard

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ransomguard/csv.hpp"
#include "ransomguard/error.hpp"
#include "ransomguard/matrix.hpp"

namespace ransomguard {

enum class scaling_mode { raw, zscore, minmax };

inline std::string scaling_mode_name(scaling_mode m) {
    switch (m) {
        case scaling_mode::raw: return "raw";
        case scaling_mode::zscore: return "zscore";
        default: return "minmax";
    }
}

inline scaling_mode parse_scaling_mode(const std::string& s) {
    if (s == "raw") return scaling_mode::raw;
    if (s == "zscore") return scaling_mode::zscore;
    if (s == "minmax") return scaling_mode::minmax;
    throw data_error("unknown scaling mode: " + s);
}

// per-column variance as seen under the requested scaling of the columns
inline std::vector<double> scaled_variances(const matrix& m, scaling_mode mode) {
    column_stats stats = column_mean_variance(m);
    std::size_t d = m.cols();
    std::vector<double> out(d);
    switch (mode) {
        case scaling_mode::raw:
            out = stats.variances;
            break;
        case scaling_mode::zscore:
            for (std::size_t c = 0; c < d; ++c)
                out[c] = stats.variances[c] == 0.0 ? 0.0 : 1.0;
            break;
        case scaling_mode::minmax: {
            for (std::size_t c = 0; c < d; ++c) {
                double lo = m.at(0, c), hi = m.at(0, c);
                for (std::size_t r = 1; r < m.rows(); ++r) {
                    double v = m.at(r, c);
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
                double range = hi - lo;
                out[c] = range == 0.0 ? 0.0 : stats.variances[c] / (range * range);
            }
            break;
        }
    }
    return out;
}

// survivors keep variance strictly greater than the threshold
inline std::vector<std::size_t> variance_threshold(const matrix& m, double threshold,
                                                   scaling_mode mode = scaling_mode::raw) {
    std::vector<double> var = scaled_variances(m, mode);
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < var.size(); ++c)
        if (var[c] > threshold) out.push_back(c);
    return out;
}

inline std::vector<std::pair<double, std::size_t>>
variance_sweep(const matrix& m, const std::vector<double>& thresholds,
               scaling_mode mode = scaling_mode::raw) {
    if (thresholds.empty()) throw data_error("variance_sweep: no thresholds");
    std::vector<double> var = scaled_variances(m, mode);
    std::vector<std::pair<double, std::size_t>> out;
    for (double t : thresholds) {
        std::size_t count = 0;
        for (double v : var)
            if (v > t) ++count;
        out.emplace_back(t, count);
    }
    return out;
}

inline constexpr double VIF_INFINITE = std::numeric_limits<double>::infinity();

// production route: diagonal of the inverse correlation matrix
inline std::vector<double> compute_vif(const matrix& m) {
    if (m.cols() < 2) throw numeric_error("compute_vif: need at least 2 columns");
    if (m.rows() < m.cols() + 1)
        throw numeric_error("compute_vif: need at least n_cols + 1 rows");
    matrix corr = correlation_matrix(m);
    std::size_t d = m.cols();
    std::vector<double> vif(d);
    try {
        matrix inv = invert_matrix(corr);
        for (std::size_t c = 0; c < d; ++c) vif[c] = inv.at(c, c);
        return vif;
    } catch (const numeric_error&) {
        // rank-deficient correlation matrix. attribute infinity to perfectly
        // correlated pairs when any exist; columns outside those pairs have no
        // computable vif in this iteration and are marked indeterminate
        vif.assign(d, std::numeric_limits<double>::quiet_NaN());
        bool found_pair = false;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i + 1; j < d; ++j)
                if (std::fabs(corr.at(i, j)) >= 1.0 - 1e-12) {
                    vif[i] = VIF_INFINITE;
                    vif[j] = VIF_INFINITE;
                    found_pair = true;
                }
        if (!found_pair) vif.assign(d, VIF_INFINITE);
        return vif;
    }
}

// test oracle route: VIF_j = 1/(1 - R^2_j), R^2_j from the OLS regression of
// column j on the remaining columns plus intercept
inline std::vector<double> compute_vif_ols(const matrix& m) {
    if (m.cols() < 2) throw numeric_error("compute_vif_ols: need at least 2 columns");
    std::size_t n = m.rows(), d = m.cols();
    std::vector<double> vif(d);
    for (std::size_t j = 0; j < d; ++j) {
        std::size_t p = d; // d-1 regressors + intercept
        matrix design(n, p);
        std::vector<double> y(n);
        for (std::size_t r = 0; r < n; ++r) {
            design.at(r, 0) = 1.0;
            std::size_t k = 1;
            for (std::size_t c = 0; c < d; ++c) {
                if (c == j) continue;
                design.at(r, k++) = m.at(r, c);
            }
            y[r] = m.at(r, j);
        }
        matrix xtx(p, p, 0.0);
        std::vector<double> xty(p, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            const double* row = design.row_ptr(r);
            for (std::size_t a = 0; a < p; ++a) {
                xty[a] += row[a] * y[r];
                for (std::size_t b = a; b < p; ++b) xtx.at(a, b) += row[a] * row[b];
            }
        }
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = 0; b < a; ++b) xtx.at(a, b) = xtx.at(b, a);
        std::vector<double> beta;
        try {
            beta = solve_linear(xtx, xty);
        } catch (const numeric_error&) {
            vif[j] = VIF_INFINITE;
            continue;
        }
        double mean_y = 0.0;
        for (double v : y) mean_y += v;
        mean_y /= static_cast<double>(n);
        double ss_res = 0.0, ss_tot = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            double pred = 0.0;
            const double* row = design.row_ptr(r);
            for (std::size_t a = 0; a < p; ++a) pred += row[a] * beta[a];
            double e = y[r] - pred;
            ss_res += e * e;
            double t = y[r] - mean_y;
            ss_tot += t * t;
        }
        double r2 = ss_tot == 0.0 ? 0.0 : 1.0 - ss_res / ss_tot;
        vif[j] = r2 >= 1.0 ? VIF_INFINITE : 1.0 / (1.0 - r2);
    }
    return vif;
}

struct drop_record {
    std::string column;
    double vif = 0.0;
    std::string reason;
};

struct vif_iteration {
    std::vector<std::string> columns;
    std::vector<double> vif;
};

struct selection_report {
    scaling_mode mode = scaling_mode::raw;
    double variance_threshold_value = 1.0;
    double vif_threshold_value = 10.0;
    std::vector<std::string> input_columns;
    std::vector<double> input_variances; // under the active scaling mode
    std::vector<std::string> stage1_survivors;
    std::vector<vif_iteration> vif_iterations;
    std::vector<drop_record> dropped;
    std::vector<std::string> final_columns;
    std::vector<double> final_vif;
    std::vector<std::string> notes;
};

// iterative drop of the highest-VIF column above threshold; ties break toward
// the later column (>= keeps the last maximum while scanning forward)
inline void vif_filter_stage(const matrix& m, const std::vector<std::string>& names,
                             double threshold, selection_report& report) {
    std::vector<std::size_t> keep(names.size());
    for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;

    for (std::size_t iter = 0; iter <= names.size(); ++iter) {
        if (keep.size() < 2) break;
        matrix sub = m.select_columns(keep);
        std::vector<double> vif = compute_vif(sub);
        vif_iteration record;
        for (std::size_t i = 0; i < keep.size(); ++i) {
            record.columns.push_back(names[keep[i]]);
            record.vif.push_back(vif[i]);
        }
        report.vif_iterations.push_back(record);

        std::size_t worst = keep.size();
        double worst_vif = threshold;
        for (std::size_t i = 0; i < keep.size(); ++i)
            if (vif[i] > threshold && vif[i] >= worst_vif) {
                worst = i;
                worst_vif = vif[i];
            }
        if (worst == keep.size()) break;

        drop_record rec;
        rec.column = names[keep[worst]];
        rec.vif = worst_vif;
        rec.reason = "vif " + format_double(worst_vif) + " above threshold " +
                     format_double(threshold);
        report.dropped.push_back(rec);
        keep.erase(keep.begin() + static_cast<std::ptrdiff_t>(worst));
    }

    report.final_columns.clear();
    for (std::size_t i : keep) report.final_columns.push_back(names[i]);
    if (keep.size() >= 2) {
        matrix sub = m.select_columns(keep);
        report.final_vif = compute_vif(sub);
    } else {
        report.final_vif.assign(keep.size(), 1.0);
    }
}

inline selection_report vif_filter(const matrix& m, const std::vector<std::string>& names,
                                   double threshold = 10.0) {
    if (names.size() != m.cols())
        throw data_error("vif_filter: name count does not match column count");
    selection_report report;
    report.vif_threshold_value = threshold;
    report.input_columns = names;
    report.stage1_survivors = names;
    vif_filter_stage(m, names, threshold, report);
    return report;
}

// variance stage then VIF stage over named columns
inline selection_report select_features(const matrix& m,
                                        const std::vector<std::string>& names,
                                        scaling_mode mode, double variance_cutoff,
                                        double vif_cutoff) {
    if (names.size() != m.cols())
        throw data_error("select_features: name count does not match column count");
    selection_report report;
    report.mode = mode;
    report.variance_threshold_value = variance_cutoff;
    report.vif_threshold_value = vif_cutoff;
    report.input_columns = names;
    report.input_variances = scaled_variances(m, mode);

    std::vector<std::size_t> survivors = variance_threshold(m, variance_cutoff, mode);
    for (std::size_t c = 0; c < names.size(); ++c) {
        if (std::find(survivors.begin(), survivors.end(), c) == survivors.end()) {
            drop_record rec;
            rec.column = names[c];
            rec.vif = 0.0;
            rec.reason = "variance " + format_double(report.input_variances[c]) +
                         " not above threshold " + format_double(variance_cutoff);
            report.dropped.push_back(rec);
        }
    }
    for (std::size_t c : survivors) report.stage1_survivors.push_back(names[c]);

    if (survivors.size() < 2) {
        report.final_columns = report.stage1_survivors;
        report.final_vif.assign(report.final_columns.size(), 1.0);
        report.notes.push_back("variance stage left fewer than 2 columns; vif stage skipped");
        return report;
    }
    matrix sub = m.select_columns(survivors);
    vif_filter_stage(sub, report.stage1_survivors, vif_cutoff, report);
    return report;
}

// reference feature presets; the 13-name set carries the published VIF table,
// the 12-name set drops the collinearity survivor
inline std::vector<std::string> preset_features_13() {
    return {"SizeOfOptionalHeader", "MajorLinkerVersion",   "AddressOfEntryPoint",
            "SectionAlignment",     "MinorOperatingSystemVersion", "SizeOfHeaders",
            "SizeOfStackReserve",   "LoaderFlags",          "SectionsMinEntropy",
            "SectionsMaxEntropy",   "SectionMaxRawsize",    "SectionsMinVirtualsize",
            "ResourcesMinEntropy"};
}

inline std::vector<std::string> preset_features_12() {
    std::vector<std::string> out;
    for (const std::string& name : preset_features_13())
        if (name != "SectionMaxRawsize") out.push_back(name);
    return out;
}

// the 13 preset names plus the collinear partner that the vif stage removes
inline std::vector<std::string> preset_stage1_features() {
    std::vector<std::string> out = preset_features_13();
    out.insert(out.begin() + 10, "SectionsMeanRawsize");
    return out;
}

struct calibration_result {
    scaling_mode mode;
    double threshold;
    std::size_t stage1_count;
    std::size_t final_count;
    bool reproduces_target;
};

// Tries each scaling mode at the given threshold and records whether the
// two-stage pipeline lands on the target column count (13 by default).
inline std::vector<calibration_result>
calibrate_scaling_mode(const matrix& m, const std::vector<std::string>& names,
                       double variance_cutoff = 1.0, double vif_cutoff = 10.0,
                       std::size_t target_final = 13) {
    std::vector<calibration_result> out;
    for (scaling_mode mode :
         {scaling_mode::raw, scaling_mode::zscore, scaling_mode::minmax}) {
        selection_report rep =
            select_features(m, names, mode, variance_cutoff, vif_cutoff);
        calibration_result res;
        res.mode = mode;
        res.threshold = variance_cutoff;
        res.stage1_count = rep.stage1_survivors.size();
        res.final_count = rep.final_columns.size();
        res.reproduces_target = rep.final_columns.size() == target_final;
        out.push_back(res);
    }
    return out;
}

} // namespace ransomguard

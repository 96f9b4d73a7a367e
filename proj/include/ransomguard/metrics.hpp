#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "ransomguard/error.hpp"

namespace ransomguard {

struct confusion_counts {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    std::size_t total() const { return tp + fp + tn + fn; }
};

inline confusion_counts confusion(const std::vector<int>& y_true,
                                  const std::vector<int>& y_pred) {
    if (y_true.empty()) throw data_error("confusion: empty input");
    if (y_true.size() != y_pred.size()) throw data_error("confusion: length mismatch");
    confusion_counts c;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] == 1) {
            if (y_pred[i] == 1) ++c.tp;
            else ++c.fn;
        } else {
            if (y_pred[i] == 1) ++c.fp;
            else ++c.tn;
        }
    }
    return c;
}

struct prf_result {
    double precision = 0.0;
    double recall = 0.0;
    double accuracy = 0.0;
    bool precision_degenerate = false; // zero denominator, value reported as 0
    bool recall_degenerate = false;
};

inline prf_result precision_recall_accuracy(const confusion_counts& c) {
    prf_result r;
    std::size_t pp = c.tp + c.fp;
    std::size_t ap = c.tp + c.fn;
    if (pp == 0) {
        r.precision_degenerate = true;
    } else {
        r.precision = static_cast<double>(c.tp) / static_cast<double>(pp);
    }
    if (ap == 0) {
        r.recall_degenerate = true;
    } else {
        r.recall = static_cast<double>(c.tp) / static_cast<double>(ap);
    }
    r.accuracy = c.total() == 0
                     ? 0.0
                     : static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    return r;
}

inline double f_beta(double precision, double recall, double beta) {
    double b2 = beta * beta;
    double denom = b2 * precision + recall;
    if (denom == 0.0) return 0.0;
    return (1.0 + b2) * precision * recall / denom;
}

struct roc_point {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0;
};

struct roc_curve_result {
    std::vector<roc_point> points; // starts at (0,0), ends at (1,1), fpr non-decreasing
    double auc = 0.0;
};

// descending-score sweep with tied scores processed in one step; trapezoidal auc
inline roc_curve_result roc_curve(const std::vector<int>& y_true,
                                  const std::vector<double>& scores) {
    if (y_true.size() != scores.size()) throw data_error("roc_curve: length mismatch");
    std::size_t pos = 0, neg = 0;
    for (int y : y_true) (y == 1 ? pos : neg)++;
    if (pos == 0 || neg == 0) throw data_error("roc_curve: both classes required");

    std::vector<std::size_t> order(y_true.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });

    roc_curve_result out;
    out.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    std::size_t tp = 0, fp = 0;
    double auc = 0.0;
    double prev_fpr = 0.0, prev_tpr = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        double s = scores[order[i]];
        while (i < order.size() && scores[order[i]] == s) {
            if (y_true[order[i]] == 1) ++tp;
            else ++fp;
            ++i;
        }
        double fpr = static_cast<double>(fp) / static_cast<double>(neg);
        double tpr = static_cast<double>(tp) / static_cast<double>(pos);
        auc += (fpr - prev_fpr) * (tpr + prev_tpr) * 0.5;
        out.points.push_back({fpr, tpr, s});
        prev_fpr = fpr;
        prev_tpr = tpr;
    }
    if (out.points.back().fpr != 1.0 || out.points.back().tpr != 1.0)
        out.points.push_back({1.0, 1.0, -std::numeric_limits<double>::infinity()});
    out.auc = auc;
    return out;
}

// pairwise Mann-Whitney statistic, ties counted one half; test oracle for auc
inline double mann_whitney_auc(const std::vector<int>& y_true,
                               const std::vector<double>& scores) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] != 1) continue;
        for (std::size_t j = 0; j < y_true.size(); ++j) {
            if (y_true[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    if (pairs == 0) throw data_error("mann_whitney_auc: both classes required");
    return wins / static_cast<double>(pairs);
}

// tpr at the given fpr: the last curve point at that fpr when one exists
// (the top of a vertical run), linear interpolation between neighbors otherwise
inline double interpolate_tpr(const roc_curve_result& curve, double fpr) {
    const auto& pts = curve.points;
    std::size_t j = 0;
    while (j + 1 < pts.size() && pts[j + 1].fpr <= fpr) ++j;
    if (pts[j].fpr >= fpr || j + 1 == pts.size()) return pts[j].tpr;
    double x0 = pts[j].fpr, x1 = pts[j + 1].fpr;
    double y0 = pts[j].tpr, y1 = pts[j + 1].tpr;
    double t = (fpr - x0) / (x1 - x0);
    return y0 + t * (y1 - y0);
}

// vertical averaging on the fixed 101-point fpr grid; auc is the mean of the
// member aucs rather than the trapezoid of the averaged curve
inline roc_curve_result mean_roc(const std::vector<roc_curve_result>& curves) {
    if (curves.empty()) throw data_error("mean_roc: empty curve list");
    roc_curve_result out;
    double auc_sum = 0.0;
    for (const auto& c : curves) auc_sum += c.auc;
    out.auc = auc_sum / static_cast<double>(curves.size());
    for (int g = 0; g <= 100; ++g) {
        double fpr = static_cast<double>(g) / 100.0;
        double tpr_sum = 0.0;
        for (const auto& c : curves) tpr_sum += interpolate_tpr(c, fpr);
        double tpr = tpr_sum / static_cast<double>(curves.size());
        if (g == 0) tpr = 0.0;
        if (g == 100) tpr = 1.0;
        out.points.push_back({fpr, tpr, std::numeric_limits<double>::quiet_NaN()});
    }
    return out;
}

struct mean_std {
    double mean = 0.0;
    double std_dev = 0.0; // sample standard deviation, divide by k - 1
};

inline mean_std aggregate_folds(const std::vector<double>& values) {
    if (values.size() < 2) throw data_error("aggregate_folds: need at least 2 folds");
    mean_std out;
    for (double v : values) out.mean += v;
    out.mean /= static_cast<double>(values.size());
    double acc = 0.0;
    for (double v : values) {
        double d = v - out.mean;
        acc += d * d;
    }
    out.std_dev = std::sqrt(acc / static_cast<double>(values.size() - 1));
    return out;
}

} // namespace ransomguard

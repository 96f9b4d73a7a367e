#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ransomguard/error.hpp"
#include "ransomguard/metrics.hpp"
#include "ransomguard/random.hpp"

using namespace ransomguard;

TEST_CASE("confusion counts") {
    std::vector<int> y_true = {1, 1, 1, 0, 0, 0, 1, 0};
    std::vector<int> y_pred = {1, 0, 1, 0, 1, 0, 1, 1};
    confusion_counts c = confusion(y_true, y_pred);
    REQUIRE(c.tp == 3);
    REQUIRE(c.fn == 1);
    REQUIRE(c.fp == 2);
    REQUIRE(c.tn == 2);
    REQUIRE(c.total() == 8);

    REQUIRE_THROWS_AS(confusion({}, {}), error);
    REQUIRE_THROWS_AS(confusion({1}, {1, 0}), error);
}

TEST_CASE("precision recall accuracy") {
    confusion_counts c;
    c.tp = 8;
    c.fp = 2;
    c.fn = 3;
    c.tn = 7;
    prf_result r = precision_recall_accuracy(c);
    REQUIRE(r.precision == Catch::Approx(0.8).margin(1e-15));
    REQUIRE(r.recall == Catch::Approx(8.0 / 11.0).margin(1e-15));
    REQUIRE(r.accuracy == Catch::Approx(0.75).margin(1e-15));
    REQUIRE(!r.precision_degenerate);
    REQUIRE(!r.recall_degenerate);

    confusion_counts none;
    none.tn = 5;
    prf_result d = precision_recall_accuracy(none);
    REQUIRE(d.precision_degenerate);
    REQUIRE(d.recall_degenerate);
    REQUIRE(d.precision == 0.0);
    REQUIRE(d.accuracy == 1.0);
}

TEST_CASE("f_beta against precomputed values") {
    double prec = 0.8, rec = 8.0 / 11.0;
    REQUIRE(f_beta(prec, rec, 1.0) == Catch::Approx(0.76190476190476197).margin(1e-15));
    REQUIRE(f_beta(prec, rec, 2.0) == Catch::Approx(0.7407407407407407).margin(1e-15));
    REQUIRE(f_beta(prec, rec, 0.5) == Catch::Approx(0.78431372549019607).margin(1e-15));
    REQUIRE(f_beta(0.0, 0.0, 1.0) == 0.0);
}

TEST_CASE("roc curve hand trace with a cross-class tie") {
    std::vector<int> y = {0, 0, 1, 1, 0, 1, 0, 1, 1, 0};
    std::vector<double> s = {0.1, 0.4, 0.35, 0.8, 0.45, 0.45, 0.2, 0.9, 0.7, 0.62};
    roc_curve_result r = roc_curve(y, s);

    REQUIRE(r.auc == Catch::Approx(0.82).margin(1e-12));
    REQUIRE(r.points.size() == 10);
    REQUIRE(std::isinf(r.points[0].threshold));
    REQUIRE(r.points[0].fpr == 0.0);
    REQUIRE(r.points[0].tpr == 0.0);

    double expect[10][2] = {{0.0, 0.0}, {0.0, 0.2}, {0.0, 0.4}, {0.0, 0.6},
                            {0.2, 0.6}, {0.4, 0.8}, {0.6, 0.8}, {0.6, 1.0},
                            {0.8, 1.0}, {1.0, 1.0}};
    for (std::size_t i = 0; i < 10; ++i) {
        REQUIRE(r.points[i].fpr == Catch::Approx(expect[i][0]).margin(1e-15));
        REQUIRE(r.points[i].tpr == Catch::Approx(expect[i][1]).margin(1e-15));
    }
    REQUIRE(r.points[4].threshold == 0.62);
    REQUIRE(r.points[5].threshold == 0.45);
    REQUIRE(r.points.back().fpr == 1.0);
    REQUIRE(r.points.back().tpr == 1.0);
}

TEST_CASE("roc curve input validation") {
    REQUIRE_THROWS_AS(roc_curve({1, 1}, {0.5, 0.6}), error);
    REQUIRE_THROWS_AS(roc_curve({0, 0}, {0.5, 0.6}), error);
    REQUIRE_THROWS_AS(roc_curve({0, 1}, {0.5}), error);
    REQUIRE_THROWS_AS(mann_whitney_auc({1, 1}, {0.5, 0.6}), error);
}

TEST_CASE("trapezoid auc equals the pairwise mann-whitney statistic") {
    random_source rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 2 + rng.uniform_index(499);
        std::vector<int> y(n);
        std::vector<double> s(n);
        bool quantize = trial % 3 == 0;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = rng.uniform() < 0.4 ? 1 : 0;
            double v = rng.uniform();
            if (quantize) v = std::round(v * 8.0) / 8.0;
            s[i] = v;
        }
        y[0] = 1;
        y[1] = 0;

        double trap = roc_curve(y, s).auc;
        double mw = mann_whitney_auc(y, s);
        REQUIRE(std::fabs(trap - mw) < 1e-12);
    }
}

TEST_CASE("tpr interpolation over vertical runs") {
    std::vector<int> y = {0, 0, 1, 1, 0, 1, 0, 1, 1, 0};
    std::vector<double> s = {0.1, 0.4, 0.35, 0.8, 0.45, 0.45, 0.2, 0.9, 0.7, 0.62};
    roc_curve_result r = roc_curve(y, s);

    REQUIRE(interpolate_tpr(r, 0.0) == Catch::Approx(0.6).margin(1e-15));
    REQUIRE(interpolate_tpr(r, 0.1) == Catch::Approx(0.6).margin(1e-15));
    REQUIRE(interpolate_tpr(r, 0.3) == Catch::Approx(0.7).margin(1e-15));
    REQUIRE(interpolate_tpr(r, 0.5) == Catch::Approx(0.8).margin(1e-15));
    REQUIRE(interpolate_tpr(r, 0.6) == Catch::Approx(1.0).margin(1e-15));
    REQUIRE(interpolate_tpr(r, 1.0) == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("mean roc vertically averages on the percent grid") {
    // two triangle curves with known tpr at every grid point
    roc_curve_result a, b;
    a.points = {{0.0, 0.0, 1.0}, {0.0, 1.0, 0.5}, {1.0, 1.0, 0.0}};
    a.auc = 1.0;
    b.points = {{0.0, 0.0, 1.0}, {1.0, 1.0, 0.0}};
    b.auc = 0.5;

    roc_curve_result m = mean_roc({a, b});
    REQUIRE(m.points.size() == 101);
    REQUIRE(m.auc == Catch::Approx(0.75).margin(1e-15));
    REQUIRE(m.points.front().fpr == 0.0);
    REQUIRE(m.points.front().tpr == 0.0);
    REQUIRE(m.points.back().fpr == 1.0);
    REQUIRE(m.points.back().tpr == 1.0);
    // interior grid point g: curve a contributes 1, curve b contributes g/100
    REQUIRE(m.points[50].tpr == Catch::Approx((1.0 + 0.5) / 2.0).margin(1e-12));
    REQUIRE(m.points[25].tpr == Catch::Approx((1.0 + 0.25) / 2.0).margin(1e-12));

    REQUIRE_THROWS_AS(mean_roc({}), error);
}

TEST_CASE("fold aggregation uses the sample standard deviation") {
    mean_std agg = aggregate_folds({1.0, 2.0, 3.0, 4.0});
    REQUIRE(agg.mean == Catch::Approx(2.5).margin(1e-15));
    REQUIRE(agg.std_dev == Catch::Approx(std::sqrt(5.0 / 3.0)).margin(1e-14));
    REQUIRE_THROWS_AS(aggregate_folds({1.0}), error);

    mean_std same = aggregate_folds({0.97, 0.97});
    REQUIRE(same.mean == Catch::Approx(0.97).margin(1e-15));
    REQUIRE(same.std_dev == 0.0);
}

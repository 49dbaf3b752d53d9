#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "modsel/calib.hpp"
#include "modsel/rng.hpp"

using namespace modsel;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One residual model whose calibration scores are exactly |y_i|.
ModelClass zero_predictor(std::size_t n) {
    ResidualModel m;
    m.pred_calib.assign(n, 0.0);
    m.pred_test = 0.0;
    std::vector<ModelEvaluations> v;
    v.emplace_back(std::move(m));
    return ModelClass(std::move(v));
}

}  // namespace

TEST_CASE("empirical quantile order statistics") {
    CHECK(empirical_quantile({3.0, 1.0, 2.0}, 2.0 / 3.0) == doctest::Approx(2.0));
    CHECK(empirical_quantile({1.0, 2.0, 3.0}, 1.05) == kInf);
    CHECK(empirical_quantile({5.0}, 0.5) == doctest::Approx(5.0));
    CHECK(empirical_quantile({1.0, 2.0}, -0.1) == -kInf);
    CHECK_THROWS_AS(empirical_quantile({}, 0.5), std::invalid_argument);
    // Exact-integer levels survive floating arithmetic: 0.9 * 10 must give
    // the 9th order statistic, not +inf.
    CHECK(quantile_order_index(0.9, 10) == 9);
    CHECK(quantile_order_index(0.9 * (1.0 + 1.0 / 9.0), 9) == 9);
}

TEST_CASE("calibration quantile triple") {
    ModelClass mc = zero_predictor(3);
    CalibrationScores cs(mc, {0.5, 1.0, 2.0}, 0.5);
    CHECK(cs.k() == 2);
    CHECK(cs.q_hat(0) == doctest::Approx(1.0));
    CHECK(cs.q_hat_minus(0) == doctest::Approx(0.5));
    CHECK(cs.q_hat_plus(0) == doctest::Approx(2.0));

    CalibrationScores tight(mc, {0.5, 1.0, 2.0}, 0.1);
    CHECK(tight.k() == 4);
    CHECK(tight.q_hat(0) == kInf);

    ModelClass single = zero_predictor(1);
    CalibrationScores one(single, {0.7}, 0.5);
    CHECK(one.q_hat(0) == doctest::Approx(0.7));
}

TEST_CASE("augmented quantile is the clamp of the test score") {
    ModelClass mc = zero_predictor(3);
    CalibrationScores cs(mc, {0.5, 1.0, 2.0}, 0.5);
    CHECK(cs.q_hat_aug(0, 0.7) == doctest::Approx(0.7));
    CHECK(cs.q_hat_aug(0, 5.0) == doctest::Approx(1.0));
    CHECK(cs.q_hat_aug(0, 0.1) == doctest::Approx(0.5));
}

TEST_CASE("augmented quantile equals the explicit n+1 multiset quantile") {
    sim::Rng rng(314, 15);
    for (int rep = 0; rep < 1000; ++rep) {
        std::size_t n = 1 + rng.below(12);
        std::vector<double> ys(n);
        for (auto& y : ys) y = rng.normal();
        ModelClass mc = zero_predictor(n);
        double alpha = rng.uniform(0.05, 0.95);
        CalibrationScores cs(mc, ys, alpha);
        double s = std::fabs(rng.normal());
        std::vector<double> augmented;
        for (double y : ys) augmented.push_back(std::fabs(y));
        augmented.push_back(s);
        double direct = empirical_quantile(augmented, 1.0 - alpha);
        double via_clamp = cs.q_hat_aug(0, s);
        if (std::isfinite(direct))
            CHECK(via_clamp == doctest::Approx(direct));
        else
            CHECK(via_clamp == direct);
        // Deflated and plain quantiles bracket the augmented one.
        CHECK(cs.q_hat_minus(0) <= via_clamp);
        CHECK(via_clamp <= cs.q_hat(0));
    }
}

TEST_CASE("leave-one-out profile is a clamp of the test profile") {
    ModelClass mc = zero_predictor(3);
    CalibrationScores cs(mc, {0.5, 1.0, 2.0}, 0.5);
    PiecewiseLinearFn vee = mc.model(0).score_profile_test();
    // Dropping the middle score leaves retained scores (0.5, 2.0), k = 2.
    PiecewiseLinearFn prof = cs.q_hat_loo_profile(0, 1, vee);
    CHECK(prof(0.0) == doctest::Approx(0.5));
    CHECK(prof(1.3) == doctest::Approx(1.3));
    CHECK(prof(10.0) == doctest::Approx(2.0));

    ModelClass single = zero_predictor(1);
    CalibrationScores one(single, {0.7}, 0.5);
    PiecewiseLinearFn free = one.q_hat_loo_profile(0, 0, single.model(0).score_profile_test());
    for (double y : {-2.0, 0.0, 3.0}) CHECK(free(y) == doctest::Approx(std::fabs(y)));
}

TEST_CASE("leave-one-out profile equals the brute-force quantile on a grid") {
    sim::Rng rng(2718, 4);
    for (int rep = 0; rep < 120; ++rep) {
        std::size_t n = 2 + rng.below(8);
        std::vector<double> ys(n);
        for (auto& y : ys) y = rng.normal();
        ModelClass mc = zero_predictor(n);
        double alpha = rng.uniform(0.05, 0.9);
        CalibrationScores cs(mc, ys, alpha);
        if (cs.loo_quantile_infinite()) continue;
        std::size_t drop = rng.below(n);
        PiecewiseLinearFn prof =
            cs.q_hat_loo_profile(0, drop, mc.model(0).score_profile_test());
        double level = (1.0 - alpha) * (1.0 + 1.0 / static_cast<double>(n));
        for (int g = 0; g <= 40; ++g) {
            double y = -4.0 + 0.2 * g;
            std::vector<double> multiset;
            for (std::size_t i = 0; i < n; ++i)
                if (i != drop) multiset.push_back(std::fabs(ys[i]));
            multiset.push_back(std::fabs(y));
            double direct = empirical_quantile(multiset, level);
            CHECK(prof(y) == doctest::Approx(direct).epsilon(1e-12));
            CHECK(cs.q_hat_loo(0, drop, std::fabs(y)) == doctest::Approx(direct).epsilon(1e-12));
        }
    }
}

TEST_CASE("quantile counting property and permutation invariance") {
    sim::Rng rng(46, 10);
    for (int rep = 0; rep < 200; ++rep) {
        std::size_t m = 1 + rng.below(10);
        std::vector<double> values(m);
        for (auto& v : values) v = rng.normal();
        double tau = rng.uniform(0.01, 0.999);
        double q = empirical_quantile(values, tau);
        long k = quantile_order_index(tau, m);
        if (k >= 1 && k <= static_cast<long>(m)) {
            long at_most = static_cast<long>(
                std::count_if(values.begin(), values.end(), [&](double v) { return v <= q; }));
            CHECK(at_most >= k);
        }
        std::vector<double> shuffled = values;
        for (std::size_t i = m; i > 1; --i)
            std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
        CHECK(empirical_quantile(shuffled, tau) == q);
    }
}

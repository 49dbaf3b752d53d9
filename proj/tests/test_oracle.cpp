#include <doctest.h>

#include <cmath>

#include "modsel/oracle.hpp"
#include "modsel/rng.hpp"

using namespace modsel;
using oracle::GridSpec;

namespace {

ModelClass constant_predictors(const std::vector<double>& preds, std::size_t n) {
    std::vector<ModelEvaluations> v;
    for (double f : preds) {
        ResidualModel m;
        m.pred_calib.assign(n, f);
        m.pred_test = f;
        v.emplace_back(std::move(m));
    }
    return ModelClass(std::move(v));
}

ModelClass random_class(sim::Rng& rng, std::size_t count, std::size_t n, bool rescaled) {
    std::vector<ModelEvaluations> v;
    for (std::size_t lam = 0; lam < count; ++lam) {
        if (!rescaled) {
            ResidualModel m;
            for (std::size_t i = 0; i < n; ++i)
                m.pred_calib.push_back(rng.uniform(-2.0, 2.0));
            m.pred_test = rng.uniform(-2.0, 2.0);
            v.emplace_back(std::move(m));
        } else {
            RescaledResidualModel m;
            for (std::size_t i = 0; i < n; ++i) {
                m.pred_calib.push_back(rng.uniform(-2.0, 2.0));
                m.sigma_calib.push_back(rng.uniform(0.3, 2.0));
            }
            m.pred_test = rng.uniform(-2.0, 2.0);
            m.sigma_test = rng.uniform(0.3, 2.0);
            v.emplace_back(std::move(m));
        }
    }
    return ModelClass(std::move(v));
}

}  // namespace

TEST_CASE("region symmetric difference") {
    auto a = PredictionRegion::intervals({{0.0, 1.0}});
    auto b = PredictionRegion::intervals({{0.0, 2.0}});
    CHECK(oracle::region_diff_measure(a, a) == doctest::Approx(0.0));
    CHECK(oracle::region_diff_measure(a, b) == doctest::Approx(1.0));

    auto la = PredictionRegion::labels({0, 1});
    auto lb = PredictionRegion::labels({1, 2});
    CHECK(oracle::region_diff_measure(la, lb) == doctest::Approx(2.0));
    CHECK(oracle::region_diff_measure(la, PredictionRegion::empty()) == doctest::Approx(2.0));
    CHECK_THROWS(oracle::region_diff_measure(a, la));
}

TEST_CASE("grid oracle reproduces the hand cases") {
    ModelClass near = constant_predictors({0.0, 1.5}, 3);
    CalibrationSession s_near(near, {0.5, 1.0, 2.0}, 0.5);
    GridSpec grid{-4.0, 6.0, 10001};
    PredictionRegion r = oracle::grid_modsel_cp(s_near, grid);
    REQUIRE(r.interval_parts().size() == 2);
    CHECK(r.interval_parts()[0].lo == doctest::Approx(-0.5).epsilon(1e-2));
    CHECK(r.interval_parts()[0].hi == doctest::Approx(0.5).epsilon(1e-2));
    CHECK(r.interval_parts()[1].lo == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(r.interval_parts()[1].hi == doctest::Approx(2.0).epsilon(1e-2));

    ModelClass far = constant_predictors({0.0, 10.0}, 3);
    CalibrationSession s_far(far, {0.5, 1.0, 2.0}, 0.5);
    PredictionRegion rf = oracle::grid_modsel_cp(s_far, GridSpec{-5.0, 15.0, 20001});
    REQUIRE(rf.interval_parts().size() == 1);
    CHECK(rf.interval_parts()[0].lo == doctest::Approx(-1.0).epsilon(1e-2));
    CHECK(rf.interval_parts()[0].hi == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("grid oracle matches split conformal for a single model") {
    ModelClass mc = constant_predictors({0.3}, 5);
    CalibrationSession session(mc, {1.0, 0.2, 0.9, 1.4, 0.5}, 0.3);
    PredictionRegion split = session.split_conformal(0).region;
    GridSpec grid = oracle::default_grid(session, 20001);
    for (auto* fn : {&oracle::grid_modsel_cp, &oracle::grid_modsel_cp_loo}) {
        PredictionRegion r = (*fn)(session, grid);
        CHECK(oracle::region_diff_measure(r, split) <= 5.0 * grid.step());
    }
}

TEST_CASE("oracle agrees with the efficient implementations on random instances") {
    sim::Rng rng(90210, 17);
    for (int rep = 0; rep < 25; ++rep) {
        std::size_t n = 3 + rng.below(12);
        std::size_t count = 1 + rng.below(4);
        bool rescaled = rng.uniform01() < 0.5;
        ModelClass mc = random_class(rng, count, n, rescaled);
        std::vector<double> ys(n);
        for (auto& y : ys) y = rng.normal() * 1.5;
        CalibrationSession session(mc, ys, rng.uniform(0.15, 0.5));
        if (std::isinf(session.threshold_budget())) continue;
        GridSpec grid = oracle::default_grid(session, 8001);
        PredictionRegion cp = session.modsel_cp().region;
        PredictionRegion cp_grid = oracle::grid_modsel_cp(session, grid);
        CHECK(oracle::region_diff_measure(cp, cp_grid) <= 5.0 * grid.step());

        PredictionRegion loo = session.modsel_cp_loo().region;
        PredictionRegion loo_grid = oracle::grid_modsel_cp_loo(session, grid);
        CHECK(oracle::region_diff_measure(loo, loo_grid) <= 5.0 * grid.step());
    }
}

TEST_CASE("halving the grid step changes the measure only at boundaries") {
    ModelClass mc = constant_predictors({0.0, 1.5}, 3);
    CalibrationSession session(mc, {0.5, 1.0, 2.0}, 0.5);
    GridSpec coarse{-4.0, 6.0, 2001};
    GridSpec fine{-4.0, 6.0, 4001};
    PredictionRegion rc = oracle::grid_modsel_cp(session, coarse);
    PredictionRegion rf = oracle::grid_modsel_cp(session, fine);
    double change = std::fabs(rc.measure() - rf.measure());
    CHECK(change <= 4.0 * coarse.step() *
                        static_cast<double>(rc.interval_parts().size()));
}

TEST_CASE("oracle is permutation invariant in the calibration points") {
    sim::Rng rng(1999, 8);
    std::size_t n = 7;
    ModelClass mc = constant_predictors({0.4, -0.9}, n);
    std::vector<double> ys(n);
    for (auto& y : ys) y = rng.normal();
    std::vector<double> ys_perm = ys;
    std::reverse(ys_perm.begin(), ys_perm.end());
    CalibrationSession s1(mc, ys, 0.3);
    CalibrationSession s2(mc, ys_perm, 0.3);
    GridSpec grid{-6.0, 6.0, 4001};
    for (auto* fn : {&oracle::grid_modsel_cp, &oracle::grid_modsel_cp_loo}) {
        PredictionRegion a = (*fn)(s1, grid);
        PredictionRegion b = (*fn)(s2, grid);
        CHECK(oracle::region_diff_measure(a, b) == doctest::Approx(0.0));
    }
}

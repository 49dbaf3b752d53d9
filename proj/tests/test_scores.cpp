#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "modsel/rng.hpp"
#include "modsel/scores.hpp"

using namespace modsel;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ModelEvaluations random_continuous_model(sim::Rng& rng) {
    std::size_t n = 3 + rng.below(6);
    switch (rng.below(3)) {
        case 0: {
            ResidualModel m;
            for (std::size_t i = 0; i < n; ++i) m.pred_calib.push_back(rng.uniform(-3, 3));
            m.pred_test = rng.uniform(-3, 3);
            return ModelEvaluations(std::move(m));
        }
        case 1: {
            RescaledResidualModel m;
            for (std::size_t i = 0; i < n; ++i) {
                m.pred_calib.push_back(rng.uniform(-3, 3));
                m.sigma_calib.push_back(rng.uniform(0.2, 2.5));
            }
            m.pred_test = rng.uniform(-3, 3);
            m.sigma_test = rng.uniform(0.2, 2.5);
            return ModelEvaluations(std::move(m));
        }
        default: {
            CqrModel m;
            for (std::size_t i = 0; i < n; ++i) {
                double lo = rng.uniform(-3, 2);
                m.qlo_calib.push_back(lo);
                m.qhi_calib.push_back(lo + rng.uniform(0, 3));
            }
            m.qlo_test = rng.uniform(-3, 2);
            m.qhi_test = m.qlo_test + rng.uniform(0, 3);
            return ModelEvaluations(std::move(m));
        }
    }
}

}  // namespace

TEST_CASE("score evaluation per family") {
    ModelEvaluations res(ResidualModel{{2.0}, 2.0});
    CHECK(res.score_calib(0, 5.0) == doctest::Approx(3.0));
    CHECK_THROWS_AS(res.score_calib(7, 0.0), std::out_of_range);

    ModelEvaluations cqr(CqrModel{{1.0}, {3.0}, 1.0, 3.0});
    CHECK(cqr.score_calib(0, 2.0) == doctest::Approx(-1.0));

    ModelEvaluations dens(CondDensityModel{{{0.5, 0.3, 0.2}}, {0.5, 0.3, 0.2}});
    CHECK(dens.score_calib(0, 1.0) == doctest::Approx(-0.3));

    ModelEvaluations scaled(RescaledResidualModel{{1.0}, 1.0, {2.0}, 2.0});
    CHECK(scaled.score_calib(0, 5.0) == doctest::Approx(2.0));
}

TEST_CASE("test-point score profiles") {
    ModelEvaluations res(ResidualModel{{0.0}, 2.0});
    PiecewiseLinearFn p = res.score_profile_test();
    CHECK(p(2.0) == doctest::Approx(0.0));
    CHECK(p(5.0) == doctest::Approx(3.0));

    ModelEvaluations cqr(CqrModel{{0.0}, {0.0}, 1.0, 3.0});
    PiecewiseLinearFn pc = cqr.score_profile_test();
    CHECK(pc(2.0) == doctest::Approx(-1.0));
    CHECK(pc(0.0) == doctest::Approx(1.0));
    CHECK(pc(5.0) == doctest::Approx(2.0));

    ModelEvaluations scaled(RescaledResidualModel{{0.0}, 0.0, {1.0}, 2.0});
    PiecewiseLinearFn ps = scaled.score_profile_test();
    CHECK(ps(4.0) == doctest::Approx(2.0));

    ModelEvaluations dens(CondDensityModel{{{0.6, 0.4}}, {0.6, 0.4}});
    auto v = dens.score_vector_test();
    REQUIRE(v.size() == 2);
    CHECK(v[0] == doctest::Approx(-0.6));
    CHECK(v[1] == doctest::Approx(-0.4));
    CHECK_THROWS(dens.score_profile_test());
}

TEST_CASE("regions at a threshold") {
    ModelEvaluations res(ResidualModel{{0.0}, 2.0});
    auto r = res.region_at_threshold(1.0);
    REQUIRE(r.interval_parts().size() == 1);
    CHECK(r.interval_parts()[0].lo == doctest::Approx(1.0));
    CHECK(r.interval_parts()[0].hi == doctest::Approx(3.0));
    CHECK(res.region_at_threshold(-0.5).is_empty());
    CHECK(res.region_at_threshold(kInf).is_entire());

    ModelEvaluations dens(CondDensityModel{{{0.5, 0.3, 0.2}}, {0.5, 0.3, 0.2}});
    auto labels = dens.region_at_threshold(-0.25);
    REQUIRE(labels.label_parts().size() == 2);
    CHECK(labels.label_parts()[0] == 0);
    CHECK(labels.label_parts()[1] == 1);
}

TEST_CASE("set sizes per evaluation point") {
    ModelEvaluations res(ResidualModel{{0.0}, 0.0});
    CHECK(res.set_size(0, 1.0) == doctest::Approx(2.0));
    CHECK(res.set_size(1, -1.0) == doctest::Approx(0.0));

    ModelEvaluations cqr(CqrModel{{0.0}, {2.0}, 0.0, 2.0});
    CHECK(cqr.set_size(0, 0.5) == doctest::Approx(3.0));

    ModelEvaluations scaled(RescaledResidualModel{{0.0}, 0.0, {3.0}, 3.0});
    CHECK(scaled.set_size(0, -1.0) == doctest::Approx(0.0));
    CHECK(scaled.set_size(0, 1.0) == doctest::Approx(6.0));
}

TEST_CASE("region width equals set size at the test point") {
    sim::Rng rng(31337, 2);
    for (int rep = 0; rep < 1000; ++rep) {
        ModelEvaluations m = random_continuous_model(rng);
        double q = rng.uniform(-2.0, 3.0);
        double width = m.region_at_threshold(q).measure();
        CHECK(width == doctest::Approx(m.set_size(m.calib_size(), q)).epsilon(1e-9));
    }
}

TEST_CASE("regions grow with the threshold") {
    sim::Rng rng(4242, 9);
    for (int rep = 0; rep < 200; ++rep) {
        ModelEvaluations m = random_continuous_model(rng);
        double q1 = rng.uniform(-2.0, 3.0);
        double q2 = q1 + rng.uniform(0.0, 2.0);
        auto r1 = m.region_at_threshold(q1);
        auto r2 = m.region_at_threshold(q2);
        CHECK(region_contains(r2, r1, 1e-12));
    }
}

TEST_CASE("profile agrees with pointwise scores") {
    sim::Rng rng(8, 80);
    for (int rep = 0; rep < 100; ++rep) {
        ModelEvaluations m = random_continuous_model(rng);
        PiecewiseLinearFn profile = m.score_profile_test();
        for (int i = 0; i < 10; ++i) {
            double y = rng.uniform(-8.0, 8.0);
            CHECK(profile(y) == doctest::Approx(m.score_test(y)).epsilon(1e-12));
        }
    }
}

TEST_CASE("model class validates inputs") {
    CHECK_THROWS_AS(ModelClass({}), std::invalid_argument);
    std::vector<ModelEvaluations> mixed;
    mixed.emplace_back(ResidualModel{{0.0}, 0.0});
    mixed.emplace_back(CqrModel{{0.0}, {1.0}, 0.0, 1.0});
    CHECK_THROWS_AS(ModelClass(std::move(mixed)), std::invalid_argument);

    CHECK_THROWS_AS(ModelEvaluations(CondDensityModel{{{0.9, 0.2}}, {0.5, 0.5}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(ModelEvaluations(RescaledResidualModel{{0.0}, 0.0, {0.0}, 1.0}),
                    std::invalid_argument);
}

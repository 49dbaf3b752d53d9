#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "modsel/pwl.hpp"
#include "modsel/rng.hpp"

using modsel::PiecewiseLinearFn;
using modsel::pwl_clamp;
using modsel::pwl_compose_monotone;
using modsel::pwl_intersections;
using modsel::pwl_invert_monotone;
using modsel::pwl_invert_monotone_strict;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Random continuous PWL with a handful of knots; slopes optionally restricted
// to be nonnegative.
PiecewiseLinearFn random_pwl(modsel::sim::Rng& rng, bool monotone = false) {
    std::size_t knot_count = 1 + rng.below(4);
    std::vector<double> knots(knot_count);
    double x = rng.uniform(-5.0, 0.0);
    for (auto& k : knots) {
        k = x;
        x += rng.uniform(0.3, 2.5);
    }
    std::vector<double> slopes(knot_count + 1);
    for (auto& s : slopes) {
        s = rng.uniform(-3.0, 3.0);
        if (monotone) s = std::fabs(s);
        if (rng.uniform01() < 0.25) s = 0.0;
    }
    return PiecewiseLinearFn(std::move(knots), rng.uniform(-2.0, 2.0), std::move(slopes));
}

}  // namespace

TEST_CASE("evaluation matches the piecewise definition") {
    PiecewiseLinearFn abs2 = PiecewiseLinearFn::vee(2.0, 1.0);
    CHECK(abs2(5.0) == doctest::Approx(3.0));
    CHECK(abs2(-1.0) == doctest::Approx(3.0));
    CHECK(abs2(2.0) == doctest::Approx(0.0));

    PiecewiseLinearFn c7 = PiecewiseLinearFn::constant(7.0);
    CHECK(c7(-10.0) == doctest::Approx(7.0));

    PiecewiseLinearFn f = pwl_clamp(PiecewiseLinearFn::vee(0.0, 1.0), 0.5, 2.0);
    CHECK(f(1.0) == doctest::Approx(1.0));
    CHECK(f(0.0) == doctest::Approx(0.5));
    CHECK(f(10.0) == doctest::Approx(2.0));
}

TEST_CASE("clamp inserts crossing knots") {
    PiecewiseLinearFn f = pwl_clamp(PiecewiseLinearFn::vee(0.0, 1.0), 0.5, 2.0);
    CHECK(f(-0.25) == doctest::Approx(0.5));
    CHECK(f(0.5) == doctest::Approx(0.5));
    CHECK(f(1.7) == doctest::Approx(1.7));
    CHECK(f(2.0) == doctest::Approx(2.0));
    CHECK(f(-3.0) == doctest::Approx(2.0));
    CHECK(f.knots().size() == 4);  // -2, -0.5, 0.5, 2

    PiecewiseLinearFn same = pwl_clamp(PiecewiseLinearFn::vee(0.0, 1.0), -kInf, kInf);
    for (double y : {-3.0, -0.2, 0.0, 1.7})
        CHECK(same(y) == doctest::Approx(std::fabs(y)));

    PiecewiseLinearFn c = pwl_clamp(PiecewiseLinearFn::constant(3.0), 0.0, 1.0);
    CHECK(c.is_constant());
    CHECK(c(42.0) == doctest::Approx(1.0));

    CHECK_THROWS_AS(pwl_clamp(PiecewiseLinearFn::constant(0.0), 1.0, 0.0),
                    std::invalid_argument);
}

TEST_CASE("clamp output stays within bounds at random points") {
    modsel::sim::Rng rng(2024, 7);
    for (int rep = 0; rep < 50; ++rep) {
        PiecewiseLinearFn f = random_pwl(rng);
        double lo = rng.uniform(-2.0, 0.0);
        double hi = lo + rng.uniform(0.0, 3.0);
        PiecewiseLinearFn g = pwl_clamp(f, lo, hi);
        for (int i = 0; i < 20; ++i) {
            double y = rng.uniform(-12.0, 12.0);
            CHECK(g(y) >= lo - 1e-12);
            CHECK(g(y) <= hi + 1e-12);
            CHECK(g(y) == doctest::Approx(std::min(hi, std::max(lo, f(y)))));
        }
    }
}

TEST_CASE("monotone composition") {
    // Doubling the residual score profile doubles it everywhere.
    PiecewiseLinearFn twice({0.0}, 0.0, {2.0, 2.0});
    PiecewiseLinearFn f = PiecewiseLinearFn::vee(2.0, 1.0);
    PiecewiseLinearFn h = pwl_compose_monotone(twice, f);
    for (double y : {-1.0, 0.0, 2.0, 3.5}) CHECK(h(y) == doctest::Approx(2.0 * std::fabs(y - 2.0)));

    PiecewiseLinearFn identity({0.0}, 0.0, {1.0, 1.0});
    PiecewiseLinearFn hid = pwl_compose_monotone(identity, f);
    for (double y : {-4.0, 0.1, 2.0, 9.0}) CHECK(hid(y) == doctest::Approx(f(y)));

    // Hinge outer, so the composed function has a flat valley.
    PiecewiseLinearFn hinge({1.5}, 0.0, {0.0, 2.0});  // max(0, 2q - 3)
    PiecewiseLinearFn habs = pwl_compose_monotone(hinge, PiecewiseLinearFn::vee(0.0, 1.0));
    CHECK(habs(0.0) == doctest::Approx(0.0));
    CHECK(habs(1.5) == doctest::Approx(0.0));
    CHECK(habs(2.0) == doctest::Approx(1.0));
    CHECK(habs(-3.0) == doctest::Approx(3.0));

    PiecewiseLinearFn decreasing({0.0}, 0.0, {-1.0, 0.0});
    CHECK_THROWS_AS(pwl_compose_monotone(decreasing, f), std::invalid_argument);
}

TEST_CASE("composition agrees pointwise on random inputs") {
    modsel::sim::Rng rng(99, 3);
    for (int rep = 0; rep < 60; ++rep) {
        PiecewiseLinearFn outer = random_pwl(rng, true);
        PiecewiseLinearFn inner = random_pwl(rng);
        PiecewiseLinearFn h = pwl_compose_monotone(outer, inner);
        for (int i = 0; i < 25; ++i) {
            double y = rng.uniform(-12.0, 12.0);
            CHECK(h(y) == doctest::Approx(outer(inner(y))).epsilon(1e-9));
        }
    }
}

TEST_CASE("intersections: crossings and shared plateaus") {
    PiecewiseLinearFn a = PiecewiseLinearFn::vee(0.0, 1.0);
    PiecewiseLinearFn b = PiecewiseLinearFn::vee(2.0, 1.0);
    auto ix = pwl_intersections(a, b);
    REQUIRE(ix.points.size() == 1);
    CHECK(ix.points[0] == doctest::Approx(1.0));
    CHECK_FALSE(ix.identical);

    PiecewiseLinearFn shifted({0.0}, 1.0, {-1.0, 1.0});  // |y| + 1
    CHECK(pwl_intersections(a, shifted).points.empty());

    // Clamped vees share the level-2 plateau on both tails.
    PiecewiseLinearFn ca = pwl_clamp(a, 0.5, 2.0);
    PiecewiseLinearFn cb = pwl_clamp(PiecewiseLinearFn::vee(1.5, 1.0), 0.5, 2.0);
    auto cx = pwl_intersections(ca, cb);
    REQUIRE(cx.points.size() == 3);
    CHECK(cx.points[0] == doctest::Approx(-2.0));
    CHECK(cx.points[1] == doctest::Approx(0.75));
    CHECK(cx.points[2] == doctest::Approx(3.5));

    auto same = pwl_intersections(a, a);
    CHECK(same.identical);
    CHECK(same.points.empty());
}

TEST_CASE("intersection points are equalities and cover all sign changes") {
    modsel::sim::Rng rng(512, 11);
    for (int rep = 0; rep < 80; ++rep) {
        PiecewiseLinearFn f = random_pwl(rng);
        PiecewiseLinearFn g = random_pwl(rng);
        auto ix = pwl_intersections(f, g);
        for (double p : ix.points) {
            double scale = std::max(std::fabs(f(p)), std::fabs(g(p)));
            CHECK(std::fabs(f(p) - g(p)) <= 100 * modsel::tol_eq(scale));
        }
        // Grid sign scan: every sign change must be near a reported point.
        const double lo = -14.0, hi = 14.0;
        const int grid = 10000;
        const double step = (hi - lo) / grid;
        double prev = f(lo) - g(lo);
        for (int i = 1; i <= grid; ++i) {
            double y = lo + step * i;
            double cur = f(y) - g(y);
            if (prev != 0.0 && cur != 0.0 && (prev > 0) != (cur > 0)) {
                bool near = false;
                for (double p : ix.points)
                    if (std::fabs(p - y) <= 2.0 * step) near = true;
                CHECK(near);
            }
            prev = cur;
        }
    }
}

TEST_CASE("monotone inversion") {
    PiecewiseLinearFn twice({0.0}, 0.0, {2.0, 2.0});
    CHECK(pwl_invert_monotone(twice, 2.0) == doctest::Approx(1.0));

    // Mean of two hinges with gaps 2 and 4: only the wider one is active at
    // the solution of target 0.5.
    PiecewiseLinearFn gaps({-2.0, -1.0}, 0.0, {0.0, 1.0, 2.0});
    CHECK(pwl_invert_monotone(gaps, 0.5) == doctest::Approx(-1.5));

    CHECK(pwl_invert_monotone(PiecewiseLinearFn::constant(0.0), 1.0) == kInf);
    CHECK(pwl_invert_monotone(PiecewiseLinearFn::constant(2.0), 1.0) == -kInf);

    // Flat run exactly at the target: sup extends to the run's right edge.
    PiecewiseLinearFn plateau({0.0, 1.0}, 1.0, {1.0, 0.0, 1.0});
    CHECK(pwl_invert_monotone(plateau, 1.0) == doctest::Approx(1.0));
    CHECK(pwl_invert_monotone_strict(plateau, 1.0) == doctest::Approx(0.0));
}

TEST_CASE("inversion round-trips under evaluation") {
    modsel::sim::Rng rng(77, 5);
    for (int rep = 0; rep < 100; ++rep) {
        PiecewiseLinearFn g = random_pwl(rng, true);
        double target = rng.uniform(-4.0, 8.0);
        double q = pwl_invert_monotone(g, target);
        if (std::isfinite(q)) {
            CHECK(g(q) <= target + modsel::tol_eq(target));
            // Strictly beyond the sup the function exceeds the target.
            CHECK(g(q + 1e-6 * (1 + std::fabs(q))) >= target - 1e-6);
        } else if (q == kInf) {
            CHECK(g(1e9) <= target + 1e-9 * (1 + std::fabs(target)));
        } else {
            CHECK(g(-1e9) > target);
        }
        double qs = pwl_invert_monotone_strict(g, target);
        if (std::isfinite(qs) && std::isfinite(q)) CHECK(qs <= q + 1e-12);
    }
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "modsel/lossfn.hpp"
#include "modsel/rng.hpp"

using namespace modsel;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ModelClass residual_class(std::size_t n) {
    ResidualModel m;
    m.pred_calib.assign(n, 0.0);
    m.pred_test = 0.0;
    std::vector<ModelEvaluations> v;
    v.emplace_back(std::move(m));
    return ModelClass(std::move(v));
}

// Direct mean of per-point set sizes, independent of the profile machinery.
double brute_loss(const ModelClass& mc, std::size_t lam, double q) {
    double total = 0.0;
    for (std::size_t p = 0; p <= mc.calib_size(); ++p) total += mc.model(lam).set_size(p, q);
    return total / static_cast<double>(mc.calib_size() + 1);
}

}  // namespace

TEST_CASE("loss closed forms") {
    ModelClass res = residual_class(4);
    LossContext ctx = LossContext::all_points(res);
    CHECK(ctx.loss(0, 1.0) == doctest::Approx(2.0));
    CHECK(ctx.loss(0, -3.0) == doctest::Approx(0.0));
    CHECK(ctx.loss(0, kInf) == kInf);
    CHECK_THROWS_AS(ctx.loss(5, 1.0), std::out_of_range);

    // Rescaled with sigma (1, 2, 3) over three evaluation points: the class
    // has two calibration points and sigma 3 at the test point.
    RescaledResidualModel rm;
    rm.pred_calib = {0.0, 0.0};
    rm.sigma_calib = {1.0, 2.0};
    rm.pred_test = 0.0;
    rm.sigma_test = 3.0;
    std::vector<ModelEvaluations> v;
    v.emplace_back(std::move(rm));
    ModelClass scaled(std::move(v));
    LossContext sctx = LossContext::all_points(scaled);
    CHECK(sctx.loss(0, 1.0) == doctest::Approx(4.0));

    CondDensityModel dm;
    dm.p_calib = {{0.7, 0.3}, {0.6, 0.4}};
    dm.p_test = {0.5, 0.5};
    std::vector<ModelEvaluations> dv;
    dv.emplace_back(std::move(dm));
    ModelClass dens(std::move(dv));
    LossContext dctx = LossContext::all_points(dens);
    CHECK(dctx.loss(0, -0.9) == doctest::Approx(0.0));
    CHECK(dctx.loss(0, 0.0) == doctest::Approx(2.0));
    CHECK(dctx.loss(0, -0.45) == doctest::Approx(4.0 / 3.0));
}

TEST_CASE("loss profiles") {
    ModelClass res = residual_class(2);
    LossContext ctx = LossContext::all_points(res);
    const PiecewiseLinearFn& p = ctx.loss_profile(0);
    CHECK(p(-1.0) == doctest::Approx(0.0));
    CHECK(p(2.0) == doctest::Approx(4.0));

    // CQR gaps (2, 4): knots at -1 and -2, slopes 0 / 1 / 2.
    CqrModel cm;
    cm.qlo_calib = {0.0};
    cm.qhi_calib = {2.0};
    cm.qlo_test = 0.0;
    cm.qhi_test = 4.0;
    std::vector<ModelEvaluations> v;
    v.emplace_back(std::move(cm));
    ModelClass cqr(std::move(v));
    LossContext cctx = LossContext::all_points(cqr);
    const PiecewiseLinearFn& cp = cctx.loss_profile(0);
    REQUIRE(cp.knots().size() == 2);
    CHECK(cp.knots()[0] == doctest::Approx(-2.0));
    CHECK(cp.knots()[1] == doctest::Approx(-1.0));
    CHECK(cp.slopes()[0] == doctest::Approx(0.0));
    CHECK(cp.slopes()[1] == doctest::Approx(1.0));
    CHECK(cp.slopes()[2] == doctest::Approx(2.0));
    CHECK(cctx.invert_loss(0, 0.5) == doctest::Approx(-1.5));
}

TEST_CASE("loss inversion") {
    ModelClass res = residual_class(3);
    LossContext ctx = LossContext::all_points(res);
    CHECK(ctx.invert_loss(0, 2.0) == doctest::Approx(1.0));
    CHECK(ctx.invert_loss(0, kInf) == kInf);

    CondDensityModel dm;
    dm.p_calib = {{0.7, 0.3}};
    dm.p_test = {0.6, 0.4};
    std::vector<ModelEvaluations> dv;
    dv.emplace_back(std::move(dm));
    ModelClass dens(std::move(dv));
    LossContext dctx = LossContext::all_points(dens);
    // Largest threshold with zero average count: the first jump at -max p.
    CHECK(dctx.invert_loss(0, 0.0) == doctest::Approx(-0.7));
    CHECK(dctx.invert_loss(0, 2.0) == kInf);
    CHECK(dctx.invert_loss(0, -0.5) == -kInf);
}

TEST_CASE("loss is monotone and matches the brute-force mean") {
    sim::Rng rng(606, 1);
    for (int rep = 0; rep < 60; ++rep) {
        std::size_t n = 2 + rng.below(5);
        std::vector<ModelEvaluations> v;
        int family = static_cast<int>(rng.below(3));
        if (family == 0) {
            ResidualModel m;
            for (std::size_t i = 0; i < n; ++i) m.pred_calib.push_back(rng.normal());
            m.pred_test = rng.normal();
            v.emplace_back(std::move(m));
        } else if (family == 1) {
            RescaledResidualModel m;
            for (std::size_t i = 0; i < n; ++i) {
                m.pred_calib.push_back(rng.normal());
                m.sigma_calib.push_back(rng.uniform(0.1, 2.0));
            }
            m.pred_test = rng.normal();
            m.sigma_test = rng.uniform(0.1, 2.0);
            v.emplace_back(std::move(m));
        } else {
            CqrModel m;
            for (std::size_t i = 0; i < n; ++i) {
                double lo = rng.normal();
                m.qlo_calib.push_back(lo);
                m.qhi_calib.push_back(lo + rng.uniform(0.0, 2.0));
            }
            m.qlo_test = rng.normal();
            m.qhi_test = m.qlo_test + rng.uniform(0.0, 2.0);
            v.emplace_back(std::move(m));
        }
        ModelClass mc(std::move(v));
        LossContext ctx = LossContext::all_points(mc);
        for (int i = 0; i < 18; ++i) {
            double q1 = rng.uniform(-3.0, 3.0);
            double q2 = q1 + rng.uniform(0.0, 2.0);
            CHECK(ctx.loss(0, q1) <= ctx.loss(0, q2) + 1e-12);
            CHECK(ctx.loss(0, q1) == doctest::Approx(brute_loss(mc, 0, q1)).epsilon(1e-10));
        }
        double target = rng.uniform(0.0, 4.0);
        double q = ctx.invert_loss(0, target);
        if (std::isfinite(q)) CHECK(ctx.loss(0, q) <= target + modsel::tol_eq(target));
    }
}

TEST_CASE("loss symmetry in evaluation points is exact") {
    // The mean over points is permutation-invariant by construction; verify
    // through two contexts built from reordered copies of the same model.
    ResidualModel a;
    a.pred_calib = {0.5, -1.0, 2.0};
    a.pred_test = 0.25;
    ResidualModel b;
    b.pred_calib = {2.0, 0.5, -1.0};
    b.pred_test = 0.25;
    std::vector<ModelEvaluations> va, vb;
    va.emplace_back(std::move(a));
    vb.emplace_back(std::move(b));
    ModelClass ca(std::move(va)), cb(std::move(vb));
    LossContext ctxa = LossContext::all_points(ca);
    LossContext ctxb = LossContext::all_points(cb);
    for (double q : {-1.0, 0.0, 0.7, 3.2}) CHECK(ctxa.loss(0, q) == ctxb.loss(0, q));
}

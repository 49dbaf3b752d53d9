#include "modsel/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace modsel::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Accepted grid points -> closed intervals, extending half a step past the
// outermost accepted points and closing single-step gaps.
PredictionRegion assemble(const std::vector<double>& ys, const std::vector<char>& accept,
                          double step) {
    std::vector<RealInterval> parts;
    std::size_t i = 0;
    while (i < ys.size()) {
        if (!accept[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < ys.size() && accept[j + 1]) ++j;
        parts.push_back({ys[i] - 0.5 * step, ys[j] + 0.5 * step});
        i = j + 1;
    }
    return PredictionRegion::intervals(std::move(parts));
}

}  // namespace

GridSpec default_grid(const CalibrationSession& session, std::size_t points) {
    const auto& mc = session.model_class();
    const auto& ctx = session.loss_ctx();
    double lo = kInf, hi = -kInf;
    auto widen = [&](const PredictionRegion& r) {
        for (const auto& iv : r.interval_parts()) {
            lo = std::min(lo, iv.lo);
            hi = std::max(hi, iv.hi);
        }
    };
    double budget = session.threshold_budget();
    // Upper envelope of every loss threshold the leave-one-out rule can
    // produce: a quantile of per-point losses of arbitrary selected models.
    double loss_cap = 0.0;
    for (std::size_t lam = 0; lam < mc.size(); ++lam)
        for (std::size_t i = 0; i < session.n(); ++i)
            loss_cap = std::max(loss_cap, session.loss_at_calib_score(lam, i));
    for (std::size_t lam = 0; lam < mc.size(); ++lam) {
        widen(mc.model(lam).region_at_threshold(session.scores().q_hat(lam)));
        if (std::isfinite(budget))
            widen(mc.model(lam).region_at_threshold(ctx.invert_loss(lam, budget)));
        double cap = session.scores().q_hat_plus(lam);
        if (std::isfinite(cap)) widen(mc.model(lam).region_at_threshold(cap));
        if (std::isfinite(loss_cap))
            widen(mc.model(lam).region_at_threshold(ctx.invert_loss(lam, loss_cap)));
    }
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
        lo = -1.0;
        hi = 1.0;
    }
    double pad = 0.05 * std::max(1.0, hi - lo);
    return GridSpec{lo - pad, hi + pad, points};
}

PredictionRegion grid_modsel_cp(const CalibrationSession& session, const GridSpec& grid) {
    if (grid.points < 2 || !(grid.step() > 0.0))
        throw std::invalid_argument("grid_modsel_cp: bad grid");
    const auto& mc = session.model_class();
    const auto& cs = session.scores();
    std::vector<double> ys(grid.points);
    std::vector<char> accept(grid.points, 0);
    for (std::size_t g = 0; g < grid.points; ++g) {
        double y = grid.lo + grid.step() * static_cast<double>(g);
        ys[g] = y;
        std::size_t lam = session.augmented_selected_model(y);
        double s = mc.model(lam).score_test(y);
        accept[g] = s <= cs.q_hat_aug(lam, s) ? 1 : 0;
    }
    return assemble(ys, accept, grid.step());
}

PredictionRegion grid_modsel_cp_loo(const CalibrationSession& session, const GridSpec& grid) {
    if (grid.points < 2 || !(grid.step() > 0.0))
        throw std::invalid_argument("grid_modsel_cp_loo: bad grid");
    const auto& mc = session.model_class();
    const auto& cs = session.scores();
    const std::size_t n = cs.n();
    const long k = cs.k();
    const std::size_t lambda_hat = session.select_lambda_hat();

    std::vector<double> ys(grid.points);
    std::vector<char> accept(grid.points, 0);
    std::vector<double> loo_losses(n);
    for (std::size_t g = 0; g < grid.points; ++g) {
        double y = grid.lo + grid.step() * static_cast<double>(g);
        ys[g] = y;
        double threshold;
        if (k > static_cast<long>(n)) {
            threshold = kInf;
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                std::size_t lam = session.loo_selected_model(i, y);
                loo_losses[i] = session.loss_at_calib_score(lam, i);
            }
            std::vector<double> sorted_losses = loo_losses;
            std::nth_element(sorted_losses.begin(), sorted_losses.begin() + (k - 1),
                             sorted_losses.end());
            threshold = sorted_losses[static_cast<std::size_t>(k - 1)];
        }
        double lhs = session.loss_ctx().loss(lambda_hat, mc.model(lambda_hat).score_test(y));
        accept[g] = lhs <= threshold ? 1 : 0;
    }
    return assemble(ys, accept, grid.step());
}

double region_diff_measure(const PredictionRegion& a, const PredictionRegion& b) {
    using Kind = PredictionRegion::Kind;
    if (a.kind() == Kind::entire || b.kind() == Kind::entire) {
        if (a.kind() == b.kind()) return 0.0;
        throw std::invalid_argument("region_diff_measure: entire vs bounded region");
    }
    bool a_labels = a.kind() == Kind::labels;
    bool b_labels = b.kind() == Kind::labels;
    if ((a_labels && b.kind() == Kind::intervals) || (b_labels && a.kind() == Kind::intervals))
        throw std::invalid_argument("region_diff_measure: mixed variants");

    if (a_labels || b_labels) {
        const auto& la = a.label_parts();
        const auto& lb = b.label_parts();
        std::vector<int> sym;
        std::set_symmetric_difference(la.begin(), la.end(), lb.begin(), lb.end(),
                                      std::back_inserter(sym));
        return static_cast<double>(sym.size());
    }

    // Sweep over the union of endpoints; on each elementary segment membership
    // is constant for both regions.
    std::vector<double> cuts;
    for (const auto& iv : a.interval_parts()) {
        cuts.push_back(iv.lo);
        cuts.push_back(iv.hi);
    }
    for (const auto& iv : b.interval_parts()) {
        cuts.push_back(iv.lo);
        cuts.push_back(iv.hi);
    }
    if (cuts.empty()) return 0.0;
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double mid = 0.5 * (cuts[i] + cuts[i + 1]);
        if (a.contains(mid) != b.contains(mid)) total += cuts[i + 1] - cuts[i];
    }
    return total;
}

}  // namespace modsel::oracle

#include "modsel/lossfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace modsel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Mean of max(0, gap_i + 2q) over the given gaps, as a PWL in q.
PiecewiseLinearFn gap_loss_profile(std::vector<double> gaps) {
    const double m = static_cast<double>(gaps.size());
    std::vector<double> knots(gaps.size());
    for (std::size_t i = 0; i < gaps.size(); ++i) knots[i] = -0.5 * gaps[i];
    std::sort(knots.begin(), knots.end());
    // Merge duplicate knots, counting multiplicity into the slope step.
    std::vector<double> uk;
    std::vector<double> mult;
    for (double k : knots) {
        if (!uk.empty() && k - uk.back() <= 1e-12 * (1.0 + std::fabs(k)))
            mult.back() += 1.0;
        else {
            uk.push_back(k);
            mult.push_back(1.0);
        }
    }
    std::vector<double> slopes(uk.size() + 1, 0.0);
    double active = 0.0;
    for (std::size_t i = 0; i < uk.size(); ++i) {
        active += mult[i];
        slopes[i + 1] = 2.0 * active / m;
    }
    return PiecewiseLinearFn(std::move(uk), 0.0, std::move(slopes));
}

}  // namespace

LossContext::LossContext(const ModelClass& mc, std::vector<std::size_t> points)
    : mc_(&mc), points_(std::move(points)) {
    if (points_.empty()) throw std::invalid_argument("LossContext: no evaluation points");
    const std::size_t n = mc.calib_size();
    const double m = static_cast<double>(points_.size());
    if (!mc.discrete()) {
        profiles_.reserve(mc.size());
        for (std::size_t lam = 0; lam < mc.size(); ++lam) {
            const auto& model = mc.model(lam);
            switch (model.family()) {
                case ScoreFamily::residual:
                    profiles_.push_back(PiecewiseLinearFn({0.0}, 0.0, {0.0, 2.0}));
                    break;
                case ScoreFamily::rescaled_residual: {
                    const auto& r = std::get<RescaledResidualModel>(model.raw());
                    double mean_sigma = 0.0;
                    for (std::size_t p : points_)
                        mean_sigma += (p == n) ? r.sigma_test : r.sigma_calib[p];
                    mean_sigma /= m;
                    profiles_.push_back(PiecewiseLinearFn({0.0}, 0.0, {0.0, 2.0 * mean_sigma}));
                    break;
                }
                case ScoreFamily::cqr: {
                    const auto& c = std::get<CqrModel>(model.raw());
                    std::vector<double> gaps;
                    gaps.reserve(points_.size());
                    for (std::size_t p : points_)
                        gaps.push_back((p == n) ? c.qhi_test - c.qlo_test
                                                : c.qhi_calib[p] - c.qlo_calib[p]);
                    profiles_.push_back(gap_loss_profile(std::move(gaps)));
                    break;
                }
                case ScoreFamily::cond_density:
                    throw std::logic_error("unreachable");
            }
        }
    } else {
        jump_thresholds_.reserve(mc.size());
        for (std::size_t lam = 0; lam < mc.size(); ++lam) {
            const auto& d = std::get<CondDensityModel>(mc.model(lam).raw());
            std::vector<double> jumps;
            jumps.reserve(points_.size() * d.p_test.size());
            for (std::size_t p : points_) {
                const auto& probs = (p == n) ? d.p_test : d.p_calib[p];
                for (double v : probs) jumps.push_back(-v);
            }
            std::sort(jumps.begin(), jumps.end());
            jump_thresholds_.push_back(std::move(jumps));
        }
    }
}

LossContext LossContext::all_points(const ModelClass& mc) {
    std::vector<std::size_t> pts(mc.calib_size() + 1);
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = i;
    return LossContext(mc, std::move(pts));
}

LossContext LossContext::calib_prefix(const ModelClass& mc, std::size_t count) {
    if (count == 0 || count > mc.calib_size())
        throw std::invalid_argument("calib_prefix: bad count");
    std::vector<std::size_t> pts(count);
    for (std::size_t i = 0; i < count; ++i) pts[i] = i;
    return LossContext(mc, std::move(pts));
}

double LossContext::loss(std::size_t model, double q) const {
    if (model >= mc_->size()) throw std::out_of_range("model index out of range");
    if (!mc_->discrete()) {
        if (q == kInf) return kInf;
        if (q == -kInf) return 0.0;
        return profiles_[model](q);
    }
    const auto& jumps = jump_thresholds_[model];
    if (q == kInf) return static_cast<double>(mc_->label_count());
    // Label j at point i is counted when q >= -p_ij.
    auto it = std::upper_bound(jumps.begin(), jumps.end(), q);
    return static_cast<double>(it - jumps.begin()) / static_cast<double>(points_.size());
}

const PiecewiseLinearFn& LossContext::loss_profile(std::size_t model) const {
    if (mc_->discrete()) throw std::logic_error("loss_profile on discrete family");
    if (model >= mc_->size()) throw std::out_of_range("model index out of range");
    return profiles_[model];
}

double LossContext::invert_loss(std::size_t model, double target) const {
    if (model >= mc_->size()) throw std::out_of_range("model index out of range");
    if (!mc_->discrete()) {
        if (target == kInf) return kInf;
        return pwl_invert_monotone(profiles_[model], target);
    }
    if (target < 0.0) return -kInf;
    const auto& jumps = jump_thresholds_[model];
    const double m = static_cast<double>(points_.size());
    // Smallest jump threshold at which the running count exceeds target.
    std::size_t limit = static_cast<std::size_t>(std::floor(target * m + 1e-9));
    if (limit >= jumps.size()) return kInf;
    return jumps[limit];
}

double LossContext::invert_loss_strict(std::size_t model, double target) const {
    if (mc_->discrete()) throw std::logic_error("invert_loss_strict on discrete family");
    if (model >= mc_->size()) throw std::out_of_range("model index out of range");
    if (target == kInf) return kInf;
    return pwl_invert_monotone_strict(profiles_[model], target);
}

}  // namespace modsel

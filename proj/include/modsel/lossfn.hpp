#pragma once

#include <cstddef>
#include <vector>

#include "modsel/pwl.hpp"
#include "modsel/scores.hpp"

namespace modsel {

// Mean prediction-set size over a fixed collection of evaluation points, as
// a monotone nondecreasing function of the threshold q. The default context
// averages over the n calibration points plus the test point.
class LossContext {
public:
    // Calibration points 0..n-1 plus the test point.
    static LossContext all_points(const ModelClass& mc);
    // The first `count` calibration points only (no test point).
    static LossContext calib_prefix(const ModelClass& mc, std::size_t count);

    const ModelClass& model_class() const { return *mc_; }
    std::size_t point_count() const { return points_.size(); }

    double loss(std::size_t model, double q) const;

    // Exact profile q -> loss(model, q); continuous families only.
    const PiecewiseLinearFn& loss_profile(std::size_t model) const;

    // sup{q : loss(model, q) <= target}.
    double invert_loss(std::size_t model, double target) const;
    // inf{q : loss(model, q) >= target} (continuous families).
    double invert_loss_strict(std::size_t model, double target) const;

private:
    LossContext(const ModelClass& mc, std::vector<std::size_t> points);

    const ModelClass* mc_;
    std::vector<std::size_t> points_;  // calib_size() denotes the test point
    std::vector<PiecewiseLinearFn> profiles_;         // continuous: one per model
    std::vector<std::vector<double>> jump_thresholds_;  // discrete: sorted -p values per model
};

}  // namespace modsel

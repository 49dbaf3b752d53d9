#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "modsel/pwl.hpp"
#include "modsel/scores.hpp"

namespace modsel {

// k = ceil(tau * m) with a guard against floating error when tau * m is an
// exact integer. k <= 0 maps to -inf and k > m to +inf in quantile lookups.
long quantile_order_index(double tau, std::size_t m);

// The k-th smallest of the values at k = ceil(tau * m); +-inf out of range.
double empirical_quantile(std::vector<double> values, double tau);

// Per-model sorted calibration scores at a fixed miscoverage level, with the
// order-statistic lookups every method needs.
class CalibrationScores {
public:
    CalibrationScores(const ModelClass& mc, const std::vector<double>& responses, double alpha);

    std::size_t n() const { return n_; }
    double alpha() const { return alpha_; }
    // k = ceil((1 - alpha) * (n + 1)), shared by all the level conventions here.
    long k() const { return k_; }

    double raw_score(std::size_t model, std::size_t i) const { return raw_[model][i]; }
    // 1-based order statistic; rank <= 0 -> -inf, rank > n -> +inf.
    double order_stat(std::size_t model, long rank) const;

    double q_hat(std::size_t model) const { return order_stat(model, k_); }
    double q_hat_minus(std::size_t model) const { return order_stat(model, k_ - 1); }
    double q_hat_plus(std::size_t model) const { return order_stat(model, k_ + 1); }

    // Quantile_{1-alpha} of the n calibration scores plus s_test; equals
    // clamp(s_test, a_(k-1), a_(k)).
    double q_hat_aug(std::size_t model, double s_test) const;

    // Order statistics of the leave-one-out multiset (point i removed):
    // the pair (b_(k-1), b_(k)) bounding the augmented quantile.
    std::pair<double, double> loo_clamp_bounds(std::size_t model, std::size_t i) const;

    // Quantile over the n-1 retained scores plus s_test.
    double q_hat_loo(std::size_t model, std::size_t i, double s_test) const;

    // True when k > n, so every leave-one-out quantile is +inf and the
    // profile below is undefined (callers treat the region as entire).
    bool loo_quantile_infinite() const { return k_ > static_cast<long>(n_); }

    // y -> Quantile over the n-1 retained scores plus S(X_test, y),
    // i.e. the test-score profile clamped to [b_(k-1), b_(k)].
    PiecewiseLinearFn q_hat_loo_profile(std::size_t model, std::size_t i,
                                        const PiecewiseLinearFn& test_profile) const;

private:
    std::size_t n_;
    double alpha_;
    long k_;
    std::vector<std::vector<double>> raw_;     // [model][i], original point order
    std::vector<std::vector<double>> sorted_;  // [model], ascending
    std::vector<std::vector<long>> rank_;      // [model][i], 1-based rank in sorted order
};

}  // namespace modsel

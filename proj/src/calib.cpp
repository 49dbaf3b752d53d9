#include "modsel/calib.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace modsel {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

long quantile_order_index(double tau, std::size_t m) {
    double t = tau * static_cast<double>(m);
    return static_cast<long>(std::ceil(t - 1e-9 * std::max(1.0, std::fabs(t))));
}

double empirical_quantile(std::vector<double> values, double tau) {
    if (values.empty()) throw std::invalid_argument("empirical_quantile: empty input");
    long k = quantile_order_index(tau, values.size());
    if (k <= 0) return -kInf;
    if (k > static_cast<long>(values.size())) return kInf;
    std::nth_element(values.begin(), values.begin() + (k - 1), values.end());
    return values[k - 1];
}

CalibrationScores::CalibrationScores(const ModelClass& mc, const std::vector<double>& responses,
                                     double alpha)
    : n_(mc.calib_size()), alpha_(alpha) {
    if (responses.size() != n_) throw std::invalid_argument("responses length mismatch");
    if (n_ == 0) throw std::invalid_argument("empty calibration set");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0,1)");
    k_ = quantile_order_index((1.0 - alpha) * (1.0 + 1.0 / static_cast<double>(n_)), n_);

    raw_.resize(mc.size());
    sorted_.resize(mc.size());
    rank_.resize(mc.size());
    std::vector<std::size_t> idx(n_);
    for (std::size_t lam = 0; lam < mc.size(); ++lam) {
        raw_[lam].resize(n_);
        for (std::size_t i = 0; i < n_; ++i)
            raw_[lam][i] = mc.model(lam).score_calib(i, responses[i]);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            if (raw_[lam][a] != raw_[lam][b]) return raw_[lam][a] < raw_[lam][b];
            return a < b;
        });
        sorted_[lam].resize(n_);
        rank_[lam].resize(n_);
        for (std::size_t pos = 0; pos < n_; ++pos) {
            sorted_[lam][pos] = raw_[lam][idx[pos]];
            rank_[lam][idx[pos]] = static_cast<long>(pos) + 1;
        }
    }
}

double CalibrationScores::order_stat(std::size_t model, long rank) const {
    if (rank <= 0) return -kInf;
    if (rank > static_cast<long>(n_)) return kInf;
    return sorted_[model][static_cast<std::size_t>(rank - 1)];
}

double CalibrationScores::q_hat_aug(std::size_t model, double s_test) const {
    double lo = order_stat(model, k_ - 1);
    double hi = order_stat(model, k_);
    return std::min(hi, std::max(lo, s_test));
}

std::pair<double, double> CalibrationScores::loo_clamp_bounds(std::size_t model,
                                                              std::size_t i) const {
    if (i >= n_) throw std::out_of_range("leave-out index out of range");
    long pos = rank_[model][i];
    // b_(j) over the n-1 retained scores: a_(j) below the removed rank,
    // a_(j+1) at or above it.
    auto retained = [&](long j) -> double {
        if (j <= 0) return -kInf;
        if (j > static_cast<long>(n_) - 1) return kInf;
        return order_stat(model, j < pos ? j : j + 1);
    };
    return {retained(k_ - 1), retained(k_)};
}

double CalibrationScores::q_hat_loo(std::size_t model, std::size_t i, double s_test) const {
    if (loo_quantile_infinite()) return kInf;
    auto [lo, hi] = loo_clamp_bounds(model, i);
    return std::min(hi, std::max(lo, s_test));
}

PiecewiseLinearFn CalibrationScores::q_hat_loo_profile(
    std::size_t model, std::size_t i, const PiecewiseLinearFn& test_profile) const {
    if (loo_quantile_infinite())
        throw std::logic_error("q_hat_loo_profile: quantile level exceeds sample");
    auto [lo, hi] = loo_clamp_bounds(model, i);
    return pwl_clamp(test_profile, lo, hi);
}

}  // namespace modsel

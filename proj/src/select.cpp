#include "modsel/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace modsel {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace

const char* method_name(MethodKind m) {
    switch (m) {
        case MethodKind::split: return "split";
        case MethodKind::yk_baseline: return "yk_baseline";
        case MethodKind::yk_adjust: return "yk_adjust";
        case MethodKind::yk_split: return "yk_split";
        case MethodKind::modsel_cp: return "modsel_cp";
        case MethodKind::modsel_cp_loo: return "modsel_cp_loo";
    }
    return "?";
}

std::optional<MethodKind> method_from_name(const std::string& name) {
    for (MethodKind m : {MethodKind::split, MethodKind::yk_baseline, MethodKind::yk_adjust,
                         MethodKind::yk_split, MethodKind::modsel_cp, MethodKind::modsel_cp_loo})
        if (name == method_name(m)) return m;
    return std::nullopt;
}

TieBreaker TieBreaker::min_index() { return TieBreaker(); }

TieBreaker TieBreaker::seeded(std::uint64_t seed) {
    TieBreaker tb;
    tb.random_ = true;
    std::uint64_t s = seed;
    tb.xi_ = static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53;
    return tb;
}

std::size_t TieBreaker::pick(const std::vector<std::size_t>& tied) const {
    if (tied.empty()) throw std::invalid_argument("TieBreaker: empty candidate set");
    if (!random_) return tied.front();
    std::size_t idx = static_cast<std::size_t>(xi_ * static_cast<double>(tied.size()));
    if (idx >= tied.size()) idx = tied.size() - 1;
    return tied[idx];
}

double yk_adjust_alpha(double alpha, std::size_t n, std::size_t model_count) {
    double nn = static_cast<double>(n);
    double numerator = std::sqrt(0.5 * std::log(2.0 * static_cast<double>(model_count))) +
                       1.0 / 3.0 - (1.0 - alpha) / std::sqrt(nn);
    return alpha - numerator / (std::sqrt(nn) * (1.0 + 1.0 / nn));
}

CalibrationSession::CalibrationSession(const ModelClass& mc, std::vector<double> responses,
                                       double alpha, TieBreaker tb)
    : mc_(&mc),
      responses_(std::move(responses)),
      tb_(tb),
      cs_(mc, responses_, alpha),
      ctx_(LossContext::all_points(mc)) {
    const std::size_t count = mc.size();
    const std::size_t n = cs_.n();
    loss_at_score_.resize(count);
    loss_at_qhat_.resize(count);
    loss_at_qhat_minus_.resize(count);
    loss_at_qhat_plus_.resize(count);
    for (std::size_t lam = 0; lam < count; ++lam) {
        loss_at_score_[lam].resize(n);
        for (std::size_t i = 0; i < n; ++i)
            loss_at_score_[lam][i] = ctx_.loss(lam, cs_.raw_score(lam, i));
        loss_at_qhat_[lam] = ctx_.loss(lam, cs_.q_hat(lam));
        loss_at_qhat_minus_[lam] = ctx_.loss(lam, cs_.q_hat_minus(lam));
        loss_at_qhat_plus_[lam] = ctx_.loss(lam, cs_.q_hat_plus(lam));
    }
    lambda_hat_ = argmin_loss(loss_at_qhat_);
    budget_ = loss_at_qhat_[lambda_hat_];
}

std::size_t CalibrationSession::argmin_loss(const std::vector<double>& losses) const {
    double best = kInf;
    for (double v : losses) best = std::min(best, v);
    std::vector<std::size_t> tied;
    for (std::size_t i = 0; i < losses.size(); ++i)
        if (losses[i] == best || (std::isinf(losses[i]) && std::isinf(best))) tied.push_back(i);
    return tb_.pick(tied);
}

std::size_t CalibrationSession::argmin_loss_subset(const std::vector<std::size_t>& candidates,
                                                   const std::vector<double>& losses) const {
    double best = kInf;
    for (std::size_t c : candidates) best = std::min(best, losses[c]);
    std::vector<std::size_t> tied;
    for (std::size_t c : candidates)
        if (losses[c] == best || (std::isinf(losses[c]) && std::isinf(best))) tied.push_back(c);
    return tb_.pick(tied);
}

MethodOutput CalibrationSession::split_conformal(std::size_t model) const {
    MethodOutput out;
    double q = cs_.q_hat(model);
    out.region = mc_->model(model).region_at_threshold(q);
    out.selected_model = model;
    out.threshold_loss = loss_at_qhat_[model];
    out.diag.degenerate_infinite = std::isinf(q);
    return out;
}

MethodOutput CalibrationSession::yk_baseline() const {
    MethodOutput out = split_conformal(lambda_hat_);
    out.threshold_loss = budget_;
    return out;
}

MethodOutput CalibrationSession::yk_adjust() const {
    double alpha_tilde = yk_adjust_alpha(cs_.alpha(), cs_.n(), mc_->size());
    if (alpha_tilde <= 0.0) {
        MethodOutput out;
        out.region = PredictionRegion::entire();
        out.selected_model = lambda_hat_;
        out.threshold_loss = kInf;
        out.diag.alpha_tilde = alpha_tilde;
        out.diag.alpha_adjusted = true;
        out.diag.degenerate_infinite = true;
        return out;
    }
    CalibrationSession adjusted(*mc_, responses_, alpha_tilde, tb_);
    MethodOutput out = adjusted.yk_baseline();
    out.diag.alpha_tilde = alpha_tilde;
    out.diag.alpha_adjusted = true;
    return out;
}

MethodOutput CalibrationSession::yk_split(std::size_t n1) const {
    const std::size_t n = cs_.n();
    if (n1 < 1 || n1 >= n) throw std::invalid_argument("yk_split: need 1 <= n1 < n");
    const std::size_t n2 = n - n1;
    LossContext selection_ctx = LossContext::calib_prefix(*mc_, n1);
    double level1 = (1.0 - cs_.alpha()) * (1.0 + 1.0 / static_cast<double>(n1));
    double level2 = (1.0 - cs_.alpha()) * (1.0 + 1.0 / static_cast<double>(n2));

    std::vector<double> losses(mc_->size());
    for (std::size_t lam = 0; lam < mc_->size(); ++lam) {
        std::vector<double> first(n1);
        for (std::size_t i = 0; i < n1; ++i) first[i] = cs_.raw_score(lam, i);
        losses[lam] = selection_ctx.loss(lam, empirical_quantile(std::move(first), level1));
    }
    double best = kInf;
    for (double v : losses) best = std::min(best, v);
    std::vector<std::size_t> tied;
    for (std::size_t lam = 0; lam < losses.size(); ++lam)
        if (losses[lam] == best || (std::isinf(losses[lam]) && std::isinf(best)))
            tied.push_back(lam);
    std::size_t lambda1 = tb_.pick(tied);

    std::vector<double> second(n2);
    for (std::size_t i = 0; i < n2; ++i) second[i] = cs_.raw_score(lambda1, n1 + i);
    double q2 = empirical_quantile(std::move(second), level2);

    MethodOutput out;
    out.region = mc_->model(lambda1).region_at_threshold(q2);
    out.selected_model = lambda1;
    out.threshold_loss = ctx_.loss(lambda1, q2);
    out.diag.degenerate_infinite = std::isinf(q2);
    return out;
}

CompetingSets CalibrationSession::competing_sets() const {
    CompetingSets sets;
    const std::size_t count = mc_->size();
    const std::size_t n = cs_.n();
    for (std::size_t lam = 0; lam < count; ++lam) {
        if (loss_at_qhat_minus_[lam] <= budget_) sets.m.push_back(lam);
        if (loss_at_qhat_minus_[lam] < budget_) sets.m_minus.push_back(lam);
    }
    // Degenerate budget: +inf <= +inf keeps every model in m (ties resolved
    // downstream); the strict set stays empty.
    sets.m_i.resize(n);
    sets.l_i.assign(n, std::vector<double>(count));
    sets.u_i.assign(n, std::vector<double>(count));
    for (std::size_t i = 0; i < n; ++i) {
        double min_u = kInf;
        for (std::size_t lam = 0; lam < count; ++lam) {
            double ls = loss_at_score_[lam][i];
            double lq = loss_at_qhat_[lam];
            sets.l_i[i][lam] = (ls < lq) ? lq : loss_at_qhat_minus_[lam];
            sets.u_i[i][lam] = (ls <= lq) ? loss_at_qhat_plus_[lam] : lq;
            min_u = std::min(min_u, sets.u_i[i][lam]);
        }
        for (std::size_t lam = 0; lam < count; ++lam)
            if (sets.l_i[i][lam] <= min_u) sets.m_i[i].push_back(lam);
    }
    return sets;
}

MethodOutput CalibrationSession::modsel_cp() const {
    if (mc_->discrete()) throw std::logic_error("modsel_cp: use the discrete variant");
    MethodOutput out;
    out.selected_model = lambda_hat_;
    out.threshold_loss = budget_;
    CompetingSets sets = competing_sets();
    out.diag.m_size = sets.m.size();
    out.diag.m_minus_size = sets.m_minus.size();
    if (std::isinf(budget_)) {
        out.region = PredictionRegion::entire();
        out.diag.degenerate_infinite = true;
        return out;
    }
    std::vector<PredictionRegion> parts;
    parts.reserve(sets.m.size());
    for (std::size_t lam : sets.m)
        parts.push_back(mc_->model(lam).region_at_threshold(ctx_.invert_loss(lam, budget_)));
    out.region = PredictionRegion::union_of(parts);

    std::vector<PredictionRegion> lower_parts;
    lower_parts.reserve(sets.m_minus.size());
    for (std::size_t lam : sets.m_minus)
        lower_parts.push_back(
            mc_->model(lam).region_at_threshold(ctx_.invert_loss_strict(lam, budget_)));
    out.lower_region = PredictionRegion::union_of(lower_parts);
    return out;
}

std::size_t CalibrationSession::augmented_selected_model(double y) const {
    std::vector<double> losses(mc_->size());
    for (std::size_t lam = 0; lam < mc_->size(); ++lam) {
        double s = mc_->model(lam).score_test(y);
        losses[lam] = ctx_.loss(lam, cs_.q_hat_aug(lam, s));
    }
    return argmin_loss(losses);
}

MethodOutput CalibrationSession::modsel_cp_discrete() const {
    if (!mc_->discrete()) throw std::logic_error("modsel_cp_discrete: discrete family required");
    MethodOutput out;
    out.selected_model = lambda_hat_;
    out.threshold_loss = budget_;
    CompetingSets sets = competing_sets();
    out.diag.m_size = sets.m.size();
    out.diag.m_minus_size = sets.m_minus.size();

    const int labels = mc_->label_count();
    std::vector<int> accepted;
    for (int y = 0; y < labels; ++y) {
        std::size_t lam = augmented_selected_model(static_cast<double>(y));
        double s = mc_->model(lam).score_test(static_cast<double>(y));
        if (s <= cs_.q_hat_aug(lam, s)) accepted.push_back(y);
    }
    out.region = PredictionRegion::labels(std::move(accepted));
    return out;
}

std::vector<double> CalibrationSession::loo_breakpoints(const CompetingSets& sets) const {
    if (mc_->discrete()) throw std::logic_error("loo_breakpoints: continuous family required");
    const std::size_t n = cs_.n();
    std::vector<double> points;
    std::vector<PiecewiseLinearFn> loss_in_y;  // loss composed with the clamp profile
    for (std::size_t i = 0; i < n; ++i) {
        const auto& cand = sets.m_i[i];
        loss_in_y.clear();
        loss_in_y.reserve(cand.size());
        for (std::size_t lam : cand) {
            PiecewiseLinearFn prof =
                cs_.q_hat_loo_profile(lam, i, mc_->model(lam).score_profile_test());
            for (double k : prof.knots()) points.push_back(k);
            loss_in_y.push_back(pwl_compose_monotone(ctx_.loss_profile(lam), prof));
        }
        for (std::size_t a = 0; a < cand.size(); ++a)
            for (std::size_t b = a + 1; b < cand.size(); ++b) {
                PwlIntersections ix = pwl_intersections(loss_in_y[a], loss_in_y[b]);
                points.insert(points.end(), ix.points.begin(), ix.points.end());
            }
    }
    std::sort(points.begin(), points.end());
    std::vector<double> dedup;
    dedup.reserve(points.size());
    for (double p : points)
        if (dedup.empty() || p - dedup.back() > 1e-12 * (1.0 + std::fabs(p))) dedup.push_back(p);
    return dedup;
}

MethodOutput CalibrationSession::modsel_cp_loo() const {
    if (mc_->discrete()) throw std::logic_error("modsel_cp_loo: use the discrete variant");
    MethodOutput out;
    out.selected_model = lambda_hat_;
    out.threshold_loss = budget_;
    const std::size_t n = cs_.n();
    if (cs_.loo_quantile_infinite()) {
        out.region = PredictionRegion::entire();
        out.diag.degenerate_infinite = true;
        return out;
    }
    CompetingSets sets = competing_sets();
    out.diag.m_size = sets.m.size();
    out.diag.m_minus_size = sets.m_minus.size();
    for (const auto& mi : sets.m_i) out.diag.m_i_max = std::max(out.diag.m_i_max, mi.size());

    std::vector<double> bps = loo_breakpoints(sets);
    out.diag.breakpoint_count = bps.size();

    const long k = cs_.k();
    std::vector<double> cell_losses(n);
    std::vector<PredictionRegion> parts;
    const std::size_t cells = bps.size() + 1;
    for (std::size_t j = 0; j < cells; ++j) {
        double lo = (j == 0) ? -kInf : bps[j - 1];
        double hi = (j == bps.size()) ? kInf : bps[j];
        double rep;
        if (bps.empty())
            rep = 0.0;
        else if (j == 0)
            rep = bps.front() - 1.0;
        else if (j == bps.size())
            rep = bps.back() + 1.0;
        else
            rep = 0.5 * (lo + hi);

        // Selected model per left-out point is constant on the open cell.
        for (std::size_t i = 0; i < n; ++i) {
            const auto& cand = sets.m_i[i];
            std::size_t lam_sel;
            if (cand.size() == 1) {
                lam_sel = cand[0];
            } else {
                std::vector<double> losses(cand.size());
                for (std::size_t c = 0; c < cand.size(); ++c) {
                    std::size_t lam = cand[c];
                    double s = mc_->model(lam).score_test(rep);
                    losses[c] = ctx_.loss(lam, cs_.q_hat_loo(lam, i, s));
                }
                double best = kInf;
                for (double v : losses) best = std::min(best, v);
                std::vector<std::size_t> tied;
                for (std::size_t c = 0; c < cand.size(); ++c)
                    if (losses[c] == best || (std::isinf(losses[c]) && std::isinf(best)))
                        tied.push_back(cand[c]);
                lam_sel = tb_.pick(tied);
            }
            cell_losses[i] = loss_at_score_[lam_sel][i];
        }
        std::vector<double> sorted_losses = cell_losses;
        // k <= n here (the infinite case returned above).
        std::nth_element(sorted_losses.begin(), sorted_losses.begin() + (k - 1),
                         sorted_losses.end());
        double cell_budget = sorted_losses[static_cast<std::size_t>(k - 1)];
        double q_star = ctx_.invert_loss(lambda_hat_, cell_budget);
        PredictionRegion cell_region =
            mc_->model(lambda_hat_).region_at_threshold(q_star).intersect_interval(lo, hi);
        if (!cell_region.is_empty()) parts.push_back(std::move(cell_region));
    }
    out.region = PredictionRegion::union_of(parts);
    return out;
}

std::size_t CalibrationSession::loo_selected_model(std::size_t i, double y) const {
    std::vector<double> losses(mc_->size());
    for (std::size_t lam = 0; lam < mc_->size(); ++lam) {
        double s = mc_->model(lam).score_test(y);
        losses[lam] = ctx_.loss(lam, cs_.q_hat_loo(lam, i, s));
    }
    return argmin_loss(losses);
}

MethodOutput CalibrationSession::modsel_cp_loo_discrete() const {
    if (!mc_->discrete())
        throw std::logic_error("modsel_cp_loo_discrete: discrete family required");
    MethodOutput out;
    out.selected_model = lambda_hat_;
    out.threshold_loss = budget_;
    const std::size_t n = cs_.n();
    const int labels = mc_->label_count();
    const long k = cs_.k();

    std::vector<int> accepted;
    std::vector<double> loo_losses(n);
    for (int y = 0; y < labels; ++y) {
        double yv = static_cast<double>(y);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t lam = loo_selected_model(i, yv);
            loo_losses[i] = loss_at_score_[lam][i];
        }
        double threshold;
        if (k > static_cast<long>(n)) {
            threshold = kInf;
        } else {
            std::vector<double> sorted_losses = loo_losses;
            std::nth_element(sorted_losses.begin(), sorted_losses.begin() + (k - 1),
                             sorted_losses.end());
            threshold = sorted_losses[static_cast<std::size_t>(k - 1)];
        }
        double lhs = ctx_.loss(lambda_hat_, mc_->model(lambda_hat_).score_test(yv));
        if (lhs <= threshold) accepted.push_back(y);
    }
    out.region = PredictionRegion::labels(std::move(accepted));
    return out;
}

MethodOutput CalibrationSession::run(MethodKind method, std::optional<std::size_t> n1) const {
    switch (method) {
        case MethodKind::split: return split_conformal(0);
        case MethodKind::yk_baseline: return yk_baseline();
        case MethodKind::yk_adjust: return yk_adjust();
        case MethodKind::yk_split: return yk_split(n1.value_or(cs_.n() / 2));
        case MethodKind::modsel_cp:
            return mc_->discrete() ? modsel_cp_discrete() : modsel_cp();
        case MethodKind::modsel_cp_loo:
            return mc_->discrete() ? modsel_cp_loo_discrete() : modsel_cp_loo();
    }
    throw std::logic_error("unknown method");
}

}  // namespace modsel

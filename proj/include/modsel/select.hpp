#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "modsel/calib.hpp"
#include "modsel/lossfn.hpp"
#include "modsel/region.hpp"
#include "modsel/scores.hpp"

namespace modsel {

enum class MethodKind { split, yk_baseline, yk_adjust, yk_split, modsel_cp, modsel_cp_loo };

const char* method_name(MethodKind m);
std::optional<MethodKind> method_from_name(const std::string& name);

// Resolves argmin ties. The seeded variant draws one xi ~ U[0,1] at
// construction; the same xi is reused for every selection in the session.
class TieBreaker {
public:
    static TieBreaker min_index();
    static TieBreaker seeded(std::uint64_t seed);
    // tied: ascending model indices attaining the minimum.
    std::size_t pick(const std::vector<std::size_t>& tied) const;

private:
    bool random_ = false;
    double xi_ = 0.0;
};

struct CompetingSets {
    std::vector<std::size_t> m;        // loss at deflated quantile within budget
    std::vector<std::size_t> m_minus;  // strict version
    std::vector<std::vector<std::size_t>> m_i;  // per left-out point
    std::vector<std::vector<double>> l_i;       // [i][model]
    std::vector<std::vector<double>> u_i;       // [i][model]
};

struct MethodDiagnostics {
    std::size_t m_size = 0;
    std::size_t m_minus_size = 0;
    std::size_t m_i_max = 0;
    std::size_t breakpoint_count = 0;
    double alpha_tilde = 0.0;
    bool alpha_adjusted = false;
    bool degenerate_infinite = false;  // q_hat(lambda_hat) = +inf
};

struct MethodOutput {
    PredictionRegion region;
    std::size_t selected_model = 0;
    double threshold_loss = 0.0;  // loss budget L(lambda_hat, q_hat(lambda_hat))
    MethodDiagnostics diag;
    std::optional<PredictionRegion> lower_region;  // modsel_cp strict bound
};

// One calibration session: fixed model class, responses, level and
// tie-breaker. All methods are pure given the session; a session can be
// shared across threads.
class CalibrationSession {
public:
    CalibrationSession(const ModelClass& mc, std::vector<double> responses, double alpha,
                       TieBreaker tb = TieBreaker::min_index());

    const ModelClass& model_class() const { return *mc_; }
    const CalibrationScores& scores() const { return cs_; }
    const LossContext& loss_ctx() const { return ctx_; }
    const TieBreaker& tie_breaker() const { return tb_; }
    double alpha() const { return cs_.alpha(); }
    std::size_t n() const { return cs_.n(); }

    // loss(model, S(X_i, Y_i)), cached.
    double loss_at_calib_score(std::size_t model, std::size_t i) const {
        return loss_at_score_[model][i];
    }

    std::size_t select_lambda_hat() const { return lambda_hat_; }
    // Loss budget T = loss(lambda_hat, q_hat(lambda_hat)).
    double threshold_budget() const { return budget_; }

    MethodOutput split_conformal(std::size_t model) const;
    MethodOutput yk_baseline() const;
    MethodOutput yk_adjust() const;
    MethodOutput yk_split(std::size_t n1) const;
    MethodOutput modsel_cp() const;           // continuous response
    MethodOutput modsel_cp_discrete() const;  // finite label space
    MethodOutput modsel_cp_loo() const;
    MethodOutput modsel_cp_loo_discrete() const;

    // Dispatches on the score family; modsel methods map to their discrete
    // variants for conditional-density classes.
    MethodOutput run(MethodKind method, std::optional<std::size_t> n1 = std::nullopt) const;

    CompetingSets competing_sets() const;

    // Breakpoints partitioning the response line so that every leave-one-out
    // selection is constant on each open cell.
    std::vector<double> loo_breakpoints(const CompetingSets& sets) const;

    // argmin_lambda loss(lambda, q_hat_loo(lambda, i, S_lambda(X_test, y))),
    // full scan over the class; used by the grid oracle and invariant checks.
    std::size_t loo_selected_model(std::size_t i, double y) const;

    // argmin over all models of loss(lambda, q_hat_aug(lambda, S(X_test,y))).
    std::size_t augmented_selected_model(double y) const;

private:
    std::size_t argmin_loss(const std::vector<double>& losses) const;
    std::size_t argmin_loss_subset(const std::vector<std::size_t>& candidates,
                                   const std::vector<double>& losses) const;

    const ModelClass* mc_;
    std::vector<double> responses_;
    TieBreaker tb_;
    CalibrationScores cs_;
    LossContext ctx_;
    std::vector<std::vector<double>> loss_at_score_;  // [model][i]
    std::vector<double> loss_at_qhat_;                // [model]
    std::vector<double> loss_at_qhat_minus_;
    std::vector<double> loss_at_qhat_plus_;
    std::size_t lambda_hat_ = 0;
    double budget_ = 0.0;
};

double yk_adjust_alpha(double alpha, std::size_t n, std::size_t model_count);

}  // namespace modsel

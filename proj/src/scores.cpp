#include "modsel/scores.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace modsel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_prob_vector(const std::vector<double>& p) {
    if (p.empty()) throw std::invalid_argument("probability vector empty");
    double sum = 0.0;
    for (double v : p) {
        if (v < 0.0) throw std::invalid_argument("negative probability");
        sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-6) throw std::invalid_argument("probabilities must sum to 1");
}

int label_at(double y, int k) {
    int label = static_cast<int>(std::llround(y));
    if (label < 0 || label >= k) throw std::out_of_range("label out of range");
    return label;
}

}  // namespace

ModelEvaluations::ModelEvaluations(ResidualModel m)
    : m_(std::move(m)), family_(ScoreFamily::residual) {
    n_ = std::get<ResidualModel>(m_).pred_calib.size();
}

ModelEvaluations::ModelEvaluations(RescaledResidualModel m)
    : m_(std::move(m)), family_(ScoreFamily::rescaled_residual) {
    const auto& r = std::get<RescaledResidualModel>(m_);
    n_ = r.pred_calib.size();
    if (r.sigma_calib.size() != n_) throw std::invalid_argument("sigma length mismatch");
    for (double s : r.sigma_calib)
        if (!(s > 0.0)) throw std::invalid_argument("sigma must be positive");
    if (!(r.sigma_test > 0.0)) throw std::invalid_argument("sigma must be positive");
}

ModelEvaluations::ModelEvaluations(CqrModel m) : m_(std::move(m)), family_(ScoreFamily::cqr) {
    const auto& c = std::get<CqrModel>(m_);
    n_ = c.qlo_calib.size();
    if (c.qhi_calib.size() != n_) throw std::invalid_argument("quantile length mismatch");
    for (std::size_t i = 0; i < n_; ++i)
        if (c.qlo_calib[i] > c.qhi_calib[i]) throw std::invalid_argument("qlo > qhi");
    if (c.qlo_test > c.qhi_test) throw std::invalid_argument("qlo > qhi at test point");
}

ModelEvaluations::ModelEvaluations(CondDensityModel m)
    : m_(std::move(m)), family_(ScoreFamily::cond_density) {
    const auto& d = std::get<CondDensityModel>(m_);
    n_ = d.p_calib.size();
    check_prob_vector(d.p_test);
    for (const auto& p : d.p_calib) {
        check_prob_vector(p);
        if (p.size() != d.p_test.size())
            throw std::invalid_argument("inconsistent label counts");
    }
}

int ModelEvaluations::label_count() const {
    if (family_ != ScoreFamily::cond_density) return 0;
    return static_cast<int>(std::get<CondDensityModel>(m_).p_test.size());
}

double ModelEvaluations::score_calib(std::size_t i, double y) const {
    if (i >= n_) throw std::out_of_range("calibration index out of range");
    switch (family_) {
        case ScoreFamily::residual:
            return std::fabs(y - std::get<ResidualModel>(m_).pred_calib[i]);
        case ScoreFamily::rescaled_residual: {
            const auto& r = std::get<RescaledResidualModel>(m_);
            return std::fabs(y - r.pred_calib[i]) / r.sigma_calib[i];
        }
        case ScoreFamily::cqr: {
            const auto& c = std::get<CqrModel>(m_);
            return std::max(c.qlo_calib[i] - y, y - c.qhi_calib[i]);
        }
        case ScoreFamily::cond_density: {
            const auto& d = std::get<CondDensityModel>(m_);
            return -d.p_calib[i][label_at(y, label_count())];
        }
    }
    return 0.0;
}

double ModelEvaluations::score_test(double y) const {
    switch (family_) {
        case ScoreFamily::residual:
            return std::fabs(y - std::get<ResidualModel>(m_).pred_test);
        case ScoreFamily::rescaled_residual: {
            const auto& r = std::get<RescaledResidualModel>(m_);
            return std::fabs(y - r.pred_test) / r.sigma_test;
        }
        case ScoreFamily::cqr: {
            const auto& c = std::get<CqrModel>(m_);
            return std::max(c.qlo_test - y, y - c.qhi_test);
        }
        case ScoreFamily::cond_density:
            return -std::get<CondDensityModel>(m_).p_test[label_at(y, label_count())];
    }
    return 0.0;
}

PiecewiseLinearFn ModelEvaluations::score_profile_test() const {
    switch (family_) {
        case ScoreFamily::residual:
            return PiecewiseLinearFn::vee(std::get<ResidualModel>(m_).pred_test, 1.0);
        case ScoreFamily::rescaled_residual: {
            const auto& r = std::get<RescaledResidualModel>(m_);
            return PiecewiseLinearFn::vee(r.pred_test, 1.0 / r.sigma_test);
        }
        case ScoreFamily::cqr: {
            const auto& c = std::get<CqrModel>(m_);
            double mid = 0.5 * (c.qlo_test + c.qhi_test);
            return PiecewiseLinearFn::vee(mid, 1.0, -0.5 * (c.qhi_test - c.qlo_test));
        }
        case ScoreFamily::cond_density:
            throw std::logic_error("score_profile_test on discrete family");
    }
    throw std::logic_error("unreachable");
}

std::vector<double> ModelEvaluations::score_vector_test() const {
    if (family_ != ScoreFamily::cond_density)
        throw std::logic_error("score_vector_test on continuous family");
    const auto& p = std::get<CondDensityModel>(m_).p_test;
    std::vector<double> s(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) s[j] = -p[j];
    return s;
}

PredictionRegion ModelEvaluations::region_at_threshold(double q) const {
    if (q == kInf) return PredictionRegion::entire();
    if (q == -kInf) return PredictionRegion::empty();
    switch (family_) {
        case ScoreFamily::residual: {
            if (q < 0.0) return PredictionRegion::empty();
            double f = std::get<ResidualModel>(m_).pred_test;
            return PredictionRegion::intervals({{f - q, f + q}});
        }
        case ScoreFamily::rescaled_residual: {
            if (q < 0.0) return PredictionRegion::empty();
            const auto& r = std::get<RescaledResidualModel>(m_);
            return PredictionRegion::intervals(
                {{r.pred_test - q * r.sigma_test, r.pred_test + q * r.sigma_test}});
        }
        case ScoreFamily::cqr: {
            const auto& c = std::get<CqrModel>(m_);
            double lo = c.qlo_test - q, hi = c.qhi_test + q;
            if (lo > hi) return PredictionRegion::empty();
            return PredictionRegion::intervals({{lo, hi}});
        }
        case ScoreFamily::cond_density: {
            const auto& p = std::get<CondDensityModel>(m_).p_test;
            std::vector<int> labels;
            for (std::size_t j = 0; j < p.size(); ++j)
                if (p[j] >= -q) labels.push_back(static_cast<int>(j));
            return PredictionRegion::labels(std::move(labels));
        }
    }
    return PredictionRegion::empty();
}

double ModelEvaluations::set_size(std::size_t point, double q) const {
    if (point > n_) throw std::out_of_range("evaluation point out of range");
    if (q == kInf) return family_ == ScoreFamily::cond_density
                              ? static_cast<double>(label_count())
                              : kInf;
    if (q == -kInf) return 0.0;
    switch (family_) {
        case ScoreFamily::residual:
            return std::max(0.0, 2.0 * q);
        case ScoreFamily::rescaled_residual: {
            const auto& r = std::get<RescaledResidualModel>(m_);
            double sigma = (point == n_) ? r.sigma_test : r.sigma_calib[point];
            return std::max(0.0, 2.0 * q) * sigma;
        }
        case ScoreFamily::cqr: {
            const auto& c = std::get<CqrModel>(m_);
            double gap = (point == n_) ? c.qhi_test - c.qlo_test
                                       : c.qhi_calib[point] - c.qlo_calib[point];
            return std::max(0.0, gap + 2.0 * q);
        }
        case ScoreFamily::cond_density: {
            const auto& d = std::get<CondDensityModel>(m_);
            const auto& p = (point == n_) ? d.p_test : d.p_calib[point];
            double count = 0.0;
            for (double v : p)
                if (v >= -q) count += 1.0;
            return count;
        }
    }
    return 0.0;
}

ModelClass::ModelClass(std::vector<ModelEvaluations> models) : models_(std::move(models)) {
    if (models_.empty()) throw std::invalid_argument("model class must be nonempty");
    n_ = models_[0].calib_size();
    for (const auto& m : models_) {
        if (m.family() != models_[0].family())
            throw std::invalid_argument("model class must be homogeneous");
        if (m.calib_size() != n_)
            throw std::invalid_argument("inconsistent calibration sizes");
        if (m.discrete() && m.label_count() != models_[0].label_count())
            throw std::invalid_argument("inconsistent label counts");
    }
}

}  // namespace modsel

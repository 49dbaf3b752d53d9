#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "modsel/pwl.hpp"
#include "modsel/region.hpp"

namespace modsel {

// A pretrained model enters the engine only through its evaluations at the
// calibration points and the test point; nothing else about it is needed.

struct ResidualModel {
    std::vector<double> pred_calib;
    double pred_test;
};

struct RescaledResidualModel {
    std::vector<double> pred_calib;
    double pred_test;
    std::vector<double> sigma_calib;  // > 0
    double sigma_test;                // > 0
};

struct CqrModel {
    std::vector<double> qlo_calib;
    std::vector<double> qhi_calib;  // qlo <= qhi pointwise
    double qlo_test;
    double qhi_test;
};

struct CondDensityModel {
    std::vector<std::vector<double>> p_calib;  // per point, probabilities over K labels
    std::vector<double> p_test;
};

enum class ScoreFamily { residual, rescaled_residual, cqr, cond_density };

class ModelEvaluations {
public:
    explicit ModelEvaluations(ResidualModel m);
    explicit ModelEvaluations(RescaledResidualModel m);
    explicit ModelEvaluations(CqrModel m);
    explicit ModelEvaluations(CondDensityModel m);

    ScoreFamily family() const { return family_; }
    bool discrete() const { return family_ == ScoreFamily::cond_density; }
    std::size_t calib_size() const { return n_; }
    int label_count() const;

    // S(X_i, y). For the conditional-density family y is a label index.
    double score_calib(std::size_t i, double y) const;
    // S(X_test, y) for a hypothesized response y.
    double score_test(double y) const;

    // y -> S(X_test, y) as an exact piecewise-linear function (continuous
    // families only).
    PiecewiseLinearFn score_profile_test() const;
    // Discrete counterpart: the K-vector of -p(label | x_test).
    std::vector<double> score_vector_test() const;

    // {y : S(X_test, y) <= q}.
    PredictionRegion region_at_threshold(double q) const;

    // |C_q(x_point)|: Lebesgue width (continuous) or cardinality (discrete).
    // point == calib_size() addresses the test point.
    double set_size(std::size_t point, double q) const;

    const std::variant<ResidualModel, RescaledResidualModel, CqrModel, CondDensityModel>& raw()
        const {
        return m_;
    }

private:
    std::variant<ResidualModel, RescaledResidualModel, CqrModel, CondDensityModel> m_;
    ScoreFamily family_;
    std::size_t n_;
};

// A finite homogeneous collection of pretrained models; index order is the
// canonical order used by tie-breaking.
class ModelClass {
public:
    explicit ModelClass(std::vector<ModelEvaluations> models);

    std::size_t size() const { return models_.size(); }
    std::size_t calib_size() const { return n_; }
    bool discrete() const { return models_[0].discrete(); }
    ScoreFamily family() const { return models_[0].family(); }
    int label_count() const { return models_[0].label_count(); }
    const ModelEvaluations& model(std::size_t i) const { return models_[i]; }

private:
    std::vector<ModelEvaluations> models_;
    std::size_t n_;
};

}  // namespace modsel

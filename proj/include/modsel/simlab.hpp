#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "modsel/rng.hpp"
#include "modsel/scores.hpp"
#include "modsel/select.hpp"

namespace modsel::sim {

enum class DgpKind {
    normal_sparse_gauss,  // X ~ N(0,I), theta sparse, eps ~ N(0,1)
    normal_sparse_t,      // heavy-tailed noise eps ~ t_3
    normal_dense_gauss,   // theta_j = 1/d, eps ~ N(0, 1/d^2)
    t_sparse_gauss,       // X ~ t_3(0,I), eps ~ N(0,1)
    two_model,            // Y = X + eps, eps ~ N(mu,1); models x +- C
    classification        // softmax multinomial labels, K = 10
};

const char* dgp_name(DgpKind d);
std::optional<DgpKind> dgp_from_name(const std::string& name);

struct DgpSpec {
    DgpKind kind = DgpKind::two_model;
    std::size_t dim = 300;  // feature dimension (regression); 50 for classification
    int labels = 10;
    double offset_c = 5.0;  // two-model offset
    double mu = 0.0;        // two-model noise mean
};

enum class ScoreChoice { residual, rescaled, density };

struct ExperimentConfig {
    DgpSpec dgp;
    ScoreChoice score = ScoreChoice::residual;
    std::size_t n_train = 300;
    std::size_t n = 100;          // calibration size
    std::size_t n_models = 50;
    std::size_t trials = 1000;
    std::size_t test_batch = 1;   // test points per trial (width/coverage averaged)
    double alpha = 0.1;
    std::uint64_t master_seed = 1;
    std::vector<MethodKind> methods;
    std::optional<std::size_t> n1;   // yk_split selection size; default n/2
    // Model class drawn once per experiment by default; the best-single-model
    // width divisor is a per-model mean and needs a fixed class.
    bool retrain_per_trial = false;
    bool check_invariants = false;   // containment / sandwich / membership checks per trial
    int threads = 0;                 // <= 0: MODSEL_THREADS env, else OpenMP default
    // Estimator knobs for the substituted pretrainers.
    double ridge_penalty = 0.1;
    double subset_fraction = 0.1;
    std::size_t sigma_knn = 20;
    std::size_t logistic_steps = 500;
    double logistic_rate = 0.1;
};

struct MethodStats {
    MethodKind method;
    double coverage = 0.0;
    double coverage_se = 0.0;
    double width = 0.0;  // +inf when any trial produced an unbounded region
    double width_se = 0.0;
    double width_ratio = 0.0;
    double width_ratio_se = 0.0;
    std::size_t unbounded_trials = 0;
};

struct ExperimentSummary {
    std::vector<MethodStats> rows;
    double best_single_width = 0.0;  // min over models of mean split width
    std::size_t trials = 0;
    double alpha = 0.0;
    std::string setting;
    std::uint64_t master_seed = 0;
    std::vector<std::string> invariant_violations;
};

// Dataset in row-major feature layout.
struct Dataset {
    std::vector<double> x;  // m * dim
    std::vector<double> y;  // responses, or label indices for classification
    std::size_t dim = 0;

    std::size_t size() const { return dim == 0 ? y.size() : x.size() / dim; }
    const double* row(std::size_t i) const { return x.data() + i * dim; }
};

Dataset gen_regression_data(const DgpSpec& spec, std::size_t m, Rng& rng);
Dataset gen_two_model_data(const DgpSpec& spec, std::size_t m, Rng& rng);
// beta: labels * dim softmax weight matrix, drawn once per experiment.
Dataset gen_classification_data(const DgpSpec& spec, const std::vector<double>& beta,
                                std::size_t m, Rng& rng);
std::vector<double> draw_classification_beta(const DgpSpec& spec, Rng& rng);

// Ridge on a random feature subset, embedded back with zeros.
struct RidgeModel {
    std::vector<std::size_t> features;
    std::vector<double> coef;  // aligned with features

    double predict(const double* x) const;
};

std::vector<RidgeModel> pretrain_ridge_subset_models(const Dataset& train, std::size_t count,
                                                     double subset_fraction, double penalty,
                                                     Rng& rng);

// Local scale via mean absolute residual over the k nearest neighbours.
class SigmaKnn {
public:
    SigmaKnn(const Dataset& anchors, std::vector<double> abs_residuals, std::size_t k);
    double operator()(const double* x) const;

private:
    const Dataset* anchors_;
    std::vector<double> abs_residuals_;
    std::size_t k_;
};

// Multinomial logistic model on a random half of the features, fitted by
// full-batch gradient descent.
struct LogisticModel {
    std::vector<std::size_t> features;
    std::vector<double> weights;  // features.size() * labels
    int labels = 0;

    std::vector<double> predict_proba(const double* x) const;
};

std::vector<LogisticModel> pretrain_classifiers(const Dataset& train, std::size_t count,
                                                int labels, std::size_t steps, double rate,
                                                Rng& rng);

ExperimentSummary run_experiment(const ExperimentConfig& cfg);
// Reference single-threaded path; must match run_experiment bit for bit.
ExperimentSummary run_experiment_serial(const ExperimentConfig& cfg);

}  // namespace modsel::sim

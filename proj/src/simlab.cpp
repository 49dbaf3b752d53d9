#include "modsel/simlab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "modsel/oracle.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace modsel::sim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Streams reserved for per-experiment draws; trials use stream = index + 1.
constexpr std::uint64_t kTrainStream = 0xA11CE5EEDULL << 20;
constexpr std::uint64_t kBetaStream = 0xBE7A5EEDULL << 21;

double pairwise_sum(const double* v, std::size_t count) {
    if (count <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < count; ++i) s += v[i];
        return s;
    }
    std::size_t half = count / 2;
    return pairwise_sum(v, half) + pairwise_sum(v + half, count - half);
}

struct MeanSe {
    double mean;
    double se;
};

MeanSe mean_and_se(const std::vector<double>& v) {
    const std::size_t m = v.size();
    double mean = pairwise_sum(v.data(), m) / static_cast<double>(m);
    if (m < 2 || !std::isfinite(mean)) return {mean, std::isfinite(mean) ? 0.0 : kInf};
    std::vector<double> sq(m);
    for (std::size_t i = 0; i < m; ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
    double var = pairwise_sum(sq.data(), m) / static_cast<double>(m - 1);
    return {mean, std::sqrt(var / static_cast<double>(m))};
}

void cholesky_solve(std::vector<double>& a, std::vector<double>& b, std::size_t d) {
    // a is d x d symmetric positive definite (row major), solved in place.
    for (std::size_t j = 0; j < d; ++j) {
        double diag = a[j * d + j];
        for (std::size_t k = 0; k < j; ++k) diag -= a[j * d + k] * a[j * d + k];
        if (diag <= 0.0) throw std::runtime_error("cholesky: matrix not positive definite");
        diag = std::sqrt(diag);
        a[j * d + j] = diag;
        for (std::size_t i = j + 1; i < d; ++i) {
            double s = a[i * d + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * d + k] * a[j * d + k];
            a[i * d + j] = s / diag;
        }
    }
    for (std::size_t i = 0; i < d; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= a[i * d + k] * b[k];
        b[i] = s / a[i * d + i];
    }
    for (std::size_t i = d; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < d; ++k) s -= a[k * d + i] * b[k];
        b[i] = s / a[i * d + i];
    }
}

std::vector<std::size_t> sample_distinct(std::size_t population, std::size_t count, Rng& rng) {
    std::vector<std::size_t> idx(population);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.below(population - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    return idx;
}

double region_width(const PredictionRegion& r, int label_count) {
    return label_count > 0 ? r.measure_discrete(label_count) : r.measure();
}

}  // namespace

const char* dgp_name(DgpKind d) {
    switch (d) {
        case DgpKind::normal_sparse_gauss: return "normal_sparse";
        case DgpKind::normal_sparse_t: return "normal_sparse_tnoise";
        case DgpKind::normal_dense_gauss: return "normal_dense";
        case DgpKind::t_sparse_gauss: return "t_sparse";
        case DgpKind::two_model: return "two_model";
        case DgpKind::classification: return "classification";
    }
    return "?";
}

std::optional<DgpKind> dgp_from_name(const std::string& name) {
    for (DgpKind d : {DgpKind::normal_sparse_gauss, DgpKind::normal_sparse_t,
                      DgpKind::normal_dense_gauss, DgpKind::t_sparse_gauss, DgpKind::two_model,
                      DgpKind::classification})
        if (name == dgp_name(d)) return d;
    return std::nullopt;
}

Dataset gen_regression_data(const DgpSpec& spec, std::size_t m, Rng& rng) {
    const std::size_t d = spec.dim;
    Dataset data;
    data.dim = d;
    data.x.resize(m * d);
    data.y.resize(m);
    std::vector<double> theta(d);
    double noise_sd = 1.0;
    bool t_noise = spec.kind == DgpKind::normal_sparse_t;
    bool t_features = spec.kind == DgpKind::t_sparse_gauss;
    if (spec.kind == DgpKind::normal_dense_gauss) {
        for (std::size_t j = 0; j < d; ++j) theta[j] = 1.0 / static_cast<double>(d);
        noise_sd = 1.0 / static_cast<double>(d);
    } else {
        // 1-indexed coordinates at multiples of 20 carry the signal.
        for (std::size_t j = 0; j < d; ++j) theta[j] = ((j + 1) % 20 == 0) ? 1.0 : 0.0;
    }
    for (std::size_t i = 0; i < m; ++i) {
        double* row = data.x.data() + i * d;
        for (std::size_t j = 0; j < d; ++j) row[j] = rng.normal();
        if (t_features) {
            // One chi-square mixing variable per feature vector draw.
            double scale = std::sqrt(3.0 / rng.chi_square(3));
            for (std::size_t j = 0; j < d; ++j) row[j] *= scale;
        }
        double mean = 0.0;
        for (std::size_t j = 0; j < d; ++j) mean += row[j] * theta[j];
        double eps = t_noise ? rng.student_t(3) : noise_sd * rng.normal();
        data.y[i] = mean + eps;
    }
    return data;
}

Dataset gen_two_model_data(const DgpSpec& spec, std::size_t m, Rng& rng) {
    Dataset data;
    data.dim = 1;
    data.x.resize(m);
    data.y.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        data.x[i] = rng.normal();
        data.y[i] = data.x[i] + spec.mu + rng.normal();
    }
    return data;
}

std::vector<double> draw_classification_beta(const DgpSpec& spec, Rng& rng) {
    std::vector<double> beta(static_cast<std::size_t>(spec.labels) * spec.dim);
    for (double& b : beta) b = rng.normal();
    return beta;
}

Dataset gen_classification_data(const DgpSpec& spec, const std::vector<double>& beta,
                                std::size_t m, Rng& rng) {
    const std::size_t d = spec.dim;
    const int k = spec.labels;
    Dataset data;
    data.dim = d;
    data.x.resize(m * d);
    data.y.resize(m);
    std::vector<double> w(k);
    for (std::size_t i = 0; i < m; ++i) {
        double* row = data.x.data() + i * d;
        row[0] = rng.uniform01() < 0.2 ? 1.0 : -8.0;
        for (std::size_t j = 1; j < d; ++j) row[j] = rng.normal();
        double max_logit = -kInf;
        for (int j = 0; j < k; ++j) {
            double logit = 0.0;
            const double* bj = beta.data() + static_cast<std::size_t>(j) * d;
            for (std::size_t c = 0; c < d; ++c) logit += bj[c] * row[c];
            w[j] = logit;
            max_logit = std::max(max_logit, logit);
        }
        double total = 0.0;
        for (int j = 0; j < k; ++j) {
            w[j] = std::exp(w[j] - max_logit);
            total += w[j];
        }
        double u = rng.uniform01() * total;
        int label = k - 1;
        double acc = 0.0;
        for (int j = 0; j < k; ++j) {
            acc += w[j];
            if (u <= acc) {
                label = j;
                break;
            }
        }
        data.y[i] = static_cast<double>(label);
    }
    return data;
}

double RidgeModel::predict(const double* x) const {
    double out = 0.0;
    for (std::size_t j = 0; j < features.size(); ++j) out += coef[j] * x[features[j]];
    return out;
}

std::vector<RidgeModel> pretrain_ridge_subset_models(const Dataset& train, std::size_t count,
                                                     double subset_fraction, double penalty,
                                                     Rng& rng) {
    const std::size_t d = train.dim;
    const std::size_t m = train.size();
    const std::size_t p = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                       std::floor(subset_fraction * d)));
    std::vector<RidgeModel> models;
    models.reserve(count);
    std::vector<double> gram(p * p);
    std::vector<double> rhs(p);
    for (std::size_t lam = 0; lam < count; ++lam) {
        RidgeModel model;
        model.features = sample_distinct(d, p, rng);
        std::fill(gram.begin(), gram.end(), 0.0);
        std::fill(rhs.begin(), rhs.end(), 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            const double* row = train.row(i);
            for (std::size_t a = 0; a < p; ++a) {
                double xa = row[model.features[a]];
                rhs[a] += xa * train.y[i];
                for (std::size_t b = a; b < p; ++b) gram[a * p + b] += xa * row[model.features[b]];
            }
        }
        for (std::size_t a = 0; a < p; ++a) {
            gram[a * p + a] += penalty;
            for (std::size_t b = 0; b < a; ++b) gram[a * p + b] = gram[b * p + a];
        }
        cholesky_solve(gram, rhs, p);
        model.coef = rhs;
        models.push_back(std::move(model));
    }
    return models;
}

SigmaKnn::SigmaKnn(const Dataset& anchors, std::vector<double> abs_residuals, std::size_t k)
    : anchors_(&anchors), abs_residuals_(std::move(abs_residuals)), k_(k) {
    if (abs_residuals_.size() != anchors.size())
        throw std::invalid_argument("SigmaKnn: residual count mismatch");
    if (k_ == 0 || k_ > anchors.size()) throw std::invalid_argument("SigmaKnn: bad k");
}

double SigmaKnn::operator()(const double* x) const {
    const std::size_t m = anchors_->size();
    const std::size_t d = anchors_->dim;
    std::vector<std::pair<double, std::size_t>> dist(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = anchors_->row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            double diff = row[j] - x[j];
            s += diff * diff;
        }
        dist[i] = {s, i};
    }
    std::nth_element(dist.begin(), dist.begin() + (k_ - 1), dist.end());
    double mean = 0.0;
    for (std::size_t i = 0; i < k_; ++i) mean += abs_residuals_[dist[i].second];
    mean /= static_cast<double>(k_);
    return std::max(1e-6, mean);
}

std::vector<double> LogisticModel::predict_proba(const double* x) const {
    const std::size_t p = features.size();
    std::vector<double> logits(labels, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        double xj = x[features[j]];
        const double* wj = weights.data() + j * labels;
        for (int c = 0; c < labels; ++c) logits[c] += wj[c] * xj;
    }
    double max_logit = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (int c = 0; c < labels; ++c) {
        logits[c] = std::exp(logits[c] - max_logit);
        total += logits[c];
    }
    for (int c = 0; c < labels; ++c) logits[c] /= total;
    return logits;
}

std::vector<LogisticModel> pretrain_classifiers(const Dataset& train, std::size_t count,
                                                int labels, std::size_t steps, double rate,
                                                Rng& rng) {
    const std::size_t d = train.dim;
    const std::size_t m = train.size();
    const std::size_t p = std::max<std::size_t>(1, d / 2);
    std::vector<LogisticModel> models;
    models.reserve(count);
    std::vector<double> probs(labels);
    for (std::size_t lam = 0; lam < count; ++lam) {
        LogisticModel model;
        model.labels = labels;
        model.features = sample_distinct(d, p, rng);
        model.weights.resize(p * labels);
        for (double& w : model.weights) w = 0.1 * rng.normal();

        std::vector<double> grad(p * labels);
        for (std::size_t step = 0; step < steps; ++step) {
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t i = 0; i < m; ++i) {
                const double* row = train.row(i);
                // Forward pass on the feature subset.
                for (int c = 0; c < labels; ++c) probs[c] = 0.0;
                for (std::size_t j = 0; j < p; ++j) {
                    double xj = row[model.features[j]];
                    const double* wj = model.weights.data() + j * labels;
                    for (int c = 0; c < labels; ++c) probs[c] += wj[c] * xj;
                }
                double max_logit = *std::max_element(probs.begin(), probs.end());
                double total = 0.0;
                for (int c = 0; c < labels; ++c) {
                    probs[c] = std::exp(probs[c] - max_logit);
                    total += probs[c];
                }
                int truth = static_cast<int>(train.y[i]);
                for (int c = 0; c < labels; ++c) {
                    double r = probs[c] / total - (c == truth ? 1.0 : 0.0);
                    for (std::size_t j = 0; j < p; ++j)
                        grad[j * labels + c] += r * row[model.features[j]];
                }
            }
            double scale = rate / static_cast<double>(m);
            for (std::size_t j = 0; j < p * static_cast<std::size_t>(labels); ++j)
                model.weights[j] -= scale * grad[j];
        }
        models.push_back(std::move(model));
    }
    return models;
}

namespace {

struct TrainedModels {
    std::vector<RidgeModel> ridge;       // residual score predictors
    std::vector<RidgeModel> ridge_half;  // rescaled: fitted on the first half
    std::vector<SigmaKnn> sigmas;
    Dataset sigma_anchors;  // second half of the pretraining data
    std::vector<LogisticModel> classifiers;
};

TrainedModels train_models(const ExperimentConfig& cfg, Rng& rng,
                           const std::vector<double>& beta) {
    TrainedModels tm;
    switch (cfg.dgp.kind) {
        case DgpKind::two_model:
            break;  // models are the fixed offsets x +- C
        case DgpKind::classification: {
            Dataset train = gen_classification_data(cfg.dgp, beta, cfg.n_train, rng);
            tm.classifiers = pretrain_classifiers(train, cfg.n_models, cfg.dgp.labels,
                                                  cfg.logistic_steps, cfg.logistic_rate, rng);
            break;
        }
        default: {
            Dataset train = gen_regression_data(cfg.dgp, cfg.n_train, rng);
            if (cfg.score == ScoreChoice::residual) {
                tm.ridge = pretrain_ridge_subset_models(train, cfg.n_models,
                                                        cfg.subset_fraction, cfg.ridge_penalty,
                                                        rng);
            } else {
                std::size_t half = cfg.n_train / 2;
                Dataset first, second;
                first.dim = second.dim = train.dim;
                first.x.assign(train.x.begin(), train.x.begin() + half * train.dim);
                first.y.assign(train.y.begin(), train.y.begin() + half);
                second.x.assign(train.x.begin() + half * train.dim, train.x.end());
                second.y.assign(train.y.begin() + half, train.y.end());
                tm.ridge_half = pretrain_ridge_subset_models(first, cfg.n_models,
                                                             cfg.subset_fraction,
                                                             cfg.ridge_penalty, rng);
                tm.sigma_anchors = std::move(second);
                std::size_t k = std::min(cfg.sigma_knn, tm.sigma_anchors.size());
                for (const auto& model : tm.ridge_half) {
                    std::vector<double> absres(tm.sigma_anchors.size());
                    for (std::size_t i = 0; i < tm.sigma_anchors.size(); ++i)
                        absres[i] = std::fabs(tm.sigma_anchors.y[i] -
                                              model.predict(tm.sigma_anchors.row(i)));
                    tm.sigmas.emplace_back(tm.sigma_anchors, std::move(absres), k);
                }
            }
            break;
        }
    }
    return tm;
}

ModelClass build_model_class(const ExperimentConfig& cfg, const TrainedModels& tm,
                             const Dataset& calib, const double* x_test) {
    std::vector<ModelEvaluations> evals;
    const std::size_t n = calib.size();
    if (cfg.dgp.kind == DgpKind::two_model) {
        for (double sign : {+1.0, -1.0}) {
            ResidualModel m;
            m.pred_calib.resize(n);
            for (std::size_t i = 0; i < n; ++i)
                m.pred_calib[i] = calib.x[i] + sign * cfg.dgp.offset_c;
            m.pred_test = x_test[0] + sign * cfg.dgp.offset_c;
            evals.emplace_back(std::move(m));
        }
        return ModelClass(std::move(evals));
    }
    if (cfg.dgp.kind == DgpKind::classification) {
        for (const auto& clf : tm.classifiers) {
            CondDensityModel m;
            m.p_calib.resize(n);
            for (std::size_t i = 0; i < n; ++i) m.p_calib[i] = clf.predict_proba(calib.row(i));
            m.p_test = clf.predict_proba(x_test);
            evals.emplace_back(std::move(m));
        }
        return ModelClass(std::move(evals));
    }
    if (cfg.score == ScoreChoice::residual) {
        for (const auto& model : tm.ridge) {
            ResidualModel m;
            m.pred_calib.resize(n);
            for (std::size_t i = 0; i < n; ++i) m.pred_calib[i] = model.predict(calib.row(i));
            m.pred_test = model.predict(x_test);
            evals.emplace_back(std::move(m));
        }
        return ModelClass(std::move(evals));
    }
    for (std::size_t lam = 0; lam < tm.ridge_half.size(); ++lam) {
        RescaledResidualModel m;
        m.pred_calib.resize(n);
        m.sigma_calib.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            m.pred_calib[i] = tm.ridge_half[lam].predict(calib.row(i));
            m.sigma_calib[i] = tm.sigmas[lam](calib.row(i));
        }
        m.pred_test = tm.ridge_half[lam].predict(x_test);
        m.sigma_test = tm.sigmas[lam](x_test);
        evals.emplace_back(std::move(m));
    }
    return ModelClass(std::move(evals));
}

struct TrialRecord {
    std::vector<double> coverage;  // per method
    std::vector<double> width;
    std::vector<double> single_widths;  // per model
    std::vector<std::string> violations;
};

void check_trial_invariants(const CalibrationSession& session, const MethodOutput* baseline,
                            const MethodOutput* modsel, const MethodOutput* loo,
                            std::size_t trial, std::vector<std::string>& out) {
    const auto& ctx = session.loss_ctx();
    double tol = tol_eq(std::fabs(session.threshold_budget())) * 10.0;
    // Containment needs a unique loss minimizer.
    std::size_t min_count = 0;
    for (std::size_t lam = 0; lam < session.model_class().size(); ++lam)
        if (ctx.loss(lam, session.scores().q_hat(lam)) == session.threshold_budget()) ++min_count;
    bool unique = min_count == 1;
    auto record = [&](const std::string& what) {
        out.push_back("trial " + std::to_string(trial) + ": " + what);
    };
    if (unique && baseline && modsel &&
        !region_contains(modsel->region, baseline->region, tol))
        record("yk_baseline region not inside modsel_cp region");
    if (unique && baseline && loo && !region_contains(loo->region, baseline->region, tol))
        record("yk_baseline region not inside modsel_cp_loo region");

    if (modsel && !session.model_class().discrete()) {
        // Sandwich: strict lower bound within the grid-exact region within the
        // upper bound, up to one grid step at each boundary.
        oracle::GridSpec grid = oracle::default_grid(session, 1501);
        PredictionRegion exact = oracle::grid_modsel_cp(session, grid);
        double slack = 1.5 * grid.step();
        if (modsel->lower_region && !region_contains(exact, *modsel->lower_region, slack))
            record("modsel_cp lower bound escapes the grid-exact region");
        if (!region_contains(modsel->region, exact, slack))
            record("grid-exact region escapes the modsel_cp upper bound");

        // Leave-one-out selections must stay inside the candidate sets.
        CompetingSets sets = session.competing_sets();
        std::vector<double> ys;
        for (const auto& iv : modsel->region.interval_parts()) {
            ys.push_back(iv.lo);
            ys.push_back(0.5 * (iv.lo + iv.hi));
            ys.push_back(iv.hi);
        }
        if (ys.size() > 9) ys.resize(9);
        for (double y : ys) {
            for (std::size_t i = 0; i < session.n(); ++i) {
                std::size_t lam = session.loo_selected_model(i, y);
                if (!std::binary_search(sets.m_i[i].begin(), sets.m_i[i].end(), lam)) {
                    record("loo selected model outside M_i");
                    break;
                }
            }
        }
    }
}

TrialRecord run_trial(const ExperimentConfig& cfg, const TrainedModels* shared,
                      const std::vector<double>& beta, std::size_t trial) {
    Rng rng(cfg.master_seed, trial + 1);
    TrainedModels local;
    const TrainedModels* tm = shared;
    if (tm == nullptr) {
        local = train_models(cfg, rng, beta);
        tm = &local;
    }

    const bool discrete = cfg.dgp.kind == DgpKind::classification;
    const int label_count = discrete ? cfg.dgp.labels : 0;
    auto gen = [&](std::size_t m, Rng& r) {
        switch (cfg.dgp.kind) {
            case DgpKind::two_model: return gen_two_model_data(cfg.dgp, m, r);
            case DgpKind::classification:
                return gen_classification_data(cfg.dgp, beta, m, r);
            default: return gen_regression_data(cfg.dgp, m, r);
        }
    };
    Dataset calib = gen(cfg.n, rng);
    Dataset tests = gen(cfg.test_batch, rng);

    TrialRecord rec;
    rec.coverage.assign(cfg.methods.size(), 0.0);
    rec.width.assign(cfg.methods.size(), 0.0);
    rec.single_widths.assign(cfg.dgp.kind == DgpKind::two_model ? 2 : cfg.n_models, 0.0);

    for (std::size_t b = 0; b < cfg.test_batch; ++b) {
        ModelClass mc = build_model_class(cfg, *tm, calib, tests.row(b));
        CalibrationSession session(mc, calib.y, cfg.alpha, TieBreaker::min_index());
        double y_test = tests.y[b];

        MethodOutput baseline_out, modsel_out, loo_out;
        const MethodOutput *baseline_ptr = nullptr, *modsel_ptr = nullptr, *loo_ptr = nullptr;
        for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
            MethodOutput out = session.run(cfg.methods[mi], cfg.n1);
            bool covered = discrete ? out.region.contains_label(static_cast<int>(y_test))
                                    : out.region.contains(y_test);
            rec.coverage[mi] += covered ? 1.0 : 0.0;
            rec.width[mi] += region_width(out.region, label_count);
            switch (cfg.methods[mi]) {
                case MethodKind::yk_baseline:
                    baseline_out = std::move(out);
                    baseline_ptr = &baseline_out;
                    break;
                case MethodKind::modsel_cp:
                    modsel_out = std::move(out);
                    modsel_ptr = &modsel_out;
                    break;
                case MethodKind::modsel_cp_loo:
                    loo_out = std::move(out);
                    loo_ptr = &loo_out;
                    break;
                default: break;
            }
        }
        for (std::size_t lam = 0; lam < rec.single_widths.size(); ++lam) {
            PredictionRegion split = mc.model(lam).region_at_threshold(session.scores().q_hat(lam));
            rec.single_widths[lam] += region_width(split, label_count);
        }
        if (cfg.check_invariants)
            check_trial_invariants(session, baseline_ptr, modsel_ptr, loo_ptr, trial,
                                   rec.violations);
    }
    double inv_b = 1.0 / static_cast<double>(cfg.test_batch);
    for (double& v : rec.coverage) v *= inv_b;
    for (double& v : rec.width) v *= inv_b;
    for (double& v : rec.single_widths) v *= inv_b;
    return rec;
}

int resolve_threads(const ExperimentConfig& cfg) {
    if (cfg.threads > 0) return cfg.threads;
    if (const char* env = std::getenv("MODSEL_THREADS")) {
        int t = std::atoi(env);
        if (t > 0) return t;
    }
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

std::string setting_label(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << dgp_name(cfg.dgp.kind);
    if (cfg.dgp.kind == DgpKind::two_model)
        os << " C=" << cfg.dgp.offset_c << " mu=" << cfg.dgp.mu;
    else if (cfg.dgp.kind != DgpKind::classification)
        os << (cfg.score == ScoreChoice::rescaled ? " rescaled" : " residual");
    os << " n=" << cfg.n << " models="
       << (cfg.dgp.kind == DgpKind::two_model ? std::size_t{2} : cfg.n_models);
    return os.str();
}

ExperimentSummary run_impl(const ExperimentConfig& cfg, bool parallel) {
    if (cfg.trials == 0) throw std::invalid_argument("run_experiment: trials must be >= 1");
    if (cfg.methods.empty()) throw std::invalid_argument("run_experiment: no methods configured");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
        throw std::invalid_argument("run_experiment: alpha must be in (0,1)");

    std::vector<double> beta;
    if (cfg.dgp.kind == DgpKind::classification) {
        Rng beta_rng(cfg.master_seed, kBetaStream);
        beta = draw_classification_beta(cfg.dgp, beta_rng);
    }
    TrainedModels shared;
    bool use_shared = !cfg.retrain_per_trial && cfg.dgp.kind != DgpKind::two_model;
    if (use_shared) {
        Rng train_rng(cfg.master_seed, kTrainStream);
        shared = train_models(cfg, train_rng, beta);
    }

    std::vector<TrialRecord> records(cfg.trials);
    const TrainedModels* shared_ptr = use_shared ? &shared : nullptr;
    if (parallel) {
        int threads = resolve_threads(cfg);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
        for (long long t = 0; t < static_cast<long long>(cfg.trials); ++t)
            records[static_cast<std::size_t>(t)] =
                run_trial(cfg, shared_ptr, beta, static_cast<std::size_t>(t));
        (void)threads;
    } else {
        for (std::size_t t = 0; t < cfg.trials; ++t)
            records[t] = run_trial(cfg, shared_ptr, beta, t);
    }

    ExperimentSummary summary;
    summary.trials = cfg.trials;
    summary.alpha = cfg.alpha;
    summary.master_seed = cfg.master_seed;
    summary.setting = setting_label(cfg);

    const std::size_t model_count = records[0].single_widths.size();
    double best_single = kInf;
    std::vector<double> column(cfg.trials);
    for (std::size_t lam = 0; lam < model_count; ++lam) {
        for (std::size_t t = 0; t < cfg.trials; ++t) column[t] = records[t].single_widths[lam];
        best_single = std::min(best_single, mean_and_se(column).mean);
    }
    summary.best_single_width = best_single;

    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
        MethodStats stats;
        stats.method = cfg.methods[mi];
        for (std::size_t t = 0; t < cfg.trials; ++t) column[t] = records[t].coverage[mi];
        MeanSe cov = mean_and_se(column);
        stats.coverage = cov.mean;
        stats.coverage_se = cov.se;
        std::size_t unbounded = 0;
        for (std::size_t t = 0; t < cfg.trials; ++t) {
            column[t] = records[t].width[mi];
            if (std::isinf(column[t])) ++unbounded;
        }
        stats.unbounded_trials = unbounded;
        MeanSe wid = mean_and_se(column);
        stats.width = wid.mean;
        stats.width_se = wid.se;
        stats.width_ratio = stats.width / best_single;
        stats.width_ratio_se = stats.width_se / best_single;
        summary.rows.push_back(stats);
    }
    for (const auto& rec : records)
        summary.invariant_violations.insert(summary.invariant_violations.end(),
                                            rec.violations.begin(), rec.violations.end());
    return summary;
}

}  // namespace

ExperimentSummary run_experiment(const ExperimentConfig& cfg) { return run_impl(cfg, true); }

ExperimentSummary run_experiment_serial(const ExperimentConfig& cfg) {
    return run_impl(cfg, false);
}

}  // namespace modsel::sim

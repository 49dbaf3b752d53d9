#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "modsel/region.hpp"
#include "modsel/scores.hpp"
#include "modsel/select.hpp"
#include "modsel/simlab.hpp"

namespace modsel::io {

// Raised on malformed configs or data files; the CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Shortest decimal that round-trips to the same double. INF / -INF sentinels.
std::string format_double(double v);
double parse_double(const std::string& text);

// `[lo,hi];[lo,hi]`, `{0,2,5}`, `ENTIRE`, or `EMPTY`.
std::string format_region(const PredictionRegion& region);
PredictionRegion parse_region(const std::string& text);

// Flat key=value documents; a leading '{' switches to JSON parsing.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> read_config_file(const std::string& path);

sim::ExperimentConfig experiment_config_from(const std::map<std::string, std::string>& kv);

struct PredictConfig {
    MethodKind method = MethodKind::modsel_cp;
    double alpha = 0.1;
    TieBreaker tie_breaker = TieBreaker::min_index();
    std::optional<std::size_t> n1;
};
PredictConfig predict_config_from(const std::map<std::string, std::string>& kv);

// Model-evaluations file: header names the per-model columns (m<k>_pred,
// m<k>_sigma, m<k>_qlo/m<k>_qhi, or m<k>_p<j>), response column `y` (or
// `y_label`), and one final row whose response cell is the TEST flag carrying
// the test-point evaluations.
struct ModelEvalFile {
    ModelClass models;
    std::vector<double> responses;
    bool discrete = false;
};
ModelEvalFile read_model_evals(const std::string& path,
                               const std::optional<std::string>& data_path = std::nullopt);
void write_model_evals(const std::string& path, const ModelClass& mc,
                       const std::vector<double>& responses);

struct PredictResult {
    PredictionRegion region;
    std::size_t selected_model = 0;
    double threshold_loss = 0.0;
    std::size_t m_size = 0;
    std::optional<double> alpha_tilde;
};
void write_predict_result(const std::string& path, const PredictResult& result);
PredictResult read_predict_result(const std::string& path);

void write_summary(const std::string& path, const sim::ExperimentSummary& summary);

struct SummaryFile {
    sim::ExperimentSummary summary;
    std::string source;
};
SummaryFile read_summary(const std::string& path);

// Long-format comparison table: setting,method,metric,value,se.
void write_report(const std::string& path, const std::vector<SummaryFile>& summaries);

std::string read_text_file(const std::string& path);

}  // namespace modsel::io

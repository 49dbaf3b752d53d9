#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "modsel/io.hpp"
#include "modsel/oracle.hpp"
#include "modsel/select.hpp"
#include "modsel/simlab.hpp"

namespace {

int cmd_simulate(const std::string& config_path, const std::string& out_path) {
    auto kv = modsel::io::read_config_file(config_path);
    modsel::sim::ExperimentConfig cfg = modsel::io::experiment_config_from(kv);
    modsel::sim::ExperimentSummary summary = modsel::sim::run_experiment(cfg);
    modsel::io::write_summary(out_path, summary);
    if (!summary.invariant_violations.empty()) {
        for (const auto& v : summary.invariant_violations)
            std::fprintf(stderr, "invariant violation: %s\n", v.c_str());
        return 3;
    }
    return 0;
}

int cmd_predict(const std::string& data_path, const std::string& models_path,
                const std::string& config_path, const std::string& out_path) {
    auto kv = modsel::io::read_config_file(config_path);
    modsel::io::PredictConfig cfg = modsel::io::predict_config_from(kv);
    std::optional<std::string> data;
    if (!data_path.empty() && data_path != models_path) data = data_path;
    modsel::io::ModelEvalFile file = modsel::io::read_model_evals(models_path, data);

    modsel::CalibrationSession session(file.models, file.responses, cfg.alpha, cfg.tie_breaker);
    modsel::MethodOutput out = session.run(cfg.method, cfg.n1);

    modsel::io::PredictResult result;
    result.region = out.region;
    result.selected_model = out.selected_model;
    result.threshold_loss = out.threshold_loss;
    result.m_size = out.diag.m_size;
    if (out.diag.alpha_adjusted) result.alpha_tilde = out.diag.alpha_tilde;
    modsel::io::write_predict_result(out_path, result);
    return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out_path) {
    std::vector<modsel::io::SummaryFile> summaries;
    summaries.reserve(inputs.size());
    for (const auto& path : inputs) summaries.push_back(modsel::io::read_summary(path));
    modsel::io::write_report(out_path, summaries);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conformal prediction with data-dependent model selection"};
    app.require_subcommand(1);

    std::string config_path, out_path, data_path, models_path;
    std::vector<std::string> report_inputs;

    auto* simulate = app.add_subcommand("simulate", "Run a Monte-Carlo coverage/width experiment");
    simulate->add_option("--config", config_path, "experiment config (key=value or JSON)")
        ->required();
    simulate->add_option("--out", out_path, "summary output (.csv or .json)")->required();

    auto* predict = app.add_subcommand("predict", "Calibrate and predict from evaluation files");
    predict->add_option("--data", data_path, "calibration responses (optional; y column)");
    predict->add_option("--models", models_path, "per-model evaluations with final TEST row")
        ->required();
    predict->add_option("--config", config_path, "method config")->required();
    predict->add_option("--out", out_path, "result output (key=value or .json)")->required();

    auto* report = app.add_subcommand("report", "Merge summaries into a long-format table");
    report->add_option("inputs", report_inputs, "summary files")->required();
    report->add_option("--out", out_path, "long-format csv")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(config_path, out_path);
        if (predict->parsed()) return cmd_predict(data_path, models_path, config_path, out_path);
        if (report->parsed()) return cmd_report(report_inputs, out_path);
    } catch (const modsel::io::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 3;
    }
    return 2;
}

// Compares the serial reference runner against the OpenMP runner on a
// mid-size two-model experiment and checks that both produce identical
// summaries.

#include <chrono>
#include <cstdio>
#include <cstring>

#include "modsel/simlab.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

bool same_summary(const modsel::sim::ExperimentSummary& a,
                  const modsel::sim::ExperimentSummary& b) {
    if (a.rows.size() != b.rows.size()) return false;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        if (a.rows[i].coverage != b.rows[i].coverage) return false;
        if (a.rows[i].width != b.rows[i].width) return false;
        if (a.rows[i].width_se != b.rows[i].width_se) return false;
    }
    return a.best_single_width == b.best_single_width;
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t trials = 2000;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--trials") == 0 && i + 1 < argc)
            trials = static_cast<std::size_t>(std::atoll(argv[++i]));
    }

    modsel::sim::ExperimentConfig cfg;
    cfg.dgp.kind = modsel::sim::DgpKind::two_model;
    cfg.dgp.offset_c = 5.0;
    cfg.dgp.mu = 0.0;
    cfg.n = 200;
    cfg.trials = trials;
    cfg.master_seed = 74250001;
    cfg.methods = {modsel::MethodKind::yk_baseline, modsel::MethodKind::modsel_cp,
                   modsel::MethodKind::modsel_cp_loo};

    std::printf("two_model C=5 mu=0, n=200, %zu trials\n", trials);

    auto t0 = Clock::now();
    auto serial = modsel::sim::run_experiment_serial(cfg);
    double serial_s = seconds_since(t0);
    std::printf("serial reference: %8.3f s\n", serial_s);

    t0 = Clock::now();
    auto parallel = modsel::sim::run_experiment(cfg);
    double parallel_s = seconds_since(t0);
    std::printf("openmp runner:    %8.3f s  (speedup %.2fx)\n", parallel_s,
                serial_s / parallel_s);

    if (!same_summary(serial, parallel)) {
        std::printf("MISMATCH: serial and parallel summaries differ\n");
        return 1;
    }
    std::printf("summaries identical\n");
    for (const auto& row : parallel.rows)
        std::printf("  %-14s coverage %.4f  width %.4f\n", modsel::method_name(row.method),
                    row.coverage, row.width);
    return 0;
}

#include "modsel/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace modsel::io {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string format_double(double v) {
    if (std::isnan(v)) return "NAN";
    if (std::isinf(v)) return v > 0 ? "INF" : "-INF";
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
    std::string t = trim(text);
    if (t == "INF" || t == "inf") return kInf;
    if (t == "-INF" || t == "-inf") return -kInf;
    if (t == "NAN") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw ConfigError("bad number: '" + text + "'");
    return v;
}

std::string format_region(const PredictionRegion& region) {
    switch (region.kind()) {
        case PredictionRegion::Kind::empty: return "EMPTY";
        case PredictionRegion::Kind::entire: return "ENTIRE";
        case PredictionRegion::Kind::labels: {
            std::string out = "{";
            const auto& ls = region.label_parts();
            for (std::size_t i = 0; i < ls.size(); ++i) {
                if (i) out += ",";
                out += std::to_string(ls[i]);
            }
            return out + "}";
        }
        case PredictionRegion::Kind::intervals: break;
    }
    std::string out;
    const auto& ivs = region.interval_parts();
    for (std::size_t i = 0; i < ivs.size(); ++i) {
        if (i) out += ";";
        out += "[" + format_double(ivs[i].lo) + "," + format_double(ivs[i].hi) + "]";
    }
    return out;
}

PredictionRegion parse_region(const std::string& text) {
    std::string t = trim(text);
    if (t == "EMPTY") return PredictionRegion::empty();
    if (t == "ENTIRE") return PredictionRegion::entire();
    if (!t.empty() && t.front() == '{') {
        if (t.back() != '}') throw ConfigError("bad label region: " + text);
        std::vector<int> labels;
        for (const auto& part : split(t.substr(1, t.size() - 2), ','))
            if (!trim(part).empty()) labels.push_back(static_cast<int>(parse_double(part)));
        return PredictionRegion::labels(std::move(labels));
    }
    std::vector<RealInterval> parts;
    for (const auto& piece : split(t, ';')) {
        std::string p = trim(piece);
        if (p.empty()) continue;
        if (p.front() != '[' || p.back() != ']') throw ConfigError("bad interval: " + piece);
        auto nums = split(p.substr(1, p.size() - 2), ',');
        if (nums.size() != 2) throw ConfigError("bad interval: " + piece);
        parts.push_back({parse_double(nums[0]), parse_double(nums[1])});
    }
    return PredictionRegion::intervals(std::move(parts));
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::string t = trim(text);
    if (!t.empty() && t.front() == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(t);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("bad JSON config: ") + e.what());
        }
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (it->is_string())
                kv[it.key()] = it->get<std::string>();
            else
                kv[it.key()] = it->dump();
        }
        return kv;
    }
    std::istringstream in(t);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string l = trim(line);
        if (l.empty() || l[0] == '#') continue;
        std::size_t eq = l.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        kv[trim(l.substr(0, eq))] = trim(l.substr(eq + 1));
    }
    return kv;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
    return parse_config_text(read_text_file(path));
}

namespace {

TieBreaker tie_breaker_from(const std::string& text) {
    if (text == "min_index" || text.empty()) return TieBreaker::min_index();
    if (text.rfind("seeded:", 0) == 0)
        return TieBreaker::seeded(static_cast<std::uint64_t>(
            std::stoull(text.substr(std::string("seeded:").size()))));
    throw ConfigError("bad tie_break: " + text);
}

}  // namespace

sim::ExperimentConfig experiment_config_from(const std::map<std::string, std::string>& kv) {
    sim::ExperimentConfig cfg;
    auto get = [&](const char* key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };
    auto dgp_text = get("dgp");
    if (!dgp_text) throw ConfigError("config missing dgp");
    auto dgp = sim::dgp_from_name(*dgp_text);
    if (!dgp) throw ConfigError("unknown dgp: " + *dgp_text);
    cfg.dgp.kind = *dgp;
    if (cfg.dgp.kind == sim::DgpKind::classification) {
        cfg.dgp.dim = 50;
        cfg.score = sim::ScoreChoice::density;
        cfg.retrain_per_trial = false;
        cfg.n = 150;
    }
    if (cfg.dgp.kind == sim::DgpKind::two_model) {
        cfg.dgp.dim = 1;
        cfg.n_models = 2;
        cfg.n = 200;
    }
    if (auto v = get("score")) {
        if (*v == "residual")
            cfg.score = sim::ScoreChoice::residual;
        else if (*v == "rescaled")
            cfg.score = sim::ScoreChoice::rescaled;
        else if (*v == "density")
            cfg.score = sim::ScoreChoice::density;
        else
            throw ConfigError("unknown score: " + *v);
    }
    if (auto v = get("C")) cfg.dgp.offset_c = parse_double(*v);
    if (auto v = get("mu")) cfg.dgp.mu = parse_double(*v);
    if (auto v = get("d")) cfg.dgp.dim = static_cast<std::size_t>(parse_double(*v));
    if (auto v = get("n")) cfg.n = static_cast<std::size_t>(parse_double(*v));
    if (auto v = get("n_train")) cfg.n_train = static_cast<std::size_t>(parse_double(*v));
    if (auto v = get("n_models")) cfg.n_models = static_cast<std::size_t>(parse_double(*v));
    if (auto v = get("trials")) cfg.trials = static_cast<std::size_t>(parse_double(*v));
    if (auto v = get("test_batch")) cfg.test_batch = static_cast<std::size_t>(parse_double(*v));
    if (auto v = get("alpha")) cfg.alpha = parse_double(*v);
    if (auto v = get("seed")) cfg.master_seed = static_cast<std::uint64_t>(std::stoull(*v));
    if (auto v = get("n1")) cfg.n1 = static_cast<std::size_t>(parse_double(*v));
    if (auto v = get("retrain")) {
        if (*v == "per_trial")
            cfg.retrain_per_trial = true;
        else if (*v == "per_experiment")
            cfg.retrain_per_trial = false;
        else
            throw ConfigError("bad retrain: " + *v);
    }
    if (auto v = get("check_invariants")) cfg.check_invariants = (*v == "1" || *v == "true");
    if (auto v = get("threads")) cfg.threads = static_cast<int>(parse_double(*v));
    if (auto v = get("methods")) {
        for (const auto& name : split(*v, ',')) {
            auto m = method_from_name(trim(name));
            if (!m) throw ConfigError("unknown method: " + name);
            cfg.methods.push_back(*m);
        }
    } else {
        cfg.methods = {MethodKind::yk_baseline, MethodKind::yk_adjust, MethodKind::yk_split,
                       MethodKind::modsel_cp, MethodKind::modsel_cp_loo};
    }
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ConfigError("alpha must be in (0,1)");
    return cfg;
}

PredictConfig predict_config_from(const std::map<std::string, std::string>& kv) {
    PredictConfig cfg;
    auto it = kv.find("method");
    if (it != kv.end()) {
        auto m = method_from_name(it->second);
        if (!m) throw ConfigError("unknown method: " + it->second);
        cfg.method = *m;
    }
    if (auto a = kv.find("alpha"); a != kv.end()) cfg.alpha = parse_double(a->second);
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ConfigError("alpha must be in (0,1)");
    if (auto t = kv.find("tie_break"); t != kv.end())
        cfg.tie_breaker = tie_breaker_from(t->second);
    if (auto n = kv.find("n1"); n != kv.end())
        cfg.n1 = static_cast<std::size_t>(parse_double(n->second));
    return cfg;
}

namespace {

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;  // line numbers = index + 2
};

Csv read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path);
    Csv csv;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        if (trim(line)[0] == '#') continue;
        auto cells = split(line, ',');
        for (auto& c : cells) c = trim(c);
        if (!have_header) {
            csv.header = cells;
            have_header = true;
        } else {
            csv.rows.push_back(cells);
        }
    }
    if (!have_header) throw ConfigError(path + ": empty file");
    return csv;
}

int column_index(const Csv& csv, const std::string& name) {
    for (std::size_t i = 0; i < csv.header.size(); ++i)
        if (csv.header[i] == name) return static_cast<int>(i);
    return -1;
}

}  // namespace

ModelEvalFile read_model_evals(const std::string& path,
                               const std::optional<std::string>& data_path) {
    Csv csv = read_csv(path);
    int y_col = column_index(csv, "y");
    int label_col = column_index(csv, "y_label");
    bool discrete_response = label_col >= 0;
    int response_col = discrete_response ? label_col : y_col;

    // Model columns, grouped by index k in "m<k>_...".
    struct Cols {
        int pred = -1, sigma = -1, qlo = -1, qhi = -1;
        std::vector<std::pair<int, int>> probs;  // (label j, column)
    };
    std::map<int, Cols> per_model;
    for (std::size_t c = 0; c < csv.header.size(); ++c) {
        const std::string& name = csv.header[c];
        if (name.size() < 2 || name[0] != 'm' || !std::isdigit(static_cast<unsigned char>(name[1])))
            continue;
        std::size_t us = name.find('_');
        if (us == std::string::npos) throw ConfigError(path + ": bad column '" + name + "'");
        int k = std::stoi(name.substr(1, us - 1));
        std::string field = name.substr(us + 1);
        Cols& cols = per_model[k];
        if (field == "pred")
            cols.pred = static_cast<int>(c);
        else if (field == "sigma")
            cols.sigma = static_cast<int>(c);
        else if (field == "qlo")
            cols.qlo = static_cast<int>(c);
        else if (field == "qhi")
            cols.qhi = static_cast<int>(c);
        else if (field.size() > 1 && field[0] == 'p')
            cols.probs.emplace_back(std::stoi(field.substr(1)), static_cast<int>(c));
        else
            throw ConfigError(path + ": bad column '" + name + "'");
    }
    if (per_model.empty()) throw ConfigError(path + ": no model columns found");
    for (auto& [k, cols] : per_model) std::sort(cols.probs.begin(), cols.probs.end());

    // Locate the TEST row (last row, response cell flagged TEST).
    if (csv.rows.size() < 2) throw ConfigError(path + ": need calibration rows plus a TEST row");
    std::size_t test_row = csv.rows.size() - 1;
    if (response_col < 0) throw ConfigError(path + ": missing response column y or y_label");
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        if (csv.rows[r].size() != csv.header.size())
            throw ConfigError(path + ": line " + std::to_string(r + 2) + ": wrong column count");
        bool is_test = trim(csv.rows[r][response_col]) == "TEST";
        if (is_test && r != test_row)
            throw ConfigError(path + ": line " + std::to_string(r + 2) +
                              ": TEST row must be last");
        if (!is_test && r == test_row)
            throw ConfigError(path + ": line " + std::to_string(r + 2) +
                              ": final row must be flagged TEST");
    }
    const std::size_t n = csv.rows.size() - 1;

    std::vector<double> responses(n);
    if (data_path) {
        Csv data = read_csv(*data_path);
        int data_y = column_index(data, discrete_response ? "y_label" : "y");
        if (data_y < 0) data_y = column_index(data, "y");
        if (data_y < 0) throw ConfigError(*data_path + ": missing response column");
        if (data.rows.size() != n)
            throw ConfigError(*data_path + ": line " + std::to_string(data.rows.size() + 1) +
                              ": row count does not match model file");
        for (std::size_t i = 0; i < n; ++i) responses[i] = parse_double(data.rows[i][data_y]);
    } else {
        for (std::size_t i = 0; i < n; ++i)
            responses[i] = parse_double(csv.rows[i][response_col]);
    }

    auto cell = [&](std::size_t row, int col, const char* what) -> double {
        if (col < 0)
            throw ConfigError(path + ": missing " + std::string(what) + " column");
        try {
            return parse_double(csv.rows[row][col]);
        } catch (const ConfigError&) {
            throw ConfigError(path + ": line " + std::to_string(row + 2) + ": bad value in " +
                              csv.header[col]);
        }
    };

    std::vector<ModelEvaluations> models;
    for (const auto& [k, cols] : per_model) {
        if (!cols.probs.empty()) {
            CondDensityModel m;
            m.p_calib.resize(n);
            for (std::size_t i = 0; i < n; ++i)
                for (const auto& [label, col] : cols.probs)
                    m.p_calib[i].push_back(cell(i, col, "probability"));
            for (const auto& [label, col] : cols.probs)
                m.p_test.push_back(cell(test_row, col, "probability"));
            models.emplace_back(std::move(m));
        } else if (cols.qlo >= 0 || cols.qhi >= 0) {
            CqrModel m;
            for (std::size_t i = 0; i < n; ++i) {
                m.qlo_calib.push_back(cell(i, cols.qlo, "qlo"));
                m.qhi_calib.push_back(cell(i, cols.qhi, "qhi"));
            }
            m.qlo_test = cell(test_row, cols.qlo, "qlo");
            m.qhi_test = cell(test_row, cols.qhi, "qhi");
            models.emplace_back(std::move(m));
        } else if (cols.sigma >= 0) {
            RescaledResidualModel m;
            for (std::size_t i = 0; i < n; ++i) {
                m.pred_calib.push_back(cell(i, cols.pred, "pred"));
                m.sigma_calib.push_back(cell(i, cols.sigma, "sigma"));
            }
            m.pred_test = cell(test_row, cols.pred, "pred");
            m.sigma_test = cell(test_row, cols.sigma, "sigma");
            models.emplace_back(std::move(m));
        } else {
            ResidualModel m;
            for (std::size_t i = 0; i < n; ++i) m.pred_calib.push_back(cell(i, cols.pred, "pred"));
            m.pred_test = cell(test_row, cols.pred, "pred");
            models.emplace_back(std::move(m));
        }
    }
    try {
        return ModelEvalFile{ModelClass(std::move(models)), std::move(responses),
                             discrete_response};
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

void write_model_evals(const std::string& path, const ModelClass& mc,
                       const std::vector<double>& responses) {
    std::ofstream outf(path);
    if (!outf) throw ConfigError("cannot write file: " + path);
    const std::size_t n = mc.calib_size();
    std::string header = mc.discrete() ? "y_label" : "y";
    for (std::size_t k = 0; k < mc.size(); ++k) {
        std::string prefix = "m" + std::to_string(k) + "_";
        switch (mc.family()) {
            case ScoreFamily::residual: header += "," + prefix + "pred"; break;
            case ScoreFamily::rescaled_residual:
                header += "," + prefix + "pred," + prefix + "sigma";
                break;
            case ScoreFamily::cqr: header += "," + prefix + "qlo," + prefix + "qhi"; break;
            case ScoreFamily::cond_density:
                for (int j = 0; j < mc.label_count(); ++j)
                    header += "," + prefix + "p" + std::to_string(j);
                break;
        }
    }
    outf << header << "\n";
    auto write_row = [&](std::size_t point, const std::string& response) {
        outf << response;
        for (std::size_t k = 0; k < mc.size(); ++k) {
            const auto& raw = mc.model(k).raw();
            bool test = point == n;
            switch (mc.family()) {
                case ScoreFamily::residual: {
                    const auto& m = std::get<ResidualModel>(raw);
                    outf << "," << format_double(test ? m.pred_test : m.pred_calib[point]);
                    break;
                }
                case ScoreFamily::rescaled_residual: {
                    const auto& m = std::get<RescaledResidualModel>(raw);
                    outf << "," << format_double(test ? m.pred_test : m.pred_calib[point]) << ","
                         << format_double(test ? m.sigma_test : m.sigma_calib[point]);
                    break;
                }
                case ScoreFamily::cqr: {
                    const auto& m = std::get<CqrModel>(raw);
                    outf << "," << format_double(test ? m.qlo_test : m.qlo_calib[point]) << ","
                         << format_double(test ? m.qhi_test : m.qhi_calib[point]);
                    break;
                }
                case ScoreFamily::cond_density: {
                    const auto& m = std::get<CondDensityModel>(raw);
                    const auto& p = test ? m.p_test : m.p_calib[point];
                    for (double v : p) outf << "," << format_double(v);
                    break;
                }
            }
        }
        outf << "\n";
    };
    for (std::size_t i = 0; i < n; ++i) write_row(i, format_double(responses[i]));
    write_row(n, "TEST");
}

void write_predict_result(const std::string& path, const PredictResult& result) {
    std::ofstream outf(path);
    if (!outf) throw ConfigError("cannot write file: " + path);
    if (ends_with(path, ".json")) {
        nlohmann::json j;
        j["region"] = format_region(result.region);
        j["selected_model"] = result.selected_model;
        j["threshold_T"] = format_double(result.threshold_loss);
        j["m_size"] = result.m_size;
        if (result.alpha_tilde) j["alpha_tilde"] = format_double(*result.alpha_tilde);
        outf << j.dump(2) << "\n";
        return;
    }
    outf << "region=" << format_region(result.region) << "\n";
    outf << "selected_model=" << result.selected_model << "\n";
    outf << "threshold_T=" << format_double(result.threshold_loss) << "\n";
    outf << "m_size=" << result.m_size << "\n";
    if (result.alpha_tilde) outf << "alpha_tilde=" << format_double(*result.alpha_tilde) << "\n";
}

PredictResult read_predict_result(const std::string& path) {
    PredictResult result;
    std::string text = read_text_file(path);
    std::map<std::string, std::string> kv;
    if (ends_with(path, ".json")) {
        auto j = nlohmann::json::parse(text);
        for (auto it = j.begin(); it != j.end(); ++it)
            kv[it.key()] = it->is_string() ? it->get<std::string>() : it->dump();
    } else {
        kv = parse_config_text(text);
    }
    result.region = parse_region(kv.at("region"));
    result.selected_model = static_cast<std::size_t>(std::stoull(kv.at("selected_model")));
    result.threshold_loss = parse_double(kv.at("threshold_T"));
    result.m_size = static_cast<std::size_t>(std::stoull(kv.at("m_size")));
    if (auto it = kv.find("alpha_tilde"); it != kv.end())
        result.alpha_tilde = parse_double(it->second);
    return result;
}

namespace {

std::string se_cell(double se, std::size_t trials) {
    if (trials < 2 || std::isnan(se)) return "";
    return format_double(se);
}

}  // namespace

void write_summary(const std::string& path, const sim::ExperimentSummary& summary) {
    std::ofstream outf(path);
    if (!outf) throw ConfigError("cannot write file: " + path);
    if (ends_with(path, ".json")) {
        nlohmann::json j;
        j["setting"] = summary.setting;
        j["alpha"] = summary.alpha;
        j["trials"] = summary.trials;
        j["seed"] = summary.master_seed;
        j["best_single_width"] = format_double(summary.best_single_width);
        j["invariant_violations"] = summary.invariant_violations;
        auto rows = nlohmann::json::array();
        for (const auto& r : summary.rows) {
            nlohmann::json row;
            row["method"] = method_name(r.method);
            row["coverage"] = format_double(r.coverage);
            row["coverage_se"] = se_cell(r.coverage_se, summary.trials);
            row["width"] = format_double(r.width);
            row["width_se"] = se_cell(r.width_se, summary.trials);
            row["width_ratio"] = format_double(r.width_ratio);
            row["width_ratio_se"] = se_cell(r.width_ratio_se, summary.trials);
            row["unbounded_trials"] = r.unbounded_trials;
            rows.push_back(row);
        }
        j["rows"] = rows;
        outf << j.dump(2) << "\n";
        return;
    }
    outf << "# setting=" << summary.setting << " | alpha=" << format_double(summary.alpha)
         << " | trials=" << summary.trials << " | seed=" << summary.master_seed
         << " | best_single_width=" << format_double(summary.best_single_width)
         << " | violations=" << summary.invariant_violations.size() << "\n";
    outf << "method,coverage,coverage_se,width,width_se,width_ratio,width_ratio_se\n";
    for (const auto& r : summary.rows) {
        outf << method_name(r.method) << "," << format_double(r.coverage) << ","
             << se_cell(r.coverage_se, summary.trials) << "," << format_double(r.width) << ","
             << se_cell(r.width_se, summary.trials) << "," << format_double(r.width_ratio) << ","
             << se_cell(r.width_ratio_se, summary.trials) << "\n";
    }
}

SummaryFile read_summary(const std::string& path) {
    SummaryFile out;
    out.source = path;
    if (ends_with(path, ".json")) {
        auto j = nlohmann::json::parse(read_text_file(path));
        out.summary.setting = j.value("setting", path);
        out.summary.alpha = j["alpha"].get<double>();
        out.summary.trials = j["trials"].get<std::size_t>();
        out.summary.master_seed = j.value("seed", 0ULL);
        for (const auto& row : j["rows"]) {
            sim::MethodStats stats;
            auto m = method_from_name(row["method"].get<std::string>());
            if (!m) throw ConfigError(path + ": unknown method in summary");
            stats.method = *m;
            stats.coverage = parse_double(row["coverage"].get<std::string>());
            stats.width = parse_double(row["width"].get<std::string>());
            stats.width_ratio = parse_double(row["width_ratio"].get<std::string>());
            std::string se = row.value("coverage_se", "");
            stats.coverage_se = se.empty() ? 0.0 : parse_double(se);
            se = row.value("width_se", "");
            stats.width_se = se.empty() ? 0.0 : parse_double(se);
            se = row.value("width_ratio_se", "");
            stats.width_ratio_se = se.empty() ? 0.0 : parse_double(se);
            out.summary.rows.push_back(stats);
        }
        return out;
    }
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::string line;
    bool have_header = false;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        std::string l = trim(line);
        if (l.empty()) continue;
        if (l[0] == '#') {
            // metadata line: "# setting=... | alpha=... | trials=... | seed=..."
            for (const auto& piece : split(l.substr(1), '|')) {
                auto eq = piece.find('=');
                if (eq == std::string::npos) continue;
                std::string key = trim(piece.substr(0, eq));
                std::string value = trim(piece.substr(eq + 1));
                if (key == "setting") out.summary.setting = value;
                if (key == "alpha") out.summary.alpha = parse_double(value);
                if (key == "trials") out.summary.trials = static_cast<std::size_t>(std::stoull(value));
                if (key == "seed") out.summary.master_seed = std::stoull(value);
            }
            continue;
        }
        auto cells = split(l, ',');
        for (auto& c : cells) c = trim(c);
        if (!have_header) {
            header = cells;
            have_header = true;
            continue;
        }
        if (cells.size() != header.size()) throw ConfigError(path + ": ragged summary row");
        sim::MethodStats stats;
        for (std::size_t i = 0; i < header.size(); ++i) {
            const std::string& key = header[i];
            const std::string& value = cells[i];
            if (key == "method") {
                auto m = method_from_name(value);
                if (!m) throw ConfigError(path + ": unknown method " + value);
                stats.method = *m;
            } else if (!value.empty()) {
                double v = parse_double(value);
                if (key == "coverage") stats.coverage = v;
                if (key == "coverage_se") stats.coverage_se = v;
                if (key == "width") stats.width = v;
                if (key == "width_se") stats.width_se = v;
                if (key == "width_ratio") stats.width_ratio = v;
                if (key == "width_ratio_se") stats.width_ratio_se = v;
            }
        }
        out.summary.rows.push_back(stats);
    }
    if (!have_header) throw ConfigError(path + ": empty summary");
    if (out.summary.setting.empty()) out.summary.setting = path;
    return out;
}

void write_report(const std::string& path, const std::vector<SummaryFile>& summaries) {
    if (summaries.empty()) throw ConfigError("report: no inputs");
    std::ofstream outf(path);
    if (!outf) throw ConfigError("cannot write file: " + path);
    outf << "setting,method,metric,value,se\n";
    double alpha0 = summaries.front().summary.alpha;
    for (const auto& file : summaries) {
        if (file.summary.alpha != alpha0)
            outf << file.summary.setting << ",,alpha_mismatch_warning,"
                 << format_double(file.summary.alpha) << ",\n";
    }
    for (const auto& file : summaries) {
        for (const auto& r : file.summary.rows) {
            const std::string setting = file.summary.setting;
            outf << setting << "," << method_name(r.method) << ",coverage,"
                 << format_double(r.coverage) << "," << format_double(r.coverage_se) << "\n";
            outf << setting << "," << method_name(r.method) << ",width,"
                 << format_double(r.width) << "," << format_double(r.width_se) << "\n";
            outf << setting << "," << method_name(r.method) << ",width_ratio,"
                 << format_double(r.width_ratio) << "," << format_double(r.width_ratio_se)
                 << "\n";
        }
    }
}

}  // namespace modsel::io

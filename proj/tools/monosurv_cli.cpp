// Command-line front end: simulation, training, cross-validation, evaluation,
// prediction and the forward-pass-vs-integration timing benchmark. Every run
// derives all randomness from its --seed and writes a manifest next to its
// outputs.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "monosurv/data.hpp"
#include "monosurv/loss.hpp"
#include "monosurv/model_io.hpp"
#include "monosurv/net.hpp"
#include "monosurv/rng.hpp"
#include "monosurv/trainer.hpp"

namespace ms = monosurv;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string iso_utc_now() {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// One manifest per run, written next to the primary output.
struct Manifest {
    std::string command;
    json flags = json::object();
    std::vector<std::string> inputs, outputs;
    std::string started = iso_utc_now();
    Stopwatch watch;

    void write(const std::string& path) {
        json doc;
        doc["tool"] = "monosurv";
        doc["version"] = kVersion;
        doc["command"] = command;
        doc["flags"] = flags;
        doc["inputs"] = inputs;
        doc["outputs"] = outputs;
        doc["started"] = started;
        doc["wall_seconds"] = watch.seconds();
        ms::write_text_atomic(path, doc.dump(2) + "\n");
    }
};

double parse_double_token(const std::string& token, const std::string& what) {
    const char* begin = token.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        throw ms::UsageError("malformed " + what + ": '" + token + "'");
    }
    return v;
}

std::vector<double> parse_comma_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        out.push_back(parse_double_token(token, "covariate value"));
    }
    if (out.empty()) {
        throw ms::UsageError("empty covariate list");
    }
    return out;
}

// start:stop:count, inclusive of both endpoints.
std::vector<double> parse_time_grid(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ':')) {
        parts.push_back(token);
    }
    if (parts.size() != 3) {
        throw ms::UsageError("malformed time grid '" + text + "' (expected start:stop:count)");
    }
    const double start = parse_double_token(parts[0], "time grid start");
    const double stop = parse_double_token(parts[1], "time grid stop");
    const double count_raw = parse_double_token(parts[2], "time grid count");
    const int count = static_cast<int>(count_raw);
    if (count < 1 || count != count_raw) {
        throw ms::UsageError("time grid count must be a positive integer, got '" + parts[2] + "'");
    }
    if (stop < start) {
        throw ms::UsageError("time grid stop must not precede start");
    }
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(count));
    if (count == 1) {
        grid.push_back(start);
    } else {
        for (int k = 0; k < count; ++k) {
            grid.push_back(start + (stop - start) * static_cast<double>(k) / static_cast<double>(count - 1));
        }
    }
    return grid;
}

void note_universality(const ms::NetworkConfig& config) {
    if (!config.universal()) {
        std::cerr << "note: mixed subnetwork has " << config.mixed_widths.size()
                  << " hidden layer(s); at least 2 are needed for the universal-approximation guarantee\n";
    }
}

ms::HyperGrid load_grid(const std::string& spec) {
    if (spec == "small") return ms::HyperGrid::small_grid();
    if (spec == "large") return ms::HyperGrid::large_grid();
    json doc = json::parse(ms::read_text(spec), nullptr, false);
    if (doc.is_discarded()) {
        throw ms::ParseError("malformed JSON in grid file '" + spec + "'");
    }
    return ms::hyper_grid_from_json(doc);
}

json summarize_trials(const ms::SearchResult& search) {
    json trials = json::array();
    for (std::size_t t = 0; t < search.trials.size(); ++t) {
        const ms::TrialResult& trial = search.trials[t];
        json entry = ms::hyper_params_to_json(trial.hyper);
        entry["trial"] = t;
        entry["failed"] = trial.failed;
        if (trial.failed) {
            entry["error"] = trial.error;
        } else {
            entry["val_nll"] = trial.val_nll;
            entry["param_count"] = trial.param_count;
            entry["best_epoch"] = trial.best_epoch;
            entry["wall_seconds"] = trial.wall_seconds;
        }
        trials.push_back(std::move(entry));
    }
    return trials;
}

struct MeanSd {
    double mean = 0.0, sd = 0.0;
    int n = 0;
};

MeanSd mean_sd(const std::vector<double>& values) {
    MeanSd out;
    out.n = static_cast<int>(values.size());
    if (out.n == 0) return out;
    for (const double v : values) out.mean += v;
    out.mean /= out.n;
    for (const double v : values) out.sd += (v - out.mean) * (v - out.mean);
    out.sd = out.n > 1 ? std::sqrt(out.sd / (out.n - 1)) : 0.0;
    return out;
}

// ---------------------------------------------------------------------------

int run_simulate(const std::string& kind, int n, std::uint64_t seed, const std::string& out) {
    Manifest manifest;
    manifest.command = "simulate";
    manifest.flags = {{"kind", kind}, {"n", n}, {"seed", seed}, {"out", out}};
    const ms::Dataset data = ms::simulate_toy(ms::parse_toy_kind(kind), n, seed);
    ms::save_csv(data, out);
    manifest.outputs = {out};
    manifest.write(out + ".manifest.json");
    std::cout << "wrote " << data.size() << " records to " << out << "\n";
    return 0;
}

int run_train(const std::string& data_path, const std::string& val_path, const std::string& config_path,
              const std::string& head, std::uint64_t seed, const std::string& out_model,
              const std::string& duration_col, const std::string& event_col) {
    Manifest manifest;
    manifest.command = "train";
    manifest.flags = {{"data", data_path}, {"val", val_path},   {"config", config_path},
                      {"head", head},      {"seed", seed},      {"out-model", out_model},
                      {"duration-col", duration_col}, {"event-col", event_col}};
    manifest.inputs = {data_path, val_path};

    ms::TrainSpec spec;
    if (!config_path.empty()) {
        json doc = json::parse(ms::read_text(config_path), nullptr, false);
        if (doc.is_discarded()) {
            throw ms::ParseError("malformed JSON in config file '" + config_path + "'");
        }
        spec = ms::train_spec_from_json(doc);
        manifest.inputs.push_back(config_path);
    }
    if (!head.empty()) {
        spec.hyper.head = ms::parse_head_kind(head);
    }

    const ms::Dataset train_raw = ms::load_csv(data_path, duration_col, event_col);
    const ms::Dataset val_raw = ms::load_csv(val_path, duration_col, event_col);
    const ms::Preprocessing prep = ms::fit_preprocess(train_raw);
    const ms::StandardizedData train = ms::apply_preprocess(prep, train_raw);
    const ms::StandardizedData val = ms::apply_preprocess(prep, val_raw);

    const ms::NetworkConfig config = spec.to_config(train_raw.covariate_dim());
    note_universality(config);
    auto [model, report] = ms::train_model(config, spec.to_optim(), train, val, prep, seed);
    ms::save_model(model, out_model);
    const std::string report_path = out_model + ".train_report.json";
    json report_doc = ms::train_report_to_json(report);
    report_doc["hyper"] = ms::hyper_params_to_json(spec.hyper);
    ms::write_text_atomic(report_path, report_doc.dump(2) + "\n");

    manifest.outputs = {out_model, report_path};
    manifest.write(out_model + ".manifest.json");
    std::cout << "best validation NLL " << report.best_val_nll << " at epoch " << report.best_epoch
              << " (" << report.stop_reason << " after " << report.val_nll.size() << " epochs)\n";
    return 0;
}

int run_cv(const std::string& data_path, const std::string& grid_spec, int budget, std::uint64_t seed,
           const std::string& out_dir, const std::string& head, const std::string& duration_col,
           const std::string& event_col, int workers) {
    Manifest manifest;
    manifest.command = "cv";
    manifest.flags = {{"data", data_path}, {"grid", grid_spec},   {"budget", budget},
                      {"seed", seed},      {"out-dir", out_dir},  {"head", head},
                      {"duration-col", duration_col}, {"event-col", event_col}, {"workers", workers}};
    manifest.inputs = {data_path};

    ms::HyperGrid grid = load_grid(grid_spec);
    if (!head.empty()) {
        grid.heads = {ms::parse_head_kind(head)};
    }
    const ms::Dataset data = ms::load_csv(data_path, duration_col, event_col);
    std::filesystem::create_directories(out_dir);

    const int k = 5;
    const auto folds = ms::kfold_split(static_cast<int>(data.size()), k, seed);
    std::vector<double> ctds, ibss, iblls, nlls;
    json fold_summaries = json::array();

    for (int round = 0; round < k; ++round) {
        const ms::FoldRound fr = ms::fold_round(folds, round);
        const ms::Dataset train_raw = ms::subset(data, fr.train);
        const ms::Dataset val_raw = ms::subset(data, fr.validation);
        const ms::Dataset test_raw = ms::subset(data, fr.test);
        const ms::Preprocessing prep = ms::fit_preprocess(train_raw);
        const ms::StandardizedData train = ms::apply_preprocess(prep, train_raw);
        const ms::StandardizedData val = ms::apply_preprocess(prep, val_raw);

        const std::uint64_t round_seed = ms::derive_seed(seed, 0xC0ULL + static_cast<std::uint64_t>(round));
        const ms::SearchResult search = ms::hyper_search(grid, budget, train, val, prep, round_seed, workers);
        const ms::TrialResult& best = search.trials[static_cast<std::size_t>(search.best_index)];
        note_universality(best.hyper.to_config(train.p));

        const ms::MetricsReport metrics = ms::evaluate_model(search.best_model, test_raw);

        const std::string tag = std::to_string(round);
        const std::string model_path = out_dir + "/model_fold" + tag + ".json";
        const std::string test_path = out_dir + "/test_fold" + tag + ".csv";
        const std::string report_path = out_dir + "/report_fold" + tag + ".json";
        ms::save_model(search.best_model, model_path);
        ms::save_csv(test_raw, test_path);

        json fold_doc;
        fold_doc["fold"] = round;
        fold_doc["seed"] = round_seed;
        fold_doc["metrics"] = ms::metrics_to_json(metrics);
        fold_doc["selected"] = ms::hyper_params_to_json(best.hyper);
        fold_doc["selected_trial"] = search.best_index;
        fold_doc["train_report"] = ms::train_report_to_json(search.best_report);
        fold_doc["trials"] = summarize_trials(search);
        ms::write_text_atomic(report_path, fold_doc.dump(2) + "\n");

        manifest.outputs.push_back(model_path);
        manifest.outputs.push_back(test_path);
        manifest.outputs.push_back(report_path);

        if (metrics.c_td.has_value()) ctds.push_back(*metrics.c_td);
        ibss.push_back(metrics.ibs);
        iblls.push_back(metrics.ibll);
        nlls.push_back(metrics.test_nll);
        json summary_entry = ms::metrics_to_json(metrics);
        summary_entry["fold"] = round;
        fold_summaries.push_back(std::move(summary_entry));
        std::cout << "fold " << round << ": c_td "
                  << (metrics.c_td ? std::to_string(*metrics.c_td) : std::string("n/a")) << ", ibs "
                  << metrics.ibs << ", ibll " << metrics.ibll << ", test_nll " << metrics.test_nll << "\n";
    }

    json summary;
    summary["folds"] = fold_summaries;
    const MeanSd c = mean_sd(ctds), b = mean_sd(ibss), l = mean_sd(iblls), t = mean_sd(nlls);
    summary["mean"] = {{"c_td", c.mean}, {"ibs", b.mean}, {"ibll", l.mean}, {"test_nll", t.mean}};
    summary["sd"] = {{"c_td", c.sd}, {"ibs", b.sd}, {"ibll", l.sd}, {"test_nll", t.sd}};
    summary["c_td_defined_folds"] = c.n;
    const std::string summary_path = out_dir + "/summary.json";
    ms::write_text_atomic(summary_path, summary.dump(2) + "\n");
    manifest.outputs.push_back(summary_path);
    manifest.write(out_dir + "/manifest.json");
    std::cout << "summary: c_td " << c.mean << " +- " << c.sd << ", ibs " << b.mean << " +- " << b.sd
              << ", ibll " << l.mean << " +- " << l.sd << "\n";
    return 0;
}

int run_evaluate(const std::string& model_path, const std::string& data_path, int grid_size,
                 const std::string& out_report, const std::string& duration_col,
                 const std::string& event_col, const std::string& ctd_ties,
                 const std::string& ipcw_event_eval) {
    Manifest manifest;
    manifest.command = "evaluate";
    manifest.flags = {{"model", model_path}, {"data", data_path},           {"grid-size", grid_size},
                      {"out-report", out_report}, {"duration-col", duration_col}, {"event-col", event_col},
                      {"ctd-ties", ctd_ties}, {"ipcw-event-eval", ipcw_event_eval}};
    manifest.inputs = {model_path, data_path};

    ms::EvaluateOptions options;
    options.grid_size = grid_size;
    if (ctd_ties == "strict") {
        options.tie_rule = ms::TieRule::Strict;
    } else if (ctd_ties == "half") {
        options.tie_rule = ms::TieRule::HalfCredit;
    } else {
        throw ms::UsageError("--ctd-ties must be 'strict' or 'half', got '" + ctd_ties + "'");
    }
    if (ipcw_event_eval == "left") {
        options.censor_eval = ms::CensorEval::LeftLimit;
    } else if (ipcw_event_eval == "at") {
        options.censor_eval = ms::CensorEval::At;
    } else {
        throw ms::UsageError("--ipcw-event-eval must be 'left' or 'at', got '" + ipcw_event_eval + "'");
    }

    const ms::Model model = ms::load_model(model_path);
    const ms::Dataset test = ms::load_csv(data_path, duration_col, event_col);
    const ms::MetricsReport metrics = ms::evaluate_model(model, test, options);
    ms::write_text_atomic(out_report, ms::metrics_to_json(metrics).dump(2) + "\n");
    manifest.outputs = {out_report};
    manifest.write(out_report + ".manifest.json");
    std::cout << "c_td " << (metrics.c_td ? std::to_string(*metrics.c_td) : std::string("n/a")) << ", ibs "
              << metrics.ibs << ", ibll " << metrics.ibll << ", test_nll " << metrics.test_nll << "\n";
    return 0;
}

int run_predict(const std::string& model_path, const std::string& x_spec, const std::string& times_spec,
                const std::string& out) {
    Manifest manifest;
    manifest.command = "predict";
    manifest.flags = {{"model", model_path}, {"x", x_spec}, {"times", times_spec}, {"out", out}};
    manifest.inputs = {model_path};

    const ms::Model model = ms::load_model(model_path);
    const std::vector<double> x = parse_comma_list(x_spec);
    const std::vector<double> grid = parse_time_grid(times_spec);
    const std::vector<double> survival = ms::predict_curve(model, x, grid);

    std::ostringstream csv;
    csv << "time,survival\n";
    char buf[40];
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", grid[i]);
        csv << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", survival[i]);
        csv << buf << '\n';
    }
    ms::write_text_atomic(out, csv.str());
    manifest.outputs = {out};
    manifest.write(out + ".manifest.json");
    std::cout << "wrote " << grid.size() << " curve points to " << out << "\n";
    return 0;
}

int run_bench(const std::string& model_path, const std::string& data_path, int reps,
              const std::string& out, const std::string& duration_col, const std::string& event_col) {
    Manifest manifest;
    manifest.command = "bench";
    manifest.flags = {{"model", model_path}, {"data", data_path}, {"reps", reps}, {"out", out},
                      {"duration-col", duration_col}, {"event-col", event_col}};
    manifest.inputs = {model_path, data_path};

    if (reps < 1) {
        throw ms::UsageError("--reps must be at least 1");
    }
    const ms::Model model = ms::load_model(model_path);
    const ms::Dataset data = ms::load_csv(data_path, duration_col, event_col);
    const long long queries = static_cast<long long>(data.size()) * reps;
    constexpr int kIntegrationPoints = 1000;

    ms::Workspace ws;
    std::vector<double> direct(data.size(), 0.0);

    // (a) one forward pass per query
    Stopwatch direct_watch;
    double checksum = 0.0;
    for (int r = 0; r < reps; ++r) {
        for (std::size_t i = 0; i < data.size(); ++i) {
            const auto& rec = data.records[i];
            direct[i] = ms::predict_survival(model, rec.covariates, rec.duration, ws);
            checksum += direct[i];
        }
    }
    const double direct_seconds = direct_watch.seconds();

    // (b) trapezoid integration of the hazard rate, one forward per node
    Stopwatch integration_watch;
    double max_gap = 0.0;
    for (int r = 0; r < reps; ++r) {
        for (std::size_t i = 0; i < data.size(); ++i) {
            const auto& rec = data.records[i];
            const double t = rec.duration;
            const double step = t / kIntegrationPoints;
            double cumhaz = 0.0;
            for (int kq = 0; kq <= kIntegrationPoints; ++kq) {
                const double rate = ms::predict_head(model, rec.covariates, step * kq, ws).hazard_rate;
                cumhaz += rate * ((kq == 0 || kq == kIntegrationPoints) ? 0.5 : 1.0);
            }
            cumhaz *= step;
            const double integrated = std::exp(-cumhaz);
            checksum += integrated;
            max_gap = std::max(max_gap, std::abs(integrated - direct[i]));
        }
    }
    const double integration_seconds = integration_watch.seconds();
    const double speedup = integration_seconds / std::max(direct_seconds, 1e-12);

    json doc;
    doc["queries"] = queries;
    doc["integration_points"] = kIntegrationPoints;
    doc["direct_seconds"] = direct_seconds;
    doc["integration_seconds"] = integration_seconds;
    doc["speedup"] = speedup;
    doc["max_abs_survival_gap"] = max_gap;
    doc["checksum"] = checksum;
    std::cout << "direct " << direct_seconds << " s, integration " << integration_seconds
              << " s for " << queries << " queries: speedup " << speedup << "x (max survival gap "
              << max_gap << ")\n";
    if (!out.empty()) {
        ms::write_text_atomic(out, doc.dump(2) + "\n");
        manifest.outputs = {out};
        manifest.write(out + ".manifest.json");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Survival regression with partially monotonic networks"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Write a synthetic right-censored toy dataset as CSV");
    std::string sim_kind, sim_out;
    int sim_n = 1000;
    std::uint64_t sim_seed = 0;
    simulate->add_option("--kind", sim_kind, "weibull, normal or checkerboard")->required();
    simulate->add_option("--n", sim_n, "number of records")->required();
    simulate->add_option("--seed", sim_seed, "RNG seed")->required();
    simulate->add_option("--out", sim_out, "output CSV path")->required();

    // train
    auto* train = app.add_subcommand("train", "Train one model on a train/validation split");
    std::string tr_data, tr_val, tr_config, tr_head, tr_out, tr_dur = "duration", tr_ev = "event";
    std::uint64_t tr_seed = 0;
    train->add_option("--data", tr_data, "training CSV")->required();
    train->add_option("--val", tr_val, "validation CSV")->required();
    train->add_option("--config", tr_config, "JSON training configuration");
    train->add_option("--head", tr_head, "survival or hazard (overrides config)");
    train->add_option("--seed", tr_seed, "RNG seed")->required();
    train->add_option("--out-model", tr_out, "output model path")->required();
    train->add_option("--duration-col", tr_dur, "duration column name");
    train->add_option("--event-col", tr_ev, "event column name");

    // cv
    auto* cv = app.add_subcommand("cv", "5-fold cross-validated random hyperparameter search");
    std::string cv_data, cv_grid = "small", cv_dir, cv_head, cv_dur = "duration", cv_ev = "event";
    int cv_budget = 30, cv_workers = 1;
    std::uint64_t cv_seed = 0;
    cv->add_option("--data", cv_data, "input CSV")->required();
    cv->add_option("--grid", cv_grid, "small, large, or a JSON grid file");
    cv->add_option("--budget", cv_budget, "search trials per fold");
    cv->add_option("--seed", cv_seed, "RNG seed")->required();
    cv->add_option("--out-dir", cv_dir, "output directory")->required();
    cv->add_option("--head", cv_head, "restrict the search to one head");
    cv->add_option("--duration-col", cv_dur, "duration column name");
    cv->add_option("--event-col", cv_ev, "event column name");
    cv->add_option("--workers", cv_workers, "trial worker threads");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Compute survival metrics of a model on a dataset");
    std::string ev_model, ev_data, ev_out, ev_dur = "duration", ev_ev = "event";
    std::string ev_ties = "strict", ev_ipcw = "left";
    int ev_grid = 100;
    evaluate->add_option("--model", ev_model, "model JSON")->required();
    evaluate->add_option("--data", ev_data, "test CSV")->required();
    evaluate->add_option("--grid-size", ev_grid, "metric time-grid size");
    evaluate->add_option("--out-report", ev_out, "output report path")->required();
    evaluate->add_option("--duration-col", ev_dur, "duration column name");
    evaluate->add_option("--event-col", ev_ev, "event column name");
    evaluate->add_option("--ctd-ties", ev_ties, "concordance tie credit: strict or half");
    evaluate->add_option("--ipcw-event-eval", ev_ipcw, "censoring curve at event times: left or at");

    // predict
    auto* predict = app.add_subcommand("predict", "Write a survival curve for one covariate vector");
    std::string pr_model, pr_x, pr_times, pr_out;
    predict->add_option("--model", pr_model, "model JSON")->required();
    predict->add_option("--x", pr_x, "comma-separated covariates in original units")->required();
    predict->add_option("--times", pr_times, "time grid start:stop:count")->required();
    predict->add_option("--out", pr_out, "output CSV path")->required();

    // bench
    auto* bench = app.add_subcommand("bench", "Time single-pass prediction against hazard integration");
    std::string be_model, be_data, be_out = "bench_report.json", be_dur = "duration", be_ev = "event";
    int be_reps = 1;
    bench->add_option("--model", be_model, "model JSON")->required();
    bench->add_option("--data", be_data, "query CSV (uses each row's covariates and duration)")->required();
    bench->add_option("--reps", be_reps, "repetitions over the query set");
    bench->add_option("--out", be_out, "JSON report path");
    bench->add_option("--duration-col", be_dur, "duration column name");
    bench->add_option("--event-col", be_ev, "event column name");

    try {
        app.parse(argc, argv);
        if (simulate->parsed()) return run_simulate(sim_kind, sim_n, sim_seed, sim_out);
        if (train->parsed()) return run_train(tr_data, tr_val, tr_config, tr_head, tr_seed, tr_out, tr_dur, tr_ev);
        if (cv->parsed()) {
            return run_cv(cv_data, cv_grid, cv_budget, cv_seed, cv_dir, cv_head, cv_dur, cv_ev, cv_workers);
        }
        if (evaluate->parsed()) {
            return run_evaluate(ev_model, ev_data, ev_grid, ev_out, ev_dur, ev_ev, ev_ties, ev_ipcw);
        }
        if (predict->parsed()) return run_predict(pr_model, pr_x, pr_times, pr_out);
        if (bench->parsed()) return run_bench(be_model, be_data, be_reps, be_out, be_dur, be_ev);
        return 2;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help / --version
            return app.exit(e);
        }
        std::cerr << "error: usage: " << e.what() << "\n";
        return 2;
    } catch (const ms::UsageError& e) {
        std::cerr << "error: usage: " << e.what() << "\n";
        return 2;
    } catch (const ms::TrainingError& e) {
        std::string what = e.what();
        for (char& c : what) {
            if (c == '\n') c = ' ';
        }
        std::cerr << "error: training: " << what << "\n";
        return 4;
    } catch (const std::exception& e) {  // data, parse, config, input errors
        std::cerr << "error: data: " << e.what() << "\n";
        return 3;
    }
}
